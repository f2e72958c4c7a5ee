//! Binary relations over identified carrier sets.
//!
//! A [`Relation`] is the universal preference object: weak preference,
//! strict preference, indifference, importance between attribute subsets and
//! comparisons against norms are all relations. The algorithms here work on a
//! dense index matrix built from the carrier order, so every result is
//! deterministic with respect to that order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default carrier size above which exact preorder repair is refused.
pub const DEFAULT_EXACT_CAP: usize = 8;

/// Opaque element token, unique within a carrier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ElementId(String);

impl ElementId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::MalformedRelation("empty element id".into()));
        }
        Ok(ElementId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ElementId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        ElementId::new(s)
    }
}

impl From<ElementId> for String {
    fn from(id: ElementId) -> String {
        id.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Convenience for tests and fixtures; panics on an empty token.
pub fn eid(s: &str) -> ElementId {
    ElementId::new(s).expect("element ids must be non-empty")
}

/// Builds a list of ids from string slices.
pub fn eids(items: &[&str]) -> Vec<ElementId> {
    items.iter().map(|s| eid(s)).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    /// Comparisons between elements of the carrier.
    #[default]
    Relative,
    /// Comparisons between carrier elements and a declared norm set.
    Absolute,
    /// Importance comparisons between attribute subsets.
    SecondOrder,
}

#[derive(Serialize, Deserialize)]
struct RelationRepr {
    #[serde(default)]
    kind: RelationKind,
    carrier: Vec<ElementId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    norms: Vec<ElementId>,
    pairs: Vec<(ElementId, ElementId)>,
}

/// A crisp binary relation.
///
/// Pairs are kept in a sorted set, so equality is structural and
/// serialization is canonical.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RelationRepr", into = "RelationRepr")]
pub struct Relation {
    kind: RelationKind,
    carrier: Vec<ElementId>,
    norms: Vec<ElementId>,
    pairs: BTreeSet<(ElementId, ElementId)>,
}

impl TryFrom<RelationRepr> for Relation {
    type Error = Error;
    fn try_from(r: RelationRepr) -> Result<Self> {
        Relation::build(r.kind, r.carrier, r.norms, r.pairs)
    }
}

impl From<Relation> for RelationRepr {
    fn from(r: Relation) -> Self {
        RelationRepr {
            kind: r.kind,
            carrier: r.carrier,
            norms: r.norms,
            pairs: r.pairs.into_iter().collect(),
        }
    }
}

impl Relation {
    fn build(
        kind: RelationKind,
        carrier: Vec<ElementId>,
        norms: Vec<ElementId>,
        pairs: impl IntoIterator<Item = (ElementId, ElementId)>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in carrier.iter().chain(norms.iter()) {
            if !seen.insert(e.clone()) {
                return Err(Error::MalformedRelation(format!("duplicate element `{e}`")));
            }
        }
        if kind != RelationKind::Absolute && !norms.is_empty() {
            return Err(Error::MalformedRelation(
                "only absolute relations may declare norms".into(),
            ));
        }
        let in_carrier: BTreeSet<&ElementId> = carrier.iter().collect();
        let in_norms: BTreeSet<&ElementId> = norms.iter().collect();
        let mut set = BTreeSet::new();
        for (x, y) in pairs {
            let ok = match kind {
                RelationKind::Relative | RelationKind::SecondOrder => {
                    in_carrier.contains(&x) && in_carrier.contains(&y)
                }
                RelationKind::Absolute => {
                    (in_carrier.contains(&x) && in_norms.contains(&y))
                        || (in_norms.contains(&x) && in_carrier.contains(&y))
                        || (in_carrier.contains(&x) && in_carrier.contains(&y))
                }
            };
            if !ok {
                return Err(Error::MalformedRelation(format!(
                    "pair ({x}, {y}) has an endpoint outside the carrier"
                )));
            }
            set.insert((x, y));
        }
        Ok(Relation { kind, carrier, norms, pairs: set })
    }

    /// A relative relation exactly as given.
    pub fn new(
        carrier: Vec<ElementId>,
        pairs: impl IntoIterator<Item = (ElementId, ElementId)>,
    ) -> Result<Self> {
        Relation::build(RelationKind::Relative, carrier, Vec::new(), pairs)
    }

    /// A relation read as "at least as good as": reflexive closure is applied.
    pub fn weak_preference(
        carrier: Vec<ElementId>,
        pairs: impl IntoIterator<Item = (ElementId, ElementId)>,
    ) -> Result<Self> {
        Ok(Relation::new(carrier, pairs)?.reflexive_closure())
    }

    pub fn absolute(
        carrier: Vec<ElementId>,
        norms: Vec<ElementId>,
        pairs: impl IntoIterator<Item = (ElementId, ElementId)>,
    ) -> Result<Self> {
        Relation::build(RelationKind::Absolute, carrier, norms, pairs)
    }

    pub fn second_order(
        carrier: Vec<ElementId>,
        pairs: impl IntoIterator<Item = (ElementId, ElementId)>,
    ) -> Result<Self> {
        Relation::build(RelationKind::SecondOrder, carrier, Vec::new(), pairs)
    }

    pub fn empty(carrier: Vec<ElementId>) -> Result<Self> {
        Relation::new(carrier, std::iter::empty())
    }

    /// Parses `"a b c"` style carriers and `"a>b"` style pairs; test helper.
    pub fn from_strs(carrier: &[&str], pairs: &[(&str, &str)]) -> Result<Self> {
        Relation::new(eids(carrier), pairs.iter().map(|(x, y)| (eid(x), eid(y))))
    }

    /// Weak order given as levels, best level first.
    pub fn from_levels(carrier: Vec<ElementId>, levels: &[Vec<ElementId>]) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, upper) in levels.iter().enumerate() {
            for lower in &levels[i..] {
                for x in upper {
                    for y in lower {
                        pairs.push((x.clone(), y.clone()));
                    }
                }
            }
        }
        let placed: usize = levels.iter().map(Vec::len).sum();
        if placed != carrier.len() {
            return Err(Error::MalformedRelation(
                "levels must place every carrier element exactly once".into(),
            ));
        }
        Relation::new(carrier, pairs)
    }

    /// Linear order, best first.
    pub fn linear_order(order: &[ElementId]) -> Result<Self> {
        let levels: Vec<Vec<ElementId>> = order.iter().map(|e| vec![e.clone()]).collect();
        Relation::from_levels(order.to_vec(), &levels)
    }

    /// Weak order from a dense rank vector over the carrier (rank 0 is best).
    pub fn from_ranks(carrier: Vec<ElementId>, ranks: &[usize]) -> Result<Self> {
        if ranks.len() != carrier.len() {
            return Err(Error::MalformedRelation("rank vector length mismatch".into()));
        }
        let mut pairs = Vec::new();
        for (i, x) in carrier.iter().enumerate() {
            for (j, y) in carrier.iter().enumerate() {
                if ranks[i] <= ranks[j] {
                    pairs.push((x.clone(), y.clone()));
                }
            }
        }
        Relation::new(carrier, pairs)
    }

    pub fn kind(&self) -> RelationKind {
        self.kind
    }

    pub fn carrier(&self) -> &[ElementId] {
        &self.carrier
    }

    pub fn norms(&self) -> &[ElementId] {
        &self.norms
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(ElementId, ElementId)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, x: &ElementId, y: &ElementId) -> bool {
        self.pairs.contains(&(x.clone(), y.clone()))
    }

    pub fn index_of(&self, x: &ElementId) -> Option<usize> {
        self.carrier.iter().position(|e| e == x)
    }

    pub fn with_pair(mut self, x: ElementId, y: ElementId) -> Result<Self> {
        self.pairs.insert((x, y));
        Relation::build(self.kind, self.carrier, self.norms, self.pairs)
    }

    pub fn without_pair(mut self, x: &ElementId, y: &ElementId) -> Self {
        self.pairs.remove(&(x.clone(), y.clone()));
        self
    }

    pub fn reflexive_closure(mut self) -> Self {
        for e in &self.carrier {
            self.pairs.insert((e.clone(), e.clone()));
        }
        self
    }

    pub fn reversed(&self) -> Self {
        Relation {
            kind: self.kind,
            carrier: self.carrier.clone(),
            norms: self.norms.clone(),
            pairs: self.pairs.iter().map(|(x, y)| (y.clone(), x.clone())).collect(),
        }
    }

    /// Restriction to a subset of the carrier; carrier order is preserved.
    pub fn restrict(&self, keep: &BTreeSet<ElementId>) -> Self {
        Relation {
            kind: self.kind,
            carrier: self.carrier.iter().filter(|e| keep.contains(*e)).cloned().collect(),
            norms: self.norms.clone(),
            pairs: self
                .pairs
                .iter()
                .filter(|(x, y)| {
                    (keep.contains(x) || self.norms.contains(x))
                        && (keep.contains(y) || self.norms.contains(y))
                })
                .cloned()
                .collect(),
        }
    }

    /// Same relation on a permuted carrier; fails if the sets differ.
    pub fn with_carrier_order(&self, carrier: &[ElementId]) -> Result<Self> {
        let a: BTreeSet<&ElementId> = self.carrier.iter().collect();
        let b: BTreeSet<&ElementId> = carrier.iter().collect();
        if a != b || carrier.len() != self.carrier.len() {
            return Err(Error::CarrierMismatch("carriers differ as sets".into()));
        }
        Ok(Relation { carrier: carrier.to_vec(), ..self.clone() })
    }

    pub fn same_carrier_set(&self, other: &Relation) -> bool {
        let a: BTreeSet<&ElementId> = self.carrier.iter().collect();
        let b: BTreeSet<&ElementId> = other.carrier.iter().collect();
        a == b
    }

    /// Number of ordered pairs present in exactly one of the two relations.
    pub fn symmetric_difference(&self, other: &Relation) -> usize {
        self.pairs.symmetric_difference(&other.pairs).count()
    }

    pub(crate) fn require_homogeneous(&self, op: &str) -> Result<()> {
        if self.kind == RelationKind::Absolute {
            return Err(Error::MalformedRelation(format!(
                "{op} requires a relation between carrier elements, got an absolute relation"
            )));
        }
        Ok(())
    }

    pub(crate) fn matrix(&self) -> Matrix {
        let index: HashMap<&ElementId, usize> =
            self.carrier.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let n = self.carrier.len();
        let mut m = Matrix::new(n);
        for (x, y) in &self.pairs {
            if let (Some(&i), Some(&j)) = (index.get(x), index.get(y)) {
                m.set(i, j, true);
            }
        }
        m
    }

    pub(crate) fn from_matrix(like: &Relation, m: &Matrix) -> Relation {
        let mut pairs = BTreeSet::new();
        for i in 0..m.n {
            for j in 0..m.n {
                if m.get(i, j) {
                    pairs.insert((like.carrier[i].clone(), like.carrier[j].clone()));
                }
            }
        }
        Relation {
            kind: like.kind,
            carrier: like.carrier.clone(),
            norms: Vec::new(),
            pairs,
        }
    }

    /// Dense rank vector (0 = best) when the relation is a total preorder.
    pub fn ranks(&self) -> Option<Vec<usize>> {
        let props = check_properties(self).ok()?;
        if !props.total_preorder {
            return None;
        }
        let m = self.matrix();
        let n = m.n;
        // Rank = number of distinct strictly-better classes above.
        let better = |i: usize| (0..n).filter(|&j| m.get(j, i) && !m.get(i, j)).count();
        let mut raw: Vec<usize> = (0..n).map(better).collect();
        let mut distinct: Vec<usize> = raw.clone();
        distinct.sort_unstable();
        distinct.dedup();
        for r in raw.iter_mut() {
            *r = distinct.binary_search(r).expect("present");
        }
        Some(raw)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self.pairs.iter().map(|(x, y)| format!("({x},{y})")).collect();
        write!(f, "{{{}}}", pairs.join(","))
    }
}

/// Square boolean matrix over carrier indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Matrix {
    pub n: usize,
    bits: Vec<bool>,
}

impl Matrix {
    pub fn new(n: usize) -> Self {
        Matrix { n, bits: vec![false; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.n + j] = v;
    }
}

/// The four-way split of a relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceStructure {
    /// Reflexive closure of the input.
    pub weak: Relation,
    pub strict: Relation,
    pub indifference: Relation,
    /// Unordered pairs (first element earlier in carrier order) in neither direction.
    pub incomparable: Vec<(ElementId, ElementId)>,
}

pub fn decompose(r: &Relation) -> Result<PreferenceStructure> {
    r.require_homogeneous("decompose")?;
    // Split the weak relation itself, so that weak = strict + indifference.
    let weak = r.clone().reflexive_closure();
    let m = weak.matrix();
    let n = m.n;
    let mut strict = Matrix::new(n);
    let mut indiff = Matrix::new(n);
    let mut incomparable = Vec::new();
    for i in 0..n {
        for j in 0..n {
            match (m.get(i, j), m.get(j, i)) {
                (true, false) => strict.set(i, j, true),
                (true, true) => indiff.set(i, j, true),
                (false, false) if i < j => {
                    incomparable.push((r.carrier[i].clone(), r.carrier[j].clone()))
                }
                _ => {}
            }
        }
    }
    Ok(PreferenceStructure {
        strict: Relation::from_matrix(r, &strict),
        indifference: Relation::from_matrix(r, &indiff),
        weak,
        incomparable,
    })
}

pub fn transitive_closure(r: &Relation) -> Result<Relation> {
    r.require_homogeneous("transitive_closure")?;
    let mut m = r.matrix();
    let n = m.n;
    for k in 0..n {
        for i in 0..n {
            if m.get(i, k) {
                for j in 0..n {
                    if m.get(k, j) {
                        m.set(i, j, true);
                    }
                }
            }
        }
    }
    Ok(Relation::from_matrix(r, &m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub reflexive: bool,
    pub antisymmetric: bool,
    pub transitive: bool,
    /// Every two distinct elements are comparable.
    pub complete: bool,
    pub partial_order: bool,
    pub total_preorder: bool,
}

pub fn check_properties(r: &Relation) -> Result<PropertyReport> {
    r.require_homogeneous("check_properties")?;
    let m = r.matrix();
    let n = m.n;
    let reflexive = (0..n).all(|i| m.get(i, i));
    let mut antisymmetric = true;
    let mut complete = true;
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (m.get(i, j), m.get(j, i));
            antisymmetric &= !(a && b);
            complete &= a || b;
        }
    }
    let mut transitive = true;
    'outer: for i in 0..n {
        for k in 0..n {
            if !m.get(i, k) {
                continue;
            }
            for j in 0..n {
                if m.get(k, j) && !m.get(i, j) {
                    transitive = false;
                    break 'outer;
                }
            }
        }
    }
    Ok(PropertyReport {
        reflexive,
        antisymmetric,
        transitive,
        complete,
        partial_order: reflexive && antisymmetric && transitive,
        total_preorder: reflexive && transitive && complete,
    })
}

/// How [`nearest_total_preorder`] searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RepairMode {
    /// Global minimum over all total preorders; refused above `cap` elements.
    Exact { cap: usize },
    /// Copeland scores: rank by strict wins minus strict losses.
    Heuristic,
    /// Exact up to `cap` elements, heuristic beyond.
    Auto { cap: usize },
}

impl RepairMode {
    pub fn exact() -> Self {
        RepairMode::Exact { cap: DEFAULT_EXACT_CAP }
    }
}

impl Default for RepairMode {
    fn default() -> Self {
        RepairMode::Auto { cap: DEFAULT_EXACT_CAP }
    }
}

/// Total preorder closest to `r` (reflexively closed) in symmetric-difference
/// distance.
///
/// Exact ties are broken by the lexicographically smallest rank vector read
/// in carrier order, with rank 0 the best level.
pub fn nearest_total_preorder(r: &Relation, mode: RepairMode) -> Result<Relation> {
    r.require_homogeneous("nearest_total_preorder")?;
    let closed = r.clone().reflexive_closure();
    let n = closed.carrier.len();
    let exact = match mode {
        RepairMode::Exact { cap } => {
            if n > cap {
                return Err(Error::CapExceeded { what: "carrier".into(), size: n, cap });
            }
            true
        }
        RepairMode::Heuristic => false,
        RepairMode::Auto { cap } => n <= cap,
    };
    let ranks = if exact { exact_repair(&closed.matrix()) } else { copeland_ranks(&closed.matrix()) };
    let mut out = Relation::from_ranks(closed.carrier.clone(), &ranks)?;
    out.kind = r.kind;
    Ok(out)
}

fn copeland_ranks(m: &Matrix) -> Vec<usize> {
    let n = m.n;
    let score: Vec<i64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (m.get(i, j), m.get(j, i)) {
                    (true, false) => 1,
                    (false, true) => -1,
                    _ => 0,
                })
                .sum()
        })
        .collect();
    let mut distinct = score.clone();
    distinct.sort_unstable_by(|a, b| b.cmp(a));
    distinct.dedup();
    score
        .iter()
        .map(|s| distinct.iter().position(|d| d == s).expect("present"))
        .collect()
}

/// Branch and bound over ordered set partitions, built by inserting carrier
/// elements one at a time into an existing level or a new level.
fn exact_repair(m: &Matrix) -> Vec<usize> {
    let n = m.n;
    if n == 0 {
        return Vec::new();
    }
    // Pairs with neither direction present cost at least 1 whatever we do.
    let mut future_floor = vec![0usize; n + 1];
    for b in (0..n).rev() {
        let here = (0..b).filter(|&a| !m.get(a, b) && !m.get(b, a)).count();
        future_floor[b] = future_floor[b + 1] + here;
    }
    let mut search = Repair {
        m,
        levels: Vec::new(),
        best_cost: usize::MAX,
        best_ranks: Vec::new(),
        future_floor,
    };
    search.place(0, 0);
    search.best_ranks
}

struct Repair<'a> {
    m: &'a Matrix,
    levels: Vec<Vec<usize>>,
    best_cost: usize,
    best_ranks: Vec<usize>,
    future_floor: Vec<usize>,
}

impl Repair<'_> {
    fn cost_against_placed(&self, e: usize, level: usize, fresh: bool) -> usize {
        let mut cost = 0;
        for (li, members) in self.levels.iter().enumerate() {
            // Position of an existing level relative to the new element.
            let ord = if fresh {
                if li < level { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater }
            } else {
                li.cmp(&level)
            };
            for &o in members {
                let (want_oe, want_eo) = match ord {
                    std::cmp::Ordering::Less => (true, false),
                    std::cmp::Ordering::Equal => (true, true),
                    std::cmp::Ordering::Greater => (false, true),
                };
                cost += usize::from(self.m.get(o, e) != want_oe);
                cost += usize::from(self.m.get(e, o) != want_eo);
            }
        }
        cost
    }

    fn place(&mut self, e: usize, cost: usize) {
        let n = self.m.n;
        if cost + self.future_floor[e] > self.best_cost {
            return;
        }
        if e == n {
            let ranks = self.current_ranks();
            if cost < self.best_cost || (cost == self.best_cost && ranks < self.best_ranks) {
                self.best_cost = cost;
                self.best_ranks = ranks;
            }
            return;
        }
        for level in 0..self.levels.len() {
            let c = self.cost_against_placed(e, level, false);
            self.levels[level].push(e);
            self.place(e + 1, cost + c);
            self.levels[level].pop();
        }
        for gap in 0..=self.levels.len() {
            let c = self.cost_against_placed(e, gap, true);
            self.levels.insert(gap, vec![e]);
            self.place(e + 1, cost + c);
            self.levels.remove(gap);
        }
    }

    fn current_ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.m.n];
        for (li, members) in self.levels.iter().enumerate() {
            for &e in members {
                ranks[e] = li;
            }
        }
        ranks
    }
}

fn strict_cycle_witness(m: &Matrix) -> Option<usize> {
    let n = m.n;
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    fn visit(v: usize, m: &Matrix, state: &mut [u8]) -> Option<usize> {
        state[v] = 1;
        for w in 0..m.n {
            if m.get(v, w) && !m.get(w, v) {
                match state[w] {
                    1 => return Some(w),
                    0 => {
                        if let Some(c) = visit(w, m, state) {
                            return Some(c);
                        }
                    }
                    _ => {}
                }
            }
        }
        state[v] = 2;
        None
    }
    (0..n).find_map(|v| if state[v] == 0 { visit(v, m, &mut state) } else { None })
}

/// Elements with nothing strictly above them, in carrier order.
pub fn maximal_elements(r: &Relation) -> Result<Vec<ElementId>> {
    r.require_homogeneous("maximal_elements")?;
    let m = r.matrix();
    if let Some(v) = strict_cycle_witness(&m) {
        return Err(Error::CyclicStrictPart(r.carrier[v].to_string()));
    }
    let n = m.n;
    Ok((0..n)
        .filter(|&i| !(0..n).any(|j| m.get(j, i) && !m.get(i, j)))
        .map(|i| r.carrier[i].clone())
        .collect())
}

/// Repeatedly peels off the maximal elements of what remains.
pub fn levels_partition(r: &Relation) -> Result<Partition> {
    r.require_homogeneous("levels_partition")?;
    let mut remaining: BTreeSet<ElementId> = r.carrier.iter().cloned().collect();
    let mut classes = Vec::new();
    while !remaining.is_empty() {
        let top = maximal_elements(&r.restrict(&remaining))?;
        for e in &top {
            remaining.remove(e);
        }
        classes.push(top);
    }
    Ok(Partition::ordered(classes))
}

/// Classes over a carrier, optionally ordered best-first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub classes: Vec<Vec<ElementId>>,
    /// Optional class names (rating levels, assignment categories).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    /// When true, class `i` is at least as good as class `j` iff `i <= j`.
    pub ordered: bool,
}

impl Partition {
    pub fn ordered(classes: Vec<Vec<ElementId>>) -> Self {
        Partition { classes, labels: Vec::new(), ordered: true }
    }

    pub fn unordered(classes: Vec<Vec<ElementId>>) -> Self {
        Partition { classes, labels: Vec::new(), ordered: false }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = labels;
        self
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, e: &ElementId) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(e))
    }

    pub fn elements(&self) -> impl Iterator<Item = &ElementId> {
        self.classes.iter().flatten()
    }

    /// The order between classes as a relation over class indices.
    pub fn class_order(&self) -> Relation {
        let ids: Vec<ElementId> = (0..self.classes.len()).map(|i| eid(&i.to_string())).collect();
        let pairs = if self.ordered {
            let mut v = Vec::new();
            for i in 0..ids.len() {
                for j in i..ids.len() {
                    v.push((ids[i].clone(), ids[j].clone()));
                }
            }
            v
        } else {
            Vec::new()
        };
        Relation::new(ids, pairs).expect("class indices are a valid carrier")
    }

    /// Classes non-empty, pairwise disjoint, and covering exactly `carrier`.
    pub fn validate(&self, carrier: &[ElementId]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (i, class) in self.classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::MalformedRelation(format!("class {i} is empty")));
            }
            for e in class {
                if !seen.insert(e.clone()) {
                    return Err(Error::MalformedRelation(format!("`{e}` appears in two classes")));
                }
            }
        }
        let want: BTreeSet<ElementId> = carrier.iter().cloned().collect();
        if seen != want {
            return Err(Error::MalformedRelation("classes do not cover the carrier".into()));
        }
        if !self.labels.is_empty() && self.labels.len() != self.classes.len() {
            return Err(Error::MalformedRelation("label count differs from class count".into()));
        }
        Ok(())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.ordered { " > " } else { " | " };
        let parts: Vec<String> = self
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let body: Vec<&str> = c.iter().map(ElementId::as_str).collect();
                match self.labels.get(i) {
                    Some(l) => format!("{l}: {{{}}}", body.join(", ")),
                    None => format!("{{{}}}", body.join(", ")),
                }
            })
            .collect();
        f.write_str(&parts.join(sep))
    }
}
