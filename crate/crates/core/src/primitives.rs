//! Client preference statements and the primitive information compiled from them.
//!
//! Only first-order relative and absolute comparisons become primitives.
//! Importance statements between attribute subsets and preference-intensity
//! statements are derivable: they are parked as constraints and checked
//! against what [`derive_importance`] and [`derive_value_function`] construct
//! from first-order data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Value;
use crate::formulation::{enumerate_alternatives, Codomain, ProblemFormulation, Scale, ENUMERATION_CAP};
use crate::relation::{decompose, eid, ElementId, Relation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "ref", rename_all = "snake_case")]
pub enum Operand {
    Element(ElementId),
    Norm(String),
    Set(Vec<ElementId>),
    Pair(ElementId, ElementId),
    Attributes(Vec<String>),
    /// A point of the values space, attribute by attribute.
    Profile(BTreeMap<String, Value>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementRelation {
    /// At least as good as.
    #[default]
    Weak,
    Strict,
    Indifferent,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    #[default]
    Positive,
    /// An explicit denial, not the complement of a positive statement.
    ExplicitNegative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceKind {
    FirstOrderRelative,
    FirstOrderAbsolute,
    Extended,
    Intensity,
    MultiAttribute,
    SecondOrder,
}

impl fmt::Display for PreferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PreferenceKind::FirstOrderRelative => "first_order_relative",
            PreferenceKind::FirstOrderAbsolute => "first_order_absolute",
            PreferenceKind::Extended => "extended",
            PreferenceKind::Intensity => "intensity",
            PreferenceKind::MultiAttribute => "multi_attribute",
            PreferenceKind::SecondOrder => "second_order",
        })
    }
}

/// One structured client utterance: `left <relation> right` on `dimensions`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceStatement {
    pub left: Operand,
    pub right: Operand,
    #[serde(default)]
    pub relation: StatementRelation,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dimensions: Vec<String>,
    #[serde(default)]
    pub polarity: Polarity,
}

impl PreferenceStatement {
    pub fn new(left: Operand, right: Operand, dimensions: &[&str]) -> Self {
        PreferenceStatement {
            left,
            right,
            relation: StatementRelation::Weak,
            dimensions: dimensions.iter().map(|s| s.to_string()).collect(),
            polarity: Polarity::Positive,
        }
    }

    /// `x ⪰_dim y`.
    pub fn weak(x: &str, y: &str, dim: &str) -> Self {
        PreferenceStatement::new(Operand::Element(eid(x)), Operand::Element(eid(y)), &[dim])
    }

    pub fn negated(mut self) -> Self {
        self.polarity = Polarity::ExplicitNegative;
        self
    }

    pub fn with_relation(mut self, r: StatementRelation) -> Self {
        self.relation = r;
        self
    }

    /// `H ≫ G` between attribute subsets.
    pub fn importance(h: &[&str], g: &[&str]) -> Self {
        let attrs = |s: &[&str]| Operand::Attributes(s.iter().map(|x| x.to_string()).collect());
        PreferenceStatement::new(attrs(h), attrs(g), &[]).with_relation(StatementRelation::Strict)
    }
}

/// Names a statement may refer to.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub elements: BTreeSet<ElementId>,
    pub norms: BTreeSet<String>,
    pub attributes: BTreeSet<String>,
}

impl Vocabulary {
    pub fn from_formulation(f: &ProblemFormulation) -> Result<Self> {
        let enumeration = enumerate_alternatives(&f.alternatives, ENUMERATION_CAP as usize)?;
        Ok(Vocabulary {
            elements: enumeration.alternatives.iter().map(|a| a.id()).collect(),
            norms: f
                .statement
                .norms
                .iter()
                .flat_map(|n| n.norms.iter().map(|x| x.name.clone()))
                .collect(),
            attributes: f.attributes.iter().map(|a| a.name.clone()).collect(),
        })
    }

    fn check(&self, op: &Operand) -> Result<()> {
        let element = |e: &ElementId| {
            if self.elements.contains(e) {
                Ok(())
            } else {
                Err(Error::UnknownReference(format!("element `{e}`")))
            }
        };
        let attribute = |a: &String| {
            if self.attributes.contains(a) {
                Ok(())
            } else {
                Err(Error::UnknownReference(format!("attribute `{a}`")))
            }
        };
        match op {
            Operand::Element(e) => element(e),
            Operand::Norm(n) if self.norms.contains(n) => Ok(()),
            Operand::Norm(n) => Err(Error::UnknownReference(format!("norm `{n}`"))),
            Operand::Set(s) => s.iter().try_for_each(element),
            Operand::Pair(a, b) => element(a).and(element(b)),
            Operand::Attributes(s) => s.iter().try_for_each(attribute),
            Operand::Profile(p) => p.keys().try_for_each(attribute),
        }
    }
}

/// Assigns the statement its place in the taxonomy from the operand shapes.
pub fn classify_preference_statement(
    stmt: &PreferenceStatement,
    vocab: &Vocabulary,
) -> Result<PreferenceKind> {
    vocab.check(&stmt.left)?;
    vocab.check(&stmt.right)?;
    for d in &stmt.dimensions {
        if !vocab.attributes.contains(d) {
            return Err(Error::UnknownReference(format!("attribute `{d}`")));
        }
    }
    use Operand::*;
    Ok(match (&stmt.left, &stmt.right) {
        (Element(_), Element(_)) if stmt.dimensions.len() >= 2 => PreferenceKind::MultiAttribute,
        (Element(_), Element(_)) => PreferenceKind::FirstOrderRelative,
        (Element(_), Norm(_)) | (Norm(_), Element(_)) => PreferenceKind::FirstOrderAbsolute,
        (Set(_), Set(_)) => PreferenceKind::Extended,
        (Pair(..), Pair(..)) => PreferenceKind::Intensity,
        (Profile(_), Profile(_)) => PreferenceKind::MultiAttribute,
        (Attributes(_), Attributes(_)) => PreferenceKind::SecondOrder,
        (l, r) => {
            return Err(Error::InvalidArgument(format!(
                "operands {l:?} and {r:?} do not form a known statement shape"
            )))
        }
    })
}

/// Piecewise-linear value function on a numeric codomain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction1D {
    /// `(level, value)` knots sorted by level.
    pub knots: Vec<(f64, f64)>,
}

impl ValueFunction1D {
    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if k.len() == 1 || x <= k[0].0 {
            return k[0].1;
        }
        if x >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|&(lvl, _)| lvl <= x);
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        if x1 == x0 {
            return y1;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// A derivable statement kept aside for consistency checking.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParkedConstraint {
    pub index: usize,
    pub kind: PreferenceKind,
    pub statement: PreferenceStatement,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub parked: Vec<ParkedConstraint>,
}

/// Primitive information over a fixed carrier of alternatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveBase {
    pub carrier: Vec<ElementId>,
    /// One weak preference relation per attribute.
    pub per_dimension: BTreeMap<String, Relation>,
    /// Comparisons against norms, per attribute.
    #[serde(default)]
    pub absolute: BTreeMap<String, Relation>,
    /// Ordered norm names per attribute, lowest standard first.
    #[serde(default)]
    pub norms: BTreeMap<String, Vec<ElementId>>,
    /// Joint preference relations keyed by the sorted attribute subset.
    #[serde(default)]
    pub multi_attribute: BTreeMap<String, Relation>,
    /// Ordinal coordinates of each alternative, per attribute.
    #[serde(default)]
    pub profiles: BTreeMap<ElementId, BTreeMap<String, f64>>,
    /// Importance between attributes, always derived.
    pub derived_importance: Relation,
    #[serde(default)]
    pub derived_values: BTreeMap<String, ValueFunction1D>,
    /// Explicitly denied pairs per attribute.
    #[serde(default)]
    pub negative_assertions: BTreeMap<String, BTreeSet<(ElementId, ElementId)>>,
    #[serde(default)]
    pub parked: Vec<ParkedConstraint>,
}

pub fn subset_key(attrs: &[impl AsRef<str>]) -> String {
    let set: BTreeSet<&str> = attrs.iter().map(|a| a.as_ref()).collect();
    set.into_iter().collect::<Vec<_>>().join(",")
}

impl PrimitiveBase {
    pub fn new(carrier: Vec<ElementId>) -> Self {
        PrimitiveBase {
            carrier,
            per_dimension: BTreeMap::new(),
            absolute: BTreeMap::new(),
            norms: BTreeMap::new(),
            multi_attribute: BTreeMap::new(),
            profiles: BTreeMap::new(),
            derived_importance: Relation::second_order(Vec::new(), []).expect("empty"),
            derived_values: BTreeMap::new(),
            negative_assertions: BTreeMap::new(),
            parked: Vec::new(),
        }
    }

    pub fn with_dimension(mut self, attr: &str, r: Relation) -> Self {
        self.per_dimension.insert(attr.to_string(), r);
        self
    }

    pub fn with_joint(mut self, attrs: &[&str], r: Relation) -> Self {
        self.multi_attribute.insert(subset_key(attrs), r);
        self
    }

    pub fn with_profile(mut self, e: ElementId, coords: &[(&str, f64)]) -> Self {
        self.profiles
            .insert(e, coords.iter().map(|(k, v)| (k.to_string(), *v)).collect());
        self
    }

    /// Preference on an attribute subset: per-dimension data for singletons,
    /// joint data otherwise.
    pub fn preference_over(&self, attrs: &[String]) -> Result<&Relation> {
        let key = subset_key(attrs);
        if let Some(r) = self.multi_attribute.get(&key) {
            return Ok(r);
        }
        if attrs.len() == 1 {
            if let Some(r) = self.per_dimension.get(&attrs[0]) {
                return Ok(r);
            }
        }
        Err(Error::UnknownReference(format!("no preference data on {{{key}}}")))
    }

    fn profile_on(&self, e: &ElementId, attrs: &[String]) -> Option<Vec<u64>> {
        let p = self.profiles.get(e)?;
        attrs
            .iter()
            .map(|a| p.get(a).map(|v| if *v == 0.0 { 0 } else { v.to_bits() }))
            .collect()
    }

    /// Attributes that appear in any profile, sorted.
    pub fn profiled_attributes(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.profiles.values().flat_map(|p| p.keys()).collect();
        set.into_iter().cloned().collect()
    }

    /// Fills `derived_importance` with every pairwise verdict between single
    /// attributes that has joint data.
    pub fn derive_importance_order(&mut self) -> Result<()> {
        let attrs: Vec<String> = self.per_dimension.keys().cloned().collect();
        let mut pairs = Vec::new();
        for (i, h) in attrs.iter().enumerate() {
            for g in &attrs[i + 1..] {
                let joint = [h.clone(), g.clone()];
                if self.preference_over(&joint).is_err() {
                    continue;
                }
                match derive_importance(self, std::slice::from_ref(h), std::slice::from_ref(g)) {
                    Ok(d) => match d.verdict {
                        ImportanceOrder::Dominates => pairs.push((eid(h), eid(g))),
                        ImportanceOrder::Dominated => pairs.push((eid(g), eid(h))),
                        ImportanceOrder::Incomparable => {}
                    },
                    Err(Error::DependentDimensions(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        self.derived_importance =
            Relation::second_order(attrs.iter().map(|a| eid(a)).collect(), pairs)?;
        Ok(())
    }

    /// Attributes from most to least important when the derived importance
    /// is a strict total order.
    pub fn total_importance_order(&self) -> Option<Vec<String>> {
        let r = &self.derived_importance;
        let n = r.carrier().len();
        if n == 0 {
            return None;
        }
        let d = decompose(r).ok()?;
        let mut ranked: Vec<(usize, &ElementId)> = r
            .carrier()
            .iter()
            .map(|a| (r.carrier().iter().filter(|b| d.strict.contains(a, b)).count(), a))
            .collect();
        ranked.sort_by_key(|x| std::cmp::Reverse(x.0));
        let wins: BTreeSet<usize> = ranked.iter().map(|x| x.0).collect();
        // Strict total order over n items has win counts n-1, ..., 0.
        if wins.len() != n || ranked.first()?.0 != n - 1 {
            return None;
        }
        Some(ranked.into_iter().map(|(_, a)| a.to_string()).collect())
    }
}

/// Compiles first-order statements into a primitive base.
pub fn compile_primitive_base(
    statements: &[PreferenceStatement],
    f: &ProblemFormulation,
) -> Result<(PrimitiveBase, RejectionReport)> {
    let vocab = Vocabulary::from_formulation(f)?;
    let enumeration = enumerate_alternatives(&f.alternatives, ENUMERATION_CAP as usize)?;
    let carrier: Vec<ElementId> = enumeration.alternatives.iter().map(|a| a.id()).collect();
    let mut base = PrimitiveBase::new(carrier.clone());
    for a in &f.attributes {
        base.per_dimension
            .insert(a.name.clone(), Relation::weak_preference(carrier.clone(), [])?);
    }
    for alt in &enumeration.alternatives {
        let mut coords = BTreeMap::new();
        for a in &f.attributes {
            if a.scale == Scale::Nominal {
                if let (Codomain::Labels { values }, Ok(Value::Label(l))) =
                    (&a.codomain, a.evaluate(alt, &Default::default()))
                {
                    // Nominal codes identify levels; they are never compared for order.
                    if let Some(i) = values.iter().position(|v| *v == l) {
                        coords.insert(a.name.clone(), i as f64);
                    }
                }
                continue;
            }
            if let Ok(v) = a.evaluate(alt, &Default::default()) {
                if let Ok(s) = a.ordinal_score(&v) {
                    coords.insert(a.name.clone(), s);
                }
            }
        }
        if !coords.is_empty() {
            base.profiles.insert(alt.id(), coords);
        }
    }
    let norm_ids: Vec<ElementId> = f
        .statement
        .norms
        .iter()
        .flat_map(|n| n.norms.iter().map(|x| eid(&x.name)))
        .collect();

    let mut report = RejectionReport::default();
    let mut positive: BTreeMap<String, BTreeSet<(ElementId, ElementId)>> = BTreeMap::new();
    for (index, stmt) in statements.iter().enumerate() {
        let kind = classify_preference_statement(stmt, &vocab)?;
        let park = |reason: &str, report: &mut RejectionReport| {
            report.parked.push(ParkedConstraint {
                index,
                kind,
                statement: stmt.clone(),
                reason: reason.to_string(),
            })
        };
        match kind {
            PreferenceKind::SecondOrder => {
                park("not a primitive: importance is derivable from first-order comparisons", &mut report);
                continue;
            }
            PreferenceKind::Intensity => {
                park("not a primitive: intensity is derivable through indifference swaps", &mut report);
                continue;
            }
            PreferenceKind::Extended => {
                park("set-level comparison kept as a constraint", &mut report);
                continue;
            }
            PreferenceKind::MultiAttribute if matches!(stmt.left, Operand::Profile(_)) => {
                park("comparison of value profiles kept as a constraint", &mut report);
                continue;
            }
            _ => {}
        }
        let (x, y) = match (&stmt.left, &stmt.right) {
            (Operand::Element(x), Operand::Element(y)) => (x.clone(), y.clone()),
            (Operand::Element(x), Operand::Norm(n)) => (x.clone(), eid(n)),
            (Operand::Norm(n), Operand::Element(y)) => (eid(n), y.clone()),
            _ => unreachable!("shapes fixed by classification"),
        };
        let dims: Vec<String> = if stmt.dimensions.is_empty() && f.attributes.len() == 1 {
            vec![f.attributes[0].name.clone()]
        } else {
            stmt.dimensions.clone()
        };
        if dims.is_empty() {
            return Err(Error::InvalidArgument(format!("statement {index} names no dimension")));
        }
        let key = subset_key(&dims);
        let mut new_pairs = vec![(x.clone(), y.clone())];
        match stmt.relation {
            StatementRelation::Weak | StatementRelation::Strict => {}
            StatementRelation::Indifferent => new_pairs.push((y.clone(), x.clone())),
        }
        if stmt.polarity == Polarity::ExplicitNegative {
            if stmt.relation != StatementRelation::Weak {
                return Err(Error::InvalidArgument(
                    "explicit negatives deny a weak preference".into(),
                ));
            }
            base.negative_assertions.entry(key).or_default().insert((x, y));
            continue;
        }
        positive.entry(key.clone()).or_default().extend(new_pairs.iter().cloned());
        match kind {
            PreferenceKind::FirstOrderAbsolute => {
                let rel = match base.absolute.remove(&key) {
                    Some(r) => r,
                    None => Relation::absolute(carrier.clone(), norm_ids.clone(), [])?,
                };
                let mut rel = rel;
                for (a, b) in new_pairs {
                    rel = rel.with_pair(a, b)?;
                }
                base.absolute.insert(key.clone(), rel);
                base.norms.entry(key).or_insert_with(|| norm_ids.clone());
            }
            PreferenceKind::FirstOrderRelative => {
                let mut rel = base.per_dimension.remove(&key).expect("initialized per attribute");
                for (a, b) in new_pairs {
                    rel = rel.with_pair(a, b)?;
                }
                base.per_dimension.insert(key, rel);
            }
            PreferenceKind::MultiAttribute => {
                let rel = match base.multi_attribute.remove(&key) {
                    Some(r) => r,
                    None => Relation::weak_preference(carrier.clone(), [])?,
                };
                let mut rel = rel;
                for (a, b) in new_pairs {
                    rel = rel.with_pair(a, b)?;
                }
                base.multi_attribute.insert(key, rel);
            }
            _ => unreachable!(),
        }
    }
    for (key, denied) in &base.negative_assertions {
        if let Some(asserted) = positive.get(key) {
            if let Some((x, y)) = denied.intersection(asserted).next() {
                return Err(Error::InconsistentStatements(format!(
                    "({x}, {y}) on {{{key}}} is both asserted and explicitly denied"
                )));
            }
        }
    }
    base.parked = report.parked.clone();
    Ok((base, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceOrder {
    /// The first subset is more important.
    Dominates,
    /// The second subset is more important.
    Dominated,
    Incomparable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceDerivation {
    pub verdict: ImportanceOrder,
    /// `(x, y)` with `x ⪰_winner y`, `y ≻_loser x` and `x ≻_joint y`.
    pub witness: Option<(ElementId, ElementId)>,
    pub notes: Vec<String>,
}

fn importance_witness(
    winner: &Relation,
    loser_strict: &Relation,
    joint_strict: &Relation,
) -> Option<(ElementId, ElementId)> {
    for x in winner.carrier() {
        for y in winner.carrier() {
            if x != y
                && winner.contains(x, y)
                && loser_strict.contains(y, x)
                && joint_strict.contains(x, y)
            {
                return Some((x.clone(), y.clone()));
            }
        }
    }
    None
}

/// Derives importance between two disjoint attribute subsets from a
/// trade-off witness: an alternative weakly better on `h`, strictly worse on
/// `g`, and strictly better overall.
pub fn derive_importance(
    base: &PrimitiveBase,
    h: &[String],
    g: &[String],
) -> Result<ImportanceDerivation> {
    let mut notes = Vec::new();
    match check_preferential_independence(base, h, g)? {
        Independence::Dependent { counterexample } => {
            return Err(Error::DependentDimensions(format!(
                "preference on {{{}}} changes with the level of {{{}}}: {}",
                subset_key(h),
                subset_key(g),
                counterexample.describe()
            )))
        }
        Independence::Inconclusive(why) => notes.push(format!("independence not established: {why}")),
        Independence::Independent => {}
    }
    let on_h = base.preference_over(h)?;
    let on_g = base.preference_over(g)?;
    let union: Vec<String> = h.iter().chain(g).cloned().collect();
    let joint = base.preference_over(&union)?;
    let strict_h = decompose(on_h)?.strict;
    let strict_g = decompose(on_g)?.strict;
    let strict_joint = decompose(joint)?.strict;
    let forward = importance_witness(on_h, &strict_g, &strict_joint);
    let backward = importance_witness(on_g, &strict_h, &strict_joint);
    let (verdict, witness) = match (forward, backward) {
        (Some(w), None) => (ImportanceOrder::Dominates, Some(w)),
        (None, Some(w)) => (ImportanceOrder::Dominated, Some(w)),
        (None, None) => (ImportanceOrder::Incomparable, None),
        (Some(a), Some(b)) => {
            return Err(Error::ConflictingImportance(format!(
                "witness ({}, {}) favours {{{}}} and ({}, {}) favours {{{}}}",
                a.0,
                a.1,
                subset_key(h),
                b.0,
                b.1,
                subset_key(g)
            )))
        }
    };
    Ok(ImportanceDerivation { verdict, witness, notes })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    /// A pair compared at one level of the conditioning attributes...
    pub first: (ElementId, ElementId),
    pub first_holds: bool,
    /// ...and a pair with the same coordinates on the tested attributes at another level.
    pub second: (ElementId, ElementId),
    pub second_holds: bool,
}

impl Counterexample {
    fn describe(&self) -> String {
        format!(
            "({},{}) {} but ({},{}) {}",
            self.first.0,
            self.first.1,
            if self.first_holds { "holds" } else { "fails" },
            self.second.0,
            self.second.1,
            if self.second_holds { "holds" } else { "fails" }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Independence {
    Independent,
    Dependent { counterexample: Counterexample },
    Inconclusive(String),
}

/// Observational independence of the preference on `h` from the level of `g`.
///
/// Compares the joint preference over `h ∪ g` on pairs that agree on `g`
/// and differ on `h`, across every observed `g` level.
pub fn check_preferential_independence(
    base: &PrimitiveBase,
    h: &[String],
    g: &[String],
) -> Result<Independence> {
    let union: Vec<String> = h.iter().chain(g).cloned().collect();
    let joint = base.preference_over(&union)?;
    type Key = (Vec<u64>, Vec<u64>);
    type Verdicts = BTreeMap<Vec<u64>, (bool, (ElementId, ElementId))>;
    // (h-coordinates of x, of y) -> g-level -> (verdict, witness pair)
    let mut seen: BTreeMap<Key, Verdicts> = BTreeMap::new();
    let mut levels = BTreeSet::new();
    for x in joint.carrier() {
        for y in joint.carrier() {
            if x == y {
                continue;
            }
            let (Some(gx), Some(gy), Some(hx), Some(hy)) = (
                base.profile_on(x, g),
                base.profile_on(y, g),
                base.profile_on(x, h),
                base.profile_on(y, h),
            ) else {
                continue;
            };
            if gx != gy || hx == hy {
                continue;
            }
            levels.insert(gx.clone());
            let holds = joint.contains(x, y);
            let by_level = seen.entry((hx, hy)).or_default();
            for (lvl, (other, pair)) in by_level.iter() {
                if *lvl != gx && *other != holds {
                    return Ok(Independence::Dependent {
                        counterexample: Counterexample {
                            first: pair.clone(),
                            first_holds: *other,
                            second: (x.clone(), y.clone()),
                            second_holds: holds,
                        },
                    });
                }
            }
            by_level.entry(gx).or_insert((holds, (x.clone(), y.clone())));
        }
    }
    if levels.len() < 2 {
        return Ok(Independence::Inconclusive(format!(
            "pairs varying on {{{}}} observed at {} level(s) of {{{}}}",
            subset_key(h),
            levels.len(),
            subset_key(g)
        )));
    }
    if !seen.values().any(|m| m.len() >= 2) {
        return Ok(Independence::Inconclusive(
            "no comparison repeated across two levels".into(),
        ));
    }
    Ok(Independence::Independent)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Separability {
    Separable { witness: (ElementId, ElementId) },
    NotSeparable,
    Inconclusive(String),
}

/// Whether the attribute alone ever discriminates two otherwise-identical
/// alternatives under the overall preference.
pub fn check_separability(attr: &str, base: &PrimitiveBase) -> Result<Separability> {
    let all = base.profiled_attributes();
    if !all.iter().any(|a| a == attr) {
        return Err(Error::UnknownReference(format!("attribute `{attr}` has no observations")));
    }
    let overall = base.preference_over(&all).or_else(|_| base.preference_over(&[attr.to_string()]))?;
    let others: Vec<String> = all.iter().filter(|a| *a != attr).cloned().collect();
    let target = [attr.to_string()];
    let strict = decompose(overall)?.strict;
    let mut twins = 0usize;
    for x in overall.carrier() {
        for y in overall.carrier() {
            if x >= y {
                continue;
            }
            let (Some(ox), Some(oy), Some(ax), Some(ay)) = (
                base.profile_on(x, &others),
                base.profile_on(y, &others),
                base.profile_on(x, &target),
                base.profile_on(y, &target),
            ) else {
                continue;
            };
            if ox != oy || ax == ay {
                continue;
            }
            twins += 1;
            if strict.contains(x, y) {
                return Ok(Separability::Separable { witness: (x.clone(), y.clone()) });
            }
            if strict.contains(y, x) {
                return Ok(Separability::Separable { witness: (y.clone(), x.clone()) });
            }
        }
    }
    if twins == 0 {
        Ok(Separability::Inconclusive(format!(
            "no pair differs on `{attr}` alone"
        )))
    } else {
        Ok(Separability::NotSeparable)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapAnswer {
    /// The swap on the elicited attribute is worth less than the reference step.
    Weaker,
    Equal,
    Stronger,
}

/// "Is the swap `from -> to` on `attribute` compensated by the reference
/// step `reference_from -> reference_to`?"
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapQuery {
    pub attribute: String,
    pub from: f64,
    pub to: f64,
    pub reference_attribute: String,
    pub reference_from: f64,
    pub reference_to: f64,
}

impl SwapQuery {
    /// Canonical transcript key.
    pub fn key(&self) -> String {
        format!(
            "{}:{:?}->{:?}|{}:{:?}->{:?}",
            self.attribute, self.from, self.to, self.reference_attribute, self.reference_from, self.reference_to
        )
    }
}

pub trait SwapOracle {
    fn compare(&mut self, q: &SwapQuery) -> Result<SwapAnswer>;
}

impl<F: FnMut(&SwapQuery) -> Result<SwapAnswer>> SwapOracle for F {
    fn compare(&mut self, q: &SwapQuery) -> Result<SwapAnswer> {
        self(q)
    }
}

/// Question-key to answer table, loadable from a transcript file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SwapTranscript {
    pub answers: BTreeMap<String, SwapAnswer>,
}

/// Answers only from a recorded table.
#[derive(Clone, Debug)]
pub struct ScriptedSwapOracle {
    pub transcript: SwapTranscript,
}

impl SwapOracle for ScriptedSwapOracle {
    fn compare(&mut self, q: &SwapQuery) -> Result<SwapAnswer> {
        self.transcript
            .answers
            .get(&q.key())
            .copied()
            .ok_or_else(|| Error::IncompleteElicitation(format!("no recorded answer for {}", q.key())))
    }
}

/// Records every answer verbatim; a repeated question gets the recorded answer.
pub struct RecordingOracle<O> {
    inner: O,
    pub transcript: SwapTranscript,
}

impl<O: SwapOracle> RecordingOracle<O> {
    pub fn new(inner: O) -> Self {
        RecordingOracle { inner, transcript: SwapTranscript::default() }
    }
}

impl<O: SwapOracle> SwapOracle for RecordingOracle<O> {
    fn compare(&mut self, q: &SwapQuery) -> Result<SwapAnswer> {
        let key = q.key();
        if let Some(a) = self.transcript.answers.get(&key) {
            return Ok(*a);
        }
        let a = self.inner.compare(q)?;
        self.transcript.answers.insert(key, a);
        Ok(a)
    }
}

/// The reference attribute whose steps measure swaps on the elicited one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapProtocol {
    pub reference_attribute: String,
    pub reference_lo: f64,
    pub reference_hi: f64,
    /// Bisection stops once the bracket is this narrow, relative to the range.
    pub tolerance: f64,
}

impl SwapProtocol {
    pub fn new(reference_attribute: &str, lo: f64, hi: f64) -> Self {
        SwapProtocol {
            reference_attribute: reference_attribute.to_string(),
            reference_lo: lo,
            reference_hi: hi,
            tolerance: 1e-12,
        }
    }
}

enum Sequence {
    Reached(Vec<f64>),
    StepTooLarge,
    StepTooSmall(Vec<f64>),
}

struct SwapSession<'a, O: SwapOracle> {
    oracle: &'a mut O,
    attr: &'a str,
    protocol: &'a SwapProtocol,
    // from -> (to, reference_to, answer) seen so far
    history: BTreeMap<u64, Vec<(f64, f64, SwapAnswer)>>,
}

impl<O: SwapOracle> SwapSession<'_, O> {
    fn ask(&mut self, from: f64, to: f64, reference_to: f64) -> Result<SwapAnswer> {
        let q = SwapQuery {
            attribute: self.attr.to_string(),
            from,
            to,
            reference_attribute: self.protocol.reference_attribute.clone(),
            reference_from: self.protocol.reference_lo,
            reference_to,
        };
        let answer = self.oracle.compare(&q)?;
        let seen = self.history.entry(from.to_bits()).or_default();
        for &(t, r, a) in seen.iter() {
            // A longer swap against a shorter reference step is never worth less.
            let dominates = |t1: f64, r1: f64, a1: SwapAnswer, t2: f64, r2: f64, a2: SwapAnswer| {
                t1 >= t2 && r1 <= r2 && a1 < a2
            };
            if dominates(t, r, a, to, reference_to, answer) || dominates(to, reference_to, answer, t, r, a) {
                return Err(Error::IntransitiveSwaps(format!(
                    "from {from}: swap to {t} against {r} answered {a:?} \
                     but swap to {to} against {reference_to} answered {answer:?}"
                )));
            }
        }
        seen.push((to, reference_to, answer));
        Ok(answer)
    }

    /// Standard sequence of `steps` equal-value swaps starting at `lo`.
    fn sequence(&mut self, lo: f64, hi: f64, steps: usize, reference_to: f64) -> Result<Sequence> {
        let tol = self.protocol.tolerance * (hi - lo).abs().max(1.0);
        let mut points = vec![lo];
        let mut x = lo;
        for k in 1..=steps {
            match self.ask(x, hi, reference_to)? {
                SwapAnswer::Weaker => return Ok(Sequence::StepTooLarge),
                SwapAnswer::Equal => {
                    points.push(hi);
                    return Ok(if k == steps { Sequence::Reached(points) } else { Sequence::StepTooLarge });
                }
                SwapAnswer::Stronger => {}
            }
            let (mut below, mut above) = (x, hi);
            let next = loop {
                let mid = 0.5 * (below + above);
                if above - below <= tol {
                    break mid;
                }
                match self.ask(x, mid, reference_to)? {
                    SwapAnswer::Equal => break mid,
                    SwapAnswer::Weaker => below = mid,
                    SwapAnswer::Stronger => above = mid,
                }
            };
            points.push(next);
            x = next;
        }
        if hi - x <= tol {
            Ok(Sequence::Reached(points))
        } else {
            Ok(Sequence::StepTooSmall(points))
        }
    }
}

/// Builds an interval-scale value function on a numeric attribute from
/// indifference swaps against a reference attribute.
///
/// The reference step is tuned by bisection until `grid - 1` equal-value
/// swaps exactly span the codomain; the resulting knots take values
/// `0, 1, ..., grid - 1` and the function interpolates linearly between them.
pub fn derive_value_function<O: SwapOracle>(
    base: &PrimitiveBase,
    attr: &crate::formulation::Attribute,
    oracle: &mut O,
    grid: usize,
    protocol: &SwapProtocol,
) -> Result<ValueFunction1D> {
    if attr.scale == Scale::Nominal {
        return Err(Error::NotAggregable(attr.name.clone()));
    }
    let (lo, hi) = match &attr.codomain {
        Codomain::Numeric { lo, hi } => (*lo, *hi),
        Codomain::Labels { values } if values.len() == 1 => {
            return Ok(ValueFunction1D { knots: vec![(0.0, 0.0)] })
        }
        Codomain::Labels { .. } => {
            return Err(Error::InvalidArgument(format!(
                "`{}` has a discrete codomain; swaps need a numeric one",
                attr.name
            )))
        }
    };
    if lo == hi {
        return Ok(ValueFunction1D { knots: vec![(lo, 0.0)] });
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least two points".into()));
    }
    let mut session = SwapSession { oracle, attr: &attr.name, protocol, history: BTreeMap::new() };
    let steps = grid - 1;
    let (mut small, mut large) = (protocol.reference_lo, protocol.reference_hi);
    let mut best = match session.sequence(lo, hi, steps, large)? {
        Sequence::Reached(p) => Some(p),
        Sequence::StepTooSmall(_) => {
            return Err(Error::IncompleteElicitation(
                "reference range too narrow to span the codomain".into(),
            ))
        }
        Sequence::StepTooLarge => None,
    };
    let ref_tol = protocol.tolerance * (protocol.reference_hi - protocol.reference_lo).abs().max(1.0);
    let mut fallback = None;
    while best.is_none() && large - small > ref_tol {
        let mid = 0.5 * (small + large);
        match session.sequence(lo, hi, steps, mid)? {
            Sequence::Reached(p) => best = Some(p),
            Sequence::StepTooLarge => large = mid,
            Sequence::StepTooSmall(p) => {
                small = mid;
                fallback = Some(p);
            }
        }
    }
    let mut points = match (best, fallback) {
        (Some(p), _) => p,
        (None, Some(p)) => p,
        (None, None) => {
            return Err(Error::IncompleteElicitation("no reference step spans the codomain".into()))
        }
    };
    if let Some(last) = points.last_mut() {
        *last = hi;
    }
    let knots: Vec<(f64, f64)> = points.iter().enumerate().map(|(k, &x)| (x, k as f64)).collect();
    let f = ValueFunction1D { knots };
    if let Some(rel) = base.per_dimension.get(&attr.name) {
        let strict = decompose(rel)?.strict;
        for (x, y) in strict.pairs() {
            let coord = |e: &ElementId| base.profiles.get(e).and_then(|p| p.get(&attr.name)).copied();
            if let (Some(cx), Some(cy)) = (coord(x), coord(y)) {
                if f.eval(cx) < f.eval(cy) {
                    return Err(Error::InconsistentStatements(format!(
                        "elicited values contradict {x} ≻ {y} on `{}`",
                        attr.name
                    )));
                }
            }
        }
    }
    Ok(f)
}

/// Outcome of checking one parked constraint against derived information.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub index: usize,
    pub kind: PreferenceKind,
    /// `None` when no derivation is available for this kind of statement.
    pub satisfied: Option<bool>,
    pub detail: String,
}

/// Checks parked importance statements against [`derive_importance`].
pub fn check_parked_constraints(base: &PrimitiveBase) -> Result<Vec<ConstraintCheck>> {
    let mut out = Vec::new();
    for p in &base.parked {
        let check = match (&p.kind, &p.statement.left, &p.statement.right) {
            (PreferenceKind::SecondOrder, Operand::Attributes(h), Operand::Attributes(g)) => {
                match derive_importance(base, h, g) {
                    Ok(d) => ConstraintCheck {
                        index: p.index,
                        kind: p.kind,
                        satisfied: Some(d.verdict == ImportanceOrder::Dominates),
                        detail: format!("derived {:?} with witness {:?}", d.verdict, d.witness),
                    },
                    Err(e) => ConstraintCheck {
                        index: p.index,
                        kind: p.kind,
                        satisfied: None,
                        detail: e.to_string(),
                    },
                }
            }
            _ => ConstraintCheck {
                index: p.index,
                kind: p.kind,
                satisfied: None,
                detail: "no derivation for this statement kind".into(),
            },
        };
        out.push(check);
    }
    Ok(out)
}
