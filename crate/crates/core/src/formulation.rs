//! Problem formulations: alternatives, attributes and the requested partition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Value};
use crate::relation::{eid, ElementId};

/// Product spaces larger than this are streamed but not counted.
pub const ENUMERATION_CAP: u64 = 1 << 21;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Binary,
    Integer { lo: i64, hi: i64 },
    Real { lo: f64, hi: f64 },
    Labels { values: Vec<String> },
}

impl Domain {
    /// Number of values, or `None` for real intervals.
    pub fn size(&self) -> Option<u64> {
        match self {
            Domain::Binary => Some(2),
            Domain::Integer { lo, hi } => Some((hi - lo + 1) as u64),
            Domain::Real { .. } => None,
            Domain::Labels { values } => Some(values.len() as u64),
        }
    }

    pub fn value_at(&self, k: u64) -> Value {
        match self {
            Domain::Binary => Value::Num(k as f64),
            Domain::Integer { lo, .. } => Value::Num((*lo + k as i64) as f64),
            Domain::Real { .. } => unreachable!("real domains are not indexed"),
            Domain::Labels { values } => Value::Label(values[k as usize].clone()),
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Domain::Binary, Value::Num(x)) => *x == 0.0 || *x == 1.0,
            (Domain::Integer { lo, hi }, Value::Num(x)) => {
                x.fract() == 0.0 && *x >= *lo as f64 && *x <= *hi as f64
            }
            (Domain::Real { lo, hi }, Value::Num(x)) => *x >= *lo && *x <= *hi,
            (Domain::Labels { values }, Value::Label(s)) => values.contains(s),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
}

impl Variable {
    pub fn new(name: impl Into<String>, domain: Domain) -> Self {
        Variable { name: name.into(), domain }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Variable::new(name, Domain::Binary)
    }

    pub fn labels(name: impl Into<String>, values: &[&str]) -> Self {
        Variable::new(name, Domain::Labels { values: values.iter().map(|s| s.to_string()).collect() })
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::InvalidFormulation("variable with empty name".into()));
        }
        let bad = |m: &str| Err(Error::InvalidFormulation(format!("variable `{}`: {m}", self.name)));
        match &self.domain {
            Domain::Integer { lo, hi } if lo > hi => bad("empty integer range"),
            Domain::Real { lo, hi } if lo.is_nan() || hi.is_nan() || lo > hi => bad("empty real interval"),
            Domain::Labels { values } if values.is_empty() => bad("empty label list"),
            Domain::Labels { values } => {
                let distinct: BTreeSet<&String> = values.iter().collect();
                if distinct.len() != values.len() {
                    bad("duplicate labels")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// One point of the alternative space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    /// Display name; generated from the assignment when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub assignment: BTreeMap<String, Value>,
}

impl Alternative {
    pub fn new(assignment: BTreeMap<String, Value>) -> Self {
        Alternative { name: None, assignment }
    }

    pub fn named(name: impl Into<String>, assignment: BTreeMap<String, Value>) -> Self {
        Alternative { name: Some(name.into()), assignment }
    }

    pub fn get(&self, var: &str) -> Option<&Value> {
        self.assignment.get(var)
    }

    pub fn id(&self) -> ElementId {
        match &self.name {
            Some(n) => eid(n),
            None => {
                let parts: Vec<String> =
                    self.assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
                if parts.is_empty() {
                    eid("()")
                } else {
                    eid(&parts.join(";"))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl Cmp {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        const EPS: f64 = 1e-9;
        match self {
            Cmp::Le => lhs <= rhs + EPS,
            Cmp::Ge => lhs + EPS >= rhs,
            Cmp::Eq => (lhs - rhs).abs() <= EPS,
        }
    }
}

/// `sum(coef * var) <op> rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub terms: Vec<(String, f64)>,
    pub op: Cmp,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn lhs(&self, alt: &Alternative) -> Result<f64> {
        let mut total = 0.0;
        for (var, coef) in &self.terms {
            let v = alt
                .get(var)
                .and_then(Value::as_num)
                .ok_or_else(|| Error::EvaluationFailure(format!("`{var}` is not numeric")))?;
            total += coef * v;
        }
        Ok(total)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Predicate {
    Linear(LinearConstraint),
    /// Resolved through [`Hooks`] at evaluation time.
    Named { name: String },
}

type EvalHook = Arc<dyn Fn(&Alternative) -> Result<Value> + Send + Sync>;
type PredicateHook = Arc<dyn Fn(&Alternative) -> Result<bool> + Send + Sync>;

/// Extension points for evaluators and feasibility predicates that the
/// expression language cannot express.
#[derive(Clone, Default)]
pub struct Hooks {
    evaluators: BTreeMap<String, EvalHook>,
    predicates: BTreeMap<String, PredicateHook>,
}

impl fmt::Debug for Hooks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hooks")
            .field("evaluators", &self.evaluators.keys().collect::<Vec<_>>())
            .field("predicates", &self.predicates.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Hooks {
    pub fn with_evaluator(
        mut self,
        name: &str,
        f: impl Fn(&Alternative) -> Result<Value> + Send + Sync + 'static,
    ) -> Self {
        self.evaluators.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn with_predicate(
        mut self,
        name: &str,
        f: impl Fn(&Alternative) -> Result<bool> + Send + Sync + 'static,
    ) -> Self {
        self.predicates.insert(name.to_string(), Arc::new(f));
        self
    }
}

impl Predicate {
    pub fn holds(&self, alt: &Alternative, hooks: &Hooks) -> Result<bool> {
        match self {
            Predicate::Linear(c) => Ok(c.op.holds(c.lhs(alt)?, c.rhs)),
            Predicate::Named { name } => {
                let f = hooks
                    .predicates
                    .get(name)
                    .ok_or_else(|| Error::UnknownReference(format!("predicate hook `{name}`")))?;
                f(alt)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSet {
    pub variables: Vec<Variable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feasibility: Vec<Predicate>,
    /// When present, the set is exactly these members instead of the
    /// feasible part of the product space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_members: Option<Vec<Alternative>>,
}

impl AlternativeSet {
    pub fn product(variables: Vec<Variable>) -> Self {
        AlternativeSet { variables, feasibility: Vec::new(), explicit_members: None }
    }

    pub fn explicit(variables: Vec<Variable>, members: Vec<Alternative>) -> Self {
        AlternativeSet { variables, feasibility: Vec::new(), explicit_members: Some(members) }
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn validate(&self, hooks: &Hooks) -> Result<()> {
        let mut names = BTreeSet::new();
        for v in &self.variables {
            v.validate()?;
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidFormulation(format!("duplicate variable `{}`", v.name)));
            }
        }
        for p in &self.feasibility {
            if let Predicate::Linear(c) = p {
                for (var, _) in &c.terms {
                    let v = self.variable(var).ok_or_else(|| {
                        Error::InvalidFormulation(format!("constraint reads unknown variable `{var}`"))
                    })?;
                    if matches!(v.domain, Domain::Labels { .. }) {
                        return Err(Error::InvalidFormulation(format!(
                            "linear constraint over label variable `{var}`"
                        )));
                    }
                }
            }
        }
        if let Some(members) = &self.explicit_members {
            let mut ids = BTreeSet::new();
            for m in members {
                self.check_member(m)?;
                if !self.is_feasible(m, hooks)? {
                    return Err(Error::InvalidFormulation(format!(
                        "explicit member `{}` violates a feasibility predicate",
                        m.id()
                    )));
                }
                if !ids.insert(m.id()) {
                    return Err(Error::InvalidFormulation(format!("duplicate member `{}`", m.id())));
                }
            }
        }
        Ok(())
    }

    fn check_member(&self, m: &Alternative) -> Result<()> {
        if m.assignment.len() != self.variables.len() {
            return Err(Error::InvalidFormulation(format!(
                "member `{}` must assign every variable exactly once",
                m.id()
            )));
        }
        for v in &self.variables {
            match m.get(&v.name) {
                Some(val) if v.domain.contains(val) => {}
                _ => {
                    return Err(Error::InvalidFormulation(format!(
                        "member `{}` has no in-domain value for `{}`",
                        m.id(),
                        v.name
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, alt: &Alternative, hooks: &Hooks) -> Result<bool> {
        for p in &self.feasibility {
            if !p.holds(alt, hooks)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Size of the unconstrained product space, saturating.
    pub fn product_size(&self) -> Option<u64> {
        self.variables
            .iter()
            .try_fold(1u64, |acc, v| v.domain.size().map(|s| acc.saturating_mul(s)))
    }

    /// Streams feasible alternatives in lexicographic order of domain index,
    /// last variable varying fastest.
    pub fn iter<'a>(&'a self, hooks: &'a Hooks) -> Result<Box<dyn Iterator<Item = Result<Alternative>> + 'a>> {
        if let Some(members) = &self.explicit_members {
            return Ok(Box::new(members.iter().cloned().map(Ok)));
        }
        let sizes: Vec<u64> = self
            .variables
            .iter()
            .map(|v| {
                v.domain.size().ok_or_else(|| {
                    Error::NotEnumerable(format!("variable `{}` has a real domain", v.name))
                })
            })
            .collect::<Result<_>>()?;
        let odometer = Odometer::new(sizes);
        Ok(Box::new(odometer.filter_map(move |digits| {
            let alt = self.alternative_at(&digits);
            match self.is_feasible(&alt, hooks) {
                Ok(true) => Some(Ok(alt)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            }
        })))
    }

    fn alternative_at(&self, digits: &[u64]) -> Alternative {
        Alternative::new(
            self.variables
                .iter()
                .zip(digits)
                .map(|(v, &d)| (v.name.clone(), v.domain.value_at(d)))
                .collect(),
        )
    }

    /// Counts feasible points without materializing alternatives when every
    /// predicate is linear.
    fn count_feasible(&self, hooks: &Hooks) -> Result<u64> {
        let linear_only = self.feasibility.iter().all(|p| matches!(p, Predicate::Linear(_)));
        if self.feasibility.is_empty() {
            return Ok(self.product_size().unwrap_or(0));
        }
        if !linear_only {
            let mut n = 0;
            for a in self.iter(hooks)? {
                a?;
                n += 1;
            }
            return Ok(n);
        }
        let position: BTreeMap<&str, usize> =
            self.variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
        // (variable index, coefficient) terms, comparison, right-hand side.
        type Linear = (Vec<(usize, f64)>, Cmp, f64);
        let compiled: Vec<Linear> = self
            .feasibility
            .iter()
            .map(|p| match p {
                Predicate::Linear(c) => Ok((
                    c.terms
                        .iter()
                        .map(|(v, k)| {
                            position.get(v.as_str()).map(|&i| (i, *k)).ok_or_else(|| {
                                Error::InvalidFormulation(format!("unknown variable `{v}`"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                    c.op,
                    c.rhs,
                )),
                Predicate::Named { .. } => unreachable!(),
            })
            .collect::<Result<_>>()?;
        let numeric: Vec<Vec<f64>> = self
            .variables
            .iter()
            .map(|v| {
                let n = v.domain.size().unwrap_or(0);
                (0..n).map(|k| v.domain.value_at(k).as_num().unwrap_or(f64::NAN)).collect()
            })
            .collect();
        let sizes: Vec<u64> = self.variables.iter().map(|v| v.domain.size().unwrap_or(0)).collect();
        let mut count = 0;
        for digits in Odometer::new(sizes) {
            let ok = compiled.iter().all(|(terms, op, rhs)| {
                let lhs: f64 = terms.iter().map(|&(i, k)| k * numeric[i][digits[i] as usize]).sum();
                op.holds(lhs, *rhs)
            });
            count += u64::from(ok);
        }
        Ok(count)
    }
}

/// Mixed-radix counter over domain indices.
struct Odometer {
    sizes: Vec<u64>,
    current: Option<Vec<u64>>,
}

impl Odometer {
    fn new(sizes: Vec<u64>) -> Self {
        let current = if sizes.contains(&0) { None } else { Some(vec![0; sizes.len()]) };
        Odometer { sizes, current }
    }
}

impl Iterator for Odometer {
    type Item = Vec<u64>;
    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked");
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.sizes[i] {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub alternatives: Vec<Alternative>,
    /// Exact count of feasible alternatives, when the space is small enough to count.
    pub total: Option<u64>,
}

pub fn enumerate_alternatives(set: &AlternativeSet, limit: usize) -> Result<Enumeration> {
    enumerate_alternatives_with(set, limit, &Hooks::default())
}

pub fn enumerate_alternatives_with(
    set: &AlternativeSet,
    limit: usize,
    hooks: &Hooks,
) -> Result<Enumeration> {
    let alternatives = set.iter(hooks)?.take(limit).collect::<Result<Vec<_>>>()?;
    let total = match &set.explicit_members {
        Some(m) => Some(m.len() as u64),
        None => match set.product_size() {
            Some(size) if size <= ENUMERATION_CAP => Some(set.count_feasible(hooks)?),
            _ => None,
        },
    };
    Ok(Enumeration { alternatives, total })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Nominal,
    Ordinal,
    Interval,
    Ratio,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    #[default]
    Value,
    Opinion,
    Scenario,
}

/// Which end of an ordered codomain is preferred.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Increasing,
    Decreasing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Codomain {
    /// For ordered scales, listed from worst to best before `direction` applies.
    Labels { values: Vec<String> },
    Numeric { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Evaluator {
    Expr { expr: Expr },
    /// Lookup keyed by the value of one variable.
    Table { variable: String, table: BTreeMap<String, Value> },
    Hook { name: String },
    /// No evaluator: values come from pairwise elicitation.
    Elicited,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    Sum,
    Min,
    Max,
    Custom(String),
}

/// Per-variable contributions folded by `combine`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub terms: BTreeMap<String, Expr>,
    pub combine: Combine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub scale: Scale,
    pub codomain: Codomain,
    #[serde(default)]
    pub origin: Origin,
    pub separable: bool,
    #[serde(default)]
    pub direction: Direction,
    pub evaluator: Evaluator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Decomposition>,
}

impl Attribute {
    pub fn numeric(name: &str, lo: f64, hi: f64, evaluator: Evaluator) -> Self {
        Attribute {
            name: name.to_string(),
            scale: Scale::Ratio,
            codomain: Codomain::Numeric { lo, hi },
            origin: Origin::Value,
            separable: true,
            direction: Direction::Increasing,
            evaluator,
            decomposition: None,
        }
    }

    pub fn ordinal_labels(name: &str, worst_to_best: &[&str], evaluator: Evaluator) -> Self {
        Attribute {
            name: name.to_string(),
            scale: Scale::Ordinal,
            codomain: Codomain::Labels {
                values: worst_to_best.iter().map(|s| s.to_string()).collect(),
            },
            origin: Origin::Value,
            separable: true,
            direction: Direction::Increasing,
            evaluator,
            decomposition: None,
        }
    }

    pub fn with_direction(mut self, d: Direction) -> Self {
        self.direction = d;
        self
    }

    pub fn with_origin(mut self, o: Origin) -> Self {
        self.origin = o;
        self
    }

    pub fn with_separable(mut self, s: bool) -> Self {
        self.separable = s;
        self
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.codomain, Codomain::Labels { .. })
    }

    /// Order-preserving number for a codomain value: larger is better.
    pub fn ordinal_score(&self, v: &Value) -> Result<f64> {
        if self.scale == Scale::Nominal {
            return Err(Error::NotAggregable(self.name.clone()));
        }
        let raw = match (&self.codomain, v) {
            (Codomain::Labels { values }, Value::Label(l)) => values
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| {
                    Error::EvaluationFailure(format!("`{l}` is outside the codomain of `{}`", self.name))
                })? as f64,
            (Codomain::Numeric { .. }, Value::Num(x)) => *x,
            _ => {
                return Err(Error::EvaluationFailure(format!(
                    "value `{v}` does not match the codomain of `{}`",
                    self.name
                )))
            }
        };
        Ok(match self.direction {
            Direction::Increasing => raw,
            Direction::Decreasing => -raw,
        })
    }

    fn check_in_codomain(&self, v: &Value) -> Result<()> {
        let ok = match (&self.codomain, v) {
            (Codomain::Labels { values }, Value::Label(l)) => values.contains(l),
            (Codomain::Numeric { lo, hi }, Value::Num(x)) => *x >= *lo - 1e-9 && *x <= *hi + 1e-9,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::EvaluationFailure(format!(
                "`{}` produced `{v}` outside its codomain",
                self.name
            )))
        }
    }

    pub fn evaluate(&self, alt: &Alternative, hooks: &Hooks) -> Result<Value> {
        let v = match &self.evaluator {
            Evaluator::Expr { expr } => expr.eval(&alt.assignment)?,
            Evaluator::Table { variable, table } => {
                let key = alt.get(variable).ok_or_else(|| {
                    Error::EvaluationFailure(format!("`{}` reads unbound `{variable}`", self.name))
                })?;
                table.get(&key.to_string()).cloned().ok_or_else(|| {
                    Error::EvaluationFailure(format!("`{}` has no entry for `{key}`", self.name))
                })?
            }
            Evaluator::Hook { name } => {
                let f = hooks
                    .evaluators
                    .get(name)
                    .ok_or_else(|| Error::UnknownReference(format!("evaluator hook `{name}`")))?;
                f(alt)?
            }
            Evaluator::Elicited => {
                return Err(Error::EvaluationFailure(format!(
                    "`{}` is elicited pairwise and has no evaluator",
                    self.name
                )))
            }
        };
        self.check_in_codomain(&v)?;
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementKind {
    Ranking,
    Rating,
    Clustering,
    Assignment,
}

impl fmt::Display for StatementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatementKind::Ranking => "ranking",
            StatementKind::Rating => "rating",
            StatementKind::Clustering => "clustering",
            StatementKind::Assignment => "assignment",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Relative,
    Absolute,
}

pub fn classify_problem_statement(ordered_classes: bool, comparison: Comparison) -> StatementKind {
    match (ordered_classes, comparison) {
        (true, Comparison::Relative) => StatementKind::Ranking,
        (true, Comparison::Absolute) => StatementKind::Rating,
        (false, Comparison::Relative) => StatementKind::Clustering,
        (false, Comparison::Absolute) => StatementKind::Assignment,
    }
}

/// An external standard: per-attribute thresholds an alternative must reach.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Norm {
    pub name: String,
    pub thresholds: BTreeMap<String, Value>,
}

/// Norms listed from the lowest standard to the highest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSet {
    pub name: String,
    pub norms: Vec<Norm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemStatement {
    pub kind: StatementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_cardinalities: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormSet>,
}

impl ProblemStatement {
    pub fn new(kind: StatementKind) -> Self {
        ProblemStatement { kind, class_count: None, class_cardinalities: None, norms: None }
    }

    pub fn ranking() -> Self {
        ProblemStatement::new(StatementKind::Ranking)
    }

    pub fn with_class_count(mut self, k: usize) -> Self {
        self.class_count = Some(k);
        self
    }

    pub fn with_norms(mut self, norms: NormSet) -> Self {
        self.norms = Some(norms);
        self
    }

    pub fn is_choice(&self) -> bool {
        self.kind == StatementKind::Ranking && self.class_count == Some(2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFormulation {
    pub alternatives: AlternativeSet,
    pub attributes: Vec<Attribute>,
    pub statement: ProblemStatement,
}

impl ProblemFormulation {
    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Ranking into exactly two classes.
    pub choice: bool,
    pub notes: Vec<String>,
}

pub fn validate_formulation(f: &ProblemFormulation) -> Result<Diagnostics> {
    validate_formulation_with(f, &Hooks::default())
}

pub fn validate_formulation_with(f: &ProblemFormulation, hooks: &Hooks) -> Result<Diagnostics> {
    f.alternatives.validate(hooks)?;
    let mut names = BTreeSet::new();
    for a in &f.attributes {
        if !names.insert(a.name.as_str()) {
            return Err(Error::InvalidFormulation(format!("duplicate attribute `{}`", a.name)));
        }
        check_attribute_types(a, &f.alternatives)?;
    }
    if !f.attributes.iter().any(|a| a.separable) {
        return Err(Error::NoDecisionProblem);
    }
    let st = &f.statement;
    if matches!(st.kind, StatementKind::Rating | StatementKind::Assignment)
        && st.norms.as_ref().is_none_or(|n| n.norms.is_empty())
    {
        return Err(Error::MissingNorms(st.kind.to_string()));
    }
    if let Some(k) = st.class_count {
        if k < 2 {
            return Err(Error::InvalidFormulation(format!("class_count {k} is below 2")));
        }
    }
    if let Some(norms) = &st.norms {
        for n in &norms.norms {
            for attr in n.thresholds.keys() {
                if !names.contains(attr.as_str()) {
                    return Err(Error::UnknownReference(format!(
                        "norm `{}` refers to attribute `{attr}`",
                        n.name
                    )));
                }
            }
        }
    }
    let mut diag = Diagnostics::default();
    if st.is_choice() {
        diag.choice = true;
        diag.notes.push("choice: ranking into two classes (best vs rest)".into());
    }
    for a in f.attributes.iter().filter(|a| !a.separable) {
        diag.notes.push(format!("attribute `{}` is not separable and cannot discriminate", a.name));
    }
    Ok(diag)
}

fn check_attribute_types(a: &Attribute, set: &AlternativeSet) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidFormulation(format!("attribute `{}`: {m}", a.name)));
    match &a.codomain {
        Codomain::Labels { values } if values.is_empty() => return bad("empty codomain".into()),
        Codomain::Numeric { lo, hi } if lo.is_nan() || hi.is_nan() || lo > hi => return bad("empty numeric codomain".into()),
        _ => {}
    }
    match &a.evaluator {
        Evaluator::Expr { expr } => {
            for v in expr.variables() {
                if set.variable(&v).is_none() {
                    return bad(format!("evaluator reads unknown variable `{v}`"));
                }
            }
        }
        Evaluator::Table { variable, .. } => {
            if set.variable(variable).is_none() {
                return bad(format!("table keyed by unknown variable `{variable}`"));
            }
        }
        Evaluator::Hook { .. } | Evaluator::Elicited => {}
    }
    if let Some(d) = &a.decomposition {
        for (var, e) in &d.terms {
            if set.variable(var).is_none() {
                return bad(format!("decomposition term for unknown variable `{var}`"));
            }
            for v in e.variables() {
                if v != *var {
                    return bad(format!("term for `{var}` reads another variable `{v}`"));
                }
            }
        }
    }
    Ok(())
}

/// Performance vector in attribute order.
pub fn evaluate(alt: &Alternative, attributes: &[Attribute]) -> Result<Vec<Value>> {
    evaluate_with(alt, attributes, &Hooks::default())
}

pub fn evaluate_with(alt: &Alternative, attributes: &[Attribute], hooks: &Hooks) -> Result<Vec<Value>> {
    attributes.iter().map(|a| a.evaluate(alt, hooks)).collect()
}

/// Applies the attribute's aggregation function over per-variable terms.
pub fn evaluate_decomposed(alt: &Alternative, attr: &Attribute) -> Result<Value> {
    evaluate_decomposed_with(alt, attr, &BTreeMap::new())
}

pub fn evaluate_decomposed_with(
    alt: &Alternative,
    attr: &Attribute,
    custom: &BTreeMap<String, fn(&[f64]) -> f64>,
) -> Result<Value> {
    let d = attr
        .decomposition
        .as_ref()
        .ok_or_else(|| Error::NoDecomposition(attr.name.clone()))?;
    if attr.scale == Scale::Nominal && matches!(d.combine, Combine::Sum | Combine::Min | Combine::Max)
    {
        return Err(Error::NotAggregable(attr.name.clone()));
    }
    let parts: Vec<f64> = d
        .terms
        .iter()
        .map(|(var, e)| {
            let v = alt
                .get(var)
                .ok_or_else(|| Error::EvaluationFailure(format!("`{var}` is unassigned")))?;
            let env = BTreeMap::from([(var.clone(), v.clone())]);
            e.eval(&env)?
                .as_num()
                .ok_or_else(|| Error::EvaluationFailure(format!("term for `{var}` is not numeric")))
        })
        .collect::<Result<_>>()?;
    let empty = || Error::EvaluationFailure(format!("`{}` has no terms to combine", attr.name));
    let out = match &d.combine {
        Combine::Sum => parts.iter().sum(),
        Combine::Min => parts.iter().copied().reduce(f64::min).ok_or_else(empty)?,
        Combine::Max => parts.iter().copied().reduce(f64::max).ok_or_else(empty)?,
        Combine::Custom(name) => {
            let f = custom
                .get(name)
                .ok_or_else(|| Error::UnknownReference(format!("aggregation function `{name}`")))?;
            f(&parts)
        }
    };
    Ok(Value::Num(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knapsack() -> (AlternativeSet, Attribute) {
        let set = AlternativeSet::product(vec![Variable::binary("x1"), Variable::binary("x2")]);
        let weight = Attribute {
            decomposition: Some(Decomposition {
                terms: BTreeMap::from([
                    ("x1".to_string(), Expr::parse("3 * x1").unwrap()),
                    ("x2".to_string(), Expr::parse("5 * x2").unwrap()),
                ]),
                combine: Combine::Sum,
            }),
            ..Attribute::numeric(
                "weight",
                0.0,
                8.0,
                Evaluator::Expr { expr: Expr::parse("3 * x1 + 5 * x2").unwrap() },
            )
        };
        (set, weight)
    }

    fn bundle(x1: f64, x2: f64) -> Alternative {
        Alternative::new(BTreeMap::from([
            ("x1".to_string(), Value::Num(x1)),
            ("x2".to_string(), Value::Num(x2)),
        ]))
    }

    #[test]
    fn classify_is_a_bijection() {
        use Comparison::*;
        let kinds: BTreeSet<StatementKind> = [(true, Relative), (true, Absolute), (false, Relative), (false, Absolute)]
            .into_iter()
            .map(|(o, c)| classify_problem_statement(o, c))
            .collect();
        assert_eq!(kinds.len(), 4);
        assert_eq!(classify_problem_statement(true, Relative), StatementKind::Ranking);
        assert_eq!(classify_problem_statement(true, Absolute), StatementKind::Rating);
        assert_eq!(classify_problem_statement(false, Absolute), StatementKind::Assignment);
        assert_eq!(classify_problem_statement(false, Relative), StatementKind::Clustering);
    }

    #[test]
    fn validation_outcomes() {
        let (set, weight) = knapsack();
        let mut f = ProblemFormulation {
            alternatives: set,
            attributes: vec![weight.clone().with_separable(false)],
            statement: ProblemStatement::ranking(),
        };
        assert_eq!(validate_formulation(&f), Err(Error::NoDecisionProblem));

        f.attributes = vec![weight];
        f.statement = ProblemStatement::ranking().with_class_count(2);
        let d = validate_formulation(&f).unwrap();
        assert!(d.choice);

        f.statement = ProblemStatement::new(StatementKind::Rating);
        assert!(matches!(validate_formulation(&f), Err(Error::MissingNorms(_))));

        f.statement = ProblemStatement::ranking().with_class_count(1);
        assert!(matches!(validate_formulation(&f), Err(Error::InvalidFormulation(_))));
    }

    #[test]
    fn ill_typed_evaluators_are_rejected() {
        let (set, _) = knapsack();
        let f = ProblemFormulation {
            alternatives: set,
            attributes: vec![Attribute::numeric(
                "bad",
                0.0,
                1.0,
                Evaluator::Expr { expr: Expr::parse("y + 1").unwrap() },
            )],
            statement: ProblemStatement::ranking(),
        };
        assert!(matches!(validate_formulation(&f), Err(Error::InvalidFormulation(_))));
    }

    #[test]
    fn enumeration_counts_and_order() {
        let vars: Vec<Variable> = (1..=20).map(|j| Variable::binary(format!("x{j:02}"))).collect();
        let e = enumerate_alternatives(&AlternativeSet::product(vars), 3).unwrap();
        assert_eq!(e.total, Some(1_048_576));
        assert_eq!(e.alternatives.len(), 3);

        let one = AlternativeSet::product(vec![Variable::binary("x")]);
        let e = enumerate_alternatives(&one, 10).unwrap();
        let ids: Vec<String> = e.alternatives.iter().map(|a| a.id().to_string()).collect();
        assert_eq!(ids, vec!["x=0", "x=1"]);

        let real = AlternativeSet::product(vec![Variable::new("r", Domain::Real { lo: 0.0, hi: 1.0 })]);
        assert!(matches!(enumerate_alternatives(&real, 1), Err(Error::NotEnumerable(_))));
    }

    #[test]
    fn enumeration_respects_linear_constraints() {
        let mut set = AlternativeSet::product(vec![
            Variable::binary("a"),
            Variable::binary("b"),
            Variable::new("c", Domain::Integer { lo: 0, hi: 2 }),
        ]);
        set.feasibility.push(Predicate::Linear(LinearConstraint {
            terms: vec![("a".into(), 1.0), ("b".into(), 1.0), ("c".into(), 1.0)],
            op: Cmp::Le,
            rhs: 2.0,
        }));
        let e = enumerate_alternatives(&set, usize::MAX).unwrap();
        // Brute count: (a,b,c) with a+b+c <= 2 over {0,1}x{0,1}x{0,1,2}.
        let mut brute = 0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..3 {
                    brute += usize::from(a + b + c <= 2);
                }
            }
        }
        assert_eq!(e.alternatives.len(), brute);
        assert_eq!(e.total, Some(brute as u64));
    }

    #[test]
    fn named_predicates_use_hooks() {
        let mut set = AlternativeSet::product(vec![Variable::binary("a"), Variable::binary("b")]);
        set.feasibility.push(Predicate::Named { name: "not_both".into() });
        let hooks = Hooks::default().with_predicate("not_both", |alt| {
            Ok(alt.get("a") != Some(&Value::Num(1.0)) || alt.get("b") != Some(&Value::Num(1.0)))
        });
        let e = enumerate_alternatives_with(&set, 10, &hooks).unwrap();
        assert_eq!(e.total, Some(3));
        assert!(matches!(enumerate_alternatives(&set, 10), Err(Error::UnknownReference(_))));
    }

    #[test]
    fn decomposed_evaluation() {
        let (_, weight) = knapsack();
        assert_eq!(evaluate_decomposed(&bundle(1.0, 1.0), &weight).unwrap(), Value::Num(8.0));
        assert_eq!(evaluate_decomposed(&bundle(0.0, 0.0), &weight).unwrap(), Value::Num(0.0));
        assert_eq!(evaluate(&bundle(0.0, 0.0), std::slice::from_ref(&weight)).unwrap(), vec![Value::Num(0.0)]);

        let mut colour = weight.clone();
        colour.name = "colour".into();
        colour.scale = Scale::Nominal;
        assert_eq!(evaluate_decomposed(&bundle(1.0, 0.0), &colour), Err(Error::NotAggregable("colour".into())));

        let mut plain = weight;
        plain.decomposition = None;
        assert!(matches!(evaluate_decomposed(&bundle(1.0, 0.0), &plain), Err(Error::NoDecomposition(_))));
    }

    #[test]
    fn decomposed_sum_is_additive_on_disjoint_bundles() {
        let (set, weight) = knapsack();
        let all = enumerate_alternatives(&set, usize::MAX).unwrap().alternatives;
        for a in &all {
            for b in &all {
                let disjoint = a.assignment.iter().all(|(k, v)| {
                    !(v == &Value::Num(1.0) && b.get(k) == Some(&Value::Num(1.0)))
                });
                if !disjoint {
                    continue;
                }
                let union = bundle(
                    a.get("x1").unwrap().as_num().unwrap() + b.get("x1").unwrap().as_num().unwrap(),
                    a.get("x2").unwrap().as_num().unwrap() + b.get("x2").unwrap().as_num().unwrap(),
                );
                let f = |x: &Alternative| evaluate_decomposed(x, &weight).unwrap().as_num().unwrap();
                assert_eq!(f(&union), f(a) + f(b));
            }
        }
    }

    #[test]
    fn evaluator_outside_codomain_fails() {
        let set = AlternativeSet::product(vec![Variable::binary("x")]);
        let attr = Attribute::numeric("o", 0.0, 0.5, Evaluator::Expr { expr: Expr::parse("x").unwrap() });
        let alts = enumerate_alternatives(&set, 10).unwrap().alternatives;
        assert!(evaluate(&alts[0], std::slice::from_ref(&attr)).is_ok());
        assert!(matches!(evaluate(&alts[1], &[attr]), Err(Error::EvaluationFailure(_))));
    }
}
