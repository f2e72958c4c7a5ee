//! Worked cases: facility covering over districts, and Alice deciding
//! whether to submit a paper.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::{attribute_relation, Aggregator};
use crate::error::{Error, Result};
use crate::expr::{Expr, Value};
use crate::formulation::{
    enumerate_alternatives, Alternative, AlternativeSet, Attribute, Cmp, Direction, Evaluator, LinearConstraint,
    Norm, NormSet, Origin, Predicate, ProblemFormulation, ProblemStatement, StatementKind, Variable, ENUMERATION_CAP,
};
use crate::relation::{decompose, eid, levels_partition, nearest_total_preorder, ElementId, Partition, RepairMode};
use crate::solvers::{optimize_covering, solve_ranking, CoverMode, CoveringInstance, CoveringSolution, SearchMode};

pub const NOT_SUBMIT: &str = "¬s";
pub const SUBMIT_NO_BOOKING: &str = "s¬b";
pub const SUBMIT_BOOK: &str = "sb";
pub const SUBMIT_WAIT: &str = "sw";

pub const ACCEPTED_FUNDED: &str = "a+";
pub const ACCEPTED_UNFUNDED: &str = "a−";
pub const REJECTED: &str = "¬a";

/// Descriptive parameters of Alice's problem. The ordinal case never reads them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AliceParams {
    /// Acceptance rate.
    pub r: f64,
    /// Reward of a publication.
    pub reward: f64,
    /// Early ticket price.
    pub t: f64,
    /// Late ticket price.
    pub late_t: f64,
    /// Booking fee.
    pub q: f64,
    /// Budget.
    pub k: f64,
    /// Likelihood of a budget shortfall.
    pub p: f64,
}

impl Default for AliceParams {
    fn default() -> Self {
        AliceParams { r: 0.25, reward: 1000.0, t: 400.0, late_t: 800.0, q: 50.0, k: 1000.0, p: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AliceInstance {
    pub params: AliceParams,
    pub actions: Vec<String>,
    pub scenarios: Vec<String>,
    /// Best-first order of the actions in each scenario.
    pub orders: BTreeMap<String, Vec<String>>,
}

fn canonical_orders(include_sw: bool) -> Vec<(&'static str, Vec<&'static str>)> {
    let base = [
        (ACCEPTED_FUNDED, [SUBMIT_BOOK, SUBMIT_NO_BOOKING, NOT_SUBMIT]),
        (ACCEPTED_UNFUNDED, [SUBMIT_BOOK, NOT_SUBMIT, SUBMIT_NO_BOOKING]),
        (REJECTED, [NOT_SUBMIT, SUBMIT_NO_BOOKING, SUBMIT_BOOK]),
    ];
    base.into_iter()
        .map(|(s, order)| {
            let mut v = order.to_vec();
            if include_sw {
                // Waiting is always the runner-up.
                v.insert(1, SUBMIT_WAIT);
            }
            (s, v)
        })
        .collect()
}

/// Alice's actions as named alternatives and one ordinal scenario attribute
/// per state of the world.
pub fn build_alice_case(params: AliceParams, include_sw: bool) -> Result<(AliceInstance, ProblemFormulation)> {
    let mut actions = vec![NOT_SUBMIT, SUBMIT_NO_BOOKING, SUBMIT_BOOK];
    if include_sw {
        actions.push(SUBMIT_WAIT);
    }
    let orders = canonical_orders(include_sw);
    let variable = Variable::labels("action", &actions);
    let members = actions
        .iter()
        .map(|a| Alternative::named(*a, BTreeMap::from([("action".to_string(), Value::from(*a))])))
        .collect();
    let attributes = orders
        .iter()
        .map(|(scenario, order)| {
            let worst_to_best: Vec<&str> = order.iter().rev().copied().collect();
            let table = actions.iter().map(|a| (a.to_string(), Value::from(*a))).collect();
            Attribute::ordinal_labels(scenario, &worst_to_best, Evaluator::Table { variable: "action".into(), table })
                .with_origin(Origin::Scenario)
        })
        .collect();
    let formulation = ProblemFormulation {
        alternatives: AlternativeSet::explicit(vec![variable], members),
        attributes,
        statement: ProblemStatement::ranking(),
    };
    let instance = AliceInstance {
        params,
        actions: actions.iter().map(|s| s.to_string()).collect(),
        scenarios: orders.iter().map(|(s, _)| s.to_string()).collect(),
        orders: orders
            .into_iter()
            .map(|(s, o)| (s.to_string(), o.into_iter().map(String::from).collect()))
            .collect(),
    };
    Ok((instance, formulation))
}

/// Lexicographic aggregation with the rejection scenario first, then
/// acceptance without funding, then acceptance with funding.
pub fn alice_lexicographic() -> Aggregator {
    Aggregator::Lexicographic {
        importance: vec![REJECTED.into(), ACCEPTED_UNFUNDED.into(), ACCEPTED_FUNDED.into()],
    }
}

/// `a ≻ b ∼ c` rendering of a best-first partition.
pub fn render_order(p: &Partition) -> String {
    p.classes
        .iter()
        .map(|c| c.iter().map(ElementId::as_str).collect::<Vec<_>>().join(" ∼ "))
        .collect::<Vec<_>>()
        .join(" ≻ ")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    /// Per-dimension order, rendered best first.
    pub orders: BTreeMap<String, String>,
    pub aggregate: Partition,
    /// Per-dimension agreement with the expected order, where one is given.
    pub consistent: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CaseReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (dim, order) in &self.orders {
            let flag = match self.consistent.get(dim) {
                Some(true) => "  [matches]",
                Some(false) => "  [DIFFERS]",
                None => "",
            };
            let _ = writeln!(out, "{dim}: {order}{flag}");
        }
        let _ = writeln!(out, "aggregate: {}", render_order(&self.aggregate));
        for n in &self.notes {
            let _ = writeln!(out, "{n}");
        }
        out
    }
}

/// Compares every dimension with its expected order, aggregates, and ranks.
pub fn run_case(
    f: &ProblemFormulation,
    aggregator: &Aggregator,
    expected: &BTreeMap<String, String>,
) -> Result<CaseReport> {
    let alts = enumerate_alternatives(&f.alternatives, ENUMERATION_CAP as usize)?.alternatives;
    let mut inputs = Vec::new();
    let mut orders = BTreeMap::new();
    let mut consistent = BTreeMap::new();
    for attr in &f.attributes {
        let r = attribute_relation(attr, &alts, &Default::default())?;
        let rendered = render_order(&levels_partition(&nearest_total_preorder(&r, RepairMode::default())?)?);
        if let Some(want) = expected.get(&attr.name) {
            consistent.insert(attr.name.clone(), *want == rendered);
        }
        orders.insert(attr.name.clone(), rendered);
        inputs.push((attr.name.clone(), r));
    }
    let combined = aggregator.apply(&inputs)?;
    let aggregate = solve_ranking(&f.statement, &combined, RepairMode::default())?;
    Ok(CaseReport { orders, aggregate, consistent, notes: Vec::new() })
}

/// Alice's case end to end, including the runner-up check when `sw` is present.
pub fn run_alice_case(instance: &AliceInstance, f: &ProblemFormulation, aggregator: &Aggregator) -> Result<CaseReport> {
    let expected: BTreeMap<String, String> =
        instance.orders.iter().map(|(s, o)| (s.clone(), o.join(" ≻ "))).collect();
    let mut report = run_case(f, aggregator, &expected)?;
    if instance.actions.iter().any(|a| a == SUBMIT_WAIT) {
        let alts = enumerate_alternatives(&f.alternatives, ENUMERATION_CAP as usize)?.alternatives;
        let sw = eid(SUBMIT_WAIT);
        for attr in &f.attributes {
            let strict = decompose(&attribute_relation(attr, &alts, &Default::default())?)?.strict;
            let above = strict.carrier().iter().filter(|x| strict.contains(x, &sw)).count();
            report.notes.push(format!("{}: sw rank {}", attr.name, above + 1));
            report.consistent.insert(format!("{} sw runner-up", attr.name), above == 1);
        }
    }
    if let Some(top) = report.aggregate.classes.first() {
        let names: Vec<&str> = top.iter().map(ElementId::as_str).collect();
        report.notes.push(format!("top: {}", names.join(", ")));
    }
    Ok(report)
}

/// A covering instance as a problem formulation: opening variables,
/// one feasibility attribute per district, and openings to minimize.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringCase {
    pub instance: CoveringInstance,
    pub formulation: ProblemFormulation,
    /// One two-class rating problem per district: covered or not.
    pub rating_phases: Vec<(String, ProblemStatement)>,
}

fn opening(j: usize) -> String {
    format!("x{}", j + 1)
}

fn served(j: usize) -> String {
    format!("y{}", j + 1)
}

pub fn build_covering_case(instance: &CoveringInstance) -> Result<CoveringCase> {
    instance.validate()?;
    let n = instance.len();
    let max_cover = instance.mode == CoverMode::MaxCover;
    let mut variables: Vec<Variable> = (0..n).map(|j| Variable::binary(opening(j))).collect();
    if max_cover {
        variables.extend((0..n).map(|j| Variable::binary(served(j))));
    }
    let mut feasibility = Vec::new();
    let mut attributes = Vec::new();
    let mut rating_phases = Vec::new();
    for i in 0..n {
        let servers: Vec<String> = (0..n).filter(|&j| instance.gamma[i][j]).map(opening).collect();
        let name = format!("cover_{}", instance.districts[i]);
        let expr = Expr::parse(&servers.join(" + "))?;
        attributes.push(Attribute::numeric(&name, 0.0, servers.len() as f64, Evaluator::Expr { expr }));
        let mut terms: Vec<(String, f64)> = servers.iter().map(|s| (s.clone(), 1.0)).collect();
        if max_cover {
            terms.push((served(i), -1.0));
            feasibility.push(Predicate::Linear(LinearConstraint { terms, op: Cmp::Ge, rhs: 0.0 }));
        } else {
            feasibility.push(Predicate::Linear(LinearConstraint { terms, op: Cmp::Ge, rhs: 1.0 }));
        }
        let norm = Norm { name: "one".into(), thresholds: BTreeMap::from([(name.clone(), Value::Num(1.0))]) };
        let statement = ProblemStatement::new(StatementKind::Rating)
            .with_norms(NormSet { name: format!("served_{}", instance.districts[i]), norms: vec![norm] });
        rating_phases.push((name, statement));
    }
    if let Some(budget) = instance.budget {
        let terms = (0..n).map(|j| (opening(j), instance.costs.as_ref().map_or(1.0, |c| c[j]))).collect();
        feasibility.push(Predicate::Linear(LinearConstraint { terms, op: Cmp::Le, rhs: budget }));
    }
    let all_openings: Vec<String> = (0..n).map(opening).collect();
    attributes.push(
        Attribute::numeric("openings", 0.0, n as f64, Evaluator::Expr { expr: Expr::parse(&all_openings.join(" + "))? })
            .with_direction(Direction::Decreasing),
    );
    if max_cover {
        let pops: Vec<String> = (0..n)
            .map(|j| format!("{} * {}", instance.populations.as_ref().map_or(1.0, |p| p[j]), served(j)))
            .collect();
        let total: f64 = instance.populations.as_ref().map_or(n as f64, |p| p.iter().sum());
        attributes.push(Attribute::numeric("coverage", 0.0, total, Evaluator::Expr { expr: Expr::parse(&pops.join(" + "))? }));
    }
    let mut alternatives = AlternativeSet::product(variables);
    alternatives.feasibility = feasibility;
    let formulation = ProblemFormulation {
        alternatives,
        attributes,
        statement: ProblemStatement::ranking().with_class_count(2),
    };
    Ok(CoveringCase { instance: instance.clone(), formulation, rating_phases })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub districts: usize,
    pub rating_phases: usize,
    pub exact: CoveringSolution,
    pub greedy: CoveringSolution,
}

impl CoveringReport {
    pub fn to_text(&self, inst: &CoveringInstance) -> String {
        format!(
            "districts={} rating_phases={}\nexact: openings={} covered={} open={{{}}}\ngreedy: openings={} covered={} open={{{}}}\n",
            self.districts,
            self.rating_phases,
            self.exact.opened,
            self.exact.covered,
            self.exact.opened_districts(inst).join(","),
            self.greedy.opened,
            self.greedy.covered,
            self.greedy.opened_districts(inst).join(","),
        )
    }
}

pub fn run_covering_case(case: &CoveringCase) -> Result<CoveringReport> {
    Ok(CoveringReport {
        districts: case.instance.len(),
        rating_phases: case.rating_phases.len(),
        exact: optimize_covering(&case.instance, SearchMode::Exact)?,
        greedy: optimize_covering(&case.instance, SearchMode::Greedy)?,
    })
}

/// Districts at uniform random points in the unit square, each covering
/// every district within `radius` (itself included).
pub fn random_geometric(n: usize, radius: f64, seed: u64) -> Result<CoveringInstance> {
    if n == 0 {
        return Err(Error::InvalidFixture("no districts".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let gamma = points
        .iter()
        .map(|a| points.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() <= radius).collect())
        .collect();
    CoveringInstance::new(gamma)
}

/// Seed and radius of the committed 20-district fixture.
pub const DISTRICTS20_SEED: u64 = 2;
pub const DISTRICTS20_RADIUS: f64 = 0.3;
