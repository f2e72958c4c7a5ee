//! The iterative construction of the alternative set.
//!
//! A session starts from the codomain of one separable attribute, partitions
//! it, and asks the client whether the partition is satisfactory. A "no"
//! leads to proposals of further attributes (which refine the comparison) or
//! further decision variables (which enrich the set, keeping only the
//! descendants of the classes the client chose to keep). The loop ends on a
//! "yes" or when the iteration cap is reached.
//!
//! Every interaction goes through a queue of [`OracleQuery`] values, so the
//! same session can be driven in-process by a [`ProcessOracle`] or over HTTP
//! by an external client.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::aggregation::{attribute_relation, Aggregator};
use crate::error::{Error, Result};
use crate::expr::Value;
use crate::formulation::{
    enumerate_alternatives, Alternative, AlternativeSet, Attribute, Codomain, Domain, Evaluator,
    ProblemStatement, StatementKind, Variable,
};
use crate::relation::{ElementId, Partition, Relation, RepairMode};
use crate::solvers::{solve_clustering, solve_ranking, ClusteringMode};

pub const DEFAULT_MAX_ITER: usize = 50;
/// Largest incumbent set a session will partition.
pub const SESSION_CARRIER_CAP: usize = 2048;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    #[default]
    Running,
    Satisfied,
    Exhausted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    Attribute,
    Variable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVerdict {
    /// The first element is at least as good.
    Left,
    Right,
    Indifferent,
    Incomparable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OracleQuery {
    Satisfaction { partition: Partition },
    Pairwise { x: ElementId, y: ElementId, dimension: String },
    ProposeAttribute,
    ProposeVariable,
}

fn default_extend() -> Vec<Extension> {
    vec![Extension::Attribute]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OracleAnswer {
    Satisfaction {
        satisfied: bool,
        /// Indices of the classes whose members seed the next set; all when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kept: Option<Vec<usize>>,
        /// What the client will propose next. An empty list re-asks after re-partitioning.
        #[serde(default = "default_extend")]
        extend: Vec<Extension>,
    },
    Pairwise { x: ElementId, y: ElementId, dimension: String, verdict: PairVerdict },
    Attribute { attribute: Attribute },
    Variable { variable: Variable },
}

impl OracleAnswer {
    pub fn yes() -> Self {
        OracleAnswer::Satisfaction { satisfied: true, kept: None, extend: Vec::new() }
    }

    pub fn no(extend: &[Extension]) -> Self {
        OracleAnswer::Satisfaction { satisfied: false, kept: None, extend: extend.to_vec() }
    }

    pub fn no_keeping(kept: &[usize], extend: &[Extension]) -> Self {
        OracleAnswer::Satisfaction { satisfied: false, kept: Some(kept.to_vec()), extend: extend.to_vec() }
    }

    fn matches(&self, q: &OracleQuery) -> bool {
        match (q, self) {
            (OracleQuery::Satisfaction { .. }, OracleAnswer::Satisfaction { .. }) => true,
            (OracleQuery::ProposeAttribute, OracleAnswer::Attribute { .. }) => true,
            (OracleQuery::ProposeVariable, OracleAnswer::Variable { .. }) => true,
            (
                OracleQuery::Pairwise { x, y, dimension },
                OracleAnswer::Pairwise { x: ax, y: ay, dimension: ad, .. },
            ) => x == ax && y == ay && dimension == ad,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub partition: Partition,
    pub answer: OracleAnswer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub query: OracleQuery,
    pub answer: OracleAnswer,
}

/// Parent of every alternative introduced by a variable extension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineageStep {
    /// Index of the history entry whose partition the parents come from.
    pub after: usize,
    pub parents: BTreeMap<ElementId, ElementId>,
}

/// How a session combines its dimensions before partitioning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub max_iter: usize,
    /// Majority over all dimensions when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregator: Option<Aggregator>,
    /// Seed for heuristic clustering on large sets.
    #[serde(default)]
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { max_iter: DEFAULT_MAX_ITER, aggregator: None, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub incumbent_a: AlternativeSet,
    pub incumbent_d: Vec<Attribute>,
    pub statement: ProblemStatement,
    pub config: SessionConfig,
    pub history: Vec<HistoryEntry>,
    pub pending: VecDeque<OracleQuery>,
    pub status: Status,
    pub transcript: Vec<TranscriptEntry>,
    #[serde(default)]
    pub lineage: Vec<LineageStep>,
    /// Pairwise answers per elicited dimension.
    #[serde(default)]
    pub judgements: BTreeMap<String, BTreeSet<(ElementId, ElementId)>>,
    #[serde(default)]
    pub asked: BTreeMap<String, BTreeSet<(ElementId, ElementId)>>,
    /// Latest partition shown to the client.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<Partition>,
    /// Classes kept by the last dissatisfied answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kept: Option<Vec<usize>>,
}

/// Starts a session whose alternatives are the codomain of `seed`.
pub fn init_session(seed: &Attribute, statement: ProblemStatement) -> Result<Session> {
    init_session_with(seed, statement, SessionConfig::default())
}

pub fn init_session_with(seed: &Attribute, statement: ProblemStatement, config: SessionConfig) -> Result<Session> {
    if !seed.separable {
        return Err(Error::NoDecisionProblem);
    }
    let values = match &seed.codomain {
        Codomain::Labels { values } => values.clone(),
        Codomain::Numeric { .. } => {
            return Err(Error::NotEnumerable(format!("`{}` has an infinite codomain", seed.name)))
        }
    };
    if matches!(statement.kind, StatementKind::Rating | StatementKind::Assignment) {
        return Err(Error::UnsupportedStatement(format!(
            "{} sessions need norms or rules the process does not elicit",
            statement.kind
        )));
    }
    if config.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let mut attr = seed.clone();
    attr.evaluator = Evaluator::Table {
        variable: seed.name.clone(),
        table: values.iter().map(|v| (v.clone(), Value::Label(v.clone()))).collect(),
    };
    let variable = Variable::new(seed.name.clone(), Domain::Labels { values });
    let mut s = Session {
        id: uuid::Uuid::new_v4().to_string(),
        incumbent_a: AlternativeSet::product(vec![variable]),
        incumbent_d: vec![attr],
        statement,
        config,
        history: Vec::new(),
        pending: VecDeque::new(),
        status: Status::Running,
        transcript: Vec::new(),
        lineage: Vec::new(),
        judgements: BTreeMap::new(),
        asked: BTreeMap::new(),
        current: None,
        kept: None,
    };
    s.refresh()?;
    Ok(s)
}

impl Session {
    pub fn alternatives(&self) -> Result<Vec<Alternative>> {
        Ok(enumerate_alternatives(&self.incumbent_a, SESSION_CARRIER_CAP)?.alternatives)
    }

    /// Number of completed iterations (satisfaction answers received).
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// Asks for missing pairwise judgements or, when none are missing,
    /// partitions the incumbent and asks for satisfaction.
    fn refresh(&mut self) -> Result<()> {
        if !self.pending.is_empty() || self.status != Status::Running {
            return Ok(());
        }
        let alts = self.alternatives()?;
        let ids: Vec<ElementId> = alts.iter().map(Alternative::id).collect();
        for attr in &self.incumbent_d {
            if !matches!(attr.evaluator, Evaluator::Elicited) {
                continue;
            }
            let asked = self.asked.entry(attr.name.clone()).or_default();
            for (i, x) in ids.iter().enumerate() {
                for y in &ids[i + 1..] {
                    if asked.insert((x.clone(), y.clone())) {
                        self.pending.push_back(OracleQuery::Pairwise {
                            x: x.clone(),
                            y: y.clone(),
                            dimension: attr.name.clone(),
                        });
                    }
                }
            }
        }
        if self.pending.is_empty() {
            let p = self.partition_incumbent(&alts)?;
            self.current = Some(p.clone());
            self.pending.push_back(OracleQuery::Satisfaction { partition: p });
        }
        Ok(())
    }

    fn dimension_relation(&self, attr: &Attribute, alts: &[Alternative], ids: &[ElementId]) -> Result<Relation> {
        if matches!(attr.evaluator, Evaluator::Elicited) {
            let judged = self.judgements.get(&attr.name).cloned().unwrap_or_default();
            return Relation::weak_preference(ids.to_vec(), judged);
        }
        attribute_relation(attr, alts, &Default::default())
    }

    fn partition_incumbent(&self, alts: &[Alternative]) -> Result<Partition> {
        let ids: Vec<ElementId> = alts.iter().map(Alternative::id).collect();
        let mut inputs = Vec::new();
        for attr in &self.incumbent_d {
            inputs.push((attr.name.clone(), self.dimension_relation(attr, alts, &ids)?));
        }
        let aggregator = self
            .config
            .aggregator
            .clone()
            .unwrap_or(Aggregator::MajorityRelational { threshold: 0.5 });
        let combined = aggregator.apply(&inputs)?;
        match self.statement.kind {
            StatementKind::Ranking => solve_ranking(&self.statement, &combined, RepairMode::default()),
            StatementKind::Clustering => {
                let k = self.statement.class_count.unwrap_or(2).min(ids.len()).max(1);
                solve_clustering(&combined, k, ClusteringMode::Auto { seed: self.config.seed })
            }
            other => Err(Error::UnsupportedStatement(other.to_string())),
        }
    }

    fn extend_with_variable(&mut self, variable: Variable) -> Result<()> {
        variable.validate()?;
        if self.incumbent_a.variable(&variable.name).is_some() {
            return Err(Error::InvalidFormulation(format!("variable `{}` already exists", variable.name)));
        }
        let size = variable
            .domain
            .size()
            .ok_or_else(|| Error::NotEnumerable(format!("`{}` has an infinite domain", variable.name)))?;
        let last = self.history.len().checked_sub(1).expect("extension follows an answer");
        let partition = &self.history[last].partition;
        let keep: Vec<usize> = self.kept.clone().unwrap_or_else(|| (0..partition.len()).collect());
        let keep_ids: BTreeSet<&ElementId> =
            keep.iter().filter_map(|&k| partition.classes.get(k)).flatten().collect();
        let mut members = Vec::new();
        let mut parents = BTreeMap::new();
        for alt in self.alternatives()? {
            let parent = alt.id();
            if !keep_ids.contains(&parent) {
                continue;
            }
            for k in 0..size {
                let mut assignment = alt.assignment.clone();
                assignment.insert(variable.name.clone(), variable.domain.value_at(k));
                let child = Alternative::new(assignment);
                parents.insert(child.id(), parent.clone());
                members.push(child);
            }
        }
        if members.is_empty() {
            return Err(Error::ProtocolViolation("no kept class to extend".into()));
        }
        if members.len() > SESSION_CARRIER_CAP {
            return Err(Error::CapExceeded { what: "incumbent set".into(), size: members.len(), cap: SESSION_CARRIER_CAP });
        }
        let mut variables = self.incumbent_a.variables.clone();
        variables.push(variable);
        self.incumbent_a = AlternativeSet::explicit(variables, members);
        self.lineage.push(LineageStep { after: last, parents });
        Ok(())
    }

    fn extend_with_attribute(&mut self, attribute: Attribute) -> Result<()> {
        if self.incumbent_d.iter().any(|a| a.name == attribute.name) {
            return Err(Error::InvalidFormulation(format!("attribute `{}` already exists", attribute.name)));
        }
        if let Evaluator::Expr { expr } = &attribute.evaluator {
            for v in expr.variables() {
                if self.incumbent_a.variable(&v).is_none() {
                    return Err(Error::UnknownReference(format!("variable `{v}` in `{}`", attribute.name)));
                }
            }
        }
        self.incumbent_d.push(attribute);
        Ok(())
    }

    /// Every alternative introduced by a variable extension descends from a
    /// kept class of the partition it followed.
    pub fn check_lineage(&self) -> Result<()> {
        for step in &self.lineage {
            let partition = &self
                .history
                .get(step.after)
                .ok_or_else(|| Error::ProtocolViolation("lineage refers to a missing step".into()))?
                .partition;
            let kept: BTreeSet<usize> = match &self.history[step.after].answer {
                OracleAnswer::Satisfaction { kept: Some(k), .. } => k.iter().copied().collect(),
                _ => (0..partition.len()).collect(),
            };
            for (child, parent) in &step.parents {
                match partition.class_of(parent) {
                    Some(c) if kept.contains(&c) => {}
                    _ => {
                        return Err(Error::ProtocolViolation(format!(
                            "`{child}` descends from `{parent}`, which is not in a kept class"
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}

/// Consumes the head of the pending queue with `answer`.
///
/// The session is left untouched when the answer is rejected.
pub fn apply_step(s: &mut Session, answer: OracleAnswer) -> Result<()> {
    let mut next = s.clone();
    apply_in_place(&mut next, answer)?;
    *s = next;
    Ok(())
}

fn apply_in_place(s: &mut Session, answer: OracleAnswer) -> Result<()> {
    if s.status != Status::Running {
        return Err(Error::ProtocolViolation(format!("session is {:?}", s.status).to_lowercase()));
    }
    let query = s
        .pending
        .front()
        .cloned()
        .ok_or_else(|| Error::ProtocolViolation("no pending query".into()))?;
    if !answer.matches(&query) {
        return Err(Error::ProtocolViolation(format!(
            "answer {} does not match pending {}",
            answer_kind(&answer),
            query_kind(&query)
        )));
    }
    s.pending.pop_front();
    s.transcript.push(TranscriptEntry { query: query.clone(), answer: answer.clone() });
    match (&query, &answer) {
        (OracleQuery::Pairwise { .. }, OracleAnswer::Pairwise { x, y, dimension, verdict }) => {
            let set = s.judgements.entry(dimension.clone()).or_default();
            match verdict {
                PairVerdict::Left => {
                    set.insert((x.clone(), y.clone()));
                }
                PairVerdict::Right => {
                    set.insert((y.clone(), x.clone()));
                }
                PairVerdict::Indifferent => {
                    set.insert((x.clone(), y.clone()));
                    set.insert((y.clone(), x.clone()));
                }
                PairVerdict::Incomparable => {}
            }
        }
        (OracleQuery::Satisfaction { partition }, OracleAnswer::Satisfaction { satisfied, kept, extend }) => {
            if let Some(k) = kept {
                if let Some(bad) = k.iter().find(|&&c| c >= partition.len()) {
                    return Err(Error::ProtocolViolation(format!("kept class {bad} does not exist")));
                }
            }
            s.history.push(HistoryEntry { partition: partition.clone(), answer: answer.clone() });
            if *satisfied {
                s.status = Status::Satisfied;
                return Ok(());
            }
            if s.history.len() >= s.config.max_iter {
                s.status = Status::Exhausted;
                return Ok(());
            }
            s.kept = kept.clone();
            let wanted: BTreeSet<Extension> = extend.iter().copied().collect();
            if wanted.contains(&Extension::Attribute) {
                s.pending.push_back(OracleQuery::ProposeAttribute);
            }
            if wanted.contains(&Extension::Variable) {
                s.pending.push_back(OracleQuery::ProposeVariable);
            }
        }
        (OracleQuery::ProposeAttribute, OracleAnswer::Attribute { attribute }) => {
            s.extend_with_attribute(attribute.clone())?;
        }
        (OracleQuery::ProposeVariable, OracleAnswer::Variable { variable }) => {
            s.extend_with_variable(variable.clone())?;
        }
        _ => unreachable!("matched above"),
    }
    s.refresh()
}

fn query_kind(q: &OracleQuery) -> &'static str {
    match q {
        OracleQuery::Satisfaction { .. } => "satisfaction",
        OracleQuery::Pairwise { .. } => "pairwise",
        OracleQuery::ProposeAttribute => "propose_attribute",
        OracleQuery::ProposeVariable => "propose_variable",
    }
}

fn answer_kind(a: &OracleAnswer) -> &'static str {
    match a {
        OracleAnswer::Satisfaction { .. } => "satisfaction",
        OracleAnswer::Pairwise { .. } => "pairwise",
        OracleAnswer::Attribute { .. } => "attribute",
        OracleAnswer::Variable { .. } => "variable",
    }
}

pub trait ProcessOracle {
    fn answer(&mut self, q: &OracleQuery) -> Result<OracleAnswer>;
}

impl<F: FnMut(&OracleQuery) -> Result<OracleAnswer>> ProcessOracle for F {
    fn answer(&mut self, q: &OracleQuery) -> Result<OracleAnswer> {
        self(q)
    }
}

/// Replays answers in order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptedOracle {
    pub answers: VecDeque<OracleAnswer>,
}

impl ScriptedOracle {
    pub fn new(answers: Vec<OracleAnswer>) -> Self {
        ScriptedOracle { answers: answers.into() }
    }

    /// The answers recorded in a session transcript.
    pub fn from_transcript(t: &[TranscriptEntry]) -> Self {
        ScriptedOracle::new(t.iter().map(|e| e.answer.clone()).collect())
    }
}

impl ProcessOracle for ScriptedOracle {
    fn answer(&mut self, q: &OracleQuery) -> Result<OracleAnswer> {
        self.answers
            .pop_front()
            .ok_or_else(|| Error::IncompleteElicitation(format!("no scripted answer for {}", query_kind(q))))
    }
}

/// Drives the session until it is satisfied or exhausted and returns the
/// latest partition. The session is updated in place, so after an
/// `IncompleteElicitation` it can be resumed with more answers.
pub fn run_process(s: &mut Session, oracle: &mut dyn ProcessOracle, max_iter: Option<usize>) -> Result<Partition> {
    if let Some(m) = max_iter {
        if m == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        s.config.max_iter = m;
    }
    while s.status == Status::Running {
        let query = s
            .pending
            .front()
            .cloned()
            .ok_or_else(|| Error::ProtocolViolation("running session with nothing pending".into()))?;
        let answer = oracle.answer(&query)?;
        apply_step(s, answer)?;
    }
    s.current
        .clone()
        .ok_or_else(|| Error::ProtocolViolation("session ended without a partition".into()))
}
