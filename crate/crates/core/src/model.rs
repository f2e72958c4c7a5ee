//! The JSON model document and the solve pipeline that reads it.
//!
//! Documents are written with object keys sorted, so a save-load-save cycle
//! is byte-for-byte stable.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregation::{attribute_relation, dispatch, AggregationProfile, Aggregator};
use crate::error::{Error, Result};
use crate::formulation::{enumerate_alternatives, Evaluator, ProblemFormulation, StatementKind, ENUMERATION_CAP};
use crate::primitives::{compile_primitive_base, ParkedConstraint, PreferenceStatement};
use crate::process::{Session, TranscriptEntry};
use crate::relation::{Partition, RepairMode};
use crate::solvers::{
    absolute_from_thresholds, optimize_covering, solve_assignment, solve_clustering, solve_ranking, solve_rating,
    AssignmentRule, ClusteringMode, CoveringInstance, CoveringSolution, SearchMode,
};

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formulation: Option<ProblemFormulation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub statements: Vec<PreferenceStatement>,
    /// An explicit aggregator wins over `profile`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregation: Option<Aggregator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<AggregationProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covering: Option<CoveringInstance>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assignment_rules: Vec<AssignmentRule>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sessions: Vec<Session>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub transcripts: BTreeMap<String, Vec<TranscriptEntry>>,
}

impl Default for ModelDocument {
    fn default() -> Self {
        ModelDocument {
            format_version: FORMAT_VERSION.into(),
            formulation: None,
            statements: Vec::new(),
            aggregation: None,
            profile: None,
            covering: None,
            assignment_rules: Vec::new(),
            sessions: Vec::new(),
            transcripts: BTreeMap::new(),
        }
    }
}

impl ModelDocument {
    pub fn from_formulation(f: ProblemFormulation) -> Self {
        ModelDocument { formulation: Some(f), ..Default::default() }
    }

    /// Parses a document; `origin` names the source in error messages.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::ParseError { path: origin.into(), message: e.to_string() })?;
        let found = match raw.get("format_version") {
            Some(serde_json::Value::String(v)) => v.clone(),
            Some(other) => other.to_string(),
            None => {
                return Err(Error::ParseError { path: origin.into(), message: "missing `format_version`".into() })
            }
        };
        if found != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion { found, supported: FORMAT_VERSION.into() });
        }
        serde_json::from_value(raw).map_err(|e| Error::ParseError { path: origin.into(), message: e.to_string() })
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        to_sorted_json(self)
    }
}

/// Serializes through `serde_json::Value`, whose maps keep keys sorted.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn load_model(path: &Path) -> Result<ModelDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ModelDocument::from_json(&text, &path.display().to_string())
}

/// Writes through a temporary sibling and a rename, so readers never see a
/// half-written file.
pub fn save_model(path: &Path, doc: &ModelDocument) -> Result<()> {
    write_atomic(path, &doc.to_json()?)
}

pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveOutcome {
    Partition {
        statement: StatementKind,
        partition: Partition,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        aggregator: Option<Aggregator>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        rationale: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        parked: Vec<ParkedConstraint>,
    },
    Covering {
        exact: CoveringSolution,
        greedy: CoveringSolution,
        opened: Vec<String>,
    },
}

/// Solves whatever the document describes: a covering instance when one is
/// present, otherwise the formulation's problem statement.
///
/// Dimensions with an evaluator are ordered by their values; elicited
/// dimensions take the relation compiled from the client statements.
pub fn solve_model(doc: &ModelDocument, seed: u64) -> Result<SolveOutcome> {
    if let Some(inst) = &doc.covering {
        let exact = optimize_covering(inst, SearchMode::Exact)?;
        let greedy = optimize_covering(inst, SearchMode::Greedy)?;
        let opened = exact.opened_districts(inst).into_iter().map(String::from).collect();
        return Ok(SolveOutcome::Covering { exact, greedy, opened });
    }
    let f = doc
        .formulation
        .as_ref()
        .ok_or_else(|| Error::InvalidFormulation("document has neither a formulation nor a covering instance".into()))?;
    let kind = f.statement.kind;
    let partition_only = |partition| SolveOutcome::Partition {
        statement: kind,
        partition,
        aggregator: None,
        rationale: Vec::new(),
        parked: Vec::new(),
    };
    match kind {
        StatementKind::Assignment => return Ok(partition_only(solve_assignment(f, &doc.assignment_rules)?)),
        StatementKind::Rating => {
            let absolute = absolute_from_thresholds(f)?;
            return Ok(partition_only(solve_rating(&f.statement, &absolute)?));
        }
        StatementKind::Ranking | StatementKind::Clustering => {}
    }

    let (base, report) = compile_primitive_base(&doc.statements, f)?;
    let alts = enumerate_alternatives(&f.alternatives, ENUMERATION_CAP as usize)?.alternatives;
    let mut inputs = Vec::with_capacity(f.attributes.len());
    for attr in &f.attributes {
        let r = match attr.evaluator {
            Evaluator::Elicited => base.per_dimension[&attr.name].clone(),
            _ => attribute_relation(attr, &alts, &Default::default())?,
        };
        inputs.push((attr.name.clone(), r));
    }
    let (aggregator, rationale) = match (&doc.aggregation, &doc.profile) {
        (Some(a), _) => (a.clone(), vec!["aggregator given by the model".to_string()]),
        (None, Some(profile)) => {
            let rec = dispatch(profile, &base)?;
            (rec.aggregator, rec.rationale)
        }
        (None, None) => (
            Aggregator::MajorityRelational { threshold: 0.5 },
            vec!["no aggregator or profile: simple majority".to_string()],
        ),
    };
    let combined = aggregator.apply(&inputs)?;
    let partition = match kind {
        StatementKind::Clustering => {
            let k = f
                .statement
                .class_count
                .ok_or_else(|| Error::InvalidFormulation("clustering needs `class_count`".into()))?;
            solve_clustering(&combined, k, ClusteringMode::Auto { seed })?
        }
        _ => solve_ranking(&f.statement, &combined, RepairMode::default())?,
    };
    Ok(SolveOutcome::Partition {
        statement: kind,
        partition,
        aggregator: Some(aggregator),
        rationale,
        parked: report.parked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{build_alice_case, AliceParams};

    #[test]
    fn round_trip_is_stable() {
        let (_, f) = build_alice_case(AliceParams::default(), true).unwrap();
        let doc = ModelDocument::from_formulation(f);
        let text = doc.to_json().unwrap();
        let back = ModelDocument::from_json(&text, "mem").unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn version_is_checked() {
        let err = ModelDocument::from_json(r#"{"format_version": "9"}"#, "mem").unwrap_err();
        assert!(matches!(err, Error::UnsupportedVersion { .. }));
        let err = ModelDocument::from_json("{", "x.json").unwrap_err();
        assert!(matches!(err, Error::ParseError { ref path, .. } if path == "x.json"));
    }

    #[test]
    fn default_solve_is_majority() {
        let (_, f) = build_alice_case(AliceParams::default(), false).unwrap();
        let out = solve_model(&ModelDocument::from_formulation(f), 0).unwrap();
        let SolveOutcome::Partition { aggregator, partition, .. } = out else { panic!() };
        assert_eq!(aggregator, Some(Aggregator::MajorityRelational { threshold: 0.5 }));
        assert_eq!(partition.elements().count(), 3);
    }
}
