//! Scripted elicitation sessions and an in-memory HTTP client.

use std::collections::BTreeMap;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use decision_core::expr::Value;
use decision_core::formulation::{Attribute, Evaluator, Variable};
use decision_core::process::{Extension, OracleAnswer, OracleQuery, PairVerdict};
use decision_core::Result;
use http_body_util::BodyExt;
use serde_json::Value as Json;
use tower::ServiceExt;

pub fn seed_attribute() -> Attribute {
    Attribute::ordinal_labels("level", &["low", "mid", "high"], Evaluator::Elicited)
}

fn venue_distance() -> Attribute {
    let table: BTreeMap<String, Value> =
        ["near", "far"].iter().map(|v| (v.to_string(), Value::Label(v.to_string()))).collect();
    Attribute::ordinal_labels("distance", &["far", "near"], Evaluator::Table { variable: "venue".into(), table })
}

/// A client that keeps the top class, adds a venue, then an elicited
/// comfort dimension it answers pairwise, and is satisfied at the end.
pub fn scripted_client() -> impl FnMut(&OracleQuery) -> Result<OracleAnswer> {
    let mut satisfaction_round = 0;
    move |q: &OracleQuery| {
        Ok(match q {
            OracleQuery::Satisfaction { .. } => {
                satisfaction_round += 1;
                match satisfaction_round {
                    1 => OracleAnswer::no_keeping(&[0], &[Extension::Variable]),
                    2 => OracleAnswer::no(&[Extension::Attribute]),
                    3 => OracleAnswer::no(&[Extension::Attribute]),
                    _ => OracleAnswer::yes(),
                }
            }
            OracleQuery::ProposeVariable => OracleAnswer::Variable { variable: Variable::labels("venue", &["near", "far"]) },
            OracleQuery::ProposeAttribute if satisfaction_round == 2 => OracleAnswer::Attribute { attribute: venue_distance() },
            OracleQuery::ProposeAttribute => OracleAnswer::Attribute {
                attribute: Attribute::ordinal_labels("comfort", &["poor", "good"], Evaluator::Elicited),
            },
            OracleQuery::Pairwise { x, y, dimension } => {
                // Prefers whichever option mentions `far`, for comfort.
                let verdict = match (x.as_str().contains("far"), y.as_str().contains("far")) {
                    (true, false) => PairVerdict::Left,
                    (false, true) => PairVerdict::Right,
                    _ => PairVerdict::Indifferent,
                };
                OracleAnswer::Pairwise { x: x.clone(), y: y.clone(), dimension: dimension.clone(), verdict }
            }
        })
    }
}

/// Says no forever without ever extending anything.
pub fn never_satisfied(q: &OracleQuery) -> Result<OracleAnswer> {
    Ok(match q {
        OracleQuery::Pairwise { x, y, dimension } => OracleAnswer::Pairwise {
            x: x.clone(),
            y: y.clone(),
            dimension: dimension.clone(),
            verdict: PairVerdict::Incomparable,
        },
        _ => OracleAnswer::no(&[]),
    })
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Json>) -> (StatusCode, Json) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(b) => {
            req = req.header("content-type", "application/json");
            Body::from(serde_json::to_vec(&b).unwrap())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let json = if bytes.is_empty() { Json::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, json)
}
