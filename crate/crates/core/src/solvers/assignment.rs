use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::formulation::{enumerate_alternatives, ProblemFormulation, ENUMERATION_CAP};
use crate::relation::{ElementId, Partition};

/// Name of the class collecting alternatives that match no rule.
pub const UNASSIGNED: &str = "unassigned";

/// Membership predicate for one class. Among matching rules the highest
/// priority wins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentRule {
    pub class: String,
    #[serde(default)]
    pub priority: i64,
    /// Boolean expression over attribute names and decision variables.
    pub condition: Expr,
}

impl AssignmentRule {
    pub fn new(class: &str, priority: i64, condition: &str) -> Result<Self> {
        Ok(AssignmentRule { class: class.into(), priority, condition: Expr::parse(condition)? })
    }
}

pub fn solve_assignment(f: &ProblemFormulation, rules: &[AssignmentRule]) -> Result<Partition> {
    for rule in rules {
        for name in rule.condition.variables() {
            if f.attribute(&name).is_none() && f.alternatives.variable(&name).is_none() {
                return Err(Error::UnknownReference(format!("`{name}` in rule for `{}`", rule.class)));
            }
        }
    }
    let enumeration = enumerate_alternatives(&f.alternatives, ENUMERATION_CAP as usize)?;
    let mut order: Vec<String> = Vec::new();
    for r in rules {
        if !order.contains(&r.class) {
            order.push(r.class.clone());
        }
    }
    let mut members: BTreeMap<String, Vec<ElementId>> = BTreeMap::new();
    for alt in &enumeration.alternatives {
        let mut env = alt.assignment.clone();
        for a in &f.attributes {
            if let Ok(v) = a.evaluate(alt, &Default::default()) {
                env.insert(a.name.clone(), v);
            }
        }
        let mut matching = Vec::new();
        for r in rules {
            if r.condition.eval_bool(&env)? {
                matching.push(r);
            }
        }
        let class = match matching.iter().map(|r| r.priority).max() {
            None => UNASSIGNED.to_string(),
            Some(top) => {
                let winners: Vec<&&AssignmentRule> = matching.iter().filter(|r| r.priority == top).collect();
                let first = &winners[0].class;
                if winners.iter().any(|r| &r.class != first) {
                    return Err(Error::AmbiguousAssignment {
                        element: alt.id().to_string(),
                        rules: winners.iter().map(|r| r.class.clone()).collect(),
                    });
                }
                first.clone()
            }
        };
        members.entry(class).or_default().push(alt.id());
    }
    order.push(UNASSIGNED.to_string());
    let mut classes = Vec::new();
    let mut labels = Vec::new();
    for name in order {
        if let Some(m) = members.remove(&name) {
            classes.push(m);
            labels.push(name);
        }
    }
    Ok(Partition::unordered(classes).with_labels(labels))
}
