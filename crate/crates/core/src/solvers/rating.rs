use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formulation::{enumerate_alternatives, NormSet, ProblemFormulation, ProblemStatement, StatementKind, ENUMERATION_CAP};
use crate::relation::{eid, ElementId, Partition, Relation, RelationKind};

/// Norms must be distinct and their thresholds must not decrease from one
/// norm to the next on any attribute they share.
fn check_norm_chain(norms: &NormSet, f: Option<&ProblemFormulation>) -> Result<()> {
    if norms.norms.is_empty() {
        return Err(Error::MalformedNorms("norm set is empty".into()));
    }
    let mut names = BTreeSet::new();
    for n in &norms.norms {
        if !names.insert(n.name.as_str()) {
            return Err(Error::MalformedNorms(format!("norm `{}` declared twice", n.name)));
        }
    }
    for pair in norms.norms.windows(2) {
        let (low, high) = (&pair[0], &pair[1]);
        for (attr, t_low) in &low.thresholds {
            let Some(t_high) = high.thresholds.get(attr) else { continue };
            let score = |v| match f.and_then(|f| f.attribute(attr)) {
                Some(a) => a.ordinal_score(v),
                None => v.as_num().ok_or_else(|| Error::MalformedNorms(format!("threshold on `{attr}` is not numeric"))),
            };
            if score(t_high)? < score(t_low)? {
                return Err(Error::MalformedNorms(format!(
                    "`{}` sets a lower standard than `{}` on `{attr}`",
                    high.name, low.name
                )));
            }
        }
    }
    Ok(())
}

/// Keeps `x ⪰ n` only when every dimension agrees.
pub fn aggregate_absolute(relations: &[Relation]) -> Result<Relation> {
    let first = relations.first().ok_or_else(|| Error::InvalidArgument("nothing to aggregate".into()))?;
    for r in relations {
        if r.kind() != RelationKind::Absolute || !first.same_carrier_set(r) || r.norms() != first.norms() {
            return Err(Error::CarrierMismatch("absolute relations differ in carrier or norms".into()));
        }
    }
    let pairs: Vec<(ElementId, ElementId)> = first
        .pairs()
        .filter(|(x, y)| relations.iter().all(|r| r.contains(x, y)))
        .cloned()
        .collect();
    Relation::absolute(first.carrier().to_vec(), first.norms().to_vec(), pairs)
}

/// `x ⪰ n` whenever `x` reaches every threshold of `n`.
pub fn absolute_from_thresholds(f: &ProblemFormulation) -> Result<Relation> {
    let norms = f.statement.norms.as_ref().ok_or_else(|| Error::MissingNorms(f.statement.kind.to_string()))?;
    check_norm_chain(norms, Some(f))?;
    let enumeration = enumerate_alternatives(&f.alternatives, ENUMERATION_CAP as usize)?;
    let carrier: Vec<ElementId> = enumeration.alternatives.iter().map(|a| a.id()).collect();
    let mut pairs = Vec::new();
    for alt in &enumeration.alternatives {
        for n in &norms.norms {
            let mut beats = true;
            for (attr, threshold) in &n.thresholds {
                let a = f
                    .attribute(attr)
                    .ok_or_else(|| Error::UnknownReference(format!("attribute `{attr}` in norm `{}`", n.name)))?;
                let v = a.evaluate(alt, &Default::default())?;
                if a.ordinal_score(&v)? < a.ordinal_score(threshold)? {
                    beats = false;
                    break;
                }
            }
            if beats {
                pairs.push((alt.id(), eid(&n.name)));
            }
        }
    }
    let norm_ids = norms.norms.iter().map(|n| eid(&n.name)).collect();
    Relation::absolute(carrier, norm_ids, pairs)
}

/// Places each alternative in the class of the highest norm it weakly beats;
/// alternatives beating none fall below the lowest norm.
///
/// Classes are listed best first and labelled with their norm; empty classes
/// are omitted.
pub fn solve_rating(statement: &ProblemStatement, absolute: &Relation) -> Result<Partition> {
    if statement.kind != StatementKind::Rating {
        return Err(Error::UnsupportedStatement(format!("{} is not a rating", statement.kind)));
    }
    let norms = statement.norms.as_ref().ok_or_else(|| Error::MissingNorms("rating".into()))?;
    check_norm_chain(norms, None)?;
    let declared: Vec<ElementId> = norms.norms.iter().map(|n| eid(&n.name)).collect();
    let in_relation: BTreeSet<&ElementId> = absolute.norms().iter().collect();
    if absolute.kind() != RelationKind::Absolute || declared.iter().collect::<BTreeSet<_>>() != in_relation {
        return Err(Error::MalformedNorms("relation norms differ from the declared norm set".into()));
    }
    let k = declared.len();
    // Slot 0 is below every norm, slot i+1 is norm i.
    let mut slots: Vec<Vec<ElementId>> = vec![Vec::new(); k + 1];
    for x in absolute.carrier() {
        let level = declared.iter().rposition(|n| absolute.contains(x, n)).map_or(0, |i| i + 1);
        slots[level].push(x.clone());
    }
    let mut labels: Vec<String> = Vec::new();
    let mut classes = Vec::new();
    for (level, members) in slots.into_iter().enumerate().rev() {
        if members.is_empty() {
            continue;
        }
        labels.push(if level == 0 { format!("below {}", declared[0]) } else { declared[level - 1].to_string() });
        classes.push(members);
    }
    Ok(Partition::ordered(classes).with_labels(labels))
}
