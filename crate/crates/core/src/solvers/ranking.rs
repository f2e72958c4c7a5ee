use crate::error::{Error, Result};
use crate::formulation::{ProblemStatement, StatementKind, ENUMERATION_CAP};
use crate::relation::{levels_partition, nearest_total_preorder, Partition, Relation, RepairMode};

/// Merges the lowest classes until at most `k` remain. Partitions that
/// already have `k` classes or fewer are returned unchanged.
pub fn merge_trailing_classes(mut p: Partition, k: usize) -> Partition {
    if k == 0 || p.classes.len() <= k {
        return p;
    }
    let tail: Vec<_> = p.classes.drain(k - 1..).flatten().collect();
    p.classes.push(tail);
    p
}

/// Repairs `r` into the nearest total preorder and reads off its levels.
pub fn solve_ranking(statement: &ProblemStatement, r: &Relation, mode: RepairMode) -> Result<Partition> {
    if statement.kind != StatementKind::Ranking {
        return Err(Error::UnsupportedStatement(format!("{} is not a ranking", statement.kind)));
    }
    let n = r.carrier().len();
    if n as u64 > ENUMERATION_CAP {
        return Err(Error::CapExceeded { what: "carrier".into(), size: n, cap: ENUMERATION_CAP as usize });
    }
    let repaired = nearest_total_preorder(r, mode)?;
    let levels = levels_partition(&repaired)?;
    Ok(match statement.class_count {
        Some(k) => merge_trailing_classes(levels, k),
        None => levels,
    })
}
