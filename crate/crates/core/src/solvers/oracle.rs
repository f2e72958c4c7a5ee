//! Exhaustive search used as ground truth for the solvers. Each oracle
//! enumerates every admissible answer of the required shape and applies the
//! solver's scoring and tie-break, so equality with the solver is exact.

use crate::error::{Error, Result};
use crate::formulation::ProblemStatement;
use crate::relation::{levels_partition, Partition, Relation};

use super::clustering::clustering_cost;
use super::covering::{CoverMode, CoveringInstance, CoveringSolution};
use super::ranking::merge_trailing_classes;

pub const ORACLE_RELATION_CAP: usize = 8;
pub const ORACLE_COVERING_CAP: usize = 20;

fn cap(what: &str, size: usize, cap: usize) -> Result<()> {
    if size > cap {
        Err(Error::CapExceeded { what: what.into(), size, cap })
    } else {
        Ok(())
    }
}

/// Calls `f` with every dense rank vector of length `n`, in lexicographic order.
fn for_each_dense_ranking(n: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(ranks: &mut Vec<usize>, n: usize, f: &mut dyn FnMut(&[usize])) {
        let i = ranks.len();
        if i == n {
            let max = ranks.iter().copied().max().unwrap_or(0);
            if (0..=max).all(|v| ranks.contains(&v)) {
                f(ranks);
            }
            return;
        }
        for v in 0..n {
            let max = ranks.iter().copied().max().map_or(v, |m| m.max(v));
            let used = ranks.iter().chain(std::iter::once(&v)).collect::<std::collections::BTreeSet<_>>().len();
            if max + 1 - used > n - i - 1 {
                continue;
            }
            ranks.push(v);
            go(ranks, n, f);
            ranks.pop();
        }
    }
    go(&mut Vec::with_capacity(n), n, f);
}

/// Nearest total preorder by enumerating every ordered partition.
pub fn brute_force_ranking(statement: &ProblemStatement, r: &Relation) -> Result<Partition> {
    let n = r.carrier().len();
    cap("carrier", n, ORACLE_RELATION_CAP)?;
    let closed = r.clone().reflexive_closure();
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut failure = None;
    for_each_dense_ranking(n, &mut |ranks| {
        match Relation::from_ranks(closed.carrier().to_vec(), ranks) {
            Ok(candidate) => {
                let d = closed.symmetric_difference(&candidate);
                if best.as_ref().is_none_or(|(b, _)| d < *b) {
                    best = Some((d, ranks.to_vec()));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let ranks = best.map(|(_, r)| r).unwrap_or_default();
    let levels = levels_partition(&Relation::from_ranks(closed.carrier().to_vec(), &ranks)?)?;
    Ok(match statement.class_count {
        Some(k) => merge_trailing_classes(levels, k),
        None => levels,
    })
}

/// Minimum-cost clustering over every surjection onto `k` labels.
pub fn brute_force_clustering(r: &Relation, k: usize) -> Result<Partition> {
    let n = r.carrier().len();
    cap("carrier", n, ORACLE_RELATION_CAP)?;
    if k == 0 || k > n {
        return Err(Error::BadK { k, n });
    }
    let mut best: Option<(usize, Vec<usize>)> = None;
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut labels = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            labels.push(c % k);
            c /= k;
        }
        // Canonical form: blocks numbered by first appearance.
        let mut map = vec![usize::MAX; k];
        let mut next = 0;
        let rgs: Vec<usize> = labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        if next != k {
            continue;
        }
        let mut classes = vec![Vec::new(); k];
        for (i, &b) in rgs.iter().enumerate() {
            classes[b].push(r.carrier()[i].clone());
        }
        let cost = clustering_cost(r, &Partition::unordered(classes))?;
        let better = match &best {
            None => true,
            Some((bc, brgs)) => cost < *bc || (cost == *bc && rgs < *brgs),
        };
        if better {
            best = Some((cost, rgs));
        }
    }
    let (_, rgs) = best.expect("k <= n admits a surjection");
    let mut classes = vec![Vec::new(); k];
    for (i, &b) in rgs.iter().enumerate() {
        classes[b].push(r.carrier()[i].clone());
    }
    Ok(Partition::unordered(classes))
}

/// Optimum over all `2^n` opening sets.
pub fn brute_force_covering(inst: &CoveringInstance) -> Result<CoveringSolution> {
    inst.validate()?;
    let n = inst.len();
    cap("districts", n, ORACLE_COVERING_CAP)?;
    let masks = inst.cover_masks();
    let all = inst.all_mask();
    let count = 1usize << n;
    let mut covered = vec![0u64; count];
    let mut best: Option<(CoveringSolution, u64)> = None;
    for open in 0..count {
        if open > 0 {
            let low = open.trailing_zeros() as usize;
            covered[open] = covered[open & (open - 1)] | masks[low];
        }
        let open = open as u64;
        if inst.mode == CoverMode::FullCover && covered[open as usize] != all {
            continue;
        }
        let s = inst.solution(open);
        if !inst.within_budget(s.cost) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((b, bopen)) => {
                let key = (inst.mode == CoverMode::MaxCover).then_some(());
                let more = key.is_some() && s.covered > b.covered + 1e-9;
                let same = key.is_none() || (s.covered - b.covered).abs() <= 1e-9;
                more || (same && s.opened < b.opened) || (same && s.opened == b.opened && {
                    // Lowest differing index decides: the set holding it sorts first.
                    let diff = open ^ bopen;
                    diff != 0 && open & (diff & diff.wrapping_neg()) != 0
                })
            }
        };
        if better {
            best = Some((s, open));
        }
    }
    let s = best
        .map(|(s, _)| s)
        .ok_or_else(|| Error::Infeasible("no affordable opening set covers every district".into()))?;
    inst.check_solution(&s)?;
    Ok(s)
}
