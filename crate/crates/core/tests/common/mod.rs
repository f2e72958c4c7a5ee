//! Test-side ground truth. Everything here works on plain boolean matrices
//! and never calls into the solvers it is used to check.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod planted;
pub mod props;
pub mod sessions;

use decision_core::relation::{ElementId, Partition, Relation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Matrix = Vec<Vec<bool>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn carrier(n: usize) -> Vec<ElementId> {
    (0..n).map(|i| ElementId::new(format!("e{i}")).unwrap()).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Matrix {
    (0..n).map(|_| (0..n).map(|_| rng.random_bool(density)).collect()).collect()
}

pub fn to_relation(m: &Matrix) -> Relation {
    let ids = carrier(m.len());
    let mut pairs = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &b) in row.iter().enumerate() {
            if b {
                pairs.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    Relation::new(ids, pairs).unwrap()
}

pub fn from_relation(r: &Relation) -> Matrix {
    let n = r.carrier().len();
    let mut m = vec![vec![false; n]; n];
    for (x, y) in r.pairs() {
        m[r.index_of(x).unwrap()][r.index_of(y).unwrap()] = true;
    }
    m
}

/// Calls `f` on every vector in `{0..base}^n`, in lexicographic order.
fn for_each_vector(n: usize, base: usize, mut f: impl FnMut(&[usize])) {
    let mut v = vec![0; n];
    loop {
        f(&v);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            v[i] += 1;
            if v[i] < base {
                break;
            }
            v[i] = 0;
        }
    }
}

/// Calls `f` on every dense rank vector of length `n`, i.e. every weak order.
pub fn for_each_dense_ranks(n: usize, mut f: impl FnMut(&[usize])) {
    for_each_vector(n, n.max(1), |v| {
        if is_dense(v) {
            f(v)
        }
    });
}

fn is_dense(ranks: &[usize]) -> bool {
    let max = ranks.iter().copied().max().unwrap_or(0);
    (0..=max).all(|r| ranks.contains(&r))
}

/// Pairs on which `m` (reflexively closed) and the weak order `ranks` disagree.
pub fn preorder_distance(m: &Matrix, ranks: &[usize]) -> usize {
    let n = m.len();
    let mut d = 0;
    for i in 0..n {
        for j in 0..n {
            let have = m[i][j] || i == j;
            if have != (ranks[i] <= ranks[j]) {
                d += 1;
            }
        }
    }
    d
}

/// Closest weak order; ties go to the lexicographically smallest dense rank vector.
pub fn oracle_nearest_ranks(m: &Matrix) -> (usize, Vec<usize>) {
    let n = m.len();
    let mut best: Option<(usize, Vec<usize>)> = None;
    for_each_vector(n, n.max(1), |v| {
        if !is_dense(v) {
            return;
        }
        let d = preorder_distance(m, v);
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, v.to_vec()));
        }
    });
    best.unwrap()
}

/// Classes by rank, best first, members in carrier order.
pub fn classes_from_ranks(ranks: &[usize]) -> Vec<Vec<usize>> {
    let levels = ranks.iter().copied().max().map_or(0, |m| m + 1);
    (0..levels).map(|r| (0..ranks.len()).filter(|&i| ranks[i] == r).collect()).collect()
}

pub fn partition_indices(p: &Partition, r: &Relation) -> Vec<Vec<usize>> {
    p.classes.iter().map(|c| c.iter().map(|e| r.index_of(e).unwrap()).collect()).collect()
}

pub fn profile_distance(m: &Matrix, x: usize, y: usize) -> usize {
    (0..m.len()).filter(|&z| (m[x][z], m[z][x]) != (m[y][z], m[z][y])).count()
}

/// Sum over blocks of the distance to the best medoid.
pub fn medoid_cost(m: &Matrix, labels: &[usize]) -> usize {
    let blocks = labels.iter().copied().max().map_or(0, |b| b + 1);
    (0..blocks)
        .map(|b| {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == b).collect();
            members
                .iter()
                .map(|&c| members.iter().map(|&x| profile_distance(m, x, c)).sum::<usize>())
                .min()
                .unwrap_or(0)
        })
        .sum()
}

fn is_rgs_with(labels: &[usize], k: usize) -> bool {
    let mut next = 0;
    for &l in labels {
        if l > next {
            return false;
        }
        if l == next {
            next += 1;
        }
    }
    next == k
}

/// Cheapest clustering into exactly `k` blocks, as the smallest
/// restricted-growth label string among the optima.
pub fn oracle_clustering(m: &Matrix, k: usize) -> (usize, Vec<usize>) {
    let mut best: Option<(usize, Vec<usize>)> = None;
    for_each_vector(m.len(), k, |v| {
        if !is_rgs_with(v, k) {
            return;
        }
        let c = medoid_cost(m, v);
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, v.to_vec()));
        }
    });
    best.unwrap()
}

/// Label vector of a partition, blocks numbered by first appearance.
pub fn labels_of(p: &Partition, r: &Relation) -> Vec<usize> {
    let n = r.carrier().len();
    let mut block_of = vec![usize::MAX; n];
    for (b, class) in p.classes.iter().enumerate() {
        for e in class {
            block_of[r.index_of(e).unwrap()] = b;
        }
    }
    let mut renumber = std::collections::HashMap::new();
    block_of
        .iter()
        .map(|b| {
            let next = renumber.len();
            *renumber.entry(*b).or_insert(next)
        })
        .collect()
}

/// Fewest openings covering every district, by scanning all subsets.
/// `gamma[i][j]`: an opening at `j` serves `i`.
pub fn oracle_min_cover(gamma: &Matrix) -> Option<u32> {
    let n = gamma.len();
    assert!(n <= 24);
    let serves: Vec<u32> = (0..n)
        .map(|j| (0..n).filter(|&i| gamma[i][j]).fold(0u32, |acc, i| acc | (1 << i)))
        .collect();
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut covered = vec![0u32; 1 << n];
    let mut best: Option<u32> = None;
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        covered[mask] = covered[mask & (mask - 1)] | serves[low];
        if covered[mask] == all {
            let c = mask.count_ones();
            if best.is_none_or(|b| c < b) {
                best = Some(c);
            }
        }
    }
    best
}

pub fn covers_everything(gamma: &Matrix, open: &[usize]) -> bool {
    (0..gamma.len()).all(|i| open.iter().any(|&j| gamma[i][j]))
}
