use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::{Partition, Relation};

/// Largest carrier clustered by exhaustive search.
pub const EXACT_CLUSTERING_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ClusteringMode {
    /// Every partition into `k` blocks; ties go to the partition whose
    /// restricted-growth string is lexicographically smallest.
    Exact,
    /// Medoid swapping from `restarts` seeded random starts.
    Heuristic { seed: u64, restarts: usize },
    /// Exact up to [`EXACT_CLUSTERING_CAP`] elements, heuristic beyond.
    Auto { seed: u64 },
}

impl Default for ClusteringMode {
    fn default() -> Self {
        ClusteringMode::Auto { seed: 0 }
    }
}

/// Number of elements `z` that `x` and `y` relate to differently, looking at
/// both directions of the relation.
pub fn profile_distance(r: &Relation, x: usize, y: usize) -> usize {
    let m = r.matrix();
    distance_matrix_entry(&m, x, y)
}

fn distance_matrix_entry(m: &crate::relation::Matrix, x: usize, y: usize) -> usize {
    (0..m.n)
        .filter(|&z| (m.get(x, z), m.get(z, x)) != (m.get(y, z), m.get(z, y)))
        .count()
}

fn distances(r: &Relation) -> Vec<Vec<usize>> {
    let m = r.matrix();
    (0..m.n).map(|x| (0..m.n).map(|y| distance_matrix_entry(&m, x, y)).collect()).collect()
}

fn block_cost(d: &[Vec<usize>], block: &[usize]) -> usize {
    block
        .iter()
        .map(|&m| block.iter().map(|&x| d[x][m]).sum::<usize>())
        .min()
        .unwrap_or(0)
}

/// Total distance of every element to the best medoid of its class.
pub fn clustering_cost(r: &Relation, p: &Partition) -> Result<usize> {
    p.validate(r.carrier())?;
    let d = distances(r);
    let mut total = 0;
    for class in &p.classes {
        let idx: Vec<usize> = class.iter().map(|e| r.index_of(e).expect("validated")).collect();
        total += block_cost(&d, &idx);
    }
    Ok(total)
}

fn partition_from_labels(r: &Relation, labels: &[usize]) -> Partition {
    // Renumber blocks by first appearance so the output is canonical.
    let mut renumber: Vec<Option<usize>> = vec![None; labels.len()];
    let mut classes: Vec<Vec<_>> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        let b = *renumber[l].get_or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[b].push(r.carrier()[i].clone());
    }
    Partition::unordered(classes)
}

struct Exhaustive<'a> {
    d: &'a [Vec<usize>],
    k: usize,
    labels: Vec<usize>,
    best: Option<(usize, Vec<usize>)>,
}

impl Exhaustive<'_> {
    fn cost(&self) -> usize {
        (0..self.k)
            .map(|b| {
                let block: Vec<usize> = (0..self.labels.len()).filter(|&i| self.labels[i] == b).collect();
                block_cost(self.d, &block)
            })
            .sum()
    }

    fn visit(&mut self, i: usize, used: usize) {
        let n = self.labels.len();
        if i == n {
            if used == self.k {
                let c = self.cost();
                if self.best.as_ref().is_none_or(|(b, _)| c < *b) {
                    self.best = Some((c, self.labels.clone()));
                }
            }
            return;
        }
        // Not enough elements left to open the remaining blocks.
        if self.k - used.min(self.k) > n - i {
            return;
        }
        let top = if used < self.k { used } else { used - 1 };
        for b in 0..=top {
            self.labels[i] = b;
            self.visit(i + 1, used.max(b + 1));
        }
    }
}

fn assign(d: &[Vec<usize>], medoids: &[usize]) -> (usize, Vec<usize>) {
    let n = d.len();
    let mut labels = vec![0; n];
    let mut cost = 0;
    for x in 0..n {
        let (b, c) = medoids
            .iter()
            .enumerate()
            .map(|(b, &m)| (b, if m == x { 0 } else { d[x][m] }))
            .min_by_key(|&(b, c)| (c, if medoids[b] == x { 0 } else { 1 }, b))
            .expect("k >= 1");
        labels[x] = b;
        cost += c;
    }
    (cost, labels)
}

fn medoid_swap(d: &[Vec<usize>], k: usize, seed: u64, restarts: usize) -> Vec<usize> {
    let n = d.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Vec<usize>)> = None;
    for _ in 0..restarts.max(1) {
        let mut pool: Vec<usize> = (0..n).collect();
        pool.shuffle(&mut rng);
        let mut medoids: Vec<usize> = pool[..k].to_vec();
        medoids.sort_unstable();
        let (mut cost, mut labels) = assign(d, &medoids);
        loop {
            let mut improved = None;
            for slot in 0..k {
                for o in 0..n {
                    if medoids.contains(&o) {
                        continue;
                    }
                    let mut trial = medoids.clone();
                    trial[slot] = o;
                    let (c, l) = assign(d, &trial);
                    if c < improved.as_ref().map_or(cost, |(bc, _, _)| *bc) {
                        improved = Some((c, l, trial));
                    }
                }
            }
            match improved {
                Some((c, l, m)) => {
                    cost = c;
                    labels = l;
                    medoids = m;
                }
                None => break,
            }
        }
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, labels));
        }
    }
    best.expect("at least one restart").1
}

/// k-medoids over the preference-profile distance.
pub fn solve_clustering(r: &Relation, k: usize, mode: ClusteringMode) -> Result<Partition> {
    r.require_homogeneous("solve_clustering")?;
    let n = r.carrier().len();
    if k == 0 || k > n {
        return Err(Error::BadK { k, n });
    }
    let d = distances(r);
    let exact = match mode {
        ClusteringMode::Exact => {
            if n > EXACT_CLUSTERING_CAP {
                return Err(Error::CapExceeded { what: "carrier".into(), size: n, cap: EXACT_CLUSTERING_CAP });
            }
            true
        }
        ClusteringMode::Heuristic { .. } => false,
        ClusteringMode::Auto { .. } => n <= EXACT_CLUSTERING_CAP,
    };
    let labels = if exact {
        let mut search = Exhaustive { d: &d, k, labels: vec![0; n], best: None };
        search.visit(0, 0);
        search.best.expect("1 <= k <= n admits a partition").1
    } else {
        let (seed, restarts) = match mode {
            ClusteringMode::Heuristic { seed, restarts } => (seed, restarts),
            ClusteringMode::Auto { seed } => (seed, 8),
            ClusteringMode::Exact => unreachable!(),
        };
        medoid_swap(&d, k, seed, restarts)
    };
    Ok(partition_from_labels(r, &labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::eids;

    fn cliques() -> Relation {
        let c = eids(&["a", "b", "c", "d", "e"]);
        Relation::from_levels(c.clone(), &[eids(&["a", "b", "c"]), eids(&["d", "e"])]).unwrap()
    }

    #[test]
    fn indifference_everywhere_is_one_cluster() {
        let c = eids(&["a", "b", "c"]);
        let r = Relation::from_levels(c.clone(), std::slice::from_ref(&c)).unwrap();
        let p = solve_clustering(&r, 1, ClusteringMode::Exact).unwrap();
        assert_eq!(p.classes, vec![c]);
    }

    #[test]
    fn two_cliques_split_cleanly() {
        let p = solve_clustering(&cliques(), 2, ClusteringMode::Exact).unwrap();
        assert_eq!(p.classes, vec![eids(&["a", "b", "c"]), eids(&["d", "e"])]);
        assert!(!p.ordered);
        let h = solve_clustering(&cliques(), 2, ClusteringMode::Heuristic { seed: 3, restarts: 4 }).unwrap();
        assert_eq!(clustering_cost(&cliques(), &h).unwrap(), 0);
    }

    #[test]
    fn k_out_of_range() {
        assert_eq!(solve_clustering(&cliques(), 0, ClusteringMode::Exact), Err(Error::BadK { k: 0, n: 5 }));
        assert_eq!(solve_clustering(&cliques(), 6, ClusteringMode::Exact), Err(Error::BadK { k: 6, n: 5 }));
    }
}
