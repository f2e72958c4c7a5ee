//! Seeded property checks over relations and aggregation. Each check runs
//! `cases` random instances and reports the first counterexample.

use std::collections::BTreeSet;

use decision_core::aggregation::{
    aggregate_hierarchy, aggregate_lexicographic, aggregate_majority, aggregate_weighted, function_from_relation,
    relation_from_function, Aggregator, DimensionTree, ScoreFunction, TreeNode,
};
use decision_core::formulation::Origin;
use decision_core::relation::{
    check_properties, decompose, levels_partition, nearest_total_preorder, transitive_closure, ElementId, Relation,
    RepairMode,
};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::*;

pub type Check = (&'static str, Result<(), String>);

fn run(cases: usize, seed: u64, mut f: impl FnMut(&mut ChaCha8Rng, usize) -> Result<(), String>) -> Result<(), String> {
    let mut g = rng(seed);
    for case in 0..cases {
        f(&mut g, case).map_err(|e| format!("case {case}: {e}"))?;
    }
    Ok(())
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn random_ranks(g: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let levels = g.random_range(1..=n);
    let mut ranks: Vec<usize> = (0..n).map(|i| if i < levels { i } else { g.random_range(0..levels) }).collect();
    ranks.shuffle(g);
    ranks
}

fn warshall_free_closure(m: &Matrix) -> Matrix {
    // Naive fixpoint: add (i, j) whenever some k links them, until stable.
    let n = m.len();
    let mut c = m.clone();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if !c[i][j] && (0..n).any(|k| c[i][k] && c[k][j]) {
                    c[i][j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return c;
        }
    }
}

fn ids_pair(r: &Relation, i: usize, j: usize) -> (ElementId, ElementId) {
    (r.carrier()[i].clone(), r.carrier()[j].clone())
}

pub fn relation_suite(cases: usize, seed: u64) -> Vec<Check> {
    vec![
        (
            "decompose splits every pair into strict, indifferent or incomparable",
            run(cases, seed, |g, _| {
                let n = g.random_range(1..=7);
                let m = random_matrix(g, n, 0.5);
                let r = to_relation(&m);
                let d = decompose(&r).map_err(|e| e.to_string())?;
                for i in 0..n {
                    for j in 0..n {
                        let (x, y) = ids_pair(&r, i, j);
                        let a = m[i][j] || i == j;
                        let b = m[j][i] || i == j;
                        ensure(d.strict.contains(&x, &y) == (a && !b), || format!("strict ({x},{y})"))?;
                        ensure(d.indifference.contains(&x, &y) == (a && b), || format!("indifference ({x},{y})"))?;
                        ensure(d.weak.contains(&x, &y) == a, || format!("weak ({x},{y})"))?;
                        if i < j {
                            let inc = d.incomparable.contains(&(x.clone(), y.clone()));
                            ensure(inc == (!a && !b), || format!("incomparable ({x},{y})"))?;
                        }
                    }
                }
                Ok(())
            }),
        ),
        (
            "transitive closure equals the naive fixpoint and is idempotent",
            run(cases, seed + 1, |g, _| {
                let n = g.random_range(1..=8);
                let m = random_matrix(g, n, 0.25);
                let r = to_relation(&m);
                let c = transitive_closure(&r).map_err(|e| e.to_string())?;
                ensure(from_relation(&c) == warshall_free_closure(&m), || "closure differs".into())?;
                let cc = transitive_closure(&c).map_err(|e| e.to_string())?;
                ensure(cc == c, || "closure not idempotent".into())
            }),
        ),
        (
            "property report agrees with direct checks",
            run(cases, seed + 2, |g, _| {
                let n = g.random_range(1..=6);
                // Mix arbitrary relations with weak orders so every flag is exercised.
                let m = if g.random_bool(0.5) {
                    random_matrix(g, n, 0.6)
                } else {
                    let ranks = random_ranks(g, n);
                    (0..n).map(|i| (0..n).map(|j| ranks[i] <= ranks[j]).collect()).collect()
                };
                let p = check_properties(&to_relation(&m)).map_err(|e| e.to_string())?;
                let refl = (0..n).all(|i| m[i][i]);
                let anti = (0..n).all(|i| (0..n).all(|j| i == j || !(m[i][j] && m[j][i])));
                let trans = warshall_free_closure(&m) == m;
                let complete = (0..n).all(|i| (0..n).all(|j| i == j || m[i][j] || m[j][i]));
                ensure(
                    (p.reflexive, p.antisymmetric, p.transitive, p.complete) == (refl, anti, trans, complete),
                    || format!("{p:?}"),
                )?;
                ensure(p.total_preorder == (refl && trans && complete), || "total_preorder flag".into())?;
                ensure(p.partial_order == (refl && anti && trans), || "partial_order flag".into())
            }),
        ),
        (
            "repair yields a total preorder at the exhaustive minimum distance",
            run(cases, seed + 3, |g, _| {
                let n = g.random_range(1..=6);
                let m = random_matrix(g, n, 0.5);
                let r = to_relation(&m);
                let t = nearest_total_preorder(&r, RepairMode::exact()).map_err(|e| e.to_string())?;
                let p = check_properties(&t).map_err(|e| e.to_string())?;
                ensure(p.total_preorder, || "not a total preorder".into())?;
                let levels = levels_partition(&t).map_err(|e| e.to_string())?;
                let mut ranks = vec![0; n];
                for (k, class) in levels.classes.iter().enumerate() {
                    for e in class {
                        ranks[r.index_of(e).unwrap()] = k;
                    }
                }
                let (best, best_ranks) = oracle_nearest_ranks(&m);
                ensure(preorder_distance(&m, &ranks) == best, || "distance above the minimum".into())?;
                ensure(ranks == best_ranks, || format!("tie-break: {ranks:?} vs {best_ranks:?}"))
            }),
        ),
        (
            "total preorders are fixed points of repair and round-trip through levels",
            run(cases, seed + 4, |g, _| {
                let n = g.random_range(1..=9);
                let ranks = random_ranks(g, n);
                let r = Relation::from_ranks(carrier(n), &ranks).map_err(|e| e.to_string())?;
                let t = nearest_total_preorder(&r, RepairMode::default()).map_err(|e| e.to_string())?;
                ensure(t == r, || "repair moved a total preorder".into())?;
                let levels = levels_partition(&r).map_err(|e| e.to_string())?;
                ensure(partition_indices(&levels, &r) == classes_from_ranks(&dense(&ranks)), || {
                    "levels differ from ranks".into()
                })
            }),
        ),
        (
            "closure adds only path-implied pairs, each one needed",
            run(cases, seed + 6, |g, _| {
                let n = g.random_range(1..=5);
                let m = random_matrix(g, n, 0.3);
                let c = from_relation(&transitive_closure(&to_relation(&m)).map_err(|e| e.to_string())?);
                for i in 0..n {
                    let reach = reachable(&m, i);
                    for j in 0..n {
                        ensure(c[i][j] == reach[j], || format!("({i},{j})"))?;
                        if c[i][j] && !m[i][j] {
                            let mut without = c.clone();
                            without[i][j] = false;
                            ensure(warshall_free_closure(&without) != without, || {
                                format!("dropping added ({i},{j}) keeps transitivity")
                            })?;
                        }
                    }
                }
                Ok(())
            }),
        ),
        ("every weak order on up to six elements round-trips through a function", all_weak_orders_round_trip()),
        (
            "heuristic repair always returns a total preorder",
            run(cases, seed + 5, |g, _| {
                let n = g.random_range(1..=14);
                let r = to_relation(&random_matrix(g, n, 0.5));
                let t = nearest_total_preorder(&r, RepairMode::Heuristic).map_err(|e| e.to_string())?;
                ensure(check_properties(&t).map_err(|e| e.to_string())?.total_preorder, || "not total".into())
            }),
        ),
    ]
}

/// Targets reachable from `i` by a non-empty path.
fn reachable(m: &Matrix, i: usize) -> Vec<bool> {
    let n = m.len();
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&j| m[i][j]).collect();
    while let Some(j) = stack.pop() {
        if !seen[j] {
            seen[j] = true;
            stack.extend((0..n).filter(|&k| m[j][k]));
        }
    }
    seen
}

fn all_weak_orders_round_trip() -> Result<(), String> {
    let mut count = 0;
    for n in 1..=6 {
        let mut bad = None;
        for_each_dense_ranks(n, |ranks| {
            if bad.is_some() {
                return;
            }
            count += 1;
            let check = || -> Result<(), String> {
                let r = Relation::from_ranks(carrier(n), ranks).map_err(|e| e.to_string())?;
                let f = function_from_relation(&r).map_err(|e| e.to_string())?;
                ensure(relation_from_function(&f) == r, || format!("{ranks:?}"))?;
                let levels = levels_partition(&r).map_err(|e| e.to_string())?;
                ensure(partition_indices(&levels, &r) == classes_from_ranks(ranks), || format!("levels {ranks:?}"))
            };
            bad = check().err();
        });
        if let Some(e) = bad {
            return Err(e);
        }
    }
    // Ordered Bell numbers 1, 3, 13, 75, 541, 4683.
    ensure(count == 5316, || format!("enumerated {count} weak orders"))
}

fn dense(ranks: &[usize]) -> Vec<usize> {
    let distinct: BTreeSet<usize> = ranks.iter().copied().collect();
    let order: Vec<usize> = distinct.into_iter().collect();
    ranks.iter().map(|r| order.binary_search(r).unwrap()).collect()
}

fn random_profile(g: &mut ChaCha8Rng) -> (usize, Vec<Matrix>) {
    let n = g.random_range(2..=6);
    let m = g.random_range(1..=5);
    let dims = (0..m)
        .map(|_| {
            if g.random_bool(0.5) {
                // Dimension relations are weak preferences, hence reflexive.
                let mut m = random_matrix(g, n, 0.5);
                (0..n).for_each(|i| m[i][i] = true);
                m
            } else {
                let ranks = random_ranks(g, n);
                (0..n).map(|i| (0..n).map(|j| ranks[i] <= ranks[j]).collect()).collect()
            }
        })
        .collect();
    (n, dims)
}

/// Integer-valued functions with dyadic weights, so sums are exact.
fn integer_functions(g: &mut ChaCha8Rng) -> (usize, usize, Vec<ScoreFunction>, Vec<f64>) {
    let n = g.random_range(2..=7);
    let m = g.random_range(1..=4);
    let ids = carrier(n);
    let functions = (0..m)
        .map(|_| ScoreFunction::new(ids.clone(), (0..n).map(|_| g.random_range(0..=10) as f64).collect()).unwrap())
        .collect();
    // Split 8 into m parts, zeros allowed.
    let mut cuts: Vec<u32> = (0..m - 1).map(|_| g.random_range(0..=8)).collect();
    cuts.push(0);
    cuts.push(8);
    cuts.sort();
    let w = cuts.windows(2).map(|c| (c[1] - c[0]) as f64 / 8.0).collect();
    (n, m, functions, w)
}

fn votes(dims: &[Matrix], i: usize, j: usize) -> usize {
    dims.iter().filter(|d| d[i][j]).count()
}

pub fn aggregation_suite(cases: usize, seed: u64) -> Vec<Check> {
    vec![
        (
            "majority keeps exactly the pairs with enough votes and no veto",
            run(cases, seed, |g, _| {
                let (n, dims) = random_profile(g);
                let t = [0.5, 0.6, 2.0 / 3.0, 0.75, 1.0][g.random_range(0..5)];
                let rels: Vec<Relation> = dims.iter().map(to_relation).collect();
                let ids = carrier(n);
                let vetoes: BTreeSet<(ElementId, ElementId)> = (0..g.random_range(0..3))
                    .map(|_| (ids[g.random_range(0..n)].clone(), ids[g.random_range(0..n)].clone()))
                    .collect();
                let out = from_relation(&aggregate_majority(&rels, t, &vetoes).map_err(|e| e.to_string())?);
                for i in 0..n {
                    for j in 0..n {
                        // Compare counts, not ratios, to stay clear of rounding.
                        let need = (t * dims.len() as f64 - 1e-9).ceil() as usize;
                        let want = votes(&dims, i, j) >= need && !vetoes.contains(&(ids[i].clone(), ids[j].clone()));
                        ensure(out[i][j] == want, || format!("pair ({i},{j}) at threshold {t}"))?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "majority is unanimous: pairs every dimension holds survive",
            run(cases, seed + 1, |g, _| {
                let (n, dims) = random_profile(g);
                let rels: Vec<Relation> = dims.iter().map(to_relation).collect();
                let out = from_relation(&aggregate_majority(&rels, 1.0, &BTreeSet::new()).map_err(|e| e.to_string())?);
                for i in 0..n {
                    for j in 0..n {
                        ensure(out[i][j] == (votes(&dims, i, j) == dims.len()), || format!("({i},{j})"))?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "majority is anonymous: permuting dimensions changes nothing",
            run(cases, seed + 2, |g, _| {
                let (_, dims) = random_profile(g);
                let mut rels: Vec<Relation> = dims.iter().map(to_relation).collect();
                let a = aggregate_majority(&rels, 0.5, &BTreeSet::new()).map_err(|e| e.to_string())?;
                rels.shuffle(g);
                let b = aggregate_majority(&rels, 0.5, &BTreeSet::new()).map_err(|e| e.to_string())?;
                ensure(a == b, || "order of dimensions mattered".into())
            }),
        ),
        (
            "lexicographic decides on the first non-indifferent dimension",
            run(cases, seed + 3, |g, _| {
                let (n, dims) = random_profile(g);
                let rels: Vec<Relation> = dims.iter().map(to_relation).collect();
                let out = from_relation(&aggregate_lexicographic(&rels).map_err(|e| e.to_string())?);
                for i in 0..n {
                    for j in 0..n {
                        let decisive = dims.iter().find(|d| !(d[i][j] && d[j][i]));
                        let want = match decisive {
                            None => true,
                            Some(d) => d[i][j],
                        };
                        ensure(out[i][j] == want, || format!("({i},{j})"))?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "lexicographic with a linear order first is that order",
            run(cases, seed + 4, |g, _| {
                let (n, mut dims) = random_profile(g);
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(g);
                let first: Matrix = (0..n).map(|i| (0..n).map(|j| order[i] <= order[j]).collect()).collect();
                dims.insert(0, first.clone());
                let rels: Vec<Relation> = dims.iter().map(to_relation).collect();
                let out = from_relation(&aggregate_lexicographic(&rels).map_err(|e| e.to_string())?);
                ensure(out == first, || "first dimension did not dictate".into())
            }),
        ),
        (
            "weighted aggregation orders by the weighted level sum",
            run(cases, seed + 5, |g, _| {
                let n = g.random_range(2..=7);
                let m = g.random_range(1..=4);
                let rank_sets: Vec<Vec<usize>> = (0..m).map(|_| dense(&random_ranks(g, n))).collect();
                let raw: Vec<f64> = (0..m).map(|_| g.random_range(1..=10) as f64).collect();
                let total: f64 = raw.iter().sum();
                let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
                let ids = carrier(n);
                let mut functions = Vec::new();
                for ranks in &rank_sets {
                    let r = Relation::from_ranks(ids.clone(), ranks).map_err(|e| e.to_string())?;
                    functions.push(function_from_relation(&r).map_err(|e| e.to_string())?);
                }
                let f = aggregate_weighted(&functions, &w, true).map_err(|e| e.to_string())?;
                let out = from_relation(&relation_from_function(&f));
                let mut score = vec![0.0; n];
                for (ranks, wj) in rank_sets.iter().zip(&w) {
                    let top = *ranks.iter().max().unwrap();
                    for i in 0..n {
                        score[i] += wj * (top - ranks[i]) as f64;
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        ensure(out[i][j] == (score[i] >= score[j]), || format!("({i},{j}) {score:?}"))?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "adding vetoes only removes pairs, and removes the vetoed ones",
            run(cases, seed + 8, |g, _| {
                let (n, dims) = random_profile(g);
                let rels: Vec<Relation> = dims.iter().map(to_relation).collect();
                let ids = carrier(n);
                let t = [0.5, 0.75, 1.0][g.random_range(0..3)];
                let mut vetoes = BTreeSet::new();
                let mut prev = from_relation(&aggregate_majority(&rels, t, &vetoes).map_err(|e| e.to_string())?);
                for _ in 0..3 {
                    let (i, j) = (g.random_range(0..n), g.random_range(0..n));
                    vetoes.insert((ids[i].clone(), ids[j].clone()));
                    let next = from_relation(&aggregate_majority(&rels, t, &vetoes).map_err(|e| e.to_string())?);
                    ensure(!next[i][j], || format!("vetoed ({i},{j}) survived"))?;
                    for a in 0..n {
                        for b in 0..n {
                            ensure(!next[a][b] || prev[a][b], || format!("veto added ({a},{b})"))?;
                        }
                    }
                    prev = next;
                }
                Ok(())
            }),
        ),
        (
            "weighted aggregation preserves dominance",
            run(cases, seed + 9, |g, _| {
                let (n, m, functions, w) = integer_functions(g);
                let f = aggregate_weighted(&functions, &w, true).map_err(|e| e.to_string())?;
                let out = from_relation(&relation_from_function(&f));
                for i in 0..n {
                    for j in 0..n {
                        let weakly = (0..m).all(|d| functions[d].values[i] >= functions[d].values[j]);
                        let strictly = weakly && (0..m).any(|d| w[d] > 0.0 && functions[d].values[i] > functions[d].values[j]);
                        ensure(!weakly || out[i][j], || format!("dominance ({i},{j}) lost"))?;
                        ensure(!strictly || !out[j][i], || format!("strict dominance ({i},{j}) lost"))?;
                    }
                }
                Ok(())
            }),
        ),
        (
            "a common positive affine rescaling keeps the weighted relation",
            run(cases, seed + 10, |g, _| {
                let (_, _, functions, w) = integer_functions(g);
                let a = [0.5, 2.0, 3.0, 4.0][g.random_range(0..4)];
                let b = [-7.0, 0.0, 12.0][g.random_range(0..3)];
                let scaled: Vec<ScoreFunction> = functions
                    .iter()
                    .map(|f| ScoreFunction::new(f.carrier.clone(), f.values.iter().map(|v| a * v + b).collect()))
                    .collect::<decision_core::Result<_>>()
                    .map_err(|e| e.to_string())?;
                let before = aggregate_weighted(&functions, &w, true).map_err(|e| e.to_string())?;
                let after = aggregate_weighted(&scaled, &w, true).map_err(|e| e.to_string())?;
                ensure(relation_from_function(&before) == relation_from_function(&after), || {
                    format!("a={a}, b={b} changed the order")
                })
            }),
        ),
        (
            "a one-level hierarchy equals the flat aggregate",
            run(cases, seed + 6, |g, case| {
                let (_, dims) = random_profile(g);
                let names: Vec<String> = (0..dims.len()).map(|j| format!("d{j}")).collect();
                let inputs: Vec<(String, Relation)> =
                    names.iter().cloned().zip(dims.iter().map(to_relation)).collect();
                let agg = if case % 2 == 0 {
                    Aggregator::MajorityRelational { threshold: 0.5 }
                } else {
                    Aggregator::Lexicographic { importance: names.clone() }
                };
                let mut nodes: Vec<TreeNode> =
                    inputs.iter().map(|(n, r)| TreeNode::leaf(n, Origin::Value, r.clone())).collect();
                let child_refs: Vec<&str> = names.iter().map(String::as_str).collect();
                nodes.push(TreeNode::internal("root", &child_refs, Some(agg.clone())));
                let tree = DimensionTree { root: "root".into(), nodes, joint_groups: Vec::new() };
                let folded = aggregate_hierarchy(&tree).map_err(|e| e.to_string())?;
                ensure(folded == agg.apply(&inputs).map_err(|e| e.to_string())?, || "hierarchy differs".into())
            }),
        ),
        (
            "relation to function and back preserves a total preorder",
            run(cases, seed + 7, |g, _| {
                let n = g.random_range(1..=8);
                let r = Relation::from_ranks(carrier(n), &random_ranks(g, n)).map_err(|e| e.to_string())?;
                let f: ScoreFunction = function_from_relation(&r).map_err(|e| e.to_string())?;
                ensure(relation_from_function(&f) == r, || "round trip changed the relation".into())
            }),
        ),
    ]
}
