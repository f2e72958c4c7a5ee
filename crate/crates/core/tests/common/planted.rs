//! Planted ground truths for the primitive-information layer.

use decision_core::formulation::{Attribute, Evaluator};
use decision_core::primitives::{
    derive_importance, derive_value_function, ImportanceOrder, PrimitiveBase, SwapAnswer, SwapProtocol, SwapQuery,
};
use decision_core::relation::{ElementId, Relation};
use decision_core::{Error, Result};
use rand::seq::IndexedRandom;
use rand::Rng;

use super::rng;

/// How the joint preference over two attributes was generated.
#[derive(Clone, Copy, Debug)]
pub enum Truth {
    /// `first` strictly dominates: compare on it, then on the other.
    Lexicographic { first_is_h: bool },
    /// `w_h * h + w_g * g`.
    Additive { w_h: u32, w_g: u32 },
}

pub struct ImportanceInstance {
    pub truth: Truth,
    /// `(h level, g level)` per alternative.
    pub points: Vec<(u32, u32)>,
    pub base: PrimitiveBase,
}

impl ImportanceInstance {
    fn joint_score(&self, p: (u32, u32)) -> u64 {
        match self.truth {
            Truth::Lexicographic { first_is_h: true } => p.0 as u64 * 100 + p.1 as u64,
            Truth::Lexicographic { first_is_h: false } => p.1 as u64 * 100 + p.0 as u64,
            Truth::Additive { w_h, w_g } => (w_h * p.0 + w_g * p.1) as u64,
        }
    }

    /// What a pair scan of the planted data says: an `h` witness is a pair
    /// weakly better on `h`, strictly worse on `g` and strictly better jointly.
    pub fn expected(&self) -> std::result::Result<ImportanceOrder, &'static str> {
        let mut forward = false;
        let mut backward = false;
        for &x in &self.points {
            for &y in &self.points {
                let jointly_better = self.joint_score(x) > self.joint_score(y);
                forward |= x.0 >= y.0 && y.1 > x.1 && jointly_better;
                backward |= x.1 >= y.1 && y.0 > x.0 && jointly_better;
            }
        }
        match (forward, backward) {
            (true, true) => Err("conflict"),
            (true, false) => Ok(ImportanceOrder::Dominates),
            (false, true) => Ok(ImportanceOrder::Dominated),
            (false, false) => Ok(ImportanceOrder::Incomparable),
        }
    }

    pub fn derive(&self) -> Result<ImportanceOrder> {
        derive_importance(&self.base, &["h".to_string()], &["g".to_string()]).map(|d| d.verdict)
    }
}

pub fn importance_instance(seed: u64) -> ImportanceInstance {
    let mut g = rng(seed);
    let lh = g.random_range(2..=4u32);
    let lg = g.random_range(2..=4u32);
    let grid: Vec<(u32, u32)> = (0..lh).flat_map(|a| (0..lg).map(move |b| (a, b))).collect();
    let take = g.random_range(2..=grid.len());
    let mut points: Vec<(u32, u32)> = grid.choose_multiple(&mut g, take).copied().collect();
    points.sort();
    let truth = if g.random_bool(0.6) {
        Truth::Lexicographic { first_is_h: g.random_bool(0.5) }
    } else {
        Truth::Additive { w_h: g.random_range(1..=4), w_g: g.random_range(1..=4) }
    };
    build_instance(truth, points)
}

/// Lexicographic truth on a random grid subset that always contains the
/// trade-off pair `(1,0)`, `(0,1)`.
pub fn lexicographic_instance(seed: u64) -> ImportanceInstance {
    let mut g = rng(seed);
    let (lh, lg) = (g.random_range(2..=4u32), g.random_range(2..=4u32));
    let mut points = vec![(0, 1), (1, 0)];
    for a in 0..lh {
        for b in 0..lg {
            if !points.contains(&(a, b)) && g.random_bool(0.5) {
                points.push((a, b));
            }
        }
    }
    points.sort();
    build_instance(Truth::Lexicographic { first_is_h: g.random_bool(0.5) }, points)
}

/// Coordinates encoded in an instance element id `h{a}g{b}`.
pub fn coordinates(id: &ElementId) -> (u32, u32) {
    let (h, g) = id.as_str()[1..].split_once('g').expect("planted id");
    (h.parse().unwrap(), g.parse().unwrap())
}

/// Checks a witness against the planted truth: weakly better on the winner,
/// strictly worse on the loser, strictly better jointly.
pub fn witness_is_valid(inst: &ImportanceInstance, winner_is_h: bool, w: &(ElementId, ElementId)) -> bool {
    let (x, y) = (coordinates(&w.0), coordinates(&w.1));
    let (xw, xl, yw, yl) = if winner_is_h { (x.0, x.1, y.0, y.1) } else { (x.1, x.0, y.1, y.0) };
    xw >= yw && yl > xl && inst.joint_score(x) > inst.joint_score(y)
}

/// Equal weights on points within one level of the diagonal, so every
/// trade-off gives up exactly what it gains. Always has a balanced pair.
pub fn symmetric_instance(seed: u64) -> ImportanceInstance {
    let mut g = rng(seed);
    let levels = g.random_range(2..=5u32);
    let band: Vec<(u32, u32)> =
        (0..levels).flat_map(|a| (0..levels).map(move |b| (a, b))).filter(|(a, b)| a.abs_diff(*b) <= 1).collect();
    let i = g.random_range(0..levels - 1);
    let mut points = vec![(i + 1, i), (i, i + 1)];
    for p in band {
        if !points.contains(&p) && g.random_bool(0.5) {
            points.push(p);
        }
    }
    points.sort();
    let w = g.random_range(1..=4);
    build_instance(Truth::Additive { w_h: w, w_g: w }, points)
}

fn build_instance(truth: Truth, points: Vec<(u32, u32)>) -> ImportanceInstance {
    let ids: Vec<ElementId> = points.iter().map(|(a, b)| ElementId::new(format!("h{a}g{b}")).unwrap()).collect();
    let mut inst = ImportanceInstance { truth, points, base: PrimitiveBase::new(ids.clone()) };
    let order = |key: &dyn Fn((u32, u32)) -> u64| {
        let mut pairs = Vec::new();
        for (i, x) in inst.points.iter().enumerate() {
            for (j, y) in inst.points.iter().enumerate() {
                if key(*x) >= key(*y) {
                    pairs.push((ids[i].clone(), ids[j].clone()));
                }
            }
        }
        Relation::new(ids.clone(), pairs).unwrap()
    };
    let on_h = order(&|p| p.0 as u64);
    let on_g = order(&|p| p.1 as u64);
    let joint = order(&|p| inst.joint_score(p));
    let mut base = PrimitiveBase::new(ids.clone()).with_dimension("h", on_h).with_dimension("g", on_g).with_joint(&["h", "g"], joint);
    for (id, p) in ids.iter().zip(&inst.points) {
        base = base.with_profile(id.clone(), &[("h", p.0 as f64), ("g", p.1 as f64)]);
    }
    inst.base = base;
    inst
}

/// Compares the value gained by a swap with the reference step, both
/// measured by planted functions.
pub fn planted_swap_oracle(
    v: impl Fn(f64) -> f64,
    w: impl Fn(f64) -> f64,
) -> impl FnMut(&SwapQuery) -> Result<SwapAnswer> {
    move |q: &SwapQuery| {
        let gain = v(q.to) - v(q.from);
        let step = w(q.reference_to) - w(q.reference_from);
        let scale = gain.abs().max(step.abs()).max(1.0);
        Ok(if (gain - step).abs() <= 1e-14 * scale {
            SwapAnswer::Equal
        } else if gain < step {
            SwapAnswer::Weaker
        } else {
            SwapAnswer::Stronger
        })
    }
}

/// Largest deviation of `v` at the derived knots from the best affine fit
/// of the knot values, relative to the range of `v`.
pub fn affine_residual(knots: &[(f64, f64)], v: impl Fn(f64) -> f64) -> f64 {
    let n = knots.len() as f64;
    let xs: Vec<f64> = knots.iter().map(|k| k.1).collect();
    let ys: Vec<f64> = knots.iter().map(|k| v(k.0)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let a = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let b = my - a * mx;
    let range = ys.iter().cloned().fold(f64::MIN, f64::max) - ys.iter().cloned().fold(f64::MAX, f64::min);
    let worst = xs.iter().zip(&ys).map(|(x, y)| (a * x + b - y).abs()).fold(0.0, f64::max);
    worst / range.max(f64::MIN_POSITIVE)
}

pub struct PlantedValue {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub v: fn(f64) -> f64,
}

pub fn planted_value_functions() -> Vec<PlantedValue> {
    vec![
        PlantedValue { name: "square root", lo: 0.0, hi: 100.0, v: |x| x.sqrt() },
        PlantedValue { name: "quadratic", lo: 0.0, hi: 50.0, v: |x| x * x / 50.0 },
        PlantedValue { name: "logarithmic", lo: 1.0, hi: 1000.0, v: |x| x.ln() },
        PlantedValue { name: "saturating", lo: 0.0, hi: 200.0, v: |x| 10.0 * (1.0 - (-x / 40.0).exp()) },
        PlantedValue { name: "affine", lo: -20.0, hi: 20.0, v: |x| 3.0 * x + 7.0 },
    ]
}

/// Derives a value function on a planted attribute and returns its residual.
pub fn value_function_residual(p: &PlantedValue, grid: usize) -> std::result::Result<f64, Error> {
    let attr = Attribute::numeric("x", p.lo, p.hi, Evaluator::Elicited);
    let span = (p.v)(p.hi) - (p.v)(p.lo);
    // The reference attribute is linear and wide enough for one full swap.
    let mut oracle = planted_swap_oracle(p.v, |r| r);
    let protocol = SwapProtocol::new("money", 0.0, span * 1.5);
    let f = derive_value_function(&PrimitiveBase::new(Vec::new()), &attr, &mut oracle, grid, &protocol)?;
    Ok(affine_residual(&f.knots, p.v))
}
