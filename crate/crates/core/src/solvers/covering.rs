use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest instance solved by exact search.
pub const EXACT_COVERING_CAP: usize = 24;
const MAX_DISTRICTS: usize = 64;
const EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMode {
    /// Every district must be covered; minimize openings.
    #[default]
    FullCover,
    /// Maximize covered population, then minimize openings.
    MaxCover,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exact,
    Greedy,
}

/// Facility location over districts. `gamma[i][j]` is true when a facility
/// opened in district `j` serves district `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringInstance {
    pub districts: Vec<String>,
    pub gamma: Vec<Vec<bool>>,
    #[serde(default)]
    pub mode: CoverMode,
    /// Opening cost per district, 1 each when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    /// Population per district, 1 each when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub populations: Option<Vec<f64>>,
    /// Minimum population that must be covered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringSolution {
    pub openings: Vec<bool>,
    pub coverage: Vec<bool>,
    /// Number of opened facilities.
    pub opened: usize,
    /// Covered population.
    pub covered: f64,
    pub cost: f64,
}

impl CoveringSolution {
    pub fn opened_districts<'a>(&self, inst: &'a CoveringInstance) -> Vec<&'a str> {
        self.openings
            .iter()
            .zip(&inst.districts)
            .filter(|(o, _)| **o)
            .map(|(_, d)| d.as_str())
            .collect()
    }

    /// One line per district: name, opened flag, covered flag.
    pub fn to_table(&self, inst: &CoveringInstance) -> String {
        let mut out = String::from("district\topen\tcovered\n");
        for (i, d) in inst.districts.iter().enumerate() {
            let _ = writeln!(out, "{d}\t{}\t{}", u8::from(self.openings[i]), u8::from(self.coverage[i]));
        }
        let _ = writeln!(out, "# opened {} covered {} cost {}", self.opened, self.covered, self.cost);
        out
    }
}

impl CoveringInstance {
    /// Full-cover instance with districts named `1..=n`.
    pub fn new(gamma: Vec<Vec<bool>>) -> Result<Self> {
        let inst = CoveringInstance {
            districts: (1..=gamma.len()).map(|i| i.to_string()).collect(),
            gamma,
            mode: CoverMode::FullCover,
            costs: None,
            budget: None,
            populations: None,
            target: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Closed neighbourhoods of an undirected graph on `n` vertices.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut gamma = vec![vec![false; n]; n];
        for (i, row) in gamma.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidFixture(format!("edge ({a}, {b}) outside 0..{n}")));
            }
            gamma[a][b] = true;
            gamma[b][a] = true;
        }
        CoveringInstance::new(gamma)
    }

    /// Rows of `0`/`1` entries, optionally space separated; `#` starts a comment.
    pub fn from_matrix_text(text: &str) -> Result<Self> {
        let mut gamma = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .chars()
                .filter(|c| !c.is_whitespace() && *c != ',')
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(Error::InvalidFixture(format!("line {}: unexpected `{other}`", line_no + 1))),
                })
                .collect::<Result<Vec<bool>>>()?;
            gamma.push(row);
        }
        CoveringInstance::new(gamma)
    }

    pub fn to_matrix_text(&self) -> String {
        let mut out = String::new();
        for row in &self.gamma {
            let cells: Vec<&str> = row.iter().map(|b| if *b { "1" } else { "0" }).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.districts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.districts.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.gamma.len();
        if n == 0 {
            return Err(Error::InvalidFixture("no districts".into()));
        }
        if n > MAX_DISTRICTS {
            return Err(Error::CapExceeded { what: "districts".into(), size: n, cap: MAX_DISTRICTS });
        }
        if self.districts.len() != n {
            return Err(Error::InvalidFixture("district names and matrix size differ".into()));
        }
        for (i, row) in self.gamma.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidFixture(format!("row {} has {} entries, expected {n}", i + 1, row.len())));
            }
            if !row[i] {
                return Err(Error::InvalidFixture(format!(
                    "district {} does not cover itself; adjacency must be reflexive",
                    self.districts[i]
                )));
            }
        }
        for (what, v) in [("costs", &self.costs), ("populations", &self.populations)] {
            if let Some(v) = v {
                if v.len() != n || v.iter().any(|x| *x < 0.0 || !x.is_finite()) {
                    return Err(Error::InvalidFixture(format!("{what} must be {n} non-negative numbers")));
                }
            }
        }
        Ok(())
    }

    fn cost(&self, j: usize) -> f64 {
        self.costs.as_ref().map_or(1.0, |c| c[j])
    }

    fn weight(&self, mask: u64) -> f64 {
        (0..self.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.populations.as_ref().map_or(1.0, |p| p[i])).sum()
    }

    /// Districts served by opening `j`, as a bit mask.
    pub(crate) fn cover_masks(&self) -> Vec<u64> {
        let n = self.len();
        (0..n)
            .map(|j| (0..n).filter(|&i| self.gamma[i][j]).fold(0u64, |m, i| m | 1 << i))
            .collect()
    }

    pub(crate) fn all_mask(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    pub(crate) fn solution(&self, open: u64) -> CoveringSolution {
        let n = self.len();
        let masks = self.cover_masks();
        let covered = (0..n).filter(|j| open >> j & 1 == 1).fold(0u64, |m, j| m | masks[j]);
        CoveringSolution {
            openings: (0..n).map(|j| open >> j & 1 == 1).collect(),
            coverage: (0..n).map(|i| covered >> i & 1 == 1).collect(),
            opened: open.count_ones() as usize,
            covered: self.weight(covered),
            cost: (0..n).filter(|j| open >> j & 1 == 1).map(|j| self.cost(j)).sum(),
        }
    }

    pub(crate) fn within_budget(&self, cost: f64) -> bool {
        self.budget.is_none_or(|k| cost <= k + EPS)
    }

    /// Checks the mode's constraints and the target on a finished solution.
    pub(crate) fn check_solution(&self, s: &CoveringSolution) -> Result<()> {
        if self.mode == CoverMode::FullCover && s.coverage.iter().any(|c| !c) {
            return Err(Error::Infeasible("no affordable opening set covers every district".into()));
        }
        if let Some(p) = self.target {
            if s.covered + EPS < p {
                return Err(Error::Infeasible(format!("best coverage {} is below the target {p}", s.covered)));
            }
        }
        Ok(())
    }
}

struct Search<'a> {
    inst: &'a CoveringInstance,
    masks: Vec<u64>,
    suffix: Vec<u64>,
    all: u64,
    best: Option<(f64, usize, u64)>,
}

impl Search<'_> {
    /// Strictly better: more coverage, or equal coverage with fewer openings.
    fn improves(&self, weight: f64, count: usize) -> bool {
        match self.best {
            None => true,
            Some((w, c, _)) => weight > w + EPS || (weight > w - EPS && count < c),
        }
    }

    fn visit(&mut self, j: usize, open: u64, covered: u64, count: usize, cost: f64) {
        let full = self.inst.mode == CoverMode::FullCover;
        if full && covered == self.all {
            if self.improves(self.inst.weight(covered), count) {
                self.best = Some((self.inst.weight(covered), count, open));
            }
            return;
        }
        let n = self.masks.len();
        if j == n {
            if !full && self.improves(self.inst.weight(covered), count) {
                self.best = Some((self.inst.weight(covered), count, open));
            }
            return;
        }
        let reachable = covered | self.suffix[j];
        if full {
            if reachable != self.all {
                return;
            }
            if let Some((_, c, _)) = self.best {
                if count + 1 >= c {
                    return;
                }
            }
        } else if let Some((w, c, _)) = self.best {
            let bound = self.inst.weight(reachable);
            if bound < w - EPS || (bound < w + EPS && count >= c) {
                return;
            }
        }
        let gain = self.masks[j] & !covered;
        let cost_j = self.inst.cost(j);
        // An opening that serves nobody new can only add to the count.
        if gain != 0 && self.inst.within_budget(cost + cost_j) {
            self.visit(j + 1, open | 1 << j, covered | self.masks[j], count + 1, cost + cost_j);
        }
        self.visit(j + 1, open, covered, count, cost);
    }
}

fn exact(inst: &CoveringInstance) -> Result<u64> {
    let n = inst.len();
    if n > EXACT_COVERING_CAP {
        return Err(Error::CapExceeded { what: "districts".into(), size: n, cap: EXACT_COVERING_CAP });
    }
    let masks = inst.cover_masks();
    let mut suffix = vec![0u64; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] | masks[j];
    }
    let mut search = Search { inst, masks, suffix, all: inst.all_mask(), best: None };
    search.visit(0, 0, 0, 0, 0.0);
    search
        .best
        .map(|(_, _, open)| open)
        .ok_or_else(|| Error::Infeasible("no affordable opening set covers every district".into()))
}

fn greedy(inst: &CoveringInstance) -> Result<u64> {
    let masks = inst.cover_masks();
    let all = inst.all_mask();
    let (mut open, mut covered, mut cost) = (0u64, 0u64, 0.0);
    while covered != all {
        let mut pick: Option<(usize, f64)> = None;
        for (j, m) in masks.iter().enumerate() {
            if open >> j & 1 == 1 || !inst.within_budget(cost + inst.cost(j)) {
                continue;
            }
            let gain = inst.weight(m & !covered);
            if gain > EPS && pick.is_none_or(|(_, g)| gain > g + EPS) {
                pick = Some((j, gain));
            }
        }
        let Some((j, _)) = pick else { break };
        open |= 1 << j;
        covered |= masks[j];
        cost += inst.cost(j);
    }
    Ok(open)
}

/// Solves the covering model exactly or greedily. Among equally good
/// exact solutions the one with the lexicographically smallest list of
/// opened indices is returned.
pub fn optimize_covering(inst: &CoveringInstance, mode: SearchMode) -> Result<CoveringSolution> {
    inst.validate()?;
    let open = match mode {
        SearchMode::Exact => exact(inst)?,
        SearchMode::Greedy => greedy(inst)?,
    };
    let s = inst.solution(open);
    inst.check_solution(&s)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> CoveringInstance {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        CoveringInstance::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn path_of_five_needs_two() {
        let s = optimize_covering(&path(5), SearchMode::Exact).unwrap();
        assert_eq!(s.opened, 2);
        assert_eq!(s.opened_districts(&path(5)), vec!["1", "4"]);
        assert!(optimize_covering(&path(5), SearchMode::Greedy).unwrap().opened >= 2);
    }

    #[test]
    fn complete_graph_needs_one() {
        let k4 = CoveringInstance::new(vec![vec![true; 4]; 4]).unwrap();
        assert_eq!(optimize_covering(&k4, SearchMode::Exact).unwrap().opened, 1);
    }

    #[test]
    fn irreflexive_matrix_is_rejected() {
        let err = CoveringInstance::from_matrix_text("0 1\n1 1\n").unwrap_err();
        assert!(matches!(err, Error::InvalidFixture(_)));
    }

    #[test]
    fn budget_limits_max_cover() {
        let mut p = path(5);
        p.mode = CoverMode::MaxCover;
        p.budget = Some(1.0);
        let s = optimize_covering(&p, SearchMode::Exact).unwrap();
        assert_eq!((s.opened, s.covered), (1, 3.0));
        assert_eq!(s.opened_districts(&p), vec!["2"]);
        p.mode = CoverMode::FullCover;
        assert!(matches!(optimize_covering(&p, SearchMode::Exact), Err(Error::Infeasible(_))));
    }

    #[test]
    fn matrix_text_round_trip() {
        let p = path(4);
        let back = CoveringInstance::from_matrix_text(&format!("# path\n{}", p.to_matrix_text())).unwrap();
        assert_eq!(back, p);
    }
}
