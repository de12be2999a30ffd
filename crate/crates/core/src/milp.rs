//! Best-first branch and bound over the LP solver.
//!
//! Branching picks the most fractional binary (lowest index on ties); the
//! open node with the best LP bound is processed next, ties broken by
//! creation order, which makes every run deterministic. A rounding probe at
//! the root tries to find an early incumbent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp_from, Basis, LinearProgram, LpOptions, LpStatus, Sense};

#[derive(Debug, Clone)]
pub struct MixedIntegerProgram {
    base: LinearProgram,
    binaries: Vec<usize>,
}

impl MixedIntegerProgram {
    pub fn new(base: LinearProgram, mut binaries: Vec<usize>) -> Result<Self> {
        binaries.sort_unstable();
        binaries.dedup();
        for &j in &binaries {
            if j >= base.num_vars() {
                return Err(Error::Dimension(format!("binary column {j} does not exist")));
            }
            let (lo, hi) = base.var_bounds(j);
            if lo < 0.0 || hi > 1.0 || lo > hi {
                return Err(Error::InvalidFix(format!(
                    "binary column {j} has bounds [{lo}, {hi}] outside [0, 1]"
                )));
            }
        }
        Ok(MixedIntegerProgram { base, binaries })
    }

    pub fn base(&self) -> &LinearProgram {
        &self.base
    }

    pub fn binaries(&self) -> &[usize] {
        &self.binaries
    }
}

#[derive(Debug, Clone)]
pub struct MipOptions {
    pub lp: LpOptions,
    /// Relative optimality gap, measured against `max(|incumbent|, 1)`.
    pub gap_tol: f64,
    pub integrality_tol: f64,
    pub node_limit: usize,
    /// Prune every node whose bound is not strictly better than this value.
    /// When nothing beats the cutoff the result is `Infeasible`.
    pub cutoff: Option<f64>,
    /// Emit a progress log line every this many nodes (0 disables).
    pub log_interval: usize,
    /// Record one [`NodeRecord`] per processed node.
    pub trace: bool,
}

impl Default for MipOptions {
    fn default() -> Self {
        MipOptions {
            lp: LpOptions::default(),
            gap_tol: 1e-6,
            integrality_tol: 1e-6,
            node_limit: 1_000_000,
            cutoff: None,
            log_interval: 0,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MipStatus {
    Optimal,
    Infeasible,
    GapLimit,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    /// LP bound of the parent, in the problem's own sense.
    pub parent_bound: Option<f64>,
    /// LP bound of this node; `None` when its relaxation is infeasible.
    pub bound: Option<f64>,
    /// Incumbent value after processing the node.
    pub incumbent: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct MipSolution {
    pub status: MipStatus,
    pub objective_value: f64,
    pub primal: Vec<f64>,
    /// Best proven bound, in the problem's own sense.
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub root_bound: Option<f64>,
    pub trace: Vec<NodeRecord>,
}

impl MipSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == MipStatus::Optimal
    }
}

struct Node {
    id: usize,
    /// Bound in minimization sense.
    key: f64,
    fixes: Vec<(usize, f64, f64)>,
    /// Final basis of the parent relaxation.
    start: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smaller bound, then smaller id, pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn gap_of(incumbent: f64, bound: f64) -> f64 {
    ((incumbent - bound) / incumbent.abs().max(1.0)).max(0.0)
}

pub fn solve_mip(problem: &MixedIntegerProgram, options: &MipOptions) -> Result<MipSolution> {
    let sigma = match problem.base.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut lp = problem.base.clone();
    let original: Vec<(f64, f64)> = problem
        .binaries
        .iter()
        .map(|&j| lp.var_bounds(j))
        .collect();

    let cutoff = options.cutoff.map(|c| sigma * c);
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut trace = Vec::new();
    let mut nodes = 0usize;
    let mut next_id = 1usize;
    let mut lp_iterations = 0usize;
    let mut root_bound = None;
    let mut parents: Vec<(Option<usize>, Option<f64>)> = vec![(None, None)];

    heap.push(Node {
        id: 0,
        key: f64::NEG_INFINITY,
        fixes: Vec::new(),
        start: None,
    });

    let mut status = MipStatus::Optimal;
    let mut final_bound = None;

    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if node.key >= inc - options.gap_tol * inc.abs().max(1.0) {
                // Best-first: every remaining node is at least this bad.
                heap.clear();
                break;
            }
        }
        if let Some(c) = cutoff {
            if node.key >= c {
                heap.clear();
                break;
            }
        }
        if nodes >= options.node_limit {
            status = MipStatus::GapLimit;
            final_bound = Some(node.key);
            break;
        }
        nodes += 1;

        for (k, &j) in problem.binaries.iter().enumerate() {
            lp.set_var_bounds(j, original[k].0, original[k].1);
        }
        for &(j, lo, hi) in &node.fixes {
            lp.set_var_bounds(j, lo, hi);
        }
        let (sol, basis) = solve_lp_from(&lp, &options.lp, node.start.as_deref())?;
        lp_iterations += sol.iterations;
        let basis = basis.map(Rc::new);
        let (parent, parent_bound) = parents[node.id];

        match sol.status {
            LpStatus::Unbounded => {
                return Ok(MipSolution {
                    status: MipStatus::Unbounded,
                    objective_value: sigma * f64::NEG_INFINITY,
                    primal: sol.primal,
                    bound: sigma * f64::NEG_INFINITY,
                    gap: f64::INFINITY,
                    nodes,
                    lp_iterations,
                    root_bound,
                    trace,
                });
            }
            LpStatus::Infeasible => {
                if options.trace {
                    trace.push(NodeRecord {
                        id: node.id,
                        parent,
                        parent_bound,
                        bound: None,
                        incumbent: incumbent.as_ref().map(|(v, _)| sigma * v),
                    });
                }
                continue;
            }
            LpStatus::Optimal => {}
        }

        let value = sigma * sol.objective_value;
        if node.id == 0 {
            root_bound = Some(sol.objective_value);
        }

        let frac = most_fractional(&sol.primal, &problem.binaries, options.integrality_tol);
        let dominated = incumbent
            .as_ref()
            .is_some_and(|(inc, _)| value >= inc - options.gap_tol * inc.abs().max(1.0))
            || cutoff.is_some_and(|c| value >= c);
        if !dominated {
            match frac {
                None => {
                    let mut x = sol.primal.clone();
                    for &j in &problem.binaries {
                        x[j] = x[j].round();
                    }
                    incumbent = Some((value, x));
                }
                Some(j) => {
                    if node.id == 0 {
                        if let Some((v, x)) = rounding_probe(&lp, &sol.primal, problem, sigma, options, basis.as_deref())? {
                            if cutoff.map_or(true, |c| v < c) {
                                incumbent = Some((v, x));
                            }
                        }
                    }
                    let down = floor_child(&node.fixes, j, original_bounds(problem, &original, j).0);
                    let up = ceil_child(&node.fixes, j, original_bounds(problem, &original, j).1);
                    for fixes in [down, up] {
                        parents.push((Some(node.id), Some(sol.objective_value)));
                        heap.push(Node {
                            id: next_id,
                            key: value,
                            fixes,
                            start: basis.clone(),
                        });
                        next_id += 1;
                    }
                }
            }
        }

        if options.trace {
            trace.push(NodeRecord {
                id: node.id,
                parent,
                parent_bound,
                bound: Some(sol.objective_value),
                incumbent: incumbent.as_ref().map(|(v, _)| sigma * v),
            });
        }
        if options.log_interval > 0 && nodes % options.log_interval == 0 {
            let bound = heap.peek().map_or(value, |n| n.key.min(value));
            let inc = incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v);
            log::info!(
                "node={} bound={} incumbent={} gap={}",
                nodes,
                sigma * bound,
                sigma * inc,
                gap_of(inc, bound)
            );
        }
    }

    let Some((value, primal)) = incumbent else {
        let n = problem.base.num_vars();
        let status = if status == MipStatus::GapLimit {
            MipStatus::GapLimit
        } else {
            MipStatus::Infeasible
        };
        return Ok(MipSolution {
            status,
            objective_value: f64::NAN,
            primal: vec![0.0; n],
            bound: final_bound.map_or(f64::NAN, |b| sigma * b),
            gap: f64::INFINITY,
            nodes,
            lp_iterations,
            root_bound,
            trace,
        });
    };
    let bound = match status {
        MipStatus::GapLimit => final_bound
            .unwrap_or(value)
            .min(heap.iter().map(|n| n.key).fold(f64::INFINITY, f64::min)),
        _ => value,
    };
    let bound = bound.min(value);
    Ok(MipSolution {
        status,
        objective_value: problem.base.objective_value(&primal),
        primal,
        bound: sigma * bound,
        gap: gap_of(value, bound),
        nodes,
        lp_iterations,
        root_bound,
        trace,
    })
}

fn original_bounds(problem: &MixedIntegerProgram, original: &[(f64, f64)], j: usize) -> (f64, f64) {
    let k = problem.binaries.binary_search(&j).expect("binary column");
    original[k]
}

fn floor_child(fixes: &[(usize, f64, f64)], j: usize, lo: f64) -> Vec<(usize, f64, f64)> {
    let mut out = fixes.to_vec();
    out.push((j, lo, 0.0));
    out
}

fn ceil_child(fixes: &[(usize, f64, f64)], j: usize, hi: f64) -> Vec<(usize, f64, f64)> {
    let mut out = fixes.to_vec();
    out.push((j, 1.0, hi));
    out
}

fn most_fractional(x: &[f64], binaries: &[usize], tol: f64) -> Option<usize> {
    let mut best = None;
    let mut best_dist = tol;
    for &j in binaries {
        let dist = (x[j] - x[j].round()).abs();
        if dist > best_dist + 1e-12 {
            best_dist = dist;
            best = Some(j);
        }
    }
    best
}

/// Rounds every binary of the relaxation to the nearest integer and solves
/// the remaining LP.
fn rounding_probe(
    lp: &LinearProgram,
    x: &[f64],
    problem: &MixedIntegerProgram,
    sigma: f64,
    options: &MipOptions,
    start: Option<&Basis>,
) -> Result<Option<(f64, Vec<f64>)>> {
    let mut probe = lp.clone();
    for &j in &problem.binaries {
        let v = x[j].round();
        let (lo, hi) = lp.var_bounds(j);
        if v < lo || v > hi {
            return Ok(None);
        }
        probe.set_var_bounds(j, v, v);
    }
    let sol = solve_lp_from(&probe, &options.lp, start)?.0;
    if !sol.is_optimal() {
        return Ok(None);
    }
    Ok(Some((sigma * sol.objective_value, sol.primal)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Two generators, one period, load 50: `min x1 + 2 x2`.
    fn two_gen() -> MixedIntegerProgram {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let u1 = lp.add_var(0.0, 1.0, 0.0);
        let u2 = lp.add_var(0.0, 1.0, 0.0);
        let x1 = lp.add_var(0.0, 40.0, 1.0);
        let x2 = lp.add_var(0.0, 40.0, 2.0);
        for (u, x) in [(u1, x1), (u2, x2)] {
            lp.add_row([(x, 1.0), (u, -20.0)], 0.0, f64::INFINITY);
            lp.add_row([(x, 1.0), (u, -40.0)], f64::NEG_INFINITY, 0.0);
        }
        lp.add_row([(x1, 1.0), (x2, 1.0)], 50.0, 50.0);
        MixedIntegerProgram::new(lp, vec![u1, u2]).unwrap()
    }

    fn enumerate(problem: &MixedIntegerProgram) -> Option<f64> {
        let bins = problem.binaries();
        let mut best: Option<f64> = None;
        for mask in 0..(1u32 << bins.len()) {
            let mut lp = problem.base().clone();
            for (k, &j) in bins.iter().enumerate() {
                let v = f64::from((mask >> k) & 1);
                lp.set_var_bounds(j, v, v);
            }
            let sol = crate::lp::solve_lp(&lp, &LpOptions::default()).unwrap();
            if sol.is_optimal() {
                let v = sol.objective_value;
                best = Some(match (best, problem.base().sense()) {
                    (None, _) => v,
                    (Some(b), Sense::Minimize) => b.min(v),
                    (Some(b), Sense::Maximize) => b.max(v),
                });
            }
        }
        best
    }

    #[test]
    fn two_generator_commitment() {
        let p = two_gen();
        let sol = solve_mip(&p, &MipOptions::default()).unwrap();
        assert_eq!(sol.status, MipStatus::Optimal);
        assert_abs_diff_eq!(sol.objective_value, 70.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.primal[2], 30.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.primal[3], 20.0, epsilon = 1e-9);
        assert_eq!(&sol.primal[..2], &[1.0, 1.0]);
        assert_abs_diff_eq!(enumerate(&p).unwrap(), 70.0, epsilon = 1e-9);
    }

    #[test]
    fn integral_relaxation_solves_at_root() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let u = lp.add_var(0.0, 1.0, 3.0);
        let v = lp.add_var(0.0, 1.0, 2.0);
        lp.add_row([(u, 1.0), (v, 1.0)], f64::NEG_INFINITY, 1.0);
        let p = MixedIntegerProgram::new(lp, vec![u, v]).unwrap();
        let sol = solve_mip(&p, &MipOptions::default()).unwrap();
        assert_eq!(sol.nodes, 1);
        assert_abs_diff_eq!(sol.objective_value, 3.0);
    }

    #[test]
    fn infeasible_program() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let u = lp.add_var(0.0, 1.0, 1.0);
        lp.add_row([(u, 2.0)], 0.5, 1.5);
        let p = MixedIntegerProgram::new(lp, vec![u]).unwrap();
        let sol = solve_mip(&p, &MipOptions::default()).unwrap();
        assert_eq!(sol.status, MipStatus::Infeasible);
    }

    #[test]
    fn node_limit_gives_gap_limit() {
        let p = random_knapsack(&mut ChaCha8Rng::seed_from_u64(4), 12);
        let opts = MipOptions {
            node_limit: 2,
            ..MipOptions::default()
        };
        let sol = solve_mip(&p, &opts).unwrap();
        assert_eq!(sol.status, MipStatus::GapLimit);
    }

    #[test]
    fn rejects_non_binary_bounds() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let u = lp.add_var(0.0, 2.0, 1.0);
        assert!(MixedIntegerProgram::new(lp, vec![u]).is_err());
    }

    fn random_knapsack(rng: &mut ChaCha8Rng, n: usize) -> MixedIntegerProgram {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let mut row = Vec::new();
        let mut row2 = Vec::new();
        for _ in 0..n {
            let j = lp.add_var(0.0, 1.0, rng.gen_range(1.0..10.0));
            row.push((j, rng.gen_range(1.0..10.0)));
            row2.push((j, rng.gen_range(1.0..10.0)));
        }
        lp.add_row(row, f64::NEG_INFINITY, 2.0 * n as f64);
        lp.add_row(row2, f64::NEG_INFINITY, 2.5 * n as f64);
        let bins = (0..n).collect();
        MixedIntegerProgram::new(lp, bins).unwrap()
    }

    #[test]
    fn random_knapsacks_match_enumeration_and_tree_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..15 {
            let p = random_knapsack(&mut rng, 8);
            let opts = MipOptions {
                trace: true,
                ..MipOptions::default()
            };
            let sol = solve_mip(&p, &opts).unwrap();
            let oracle = enumerate(&p).unwrap();
            assert_eq!(sol.status, MipStatus::Optimal);
            assert!((sol.objective_value - oracle).abs() <= 1e-6 * oracle.abs().max(1.0));
            // Maximization: root bound is an upper bound, children never exceed parents.
            assert!(sol.root_bound.unwrap() >= oracle - 1e-9);
            let mut last: Option<f64> = None;
            for rec in &sol.trace {
                if let (Some(pb), Some(b)) = (rec.parent_bound, rec.bound) {
                    assert!(b <= pb + 1e-7);
                }
                if let (Some(prev), Some(cur)) = (last, rec.incumbent) {
                    assert!(cur >= prev - 1e-12);
                }
                last = rec.incumbent.or(last);
            }
        }
    }
}
