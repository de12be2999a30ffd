//! Bounded-variable linear programs and their solver.
//!
//! Problems are stated as
//!
//! ```text
//! min/max  c'x + offset
//! s.t.     row_lower <= A x <= row_upper
//!          var_lower <=  x  <= var_upper
//! ```
//!
//! with `±inf` allowed on any bound. [`solve_lp`] runs a light presolve
//! (fixed-column substitution, empty rows and columns) followed by a primal
//! simplex over the row-logical form `A x + s = 0`.

mod lpfile;
mod presolve;
mod simplex;

pub use lpfile::{write_lp, DefaultNames, Names};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Sparse bounded LP with row storage.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    sense: Sense,
    offset: f64,
    objective: Vec<f64>,
    var_lower: Vec<f64>,
    var_upper: Vec<f64>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
    row_start: Vec<usize>,
    row_index: Vec<usize>,
    row_value: Vec<f64>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            offset: 0.0,
            objective: Vec::new(),
            var_lower: Vec::new(),
            var_upper: Vec::new(),
            row_lower: Vec::new(),
            row_upper: Vec::new(),
            row_start: vec![0],
            row_index: Vec::new(),
            row_value: Vec::new(),
        }
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.objective.push(cost);
        self.var_lower.push(lower);
        self.var_upper.push(upper);
        self.objective.len() - 1
    }

    /// Appends `lower <= sum coeff * x[var] <= upper`. Repeated columns are
    /// summed and exact zeros dropped.
    pub fn add_row<I>(&mut self, coeffs: I, lower: f64, upper: f64) -> usize
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let start = self.row_index.len();
        for (j, v) in coeffs {
            debug_assert!(j < self.objective.len(), "row references unknown column {j}");
            if let Some(k) = self.row_index[start..].iter().position(|&c| c == j) {
                self.row_value[start + k] += v;
            } else {
                self.row_index.push(j);
                self.row_value.push(v);
            }
        }
        let mut k = start;
        while k < self.row_index.len() {
            if self.row_value[k] == 0.0 {
                self.row_index.remove(k);
                self.row_value.remove(k);
            } else {
                k += 1;
            }
        }
        self.row_start.push(self.row_index.len());
        self.row_lower.push(lower);
        self.row_upper.push(upper);
        self.row_lower.len() - 1
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn set_sense(&mut self, sense: Sense) {
        self.sense = sense;
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_lower.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.row_index.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.objective[var] = cost;
    }

    pub fn var_bounds(&self, var: usize) -> (f64, f64) {
        (self.var_lower[var], self.var_upper[var])
    }

    pub fn set_var_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.var_lower[var] = lower;
        self.var_upper[var] = upper;
    }

    pub fn row_bounds(&self, row: usize) -> (f64, f64) {
        (self.row_lower[row], self.row_upper[row])
    }

    pub fn set_row_bounds(&mut self, row: usize, lower: f64, upper: f64) {
        self.row_lower[row] = lower;
        self.row_upper[row] = upper;
    }

    /// Column indices and coefficients of `row`.
    pub fn row(&self, row: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_start[row], self.row_start[row + 1]);
        (&self.row_index[s..e], &self.row_value[s..e])
    }

    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        (0..self.num_rows())
            .map(|i| {
                let (idx, val) = self.row(i);
                idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.var_lower[j] - v).max(v - self.var_upper[j]);
        }
        for (i, r) in self.row_activity(x).into_iter().enumerate() {
            worst = worst.max(self.row_lower[i] - r).max(r - self.row_upper[i]);
        }
        worst
    }

    /// Checks the structural invariants (ordered bounds, finite coefficients).
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::validation("linear_program", what));
        for j in 0..self.num_vars() {
            if !self.objective[j].is_finite() {
                return bad(format!("objective coefficient of column {j} is not finite"));
            }
            if self.var_lower[j].is_nan() || self.var_upper[j].is_nan() {
                return bad(format!("column {j} has a NaN bound"));
            }
            if self.var_lower[j] == f64::INFINITY || self.var_upper[j] == f64::NEG_INFINITY {
                return bad(format!("column {j} has an infinite bound on the wrong side"));
            }
        }
        for i in 0..self.num_rows() {
            if self.row_lower[i].is_nan() || self.row_upper[i].is_nan() {
                return bad(format!("row {i} has a NaN bound"));
            }
            if self.row_lower[i] > self.row_upper[i] {
                return bad(format!("row {i} has lower bound above upper bound"));
            }
        }
        if self.row_value.iter().any(|v| !v.is_finite()) {
            return bad("constraint matrix has a non-finite coefficient".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Primal feasibility tolerance.
    pub feas_tol: f64,
    /// Smallest pivot magnitude accepted.
    pub pivot_tol: f64,
    /// Reduced-cost tolerance for optimality.
    pub dual_tol: f64,
    /// Simplex iteration cap; `None` scales with problem size.
    pub max_iterations: Option<usize>,
    /// Pivots between basis reinversions.
    pub refactor_interval: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            feas_tol: 1e-7,
            pivot_tol: 1e-9,
            dual_tol: 1e-9,
            max_iterations: None,
            refactor_interval: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective in the problem's own sense; meaningful when optimal.
    pub objective_value: f64,
    pub primal: Vec<f64>,
    /// Row multipliers `y` with `c = A'y + d`, in the problem's own sense.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// Phase-one multipliers proving infeasibility.
    pub farkas: Option<Vec<f64>>,
    /// Improving direction when unbounded.
    pub ray: Option<Vec<f64>>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves `problem`.
pub fn solve_lp(problem: &LinearProgram, options: &LpOptions) -> Result<LpSolution> {
    problem.validate()?;
    Ok(presolve::solve(problem, options, None)?.0)
}

/// Simplex states of every column and row logical at the end of a solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Basis {
    cols: Vec<simplex::State>,
    rows: Vec<simplex::State>,
}

/// Like [`solve_lp`], starting from the final basis of a solve of a problem
/// with the same rows and columns (bounds may differ). Also returns the new
/// final basis when the simplex ran.
pub(crate) fn solve_lp_from(
    problem: &LinearProgram,
    options: &LpOptions,
    start: Option<&Basis>,
) -> Result<(LpSolution, Option<Basis>)> {
    problem.validate()?;
    presolve::solve(problem, options, start)
}

/// Solves `problem` with the listed columns fixed, equivalent to tightening
/// each fixed column's bounds to the value. A value outside the column's
/// original bounds yields an infeasible result.
pub fn solve_lp_restricted(
    problem: &LinearProgram,
    fixed: &[(usize, f64)],
    options: &LpOptions,
) -> Result<LpSolution> {
    let mut restricted = problem.clone();
    for &(j, v) in fixed {
        if j >= problem.num_vars() {
            return Err(Error::InvalidFix(format!("column {j} does not exist")));
        }
        let (lo, hi) = problem.var_bounds(j);
        if v < lo - options.feas_tol || v > hi + options.feas_tol || !v.is_finite() {
            return Ok(infeasible_stub(problem));
        }
        restricted.set_var_bounds(j, v, v);
    }
    solve_lp(&restricted, options)
}

pub(crate) fn infeasible_stub(problem: &LinearProgram) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        objective_value: f64::NAN,
        primal: vec![0.0; problem.num_vars()],
        duals: vec![0.0; problem.num_rows()],
        reduced_costs: vec![0.0; problem.num_vars()],
        farkas: None,
        ray: None,
        iterations: 0,
    }
}

/// Residuals of the KKT conditions at an optimal solution, all measured in
/// absolute terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
    pub stationarity: f64,
    /// `|primal objective - dual objective|`.
    pub duality_gap: f64,
    pub dual_objective: f64,
}

/// Evaluates the KKT conditions of `solution` against `problem`.
pub fn kkt_residuals(problem: &LinearProgram, solution: &LpSolution) -> KktResiduals {
    let sigma = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let x = &solution.primal;
    let act = problem.row_activity(x);
    let primal = problem.max_violation(x);

    let mut dual = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut dual_obj = problem.offset;

    let bound_term = |mult: f64, value: f64, lo: f64, hi: f64, dual: &mut f64, comp: &mut f64| -> f64 {
        // `mult` in minimization sense: positive pushes against the lower bound.
        if mult > 0.0 {
            if lo.is_finite() {
                *comp = comp.max(mult * (value - lo).abs());
                mult * lo
            } else {
                *dual = dual.max(mult);
                0.0
            }
        } else if mult < 0.0 {
            if hi.is_finite() {
                *comp = comp.max(-mult * (hi - value).abs());
                mult * hi
            } else {
                *dual = dual.max(-mult);
                0.0
            }
        } else {
            0.0
        }
    };

    let mut acc = 0.0;
    for i in 0..problem.num_rows() {
        let y = sigma * solution.duals[i];
        acc += bound_term(y, act[i], problem.row_lower[i], problem.row_upper[i], &mut dual, &mut comp);
    }
    for j in 0..problem.num_vars() {
        let d = sigma * solution.reduced_costs[j];
        acc += bound_term(d, x[j], problem.var_lower[j], problem.var_upper[j], &mut dual, &mut comp);
    }
    dual_obj += sigma * acc;

    // c = A'y + d
    let mut resid: Vec<f64> = problem
        .objective
        .iter()
        .zip(&solution.reduced_costs)
        .map(|(c, d)| c - d)
        .collect();
    for i in 0..problem.num_rows() {
        let (idx, val) = problem.row(i);
        for (&j, &a) in idx.iter().zip(val) {
            resid[j] -= a * solution.duals[i];
        }
    }
    let stationarity = resid.iter().fold(0.0_f64, |m, r| m.max(r.abs()));

    KktResiduals {
        primal,
        dual,
        complementarity: comp,
        stationarity,
        duality_gap: (solution.objective_value - dual_obj).abs(),
        dual_objective: dual_obj,
    }
}

#[cfg(test)]
mod tests;
