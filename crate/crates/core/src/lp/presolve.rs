//! Fixed-column substitution and removal of empty rows and columns, plus the
//! matching postsolve.

use super::simplex::{self, Outcome, State, StdForm};
use super::{Basis, LinearProgram, LpOptions, LpSolution, LpStatus, Sense};
use crate::error::Result;

pub(super) fn solve(lp: &LinearProgram, opts: &LpOptions, start: Option<&Basis>) -> Result<(LpSolution, Option<Basis>)> {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let sigma = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    let mut x = vec![0.0; n];
    for j in 0..n {
        if lp.var_lower[j] > lp.var_upper[j] {
            return Ok((super::infeasible_stub(lp), None));
        }
    }
    let fixed: Vec<bool> = (0..n).map(|j| lp.var_lower[j] == lp.var_upper[j]).collect();
    for j in 0..n {
        if fixed[j] {
            x[j] = lp.var_lower[j];
        }
    }

    // Rows after substitution.
    let mut row_map = vec![usize::MAX; m];
    let mut kept_rows = Vec::new();
    let mut row_lo = Vec::new();
    let mut row_hi = Vec::new();
    let mut col_count = vec![0usize; n];
    for i in 0..m {
        let (idx, val) = lp.row(i);
        let mut shift = 0.0;
        let mut live = 0;
        for (&j, &a) in idx.iter().zip(val) {
            if fixed[j] {
                shift += a * x[j];
            } else {
                live += 1;
            }
        }
        let lo = lp.row_lower[i] - shift;
        let hi = lp.row_upper[i] - shift;
        if live == 0 {
            if lo > opts.feas_tol || hi < -opts.feas_tol {
                let mut farkas = vec![0.0; m];
                farkas[i] = if lo > 0.0 { 1.0 } else { -1.0 };
                let mut sol = super::infeasible_stub(lp);
                sol.farkas = Some(farkas);
                return Ok((sol, None));
            }
            continue;
        }
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            continue;
        }
        row_map[i] = kept_rows.len();
        kept_rows.push(i);
        row_lo.push(lo);
        row_hi.push(hi);
        for &j in idx {
            if !fixed[j] {
                col_count[j] += 1;
            }
        }
    }

    // Columns: free-standing ones go to their best bound.
    let mut col_map = vec![usize::MAX; n];
    let mut kept_cols = Vec::new();
    for j in 0..n {
        if fixed[j] {
            continue;
        }
        if col_count[j] == 0 {
            let c = sigma * lp.objective[j];
            let (lo, hi) = (lp.var_lower[j], lp.var_upper[j]);
            let v = if c > 0.0 {
                lo
            } else if c < 0.0 {
                hi
            } else if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
            if !v.is_finite() {
                let mut sol = super::infeasible_stub(lp);
                sol.status = LpStatus::Unbounded;
                let mut ray = vec![0.0; n];
                ray[j] = if c > 0.0 { -1.0 } else { 1.0 };
                sol.ray = Some(ray);
                return Ok((sol, None));
            }
            x[j] = v;
            continue;
        }
        col_map[j] = kept_cols.len();
        kept_cols.push(j);
    }

    let sf = build_std_form(lp, sigma, &kept_rows, &row_lo, &row_hi, &kept_cols, &row_map);
    let _ = &col_map;
    let start_states: Option<Vec<State>> = start.filter(|b| b.cols.len() == n && b.rows.len() == m).map(|b| {
        kept_cols
            .iter()
            .map(|&j| b.cols[j])
            .chain(kept_rows.iter().map(|&i| b.rows[i]))
            .collect()
    });
    let outcome = simplex::solve(&sf, opts, start_states.as_deref())?;
    let nk = kept_cols.len();
    let mut basis = Basis {
        cols: vec![State::Lower; n],
        rows: vec![State::Basic; m],
    };
    for (k, &j) in kept_cols.iter().enumerate() {
        basis.cols[j] = outcome.states[k];
    }
    for (k, &i) in kept_rows.iter().enumerate() {
        basis.rows[i] = outcome.states[nk + k];
    }

    let mut duals = vec![0.0; m];
    let mut sol = LpSolution {
        status: outcome.status,
        objective_value: f64::NAN,
        primal: Vec::new(),
        duals: Vec::new(),
        reduced_costs: Vec::new(),
        farkas: None,
        ray: None,
        iterations: outcome.iterations,
    };
    let Outcome {
        x: xs, y, ray, basic, ..
    } = outcome;
    for (k, &j) in kept_cols.iter().enumerate() {
        x[j] = xs[k];
    }
    match sol.status {
        LpStatus::Optimal => {
            for (k, &i) in kept_rows.iter().enumerate() {
                duals[i] = sigma * y[k];
            }
        }
        LpStatus::Infeasible => {
            let mut f = vec![0.0; m];
            for (k, &i) in kept_rows.iter().enumerate() {
                f[i] = y[k];
            }
            sol.farkas = Some(f);
        }
        LpStatus::Unbounded => {
            let mut r = vec![0.0; n];
            if let Some(ray) = ray {
                for (k, &j) in kept_cols.iter().enumerate() {
                    r[j] = ray[k];
                }
            }
            sol.ray = Some(r);
        }
    }

    let mut reduced: Vec<f64> = lp.objective.clone();
    for i in 0..m {
        if duals[i] != 0.0 {
            let (idx, val) = lp.row(i);
            for (&j, &a) in idx.iter().zip(val) {
                reduced[j] -= duals[i] * a;
            }
        }
    }
    // Basic columns carry zero reduced cost by construction; clear the
    // round-off so complementarity checks see exact zeros.
    for (k, &j) in kept_cols.iter().enumerate() {
        if basic[k] && sol.status == LpStatus::Optimal {
            reduced[j] = 0.0;
        }
    }
    if sol.status == LpStatus::Optimal {
        sol.objective_value = lp.objective_value(&x);
    }
    sol.primal = x;
    sol.duals = duals;
    sol.reduced_costs = reduced;
    Ok((sol, Some(basis)))
}

fn build_std_form(
    lp: &LinearProgram,
    sigma: f64,
    kept_rows: &[usize],
    row_lo: &[f64],
    row_hi: &[f64],
    kept_cols: &[usize],
    row_map: &[usize],
) -> StdForm {
    let nk = kept_cols.len();
    let mk = kept_rows.len();
    let mut col_map = vec![usize::MAX; lp.num_vars()];
    for (k, &j) in kept_cols.iter().enumerate() {
        col_map[j] = k;
    }
    let mut counts = vec![0usize; nk + 1];
    for &i in kept_rows {
        let (idx, _) = lp.row(i);
        for &j in idx {
            if col_map[j] != usize::MAX {
                counts[col_map[j] + 1] += 1;
            }
        }
    }
    for k in 0..nk {
        counts[k + 1] += counts[k];
    }
    let col_start = counts.clone();
    let mut fill = counts;
    let nnz = col_start[nk];
    let mut col_index = vec![0usize; nnz];
    let mut col_value = vec![0.0; nnz];
    for &i in kept_rows {
        let (idx, val) = lp.row(i);
        for (&j, &a) in idx.iter().zip(val) {
            let c = col_map[j];
            if c != usize::MAX {
                let p = fill[c];
                col_index[p] = row_map[i];
                col_value[p] = a;
                fill[c] += 1;
            }
        }
    }

    let mut lower = Vec::with_capacity(nk + mk);
    let mut upper = Vec::with_capacity(nk + mk);
    let mut cost = Vec::with_capacity(nk);
    for &j in kept_cols {
        lower.push(lp.var_lower[j]);
        upper.push(lp.var_upper[j]);
        cost.push(sigma * lp.objective[j]);
    }
    // Logical s_i = -(a_i x) so that A x + s = 0.
    for k in 0..mk {
        lower.push(-row_hi[k]);
        upper.push(-row_lo[k]);
    }
    StdForm {
        n: nk,
        m: mk,
        cost,
        lower,
        upper,
        col_start,
        col_index,
        col_value,
    }
}
