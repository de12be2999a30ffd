//! Revised bounded-variable primal simplex.
//!
//! Works on `min c'x  s.t.  A x + s = 0,  l <= (x, s) <= u` where the row
//! logicals `s` start as the basis. The basis inverse is kept in product form
//! (an eta file) on top of the identity and rebuilt from scratch every
//! `refactor_interval` pivots. Phase one minimizes the sum of bound
//! violations of the basic variables with a first-breakpoint ratio test.
//! Pricing is Dantzig (largest reduced cost, lowest index on ties); after
//! `2 n` consecutive degenerate pivots it switches to Bland's rule until the
//! next nondegenerate pivot.

use super::{LpOptions, LpStatus};
use crate::error::{Error, Result};

pub(super) struct StdForm {
    /// Structural columns.
    pub n: usize,
    pub m: usize,
    /// Minimization costs of the structural columns.
    pub cost: Vec<f64>,
    /// Bounds of structurals followed by logicals (`n + m` entries).
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub col_start: Vec<usize>,
    pub col_index: Vec<usize>,
    pub col_value: Vec<f64>,
}

impl StdForm {
    fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_start[j], self.col_start[j + 1]);
        (&self.col_index[s..e], &self.col_value[s..e])
    }
}

pub(super) struct Outcome {
    pub status: LpStatus,
    /// Structural values.
    pub x: Vec<f64>,
    /// Row multipliers (phase-two at optimality, phase-one when infeasible).
    pub y: Vec<f64>,
    pub ray: Option<Vec<f64>>,
    pub basic: Vec<bool>,
    /// Final state of every structural and logical.
    pub states: Vec<State>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free column resting at zero.
    Zero,
}

#[derive(Default)]
struct EtaFile {
    row: Vec<usize>,
    pivot: Vec<f64>,
    start: Vec<usize>,
    index: Vec<usize>,
    value: Vec<f64>,
}

impl EtaFile {
    fn clear(&mut self) {
        self.row.clear();
        self.pivot.clear();
        self.start.clear();
        self.index.clear();
        self.value.clear();
    }

    fn len(&self) -> usize {
        self.row.len()
    }

    fn push(&mut self, r: usize, alpha: &[f64], nz: &[usize]) {
        self.row.push(r);
        self.pivot.push(alpha[r]);
        self.start.push(self.index.len());
        for &i in nz {
            if i != r && alpha[i] != 0.0 {
                self.index.push(i);
                self.value.push(alpha[i]);
            }
        }
    }

    fn entries(&self, e: usize) -> (&[usize], &[f64]) {
        let s = self.start[e];
        let end = self.start.get(e + 1).copied().unwrap_or(self.index.len());
        (&self.index[s..end], &self.value[s..end])
    }

    /// `v <- B^-1 v`.
    fn ftran(&self, v: &mut [f64]) {
        for e in 0..self.len() {
            let r = self.row[e];
            let vr = v[r];
            if vr == 0.0 {
                continue;
            }
            let vr = vr / self.pivot[e];
            v[r] = vr;
            let (idx, val) = self.entries(e);
            for (&i, &a) in idx.iter().zip(val) {
                v[i] -= a * vr;
            }
        }
    }

    /// `v <- B^-1 v`, adding positions that become nonzero to `nz`.
    fn ftran_tracked(&self, v: &mut [f64], nz: &mut Vec<usize>, mark: &mut [bool]) {
        for e in 0..self.len() {
            let r = self.row[e];
            let vr = v[r];
            if vr == 0.0 {
                continue;
            }
            let vr = vr / self.pivot[e];
            v[r] = vr;
            let (idx, val) = self.entries(e);
            for (&i, &a) in idx.iter().zip(val) {
                v[i] -= a * vr;
                if !mark[i] {
                    mark[i] = true;
                    nz.push(i);
                }
            }
        }
    }

    /// `y' <- y' B^-1`.
    fn btran(&self, y: &mut [f64]) {
        for e in (0..self.len()).rev() {
            let r = self.row[e];
            let (idx, val) = self.entries(e);
            let mut s = y[r];
            for (&i, &a) in idx.iter().zip(val) {
                s -= y[i] * a;
            }
            y[r] = s / self.pivot[e];
        }
    }
}

struct Solver<'a> {
    sf: &'a StdForm,
    opts: &'a LpOptions,
    head: Vec<usize>,
    state: Vec<State>,
    x: Vec<f64>,
    etas: EtaFile,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
    work: Vec<f64>,
    nz: Vec<usize>,
    y: Vec<f64>,
}

enum Step {
    Optimal,
    Infeasible,
    Unbounded(Vec<f64>),
    Continue,
}

/// `start` optionally gives a state per structural and logical to begin
/// from; basic sets of the wrong size are repaired on reinversion.
pub(super) fn solve(sf: &StdForm, opts: &LpOptions, start: Option<&[State]>) -> Result<Outcome> {
    let mut s = Solver::new(sf, opts);
    if let Some(start) = start {
        s.warm(start)?;
    }
    let limit = opts
        .max_iterations
        .unwrap_or(50_000 + 50 * (sf.n + sf.m));
    let mut restarts = 0;
    loop {
        if s.iterations >= limit {
            return Err(Error::IterationLimit(limit));
        }
        if s.etas.len() >= opts.refactor_interval {
            s.reinvert()?;
        }
        match s.iterate()? {
            Step::Continue => {}
            Step::Unbounded(ray) => {
                return Ok(s.finish(LpStatus::Unbounded, Some(ray)));
            }
            done @ (Step::Optimal | Step::Infeasible) => {
                // Confirm with basics recomputed from the eta file; a failed
                // check falls back to a fresh factorization below.
                if restarts == 0 {
                    s.recompute_basics();
                } else {
                    s.reinvert()?;
                }
                let infeasible = s.primal_infeasibility() > opts.feas_tol;
                let claimed_infeasible = matches!(done, Step::Infeasible);
                if infeasible == claimed_infeasible {
                    if infeasible {
                        s.compute_duals(true);
                        return Ok(s.finish(LpStatus::Infeasible, None));
                    }
                    s.compute_duals(false);
                    if s.best_entering(false).is_none() {
                        return Ok(s.finish(LpStatus::Optimal, None));
                    }
                }
                restarts += 1;
                if restarts > 5 {
                    return Err(Error::NumericalBreakdown(
                        "simplex did not settle after repeated reinversion".into(),
                    ));
                }
                s.reinvert()?;
            }
        }
    }
}

impl<'a> Solver<'a> {
    fn new(sf: &'a StdForm, opts: &'a LpOptions) -> Self {
        let total = sf.n + sf.m;
        let mut state = vec![State::Basic; total];
        let mut x = vec![0.0; total];
        for j in 0..sf.n {
            let (lo, hi) = (sf.lower[j], sf.upper[j]);
            if lo.is_finite() {
                state[j] = State::Lower;
                x[j] = lo;
            } else if hi.is_finite() {
                state[j] = State::Upper;
                x[j] = hi;
            } else {
                state[j] = State::Zero;
            }
        }
        let head: Vec<usize> = (sf.n..total).collect();
        let mut s = Solver {
            sf,
            opts,
            head,
            state,
            x,
            etas: EtaFile::default(),
            iterations: 0,
            degenerate_run: 0,
            bland: false,
            work: vec![0.0; sf.m],
            nz: Vec::with_capacity(sf.m),
            y: vec![0.0; sf.m],
        };
        s.recompute_basics();
        s
    }

    fn warm(&mut self, start: &[State]) -> Result<()> {
        let sf = self.sf;
        debug_assert_eq!(start.len(), sf.n + sf.m);
        let mut head = Vec::with_capacity(sf.m);
        for (j, &st) in start.iter().enumerate() {
            let (lo, hi) = (sf.lower[j], sf.upper[j]);
            let st = match st {
                State::Basic => {
                    head.push(j);
                    State::Basic
                }
                State::Upper if hi.is_finite() => State::Upper,
                State::Lower | State::Upper | State::Zero if lo.is_finite() => State::Lower,
                _ if hi.is_finite() => State::Upper,
                _ => State::Zero,
            };
            self.state[j] = st;
            self.x[j] = match st {
                State::Lower => lo,
                State::Upper => hi,
                _ => 0.0,
            };
        }
        // Surplus basics are dropped to a bound by the reinversion; rows left
        // uncovered take their logical.
        self.head = head;
        self.reinvert()
    }

    fn load_column(&mut self, j: usize) {
        self.work.iter_mut().for_each(|w| *w = 0.0);
        if j < self.sf.n {
            let (idx, val) = self.sf.column(j);
            for (&i, &a) in idx.iter().zip(val) {
                self.work[i] = a;
            }
        } else {
            self.work[j - self.sf.n] = 1.0;
        }
    }

    fn collect_nonzeros(&mut self) {
        self.nz.clear();
        for (i, &w) in self.work.iter().enumerate() {
            if w != 0.0 {
                self.nz.push(i);
            }
        }
    }

    /// `x_B = -B^-1 N x_N`.
    fn recompute_basics(&mut self) {
        let sf = self.sf;
        let mut rhs = vec![0.0; sf.m];
        for j in 0..sf.n + sf.m {
            if self.state[j] == State::Basic {
                continue;
            }
            let v = self.x[j];
            if v == 0.0 {
                continue;
            }
            if j < sf.n {
                let (idx, val) = sf.column(j);
                for (&i, &a) in idx.iter().zip(val) {
                    rhs[i] -= a * v;
                }
            } else {
                rhs[j - sf.n] -= v;
            }
        }
        self.etas.ftran(&mut rhs);
        for (p, &b) in self.head.iter().enumerate() {
            self.x[b] = rhs[p];
        }
    }

    /// Rebuilds the eta file for the current basic set.
    fn reinvert(&mut self) -> Result<()> {
        let sf = self.sf;
        let n = sf.n;
        let m = sf.m;
        self.etas.clear();
        let mut taken = vec![false; m];
        let mut new_head = vec![usize::MAX; m];
        let mut structurals = Vec::new();
        for &b in &self.head {
            if b >= n {
                taken[b - n] = true;
                new_head[b - n] = b;
            } else {
                structurals.push(b);
            }
        }
        structurals.sort_by_key(|&j| (sf.col_start[j + 1] - sf.col_start[j], j));
        self.work.iter_mut().for_each(|w| *w = 0.0);
        let mut mark = vec![false; m];
        let mut nz = std::mem::take(&mut self.nz);
        nz.clear();
        for j in structurals {
            for &i in &nz {
                self.work[i] = 0.0;
                mark[i] = false;
            }
            nz.clear();
            let (idx, val) = sf.column(j);
            for (&i, &a) in idx.iter().zip(val) {
                self.work[i] = a;
                mark[i] = true;
                nz.push(i);
            }
            self.etas.ftran_tracked(&mut self.work, &mut nz, &mut mark);
            let mut best = usize::MAX;
            let mut mag = 0.0;
            for &i in &nz {
                let w = self.work[i].abs();
                if !taken[i] && (w > mag || (w == mag && w > 0.0 && i < best)) {
                    mag = w;
                    best = i;
                }
            }
            if best == usize::MAX || mag < self.opts.pivot_tol {
                // Dependent column: drop it to its nearest bound; the row
                // logical left uncovered takes its place below.
                let (lo, hi) = (sf.lower[j], sf.upper[j]);
                let v = self.x[j];
                self.state[j] = if lo.is_finite() && (!hi.is_finite() || (v - lo).abs() <= (hi - v).abs()) {
                    self.x[j] = lo;
                    State::Lower
                } else if hi.is_finite() {
                    self.x[j] = hi;
                    State::Upper
                } else {
                    self.x[j] = 0.0;
                    State::Zero
                };
                continue;
            }
            nz.sort_unstable();
            self.etas.push(best, &self.work, &nz);
            taken[best] = true;
            new_head[best] = j;
        }
        for &i in &nz {
            self.work[i] = 0.0;
        }
        nz.clear();
        self.nz = nz;
        for i in 0..m {
            if new_head[i] == usize::MAX {
                new_head[i] = n + i;
                self.state[n + i] = State::Basic;
            }
        }
        self.head = new_head;
        self.recompute_basics();
        Ok(())
    }

    fn violation(&self, j: usize) -> f64 {
        let v = self.x[j];
        let tol = self.opts.feas_tol;
        if v < self.sf.lower[j] - tol {
            -1.0
        } else if v > self.sf.upper[j] + tol {
            1.0
        } else {
            0.0
        }
    }

    fn primal_infeasibility(&self) -> f64 {
        self.head
            .iter()
            .map(|&b| {
                let v = self.x[b];
                (self.sf.lower[b] - v).max(v - self.sf.upper[b]).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    fn cost(&self, j: usize, phase_one: bool) -> f64 {
        if phase_one {
            if self.state[j] == State::Basic {
                self.violation(j)
            } else {
                0.0
            }
        } else if j < self.sf.n {
            self.sf.cost[j]
        } else {
            0.0
        }
    }

    fn compute_duals(&mut self, phase_one: bool) {
        for p in 0..self.sf.m {
            self.y[p] = self.cost(self.head[p], phase_one);
        }
        let mut y = std::mem::take(&mut self.y);
        self.etas.btran(&mut y);
        self.y = y;
    }

    fn reduced_cost(&self, j: usize, phase_one: bool) -> f64 {
        let c = self.cost(j, phase_one);
        if j < self.sf.n {
            let (idx, val) = self.sf.column(j);
            c - idx.iter().zip(val).map(|(&i, &a)| self.y[i] * a).sum::<f64>()
        } else {
            c - self.y[j - self.sf.n]
        }
    }

    /// Entering column and direction (+1 increase, -1 decrease).
    fn best_entering(&self, phase_one: bool) -> Option<(usize, f64)> {
        let tol = self.opts.dual_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_mag = 0.0;
        for j in 0..self.sf.n + self.sf.m {
            let st = self.state[j];
            if st == State::Basic || self.sf.lower[j] == self.sf.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, phase_one);
            let dir = match st {
                State::Lower if d < -tol => 1.0,
                State::Upper if d > tol => -1.0,
                State::Zero if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if d.abs() > best_mag {
                best_mag = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn iterate(&mut self) -> Result<Step> {
        let phase_one = self.primal_infeasibility() > self.opts.feas_tol;
        self.compute_duals(phase_one);
        let Some((q, dir)) = self.best_entering(phase_one) else {
            return Ok(if phase_one { Step::Infeasible } else { Step::Optimal });
        };
        self.load_column(q);
        self.etas.ftran(&mut self.work);

        let (leave, theta) = self.ratio_test(q, dir, phase_one);
        self.iterations += 1;

        let range = self.sf.upper[q] - self.sf.lower[q];
        let flip = range.is_finite() && leave.map_or(true, |_| range <= theta);
        if leave.is_none() && !flip {
            if phase_one {
                // Only tiny pivots block this column; the current point is the
                // best phase one can certify.
                return Ok(Step::Infeasible);
            }
            let mut ray = vec![0.0; self.sf.n];
            if q < self.sf.n {
                ray[q] = dir;
            }
            for (p, &b) in self.head.iter().enumerate() {
                if b < self.sf.n {
                    ray[b] = -dir * self.work[p];
                }
            }
            return Ok(Step::Unbounded(ray));
        }
        let step = if flip { range } else { theta };

        if step <= 1e-12 {
            self.degenerate_run += 1;
            if self.degenerate_run > 2 * self.sf.n.max(1) {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }

        if step != 0.0 {
            self.x[q] += dir * step;
            for (p, &b) in self.head.iter().enumerate() {
                let a = self.work[p];
                if a != 0.0 {
                    self.x[b] -= dir * step * a;
                }
            }
        }

        if flip {
            if dir > 0.0 {
                self.state[q] = State::Upper;
                self.x[q] = self.sf.upper[q];
            } else {
                self.state[q] = State::Lower;
                self.x[q] = self.sf.lower[q];
            }
            return Ok(Step::Continue);
        }

        let (p, to_upper) = leave.expect("blocking row");
        let b = self.head[p];
        if to_upper {
            self.state[b] = State::Upper;
            self.x[b] = self.sf.upper[b];
        } else {
            self.state[b] = State::Lower;
            self.x[b] = self.sf.lower[b];
        }
        self.collect_nonzeros();
        self.etas.push(p, &self.work, &self.nz);
        self.head[p] = q;
        self.state[q] = State::Basic;
        Ok(Step::Continue)
    }

    /// Returns the blocking position (and whether it leaves at its upper
    /// bound) together with the step length.
    fn ratio_test(&self, q: usize, dir: f64, phase_one: bool) -> (Option<(usize, bool)>, f64) {
        let ptol = self.opts.pivot_tol;
        let ftol = self.opts.feas_tol;
        let _ = q;

        // For each blocking candidate: (position, bound value, leaves at upper, rate).
        let candidate = |p: usize| -> Option<(f64, bool, f64)> {
            let a = self.work[p];
            if a.abs() <= ptol {
                return None;
            }
            let rate = -dir * a;
            let b = self.head[p];
            let v = self.x[b];
            let (lo, hi) = (self.sf.lower[b], self.sf.upper[b]);
            if phase_one && v < lo - ftol {
                return (rate > 0.0).then_some((lo, false, rate));
            }
            if phase_one && v > hi + ftol {
                return (rate < 0.0).then_some((hi, true, rate));
            }
            if rate > 0.0 && hi.is_finite() {
                Some((hi, true, rate))
            } else if rate < 0.0 && lo.is_finite() {
                Some((lo, false, rate))
            } else {
                None
            }
        };

        if self.bland {
            let mut best: Option<(usize, bool)> = None;
            let mut best_t = f64::INFINITY;
            let mut best_var = usize::MAX;
            for p in 0..self.sf.m {
                if let Some((bound, up, rate)) = candidate(p) {
                    let t = ((bound - self.x[self.head[p]]) / rate).max(0.0);
                    let var = self.head[p];
                    if t < best_t - 1e-12 || (t <= best_t + 1e-12 && var < best_var) {
                        best_t = t;
                        best = Some((p, up));
                        best_var = var;
                    }
                }
            }
            return (best, best_t);
        }

        // Harris two-pass: bound the step with relaxed bounds, then pick the
        // largest pivot among rows blocking within that bound.
        let mut relaxed = f64::INFINITY;
        for p in 0..self.sf.m {
            if let Some((bound, _, rate)) = candidate(p) {
                let slack = if rate > 0.0 { ftol } else { -ftol };
                let t = ((bound + slack - self.x[self.head[p]]) / rate).max(0.0);
                relaxed = relaxed.min(t);
            }
        }
        if relaxed == f64::INFINITY {
            return (None, f64::INFINITY);
        }
        let mut best: Option<(usize, bool)> = None;
        let mut best_mag = 0.0;
        let mut best_t = 0.0;
        for p in 0..self.sf.m {
            if let Some((bound, up, rate)) = candidate(p) {
                let t = ((bound - self.x[self.head[p]]) / rate).max(0.0);
                if t <= relaxed && self.work[p].abs() > best_mag {
                    best_mag = self.work[p].abs();
                    best = Some((p, up));
                    best_t = t;
                }
            }
        }
        (best, best_t)
    }

    fn finish(&self, status: LpStatus, ray: Option<Vec<f64>>) -> Outcome {
        let n = self.sf.n;
        Outcome {
            status,
            x: self.x[..n].to_vec(),
            y: self.y.clone(),
            ray,
            basic: self.state[..n].iter().map(|s| *s == State::Basic).collect(),
            states: self.state.clone(),
            iterations: self.iterations,
        }
    }
}
