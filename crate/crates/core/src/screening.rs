//! Rolling-horizon screening sweeps, reduction and the reduced UC solve.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{
    build_screen_multi_aware, build_screen_partial, build_screen_region, build_screen_single,
    build_screen_truth, build_uc, extract_schedule, BoundSense, Formulation, ScreeningTarget,
    VariableLayout,
};
use crate::lp::{solve_lp, LpOptions, LpStatus};
use crate::milp::{solve_mip, MipOptions, MipSolution};
use crate::model::{CommitmentSchedule, FlowModel, LoadProfile, PartialSchedule, UcInstance};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MethodKind {
    Single,
    MultiAware,
    MultiTruth,
    MultiPartial,
    Region,
}

impl MethodKind {
    pub fn parse(name: &str) -> Option<MethodKind> {
        Some(match name.to_ascii_lowercase().as_str() {
            "single" => MethodKind::Single,
            "multi" | "multi_aware" | "aware" => MethodKind::MultiAware,
            "truth" | "multi_truth" => MethodKind::MultiTruth,
            "partial" | "multi_partial" => MethodKind::MultiPartial,
            "region" => MethodKind::Region,
            _ => return None,
        })
    }

    /// Methods whose verdicts hold for the instance without any prediction.
    pub fn is_prediction_free(self) -> bool {
        matches!(self, MethodKind::Single | MethodKind::MultiAware | MethodKind::Region)
    }
}

#[derive(Debug, Clone)]
pub enum ScreeningMethod {
    Single,
    MultiAware,
    MultiTruth(CommitmentSchedule),
    MultiPartial(PartialSchedule),
    /// The load profile handed to [`screen`] is the nominal one.
    Region { r: f64 },
}

impl ScreeningMethod {
    pub fn kind(&self) -> MethodKind {
        match self {
            ScreeningMethod::Single => MethodKind::Single,
            ScreeningMethod::MultiAware => MethodKind::MultiAware,
            ScreeningMethod::MultiTruth(_) => MethodKind::MultiTruth,
            ScreeningMethod::MultiPartial(_) => MethodKind::MultiPartial,
            ScreeningMethod::Region { .. } => MethodKind::Region,
        }
    }

    fn formulate(
        &self,
        instance: &UcInstance,
        flow: &FlowModel,
        loads: &LoadProfile,
        target: ScreeningTarget,
    ) -> Result<Formulation> {
        match self {
            ScreeningMethod::Single => build_screen_single(instance, flow, loads, target),
            ScreeningMethod::MultiAware => build_screen_multi_aware(instance, flow, loads, target),
            ScreeningMethod::MultiTruth(s) => build_screen_truth(instance, flow, loads, target, s),
            ScreeningMethod::MultiPartial(p) => build_screen_partial(instance, flow, loads, target, p),
            ScreeningMethod::Region { r } => build_screen_region(instance, flow, loads, *r, target),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Eliminated,
    Kept,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetVerdict {
    pub target: ScreeningTarget,
    pub verdict: Verdict,
    /// Optimal screening objective; `None` when the LP was not solved to
    /// optimality.
    pub value: Option<f64>,
    /// The removed bound: `limit` for UPPER, `-limit` for LOWER.
    pub bound: f64,
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScreeningStats {
    pub total: usize,
    pub eliminated: usize,
    pub kept: usize,
    pub infeasible: usize,
    pub errors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningResult {
    pub schema_version: u32,
    pub method: MethodKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_r: Option<f64>,
    pub instance: String,
    pub horizon: usize,
    pub num_lines: usize,
    /// One entry per target, in sweep order.
    pub verdicts: Vec<TargetVerdict>,
    pub stats: ScreeningStats,
}

#[derive(Debug, Clone)]
pub struct ScreenOptions {
    pub lp: LpOptions,
    /// Worker threads; `0` uses the global pool.
    pub jobs: usize,
    /// Record per-target and total wall times.
    pub timings: bool,
}

impl Default for ScreenOptions {
    fn default() -> Self {
        ScreenOptions {
            lp: LpOptions::default(),
            jobs: 0,
            timings: false,
        }
    }
}

/// Safety margin applied to the removed bound.
pub fn margin_for(limit: f64) -> f64 {
    1e-5 * limit.max(1.0)
}

/// Screens one target.
pub fn screen_target(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    method: &ScreeningMethod,
    target: ScreeningTarget,
    lp: &LpOptions,
) -> TargetVerdict {
    let limit = instance.lines()[target.line].flow_limit;
    let margin = margin_for(limit);
    let bound = match target.sense {
        BoundSense::Upper => limit,
        BoundSense::Lower => -limit,
    };
    let mut out = TargetVerdict {
        target,
        verdict: Verdict::Kept,
        value: None,
        bound,
        margin,
        solve_ms: None,
        diagnostic: None,
    };
    let solved = method
        .formulate(instance, flow, loads, target)
        .and_then(|f| solve_lp(&f.lp, lp));
    match solved {
        Ok(sol) => match sol.status {
            LpStatus::Optimal => {
                let s = sol.objective_value;
                out.value = Some(s);
                let inactive = match target.sense {
                    BoundSense::Upper => s <= limit - margin,
                    BoundSense::Lower => s >= -limit + margin,
                };
                if inactive {
                    out.verdict = Verdict::Eliminated;
                }
            }
            LpStatus::Infeasible => out.diagnostic = Some("screening problem infeasible".into()),
            LpStatus::Unbounded => out.diagnostic = Some("screening problem unbounded".into()),
        },
        Err(e) => {
            log::warn!("screening {target} failed: {e}");
            out.diagnostic = Some(format!("solver error: {e}"));
        }
    }
    out
}

/// Screens every line bound at every step `1..=T` of the instance.
pub fn screen(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    method: &ScreeningMethod,
    options: &ScreenOptions,
) -> Result<ScreeningResult> {
    let horizon = instance.horizon();
    loads.check_matches(instance)?;
    match method {
        ScreeningMethod::Region { r } if !(0.0..1.0).contains(r) => {
            return Err(Error::InvalidRange {
                value: *r,
                range: "[0, 1)",
            })
        }
        ScreeningMethod::MultiTruth(s) if s.horizon() < horizon || s.num_generators() != instance.num_generators() => {
            return Err(Error::ScheduleCoverage("schedule does not cover the instance".into()));
        }
        ScreeningMethod::MultiPartial(p) if p.num_generators() != instance.num_generators() => {
            return Err(Error::ScheduleCoverage("partial schedule does not match the instance".into()));
        }
        _ => {}
    }
    let started = Instant::now();
    let targets = ScreeningTarget::all(instance, horizon);
    let run = |t: &ScreeningTarget| {
        let t0 = Instant::now();
        let mut v = screen_target(instance, flow, loads, method, *t, &options.lp);
        if options.timings {
            v.solve_ms = Some(t0.elapsed().as_secs_f64() * 1e3);
        }
        v
    };
    let verdicts: Vec<TargetVerdict> = if options.jobs == 1 {
        targets.iter().map(run).collect()
    } else if options.jobs == 0 {
        targets.par_iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| Error::NumericalBreakdown(format!("thread pool: {e}")))?;
        pool.install(|| targets.par_iter().map(run).collect())
    };

    let mut stats = ScreeningStats {
        total: verdicts.len(),
        ..ScreeningStats::default()
    };
    for v in &verdicts {
        match v.verdict {
            Verdict::Eliminated => stats.eliminated += 1,
            Verdict::Kept => stats.kept += 1,
        }
        match &v.diagnostic {
            Some(d) if d.starts_with("solver error") => stats.errors += 1,
            Some(_) => stats.infeasible += 1,
            None => {}
        }
    }
    if options.timings {
        stats.wall_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    Ok(ScreeningResult {
        schema_version: SCHEMA_VERSION,
        method: method.kind(),
        region_r: match method {
            ScreeningMethod::Region { r } => Some(*r),
            _ => None,
        },
        instance: instance.fingerprint(),
        horizon,
        num_lines: instance.num_lines(),
        verdicts,
        stats,
    })
}

impl ScreeningResult {
    pub fn eliminated(&self) -> BTreeSet<ScreeningTarget> {
        self.verdicts
            .iter()
            .filter(|v| v.verdict == Verdict::Eliminated)
            .map(|v| v.target)
            .collect()
    }

    pub fn kept(&self) -> BTreeSet<ScreeningTarget> {
        self.verdicts
            .iter()
            .filter(|v| v.verdict == Verdict::Kept)
            .map(|v| v.target)
            .collect()
    }

    pub fn remaining(&self) -> usize {
        self.stats.kept
    }

    /// Eliminated fraction of all targets.
    pub fn screening_rate(&self) -> f64 {
        if self.verdicts.is_empty() {
            0.0
        } else {
            self.stats.eliminated as f64 / self.verdicts.len() as f64
        }
    }

    pub fn verdict(&self, target: ScreeningTarget) -> Option<&TargetVerdict> {
        self.verdicts.iter().find(|v| v.target == target)
    }

    /// Fixed-width text table; `solve_ms` shows `-` unless timings were
    /// recorded.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>8} {:>6} {:>6} {:>16} {:>12} {:>10} {:>10}",
            "timestep", "line", "sense", "S*", "bound", "verdict", "solve_ms"
        );
        for v in &self.verdicts {
            // Values that round to zero print without a sign.
            let value = v
                .value
                .map_or_else(|| "infeasible".to_string(), |s| format!("{:.6}", if s.abs() < 5e-7 { 0.0 } else { s }));
            let verdict = match v.verdict {
                Verdict::Eliminated => "ELIMINATED",
                Verdict::Kept => "KEPT",
            };
            let ms = v.solve_ms.map_or_else(|| "-".to_string(), |m| format!("{m:.3}"));
            let _ = writeln!(
                out,
                "{:>8} {:>6} {:>6} {:>16} {:>12.6} {:>10} {:>10}",
                v.target.timestep, v.target.line, v.target.sense, value, v.bound, verdict, ms
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdicts serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScreeningResult = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema_version {}",
                doc.schema_version
            )));
        }
        Ok(doc)
    }
}

/// An instance together with the flow rows that survive screening.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    pub base: UcInstance,
    pub kept: BTreeSet<ScreeningTarget>,
}

pub fn reduce(instance: &UcInstance, result: &ScreeningResult) -> Result<ReducedInstance> {
    let universe: BTreeSet<ScreeningTarget> = ScreeningTarget::all(instance, instance.horizon()).into_iter().collect();
    let covered: BTreeSet<ScreeningTarget> = result.verdicts.iter().map(|v| v.target).collect();
    if covered != universe || result.verdicts.len() != universe.len() {
        return Err(Error::Coverage(format!(
            "result covers {} targets, instance has {}",
            result.verdicts.len(),
            universe.len()
        )));
    }
    Ok(ReducedInstance {
        base: instance.clone(),
        kept: result.kept(),
    })
}

#[derive(Debug, Clone)]
pub struct UcOutcome {
    pub solution: MipSolution,
    pub layout: VariableLayout,
    pub schedule: Option<CommitmentSchedule>,
    pub num_rows: usize,
}

impl UcOutcome {
    /// Line flows at step `t` of the optimal solution.
    pub fn line_flows(&self, flow: &FlowModel, t: usize) -> Vec<f64> {
        flow.line_flows(&self.layout.flows_at(&self.solution.primal, t))
    }

    pub fn dispatch(&self, gen: usize, t: usize) -> f64 {
        self.layout.x(gen, t).map_or(0.0, |j| self.solution.primal[j])
    }
}

/// Builds and solves the UC MILP, optionally restricted to some flow rows
/// and with some commitments fixed.
pub fn solve_uc(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    fixed_u: Option<&PartialSchedule>,
    kept: Option<&BTreeSet<ScreeningTarget>>,
    options: &MipOptions,
) -> Result<UcOutcome> {
    let f = build_uc(instance, flow, loads, instance.horizon(), fixed_u, kept)?;
    let num_rows = f.rows.len();
    let (mip, layout, _) = f.into_mip()?;
    let solution = solve_mip(&mip, options)?;
    let schedule = extract_schedule(&solution, &layout).ok();
    Ok(UcOutcome {
        solution,
        layout,
        schedule,
        num_rows,
    })
}

pub fn solve_reduced(
    reduced: &ReducedInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    options: &MipOptions,
) -> Result<UcOutcome> {
    solve_uc(&reduced.base, flow, loads, None, Some(&reduced.kept), options)
}

/// A removed flow row that the reduced solution violates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowViolation {
    pub target: ScreeningTarget,
    pub flow: f64,
    pub bound: f64,
}

/// Evaluates every removed row at a reduced solution.
pub fn check_eliminated(
    reduced: &ReducedInstance,
    flow: &FlowModel,
    outcome: &UcOutcome,
    tol: f64,
) -> Vec<RowViolation> {
    let mut out = Vec::new();
    let horizon = reduced.base.horizon();
    for t in 1..=horizon {
        let flows = outcome.line_flows(flow, t);
        for (j, line) in reduced.base.lines().iter().enumerate() {
            for sense in [BoundSense::Upper, BoundSense::Lower] {
                let target = ScreeningTarget::new(j, sense, t);
                if reduced.kept.contains(&target) {
                    continue;
                }
                let (bad, bound) = match sense {
                    BoundSense::Upper => (flows[j] > line.flow_limit + tol, line.flow_limit),
                    BoundSense::Lower => (flows[j] < -line.flow_limit - tol, -line.flow_limit),
                };
                if bad {
                    out.push(RowViolation {
                        target,
                        flow: flows[j],
                        bound,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Eliminated by `a` but kept by `b`.
    pub only_a: Vec<ScreeningTarget>,
    /// Eliminated by `b` but kept by `a`.
    pub only_b: Vec<ScreeningTarget>,
    /// `(timestep, eliminated by a, eliminated by b)`.
    pub per_step: Vec<(usize, usize, usize)>,
    /// Line id to `(eliminated by a, eliminated by b)` for lines that differ.
    pub per_line: BTreeMap<usize, (usize, usize)>,
}

impl Comparison {
    /// Whether every target eliminated by `a` is also eliminated by `b`.
    pub fn a_within_b(&self) -> bool {
        self.only_a.is_empty()
    }

    pub fn is_identical(&self) -> bool {
        self.only_a.is_empty() && self.only_b.is_empty()
    }
}

pub fn compare_results(a: &ScreeningResult, b: &ScreeningResult) -> Result<Comparison> {
    let ua: BTreeSet<ScreeningTarget> = a.verdicts.iter().map(|v| v.target).collect();
    let ub: BTreeSet<ScreeningTarget> = b.verdicts.iter().map(|v| v.target).collect();
    if ua != ub || a.instance != b.instance {
        return Err(Error::UniverseMismatch(format!(
            "results cover {} and {} targets on instances {} and {}",
            ua.len(),
            ub.len(),
            &a.instance[..a.instance.len().min(12)],
            &b.instance[..b.instance.len().min(12)]
        )));
    }
    let ea = a.eliminated();
    let eb = b.eliminated();
    let mut per_step = BTreeMap::new();
    let mut per_line: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for t in &ua {
        let e = per_step.entry(t.timestep).or_insert((0, 0));
        let l = per_line.entry(t.line).or_insert((0, 0));
        if ea.contains(t) {
            e.0 += 1;
            l.0 += 1;
        }
        if eb.contains(t) {
            e.1 += 1;
            l.1 += 1;
        }
    }
    per_line.retain(|_, (x, y)| x != y);
    Ok(Comparison {
        only_a: ea.difference(&eb).copied().collect(),
        only_b: eb.difference(&ea).copied().collect(),
        per_step: per_step.into_iter().map(|(t, (x, y))| (t, x, y)).collect(),
        per_line,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Fixture;

    fn run(f: Fixture, method: &ScreeningMethod) -> ScreeningResult {
        let (inst, flow, loads) = f.load();
        screen(&inst, &flow, &loads, method, &ScreenOptions::default()).unwrap()
    }

    #[test]
    fn radial_case_eliminates_everything() {
        // One line carrying a fixed 40 MW against a 50 MW limit.
        for m in [ScreeningMethod::Single, ScreeningMethod::MultiAware] {
            let r = run(Fixture::Fix2, &m);
            assert_eq!(r.stats.total, 4);
            assert_eq!(r.remaining(), 0);
            for v in &r.verdicts {
                let expect = match v.target.sense {
                    BoundSense::Upper => 40.0,
                    BoundSense::Lower => 40.0,
                };
                assert!((v.value.unwrap() - expect).abs() < 1e-6, "{v:?}");
            }
        }
    }

    #[test]
    fn ramp_coupling_removes_a_row_single_keeps() {
        let t = ScreeningTarget::new(0, BoundSense::Upper, 2);
        let single = run(Fixture::FixA, &ScreeningMethod::Single);
        let multi = run(Fixture::FixA, &ScreeningMethod::MultiAware);
        assert_eq!(single.verdict(t).unwrap().verdict, Verdict::Kept);
        assert_eq!(multi.verdict(t).unwrap().verdict, Verdict::Eliminated);
        assert!((single.verdict(t).unwrap().value.unwrap() - 30.0).abs() < 1e-6);
        assert!((multi.verdict(t).unwrap().value.unwrap() - 20.0).abs() < 1e-6);
        let cmp = compare_results(&single, &multi).unwrap();
        assert!(cmp.a_within_b());
        assert!(cmp.only_b.contains(&t));
        assert!(!cmp.is_identical());
    }

    #[test]
    fn margin_keeps_rows_at_the_limit() {
        // Single screen of line 0 at t=2 on FIX-A reaches exactly 30 = limit.
        let single = run(Fixture::FixA, &ScreeningMethod::Single);
        let v = single.verdict(ScreeningTarget::new(0, BoundSense::Upper, 2)).unwrap();
        assert!(v.value.unwrap() > v.bound - v.margin);
        assert!((v.margin - 3e-4).abs() < 1e-12);
        assert!((margin_for(0.5) - 1e-5).abs() < 1e-18);
    }

    #[test]
    fn verdicts_follow_sweep_order_and_are_job_independent() {
        let (inst, flow, loads) = Fixture::Fix6.load();
        let serial = screen(
            &inst,
            &flow,
            &loads,
            &ScreeningMethod::MultiAware,
            &ScreenOptions {
                jobs: 1,
                ..ScreenOptions::default()
            },
        )
        .unwrap();
        let pooled = screen(
            &inst,
            &flow,
            &loads,
            &ScreeningMethod::MultiAware,
            &ScreenOptions {
                jobs: 3,
                ..ScreenOptions::default()
            },
        )
        .unwrap();
        assert_eq!(serial.to_json(), pooled.to_json());
        let targets: Vec<_> = serial.verdicts.iter().map(|v| v.target).collect();
        let mut sorted = targets.clone();
        sorted.sort();
        assert_eq!(targets, sorted);
        assert_eq!(targets, ScreeningTarget::all(&inst, inst.horizon()));
    }

    #[test]
    fn json_round_trip_and_table() {
        let r = run(Fixture::FixA, &ScreeningMethod::Region { r: 0.1 });
        let back = ScreeningResult::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let table = r.to_table();
        assert!(table.lines().count() > r.verdicts.len());
        assert!(table.contains("UPPER") && table.contains("LOWER"));
        assert!(ScreeningResult::from_json("{\"schema_version\": 99}").is_err());
    }

    #[test]
    fn reduce_requires_full_coverage() {
        let inst = Fixture::FixA.instance();
        let mut r = run(Fixture::FixA, &ScreeningMethod::MultiAware);
        assert!(reduce(&inst, &r).is_ok());
        r.verdicts.pop();
        assert!(matches!(reduce(&inst, &r), Err(Error::Coverage(_))));
        assert!(reduce(&Fixture::Fix6.instance(), &run(Fixture::FixA, &ScreeningMethod::Single)).is_err());
    }

    #[test]
    fn reduced_problem_reproduces_full_optimum() {
        for f in [Fixture::FixA, Fixture::Fix6] {
            let (inst, flow, loads) = f.load();
            let r = screen(&inst, &flow, &loads, &ScreeningMethod::MultiAware, &ScreenOptions::default()).unwrap();
            let reduced = reduce(&inst, &r).unwrap();
            let opts = MipOptions::default();
            let full = solve_uc(&inst, &flow, &loads, None, None, &opts).unwrap();
            let red = solve_reduced(&reduced, &flow, &loads, &opts).unwrap();
            assert!(full.solution.is_optimal() && red.solution.is_optimal());
            let (a, b) = (full.solution.objective_value, red.solution.objective_value);
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{f:?}: {a} vs {b}");
            assert!(red.num_rows < full.num_rows);
            assert!(check_eliminated(&reduced, &flow, &red, 1e-6).is_empty());
        }
    }

    #[test]
    fn removed_rows_are_checked_against_a_solution() {
        // Removing every flow row lets the FIX-A optimum push 35 MW through
        // line 0 at t=2 (cheap unit at its ramp-limited maximum).
        let (inst, flow, loads) = Fixture::FixA.load();
        let reduced = ReducedInstance {
            base: inst.clone(),
            kept: BTreeSet::new(),
        };
        let out = solve_reduced(&reduced, &flow, &loads, &MipOptions::default()).unwrap();
        let v = check_eliminated(&reduced, &flow, &out, 1e-6);
        let flows = out.line_flows(&flow, 2);
        assert_eq!(v.iter().any(|r| r.target == ScreeningTarget::new(0, BoundSense::Upper, 2)), flows[0] > 30.0 + 1e-6);
        for r in &v {
            assert!((r.flow - out.line_flows(&flow, r.target.timestep)[r.target.line]).abs() < 1e-12);
        }
    }

    #[test]
    fn comparing_different_instances_fails() {
        let a = run(Fixture::FixA, &ScreeningMethod::Single);
        let b = run(Fixture::Fix6, &ScreeningMethod::Single);
        assert!(matches!(compare_results(&a, &b), Err(Error::UniverseMismatch(_))));
    }

    #[test]
    fn region_radius_is_validated() {
        let (inst, flow, loads) = Fixture::FixA.load();
        let err = screen(&inst, &flow, &loads, &ScreeningMethod::Region { r: 1.0 }, &ScreenOptions::default());
        assert!(matches!(err, Err(Error::InvalidRange { .. })));
    }
}
