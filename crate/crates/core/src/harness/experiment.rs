//! End-to-end experiments over sampled load profiles.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{certify, gen_samples, DEFAULT_ORACLE_LIMIT};
use crate::error::{Error, Result};
use crate::formulation::ScreeningTarget;
use crate::milp::{MipOptions, MipStatus};
use crate::model::{parse_case, parse_loads, FlowModel, LoadProfile, PartialSchedule, UcInstance};
use crate::predictor::{partial_schedule, train, TrainingSet};
use crate::screening::{
    check_eliminated, reduce, screen, solve_reduced, solve_uc, MethodKind, ReducedInstance, ScreenOptions,
    ScreeningMethod, ScreeningResult, Verdict,
};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnConfig {
    pub k: usize,
    pub interval: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    pub r: f64,
}

/// Experiment description; relative paths resolve against the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub case: PathBuf,
    pub nominal: PathBuf,
    pub r_values: Vec<f64>,
    pub samples: usize,
    /// Any of `single`, `multi`, `region`.
    pub methods: Vec<String>,
    pub seed: u64,
    #[serde(default)]
    pub oracle: bool,
    /// Solve the full and reduced UC for every sample.
    #[serde(default = "default_true")]
    pub solve: bool,
    #[serde(default)]
    pub knn: Option<KnnConfig>,
    #[serde(default)]
    pub jobs: usize,
    /// Record wall-clock times (makes the report run-dependent).
    #[serde(default)]
    pub timings: bool,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Schema(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::validation("samples", "must be at least 1"));
        }
        for (i, r) in self.r_values.iter().enumerate() {
            if !(0.0..1.0).contains(r) {
                return Err(Error::validation(format!("r_values[{i}]"), "must lie in [0, 1)"));
            }
        }
        for (i, m) in self.methods.iter().enumerate() {
            match MethodKind::parse(m) {
                Some(k) if k.is_prediction_free() => {}
                _ => {
                    return Err(Error::validation(
                        format!("methods[{i}]"),
                        format!("`{m}` is not one of single, multi, region"),
                    ))
                }
            }
        }
        if let Some(k) = &self.knn {
            if k.k == 0 || k.interval == 0 || k.train_samples < k.k || k.test_samples == 0 {
                return Err(Error::validation("knn", "k, interval and sample counts must be positive, train >= k"));
            }
            if !(0.0..1.0).contains(&k.r) {
                return Err(Error::validation("knn.r", "must lie in [0, 1)"));
            }
        }
        Ok(())
    }

    fn method_kinds(&self) -> Vec<MethodKind> {
        let mut kinds: Vec<MethodKind> = self.methods.iter().filter_map(|m| MethodKind::parse(m)).collect();
        kinds.dedup();
        kinds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: MethodKind,
    /// Remaining (kept) targets per sample; a single entry for REGION.
    pub remaining: Vec<usize>,
    pub mean_remaining: f64,
    pub mean_screening_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub samples_checked: usize,
    /// Samples where SINGLE eliminated a target MULTI_AWARE kept with a
    /// feasible screening problem.
    pub violations: usize,
    /// Samples with an infeasible MULTI_AWARE screen. The sample itself is
    /// then infeasible and its KEPT-by-default verdicts prove nothing.
    #[serde(default)]
    pub infeasible_samples: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub remaining: usize,
    pub samples_checked: usize,
    /// Samples where REGION eliminated a target the sample screen kept with
    /// a feasible screening problem.
    pub violations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Option<MethodKind>,
    pub samples: usize,
    pub full_feasible: usize,
    /// Samples whose full and reduced optimal objectives differ by more than
    /// `1e-6` relative.
    pub objective_mismatches: usize,
    pub max_relative_gap: f64,
    pub mean_full_rows: f64,
    pub mean_reduced_rows: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_full_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_reduced_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub r: f64,
    pub samples: usize,
    pub methods: Vec<MethodReport>,
    pub inclusion: Option<InclusionReport>,
    pub region: Option<RegionReport>,
    pub certification: Option<CertificationReport>,
    pub solve: Option<SolveReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialReport {
    pub k: usize,
    pub interval: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    /// Per-entry misclassification rate of the full predicted schedule.
    pub classification_error: f64,
    pub mean_remaining_partial: f64,
    pub mean_remaining_aware: f64,
    /// Reduced problems (predicted commitments fixed on the insertion steps)
    /// that are solvable and violate none of the eliminated rows.
    pub feasible: usize,
    pub feasibility_rate: f64,
    /// Mean relative objective gap over the feasible samples.
    pub mean_gap: f64,
    pub eliminated_row_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub instance: String,
    pub horizon: usize,
    pub num_lines: usize,
    pub total_targets: usize,
    pub seed: u64,
    pub scenarios: Vec<ScenarioReport>,
    pub partial: Option<PartialReport>,
    /// Per-sample failures that did not abort the run.
    pub errors: Vec<String>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "instance {}  T={}  lines={}  targets={}",
            &self.instance[..12],
            self.horizon,
            self.num_lines,
            self.total_targets
        );
        for sc in &self.scenarios {
            let _ = writeln!(out, "\nr = {:.2}  ({} samples)", sc.r, sc.samples);
            let _ = writeln!(out, "  {:<12} {:>14} {:>14}", "method", "mean remaining", "screening rate");
            for m in &sc.methods {
                let _ = writeln!(
                    out,
                    "  {:<12} {:>14.2} {:>13.2}%",
                    format!("{:?}", m.method),
                    m.mean_remaining,
                    100.0 * m.mean_screening_rate
                );
            }
            if let Some(inc) = &sc.inclusion {
                let _ = writeln!(
                    out,
                    "  single within multi: {}/{} samples ({} infeasible)",
                    inc.samples_checked - inc.violations,
                    inc.samples_checked,
                    inc.infeasible_samples
                );
            }
            if let Some(reg) = &sc.region {
                let _ = writeln!(
                    out,
                    "  region within sample screens: {}/{} samples",
                    reg.samples_checked - reg.violations,
                    reg.samples_checked
                );
            }
            if let Some(c) = &sc.certification {
                let _ = writeln!(out, "  oracle certifications: {} checked, {} failed", c.checked, c.failures.len());
            }
            if let Some(s) = &sc.solve {
                let _ = writeln!(
                    out,
                    "  full vs reduced: {} feasible, {} mismatches, max gap {:.2e}, rows {:.1} -> {:.1}",
                    s.full_feasible, s.objective_mismatches, s.max_relative_gap, s.mean_full_rows, s.mean_reduced_rows
                );
                if let (Some(f), Some(r), Some(x)) = (s.mean_full_ms, s.mean_reduced_ms, s.speedup) {
                    let _ = writeln!(out, "  mean time full {f:.1} ms, reduced {r:.1} ms, speedup {x:.3}");
                }
            }
        }
        if let Some(p) = &self.partial {
            let _ = writeln!(
                out,
                "\npartial predictions (K={}, interval={}, {} train / {} test)",
                p.k, p.interval, p.train_samples, p.test_samples
            );
            let _ = writeln!(out, "  classification error {:.2}%", 100.0 * p.classification_error);
            let _ = writeln!(
                out,
                "  mean remaining: partial {:.2}, aware {:.2}",
                p.mean_remaining_partial, p.mean_remaining_aware
            );
            let _ = writeln!(
                out,
                "  feasible {}/{} ({:.1}%), mean gap {:.3}%",
                p.feasible,
                p.test_samples,
                100.0 * p.feasibility_rate,
                100.0 * p.mean_gap
            );
        }
        if !self.errors.is_empty() {
            let _ = writeln!(out, "\n{} errors:", self.errors.len());
            for e in &self.errors {
                let _ = writeln!(out, "  {e}");
            }
        }
        out
    }
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Whether `other` keeps some target of `eliminated` on a feasible screen.
fn contradicts(eliminated: &BTreeSet<ScreeningTarget>, other: &ScreeningResult) -> bool {
    other
        .verdicts
        .iter()
        .any(|v| v.verdict == Verdict::Kept && v.value.is_some() && eliminated.contains(&v.target))
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

struct SampleOutcome {
    results: Vec<(MethodKind, ScreeningResult)>,
    certification: Option<CertificationReport>,
    solve: Option<SolveSample>,
    errors: Vec<String>,
}

struct SolveSample {
    full_feasible: bool,
    gap: Option<f64>,
    full_rows: usize,
    reduced_rows: usize,
    full_ms: f64,
    reduced_ms: f64,
}

struct Ctx<'a> {
    instance: &'a UcInstance,
    flow: &'a FlowModel,
    cfg: &'a ExperimentConfig,
    screen_opts: ScreenOptions,
}

fn run_sample(ctx: &Ctx<'_>, index: usize, loads: &LoadProfile) -> SampleOutcome {
    let mut out = SampleOutcome {
        results: Vec::new(),
        certification: None,
        solve: None,
        errors: Vec::new(),
    };
    for kind in ctx.cfg.method_kinds() {
        let method = match kind {
            MethodKind::Single => ScreeningMethod::Single,
            MethodKind::MultiAware => ScreeningMethod::MultiAware,
            _ => continue,
        };
        match screen(ctx.instance, ctx.flow, loads, &method, &ctx.screen_opts) {
            Ok(r) => out.results.push((kind, r)),
            Err(e) => out.errors.push(format!("sample {index} {kind:?}: {e}")),
        }
    }
    if ctx.cfg.oracle {
        let mut cert = CertificationReport::default();
        let union: BTreeSet<ScreeningTarget> = out.results.iter().flat_map(|(_, r)| r.eliminated()).collect();
        for target in union {
            cert.checked += 1;
            match certify(ctx.instance, ctx.flow, loads, target, DEFAULT_ORACLE_LIMIT) {
                Ok(c) if c.certified => {}
                Ok(c) => cert.failures.push(format!("sample {index} {target}: oracle reaches {:?}", c.witness)),
                Err(e) => out.errors.push(format!("sample {index} oracle {target}: {e}")),
            }
        }
        out.certification = Some(cert);
    }
    if ctx.cfg.solve {
        // Reduce with the least conservative no-prediction screen available.
        let chosen = out
            .results
            .iter()
            .find(|(k, _)| *k == MethodKind::MultiAware)
            .or_else(|| out.results.first());
        if let Some((_, result)) = chosen {
            match solve_pair(ctx, loads, result) {
                Ok(s) => out.solve = Some(s),
                Err(e) => out.errors.push(format!("sample {index} solve: {e}")),
            }
        }
    }
    out
}

fn solve_pair(ctx: &Ctx<'_>, loads: &LoadProfile, result: &ScreeningResult) -> Result<SolveSample> {
    let opts = MipOptions::default();
    let t0 = Instant::now();
    let full = solve_uc(ctx.instance, ctx.flow, loads, None, None, &opts)?;
    let full_ms = t0.elapsed().as_secs_f64() * 1e3;
    let reduced = reduce(ctx.instance, result)?;
    let t1 = Instant::now();
    let red = solve_reduced(&reduced, ctx.flow, loads, &opts)?;
    let reduced_ms = t1.elapsed().as_secs_f64() * 1e3;
    let full_feasible = full.solution.status == MipStatus::Optimal;
    let gap = match (full.solution.status, red.solution.status) {
        (MipStatus::Optimal, MipStatus::Optimal) => Some(rel_gap(red.solution.objective_value, full.solution.objective_value)),
        (MipStatus::Infeasible, MipStatus::Infeasible) => Some(0.0),
        _ => Some(f64::INFINITY),
    };
    Ok(SolveSample {
        full_feasible,
        gap,
        full_rows: full.num_rows,
        reduced_rows: red.num_rows,
        full_ms,
        reduced_ms,
    })
}

fn load_inputs(cfg: &ExperimentConfig, base_dir: &Path) -> Result<(UcInstance, LoadProfile)> {
    let case_text = std::fs::read_to_string(base_dir.join(&cfg.case))?;
    let instance = parse_case(&case_text)?;
    let nominal_text = std::fs::read_to_string(base_dir.join(&cfg.nominal))?;
    let nominal = parse_loads(&nominal_text, &instance)?;
    Ok((instance, nominal))
}

/// Runs the configured experiment. Sample failures are recorded in
/// `errors` and do not abort the report.
pub fn run_experiment(cfg: &ExperimentConfig, base_dir: &Path) -> Result<MetricsReport> {
    cfg.validate()?;
    let (instance, nominal) = load_inputs(cfg, base_dir)?;
    run_experiment_with(cfg, &instance, &nominal)
}

/// Like [`run_experiment`] with the case and nominal profile already loaded.
pub fn run_experiment_with(cfg: &ExperimentConfig, instance: &UcInstance, nominal: &LoadProfile) -> Result<MetricsReport> {
    let flow = FlowModel::build(instance)?;
    let ctx = Ctx {
        instance,
        flow: &flow,
        cfg,
        screen_opts: ScreenOptions {
            jobs: 1,
            ..ScreenOptions::default()
        },
    };
    let total = 2 * instance.num_lines() * instance.horizon();
    let kinds = cfg.method_kinds();
    let mut errors = Vec::new();
    let mut scenarios = Vec::new();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::NumericalBreakdown(format!("thread pool: {e}")))?;

    for (ri, &r) in cfg.r_values.iter().enumerate() {
        let samples = gen_samples(nominal, r, cfg.samples, cfg.seed.wrapping_add(ri as u64))?;
        let outcomes: Vec<SampleOutcome> = pool.install(|| {
            samples
                .par_iter()
                .enumerate()
                .map(|(i, l)| run_sample(&ctx, i, l))
                .collect()
        });

        let mut methods = Vec::new();
        for kind in [MethodKind::Single, MethodKind::MultiAware] {
            if !kinds.contains(&kind) {
                continue;
            }
            let remaining: Vec<usize> = outcomes
                .iter()
                .filter_map(|o| o.results.iter().find(|(k, _)| *k == kind).map(|(_, r)| r.remaining()))
                .collect();
            methods.push(MethodReport {
                method: kind,
                mean_remaining: mean(remaining.iter().map(|&x| x as f64)),
                mean_screening_rate: mean(remaining.iter().map(|&x| 1.0 - x as f64 / total as f64)),
                remaining,
            });
        }

        let inclusion = (kinds.contains(&MethodKind::Single) && kinds.contains(&MethodKind::MultiAware)).then(|| {
            let mut rep = InclusionReport::default();
            for o in &outcomes {
                let single = o.results.iter().find(|(k, _)| *k == MethodKind::Single);
                let multi = o.results.iter().find(|(k, _)| *k == MethodKind::MultiAware);
                if let (Some((_, s)), Some((_, m))) = (single, multi) {
                    rep.samples_checked += 1;
                    if m.stats.infeasible > 0 {
                        rep.infeasible_samples += 1;
                    }
                    if contradicts(&s.eliminated(), m) {
                        rep.violations += 1;
                    }
                }
            }
            rep
        });

        let region = if kinds.contains(&MethodKind::Region) {
            match screen(instance, &flow, nominal, &ScreeningMethod::Region { r }, &ctx.screen_opts) {
                Ok(res) => {
                    let mut rep = RegionReport {
                        remaining: res.remaining(),
                        ..RegionReport::default()
                    };
                    let elim = res.eliminated();
                    for o in &outcomes {
                        // Compare with the tightest sample screen available.
                        let sample = o
                            .results
                            .iter()
                            .find(|(k, _)| *k == MethodKind::MultiAware)
                            .or_else(|| o.results.first());
                        if let Some((_, s)) = sample {
                            rep.samples_checked += 1;
                            if contradicts(&elim, s) {
                                rep.violations += 1;
                            }
                        }
                    }
                    methods.push(MethodReport {
                        method: MethodKind::Region,
                        remaining: vec![res.remaining()],
                        mean_remaining: res.remaining() as f64,
                        mean_screening_rate: res.screening_rate(),
                    });
                    if cfg.oracle {
                        // Certified per sample: the region's eliminations must
                        // hold for every sample inside it.
                        for (i, l) in samples.iter().enumerate() {
                            for target in &elim {
                                match certify(instance, &flow, l, *target, DEFAULT_ORACLE_LIMIT) {
                                    Ok(c) if c.certified => {}
                                    Ok(c) => errors.push(format!(
                                        "region r={r} sample {i} {target}: oracle reaches {:?}",
                                        c.witness
                                    )),
                                    Err(e) => errors.push(format!("region r={r} sample {i} oracle: {e}")),
                                }
                            }
                        }
                    }
                    Some(rep)
                }
                Err(e) => {
                    errors.push(format!("region r={r}: {e}"));
                    None
                }
            }
        } else {
            None
        };

        let certification = cfg.oracle.then(|| {
            let mut rep = CertificationReport::default();
            for o in &outcomes {
                if let Some(c) = &o.certification {
                    rep.checked += c.checked;
                    rep.failures.extend(c.failures.iter().cloned());
                }
            }
            rep
        });

        let solve = cfg.solve.then(|| {
            let solved: Vec<&SolveSample> = outcomes.iter().filter_map(|o| o.solve.as_ref()).collect();
            let mut rep = SolveReport {
                method: kinds.iter().copied().find(|k| *k == MethodKind::MultiAware).or(kinds.first().copied()),
                samples: solved.len(),
                full_feasible: solved.iter().filter(|s| s.full_feasible).count(),
                objective_mismatches: solved.iter().filter(|s| s.gap.map_or(true, |g| g > 1e-6)).count(),
                max_relative_gap: solved.iter().filter_map(|s| s.gap).fold(0.0, f64::max),
                mean_full_rows: mean(solved.iter().map(|s| s.full_rows as f64)),
                mean_reduced_rows: mean(solved.iter().map(|s| s.reduced_rows as f64)),
                ..SolveReport::default()
            };
            if cfg.timings && !solved.is_empty() {
                let f = mean(solved.iter().map(|s| s.full_ms));
                let r = mean(solved.iter().map(|s| s.reduced_ms));
                rep.mean_full_ms = Some(f);
                rep.mean_reduced_ms = Some(r);
                rep.speedup = Some(f / r.max(1e-9));
            }
            rep
        });

        for o in outcomes {
            errors.extend(o.errors);
        }
        scenarios.push(ScenarioReport {
            r,
            samples: samples.len(),
            methods,
            inclusion,
            region,
            certification,
            solve,
        });
    }

    let partial = match &cfg.knn {
        Some(k) => Some(run_partial(&ctx, nominal, k, &pool, &mut errors)?),
        None => None,
    };

    Ok(MetricsReport {
        schema_version: crate::screening::SCHEMA_VERSION,
        instance: instance.fingerprint(),
        horizon: instance.horizon(),
        num_lines: instance.num_lines(),
        total_targets: total,
        seed: cfg.seed,
        scenarios,
        partial,
        errors,
    })
}

struct PartialSample {
    error_entries: usize,
    entries: usize,
    remaining_partial: usize,
    remaining_aware: usize,
    feasible: bool,
    gap: Option<f64>,
    violations: usize,
}

fn run_partial(
    ctx: &Ctx<'_>,
    nominal: &LoadProfile,
    knn: &KnnConfig,
    pool: &rayon::ThreadPool,
    errors: &mut Vec<String>,
) -> Result<PartialReport> {
    let seed = ctx.cfg.seed.wrapping_add(1000);
    let all = gen_samples(nominal, knn.r, knn.train_samples + knn.test_samples, seed)?;
    let (train_loads, test_loads) = all.split_at(knn.train_samples);
    let opts = MipOptions::default();

    let solved: Vec<Option<(LoadProfile, crate::model::CommitmentSchedule)>> = pool.install(|| {
        train_loads
            .par_iter()
            .map(|l| {
                solve_uc(ctx.instance, ctx.flow, l, None, None, &opts)
                    .ok()
                    .and_then(|o| o.schedule)
                    .map(|s| (l.clone(), s))
            })
            .collect()
    });
    let samples: Vec<_> = solved.into_iter().flatten().collect();
    let set = TrainingSet::new(ctx.instance.fingerprint(), samples)?;
    let model = train(&set, knn.k)?;

    let per: Vec<Result<Option<PartialSample>>> = pool.install(|| {
        test_loads
            .par_iter()
            .map(|l| -> Result<Option<PartialSample>> {
                let full = solve_uc(ctx.instance, ctx.flow, l, None, None, &opts)?;
                let Some(truth) = full.schedule.clone() else {
                    // The sample itself is infeasible; nothing to compare.
                    return Ok(None);
                };
                let predicted = model.predict(l)?;
                let partial: PartialSchedule = partial_schedule(&predicted, knn.interval)?;
                let res = screen(ctx.instance, ctx.flow, l, &ScreeningMethod::MultiPartial(partial.clone()), &ctx.screen_opts)?;
                let aware = screen(ctx.instance, ctx.flow, l, &ScreeningMethod::MultiAware, &ctx.screen_opts)?;
                let reduced: ReducedInstance = reduce(ctx.instance, &res)?;
                let red = solve_uc(ctx.instance, ctx.flow, l, Some(&partial), Some(&reduced.kept), &opts)?;
                let mut sample = PartialSample {
                    error_entries: predicted.hamming(&truth),
                    entries: truth.num_generators() * truth.horizon(),
                    remaining_partial: res.remaining(),
                    remaining_aware: aware.remaining(),
                    feasible: false,
                    gap: None,
                    violations: 0,
                };
                if red.solution.status == MipStatus::Optimal {
                    let v = check_eliminated(&reduced, ctx.flow, &red, 1e-6);
                    sample.violations = v.len();
                    sample.feasible = v.is_empty();
                    sample.gap = Some(
                        (red.solution.objective_value - full.solution.objective_value)
                            / full.solution.objective_value.abs().max(1.0),
                    );
                }
                Ok(Some(sample))
            })
            .collect()
    });
    let mut done = Vec::new();
    for (i, p) in per.into_iter().enumerate() {
        match p {
            Ok(Some(s)) => done.push(s),
            Ok(None) => errors.push(format!("partial test sample {i}: full problem infeasible")),
            Err(e) => errors.push(format!("partial test sample {i}: {e}")),
        }
    }
    let n = done.len();
    let feasible = done.iter().filter(|s| s.feasible).count();
    let err: usize = done.iter().map(|s| s.error_entries).sum();
    let entries: usize = done.iter().map(|s| s.entries).sum();
    Ok(PartialReport {
        k: knn.k,
        interval: knn.interval,
        train_samples: set.len(),
        test_samples: n,
        classification_error: if entries == 0 { 0.0 } else { err as f64 / entries as f64 },
        mean_remaining_partial: mean(done.iter().map(|s| s.remaining_partial as f64)),
        mean_remaining_aware: mean(done.iter().map(|s| s.remaining_aware as f64)),
        feasible,
        feasibility_rate: if n == 0 { 0.0 } else { feasible as f64 / n as f64 },
        mean_gap: mean(done.iter().filter(|s| s.feasible).filter_map(|s| s.gap)),
        eliminated_row_violations: done.iter().map(|s| s.violations).sum(),
    })
}
