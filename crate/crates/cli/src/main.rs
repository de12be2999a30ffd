use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use ucscreen::harness::{gen_samples, run_experiment, ExperimentConfig, MetricsReport};
use ucscreen::milp::{MipOptions, MipStatus};
use ucscreen::model::{
    parse_case, parse_loads, CommitmentSchedule, FlowModel, LoadProfile, PartialSchedule, Provenance, UcInstance,
};
use ucscreen::predictor::{partial_schedule, train, KnnModel, TrainingSet};
use ucscreen::screening::{
    check_eliminated, reduce, screen, solve_uc, RowViolation, ScreenOptions, ScreeningMethod, ScreeningResult,
    SCHEMA_VERSION,
};

/// Transmission constraint screening for multi-interval unit commitment.
#[derive(Debug, Parser)]
#[command(name = "ucscreen", version)]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Record wall-clock times in the outputs (they are then run-dependent).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the UC problem, optionally with only the rows kept by a screen.
    Solve(SolveArgs),
    /// Screen every line bound at every timestep.
    Screen(ScreenArgs),
    /// Run an experiment config and write the metrics report.
    Bench(BenchArgs),
    /// Draw load profiles uniformly around a nominal profile.
    GenSamples(GenSamplesArgs),
    /// Solve each training profile and fit a K-nearest-neighbour predictor.
    TrainKnn(TrainKnnArgs),
    /// Predict a commitment schedule for a load profile.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Case file (TOML).
    #[arg(long)]
    case: PathBuf,
    /// Load table (rows = buses, columns = timesteps).
    #[arg(long)]
    loads: PathBuf,
    /// Screening result whose eliminated rows are dropped.
    #[arg(long)]
    reduced_from: Option<PathBuf>,
    /// Commitment schedule to fix (all steps, or every `--interval`-th).
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Fix the schedule only at steps interval, 2 interval, ...
    #[arg(long, requires = "schedule")]
    interval: Option<usize>,
    /// Write the solution document here instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScreenArgs {
    /// Case file (TOML).
    #[arg(long)]
    case: PathBuf,
    /// Load profile for the sample-aware methods.
    #[arg(long, conflicts_with = "nominal")]
    loads: Option<PathBuf>,
    /// Nominal profile for `--method region`.
    #[arg(long, requires = "range")]
    nominal: Option<PathBuf>,
    /// Region half-width r in [0, 1).
    #[arg(long)]
    range: Option<f64>,
    /// single, multi, truth, partial or region.
    #[arg(long)]
    method: String,
    /// Commitment schedule for `truth` and `partial`.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Keep the schedule at steps interval, 2 interval, ... (`partial` only).
    #[arg(long)]
    interval: Option<usize>,
    /// Write the machine-readable result here (stdout otherwise).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Write the verdict table here.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Experiment config (TOML); paths inside resolve against its directory.
    config: PathBuf,
    /// Override the sample count per r.
    #[arg(long)]
    samples: Option<usize>,
    /// Directory for report.json and report.txt (stdout otherwise).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenSamplesArgs {
    /// Case file (TOML).
    #[arg(long)]
    case: PathBuf,
    /// Nominal load table the samples are drawn around.
    #[arg(long)]
    nominal: PathBuf,
    /// Half-width r in [0, 1).
    #[arg(long)]
    range: f64,
    /// Number of profiles to draw.
    #[arg(long)]
    count: usize,
    /// Directory receiving sample_0000.csv, sample_0001.csv, ...
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainKnnArgs {
    /// Case file (TOML).
    #[arg(long)]
    case: PathBuf,
    /// Directory of load tables (every `.csv`, in name order).
    #[arg(long)]
    samples: PathBuf,
    /// Neighbours per vote.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Where to write the fitted model (JSON).
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model written by `train-knn`.
    #[arg(long)]
    model: PathBuf,
    /// Case file the model was trained on.
    #[arg(long)]
    case: PathBuf,
    /// Load table to predict for.
    #[arg(long)]
    loads: PathBuf,
    /// Write the schedule table here (stdout otherwise).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Bad arguments or malformed inputs (exit 2).
    Usage(String),
    /// Infeasible problems, solver failures, failed checks (exit 1).
    Domain(String),
}

type CliResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| domain(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn load_case(path: &Path) -> CliResult<(UcInstance, FlowModel)> {
    let inst = parse_case(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let flow = FlowModel::build(&inst).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok((inst, flow))
}

fn load_profile(path: &Path, inst: &UcInstance) -> CliResult<LoadProfile> {
    parse_loads(&read(path)?, inst).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_schedule(path: &Path, provenance: Provenance) -> CliResult<CommitmentSchedule> {
    CommitmentSchedule::parse_table(&read(path)?, provenance).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(domain)
}

#[derive(Serialize)]
struct SolutionDoc {
    schema_version: u32,
    instance: String,
    status: MipStatus,
    objective: Option<f64>,
    /// Flow rows in the solved model (two per ranged line bound pair).
    flow_rows: usize,
    rows: usize,
    nodes: usize,
    /// 0/1 per generator and timestep.
    schedule: Option<Vec<Vec<u8>>>,
    /// MW per generator and timestep.
    dispatch: Option<Vec<Vec<f64>>>,
    /// MW per line and timestep.
    flows: Option<Vec<Vec<f64>>>,
    /// Rows dropped by the screen that the reduced optimum violates.
    #[serde(skip_serializing_if = "Option::is_none")]
    removed_row_violations: Option<Vec<RowViolation>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solve_ms: Option<f64>,
}

/// Explains an infeasible UC by the first step whose balance cannot be met
/// by the output the units can reach from their initial state.
fn diagnose(inst: &UcInstance, loads: &LoadProfile) -> String {
    for t in 1..=inst.horizon() {
        let reach: f64 = inst
            .generators()
            .iter()
            .map(|g| {
                let steps = t as f64;
                let ramp = if g.initial_on {
                    g.initial_output + steps * g.ramp_up
                } else {
                    g.ramp_startup + (steps - 1.0) * g.ramp_up
                };
                g.p_max.min(ramp)
            })
            .sum();
        let load = loads.total(t);
        if load > reach + 1e-6 {
            return format!(
                "power balance at t={t} cannot be met: load {load:.1} MW exceeds the {reach:.1} MW the units can reach"
            );
        }
    }
    "no commitment meets the power balance within the ramp and line limits".into()
}

fn cmd_solve(cli: &Cli, a: &SolveArgs) -> CliResult<()> {
    let (inst, flow) = load_case(&a.case)?;
    let loads = load_profile(&a.loads, &inst)?;
    let fixed = match &a.schedule {
        Some(p) => {
            let s = load_schedule(p, Provenance::Given)?;
            let partial = match a.interval {
                Some(n) => partial_schedule(&s, n),
                None => PartialSchedule::from_schedule(&s, 1..=s.horizon()),
            };
            Some(partial.map_err(|e| usage(e.to_string()))?)
        }
        None => None,
    };
    let reduced = match &a.reduced_from {
        Some(p) => {
            let res = ScreeningResult::from_json(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            if res.instance != inst.fingerprint() {
                return Err(usage(format!("{} was screened on a different instance", p.display())));
            }
            if !res.method.is_prediction_free() && fixed.is_none() {
                return Err(usage(format!(
                    "{:?} verdicts rely on predicted commitments; pass the same --schedule",
                    res.method
                )));
            }
            Some(reduce(&inst, &res).map_err(|e| usage(e.to_string()))?)
        }
        None => None,
    };
    let start = Instant::now();
    let out = solve_uc(&inst, &flow, &loads, fixed.as_ref(), reduced.as_ref().map(|r| &r.kept), &MipOptions::default())
        .map_err(domain)?;
    let solve_ms = cli.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
    let optimal = out.solution.status == MipStatus::Optimal;
    let horizon = inst.horizon();
    let flows_by_t: Vec<Vec<f64>> = if optimal {
        (1..=horizon).map(|t| out.line_flows(&flow, t)).collect()
    } else {
        Vec::new()
    };
    let flow_rows = match &reduced {
        Some(r) => r.kept.len(),
        None => 2 * inst.num_lines() * horizon,
    };
    let doc = SolutionDoc {
        schema_version: SCHEMA_VERSION,
        instance: inst.fingerprint(),
        status: out.solution.status,
        objective: optimal.then_some(out.solution.objective_value),
        flow_rows,
        rows: out.num_rows,
        nodes: out.solution.nodes,
        schedule: out
            .schedule
            .as_ref()
            .map(|s| s.rows().iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect()),
        dispatch: optimal.then(|| {
            (0..inst.num_generators())
                .map(|g| (1..=horizon).map(|t| out.dispatch(g, t)).collect())
                .collect()
        }),
        flows: optimal.then(|| (0..inst.num_lines()).map(|j| flows_by_t.iter().map(|f| f[j]).collect()).collect()),
        removed_row_violations: match (&reduced, optimal) {
            (Some(r), true) => Some(check_eliminated(r, &flow, &out, 1e-6)),
            _ => None,
        },
        solve_ms,
    };
    let json = serde_json::to_string_pretty(&doc).map_err(domain)? + "\n";
    match &a.out {
        Some(p) => write(p, &json)?,
        None => print!("{json}"),
    }
    match out.solution.status {
        MipStatus::Optimal => {
            eprintln!("objective {:.6}", out.solution.objective_value);
            Ok(())
        }
        MipStatus::Infeasible => Err(domain(format!("UC problem is infeasible: {}", diagnose(&inst, &loads)))),
        other => Err(domain(format!("solver stopped with status {other:?}"))),
    }
}

fn cmd_screen(cli: &Cli, a: &ScreenArgs) -> CliResult<()> {
    let (inst, flow) = load_case(&a.case)?;
    let kind = a.method.to_ascii_lowercase();
    let schedule = || -> CliResult<CommitmentSchedule> {
        let p = a
            .schedule
            .as_ref()
            .ok_or_else(|| usage(format!("--method {kind} needs --schedule")))?;
        load_schedule(p, Provenance::Given)
    };
    if a.interval.is_some() && kind != "partial" {
        return Err(usage("--interval only applies to --method partial"));
    }
    if a.schedule.is_some() && !matches!(kind.as_str(), "truth" | "partial") {
        return Err(usage(format!("--schedule does not apply to --method {kind}")));
    }
    let (method, profile) = match kind.as_str() {
        "region" => {
            let (Some(p), Some(r)) = (&a.nominal, a.range) else {
                return Err(usage("--method region needs --nominal and --range"));
            };
            (ScreeningMethod::Region { r }, p)
        }
        other => {
            if a.range.is_some() {
                return Err(usage("--range only applies to --method region"));
            }
            let Some(p) = &a.loads else {
                return Err(usage(format!("--method {other} needs --loads")));
            };
            let m = match other {
                "single" => ScreeningMethod::Single,
                "multi" | "aware" | "multi_aware" => ScreeningMethod::MultiAware,
                "truth" => ScreeningMethod::MultiTruth(schedule()?),
                "partial" => {
                    let s = schedule()?;
                    let partial = match a.interval {
                        Some(n) => partial_schedule(&s, n),
                        None => PartialSchedule::from_schedule(&s, 1..=s.horizon()),
                    };
                    ScreeningMethod::MultiPartial(partial.map_err(|e| usage(e.to_string()))?)
                }
                _ => return Err(usage(format!("unknown method `{other}` (single, multi, truth, partial, region)"))),
            };
            (m, p)
        }
    };
    let loads = load_profile(profile, &inst)?;
    let opts = ScreenOptions {
        jobs: cli.jobs,
        timings: cli.timings,
        ..ScreenOptions::default()
    };
    let res = screen(&inst, &flow, &loads, &method, &opts).map_err(|e| match e {
        ucscreen::Error::InvalidRange { .. } | ucscreen::Error::DimensionMismatch(_) | ucscreen::Error::ScheduleCoverage(_) => {
            usage(e.to_string())
        }
        other => domain(other),
    })?;
    let summary = format!(
        "{:?}: {} targets, {} eliminated, {} remaining ({} infeasible, {} errors)",
        res.method,
        res.stats.total,
        res.stats.eliminated,
        res.remaining(),
        res.stats.infeasible,
        res.stats.errors
    );
    if let Some(p) = &a.table {
        write(p, &res.to_table())?;
    }
    match &a.out {
        Some(p) => {
            write(p, &(res.to_json() + "\n"))?;
            println!("{summary}");
        }
        None => {
            println!("{}", res.to_json());
            eprintln!("{summary}");
        }
    }
    Ok(())
}

/// Violated report assertions, one line each.
fn report_failures(rep: &MetricsReport) -> Vec<String> {
    let mut out = Vec::new();
    for sc in &rep.scenarios {
        if let Some(i) = sc.inclusion.as_ref().filter(|i| i.violations > 0) {
            out.push(format!("r={}: single not within multi on {} samples", sc.r, i.violations));
        }
        if let Some(g) = sc.region.as_ref().filter(|g| g.violations > 0) {
            out.push(format!("r={}: region not within sample screens on {} samples", sc.r, g.violations));
        }
        if let Some(c) = sc.certification.as_ref().filter(|c| !c.failures.is_empty()) {
            out.push(format!("r={}: {} oracle certification failures", sc.r, c.failures.len()));
        }
        if let Some(s) = sc.solve.as_ref().filter(|s| s.objective_mismatches > 0) {
            out.push(format!("r={}: {} full/reduced objective mismatches", sc.r, s.objective_mismatches));
        }
    }
    if !rep.errors.is_empty() {
        out.push(format!("{} sample errors", rep.errors.len()));
    }
    out
}

fn cmd_bench(cli: &Cli, a: &BenchArgs) -> CliResult<()> {
    let mut cfg = ExperimentConfig::parse(&read(&a.config)?).map_err(|e| usage(format!("{}: {e}", a.config.display())))?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.samples {
        cfg.samples = n;
    }
    if cli.jobs != 0 {
        cfg.jobs = cli.jobs;
    }
    cfg.timings |= cli.timings;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let rep = run_experiment(&cfg, base).map_err(|e| match e {
        ucscreen::Error::Io(_) | ucscreen::Error::Schema(_) | ucscreen::Error::Validation { .. } => usage(e.to_string()),
        other => domain(other),
    })?;
    let text = rep.to_text();
    match &a.out {
        Some(dir) => {
            write(&dir.join("report.json"), &(rep.to_json() + "\n"))?;
            write(&dir.join("report.txt"), &text)?;
        }
        None => print!("{text}"),
    }
    let failures = report_failures(&rep);
    if failures.is_empty() {
        Ok(())
    } else {
        Err(domain(format!("report assertions failed:\n  {}", failures.join("\n  "))))
    }
}

fn cmd_gen_samples(cli: &Cli, a: &GenSamplesArgs) -> CliResult<()> {
    let (inst, _) = load_case(&a.case)?;
    let nominal = load_profile(&a.nominal, &inst)?;
    let samples = gen_samples(&nominal, a.range, a.count, cli.seed.unwrap_or(0)).map_err(|e| usage(e.to_string()))?;
    for (i, s) in samples.iter().enumerate() {
        write(&a.out.join(format!("sample_{i:04}.csv")), &s.to_csv())?;
    }
    println!("wrote {} samples to {}", samples.len(), a.out.display());
    Ok(())
}

fn sample_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| usage(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn cmd_train_knn(cli: &Cli, a: &TrainKnnArgs) -> CliResult<()> {
    let (inst, flow) = load_case(&a.case)?;
    let profiles = sample_files(&a.samples)?
        .iter()
        .map(|p| load_profile(p, &inst))
        .collect::<CliResult<Vec<_>>>()?;
    let solved: Vec<Option<(LoadProfile, CommitmentSchedule)>> = pool(cli.jobs)?.install(|| {
        profiles
            .par_iter()
            .map(|l| {
                solve_uc(&inst, &flow, l, None, None, &MipOptions::default())
                    .ok()
                    .and_then(|o| o.schedule)
                    .map(|s| (l.clone(), s))
            })
            .collect()
    });
    let skipped = solved.iter().filter(|s| s.is_none()).count();
    let set = TrainingSet::new(inst.fingerprint(), solved.into_iter().flatten().collect()).map_err(domain)?;
    let model = train(&set, a.k).map_err(domain)?;
    write(&a.out, &(model.to_json() + "\n"))?;
    println!("trained K={} on {} samples ({skipped} infeasible skipped)", a.k, set.len());
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> CliResult<()> {
    let model = KnnModel::from_json(&read(&a.model)?).map_err(|e| usage(format!("{}: {e}", a.model.display())))?;
    let (inst, _) = load_case(&a.case)?;
    if model.instance != inst.fingerprint() {
        return Err(usage(format!("{} was trained on a different instance", a.model.display())));
    }
    let loads = load_profile(&a.loads, &inst)?;
    let schedule = model.predict(&loads).map_err(|e| usage(e.to_string()))?;
    match &a.out {
        Some(p) => write(p, &schedule.to_table()),
        None => {
            print!("{}", schedule.to_table());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(&cli, a),
        Command::Screen(a) => cmd_screen(&cli, a),
        Command::Bench(a) => cmd_bench(&cli, a),
        Command::GenSamples(a) => cmd_gen_samples(&cli, a),
        Command::TrainKnn(a) => cmd_train_knn(&cli, a),
        Command::Predict(a) => cmd_predict(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
