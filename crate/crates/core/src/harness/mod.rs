//! Fixtures, load sampling, random instances, brute-force oracles and the
//! experiment runner.

mod experiment;
mod oracle;

pub use experiment::{
    run_experiment, run_experiment_with, CertificationReport, ExperimentConfig, InclusionReport, KnnConfig, MethodReport,
    MetricsReport, PartialReport, RegionReport, ScenarioReport, SolveReport,
};
pub use oracle::{certify, oracle_binding, oracle_uc, Certification, OracleUc, DEFAULT_ORACLE_LIMIT};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{parse_case, parse_loads, Bus, FlowModel, Generator, Line, LoadProfile, UcInstance};

/// Shipped test systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    Fix2,
    FixA,
    Fix6,
    Fix39,
}

impl Fixture {
    pub fn parse(name: &str) -> Option<Fixture> {
        Some(match name.to_ascii_lowercase().as_str() {
            "fix2" | "fix-2" => Fixture::Fix2,
            "fixa" | "fix-a" => Fixture::FixA,
            "fix6" | "fix-6" => Fixture::Fix6,
            "fix39" | "fix-39" => Fixture::Fix39,
            _ => return None,
        })
    }

    pub fn case_text(self) -> &'static str {
        match self {
            Fixture::Fix2 => include_str!("../../../../fixtures/fix2.toml"),
            Fixture::FixA => include_str!("../../../../fixtures/fixa.toml"),
            Fixture::Fix6 => include_str!("../../../../fixtures/fix6.toml"),
            Fixture::Fix39 => include_str!("../../../../fixtures/fix39.toml"),
        }
    }

    pub fn loads_text(self) -> &'static str {
        match self {
            Fixture::Fix2 => include_str!("../../../../fixtures/fix2_loads.csv"),
            Fixture::FixA => include_str!("../../../../fixtures/fixa_loads.csv"),
            Fixture::Fix6 => include_str!("../../../../fixtures/fix6_loads.csv"),
            Fixture::Fix39 => include_str!("../../../../fixtures/fix39_nominal.csv"),
        }
    }

    pub fn instance(self) -> UcInstance {
        parse_case(self.case_text()).expect("shipped fixture parses")
    }

    /// The fixture's load profile (the nominal one for FIX-39).
    pub fn loads(self) -> LoadProfile {
        parse_loads(self.loads_text(), &self.instance()).expect("shipped loads parse")
    }

    pub fn load(self) -> (UcInstance, FlowModel, LoadProfile) {
        let inst = self.instance();
        let flow = FlowModel::build(&inst).expect("shipped fixture is connected");
        let loads = self.loads();
        (inst, flow, loads)
    }
}

/// Per-bus base loads of FIX-39 in MW (conventional 39-bus loads scaled so
/// the daily peak is 62% of installed capacity).
pub const FIX39_BASE_LOADS: [f64; 39] = [
    0.0, 0.0, 262.2, 407.1, 0.0, 0.0, 190.4, 425.1, 0.0, 0.0, 0.0, 6.1, 0.0, 0.0, 260.6, 267.9, 0.0,
    128.7, 0.0, 511.4, 223.1, 0.0, 201.5, 251.3, 182.4, 113.2, 228.8, 167.7, 230.8, 0.0, 7.5, 0.0,
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 899.0,
];

/// Daily load shape `0.72 + 0.20 sin(2 pi (h - 9) / 24)` for hour `h`
/// (trough at 03:00, peak at 15:00).
pub fn daily_shape(hour: usize) -> f64 {
    0.72 + 0.20 * (2.0 * std::f64::consts::PI * (hour as f64 - 9.0) / 24.0).sin()
}

/// Nominal profile `base[b] * shape(h) * (1 + noise * e)` for hours
/// `first_hour..first_hour + horizon`, with `e` uniform in `[-1, 1]` drawn
/// bus-major from ChaCha8 seeded with `seed`. Values are rounded to 0.1 MW.
pub fn nominal_profile(base: &[f64], first_hour: usize, horizon: usize, noise: f64, seed: u64) -> LoadProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = base
        .iter()
        .map(|&b| {
            (0..horizon)
                .map(|s| {
                    let e = 2.0 * rng.gen::<f64>() - 1.0;
                    let v = b * daily_shape(first_hour + s) * (1.0 + noise * e);
                    (v * 10.0).round() / 10.0
                })
                .collect()
        })
        .collect();
    LoadProfile::from_rows(rows).expect("non-negative nominal profile")
}

/// The shipped FIX-39 nominal profile: hours 6-11, 2% noise, seed 39.
pub fn fix39_nominal() -> LoadProfile {
    nominal_profile(&FIX39_BASE_LOADS, 6, 6, 0.02, 39)
}

/// `count` profiles with every entry independently uniform in
/// `[(1 - r) l, (1 + r) l]`. Draws come from ChaCha8 seeded with `seed`, in
/// sample, bus, timestep order; each draw is `lo + (hi - lo) * u` with `u`
/// the generator's standard `f64` in `[0, 1)`.
pub fn gen_samples(nominal: &LoadProfile, r: f64, count: usize, seed: u64) -> Result<Vec<LoadProfile>> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidRange {
            value: r,
            range: "[0, 1)",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut p = nominal.clone();
        for b in 0..nominal.num_buses() {
            for t in 1..=nominal.horizon() {
                let l = nominal.load(b, t);
                let u: f64 = rng.gen();
                p.set(b, t, (1.0 - r) * l + 2.0 * r * l * u);
            }
        }
        out.push(p);
    }
    Ok(out)
}

/// Random small instance: `nb` in 3..=6, `ng` in 2..=4, `T` in 2..=6, a
/// random spanning tree plus extra edges, and line limits drawn around the
/// flows of a capacity-proportional dispatch so that some are binding.
pub fn random_instance(seed: u64) -> (UcInstance, LoadProfile) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(out) = try_random_instance(&mut rng) {
            return out;
        }
    }
}

fn try_random_instance(rng: &mut ChaCha8Rng) -> Option<(UcInstance, LoadProfile)> {
    let nb = rng.gen_range(3..=6);
    let ng = rng.gen_range(2..=4);
    let horizon = rng.gen_range(2..=6);
    let buses: Vec<Bus> = (0..nb).map(|id| Bus { id, is_reference: id == 0 }).collect();
    let mut edges: Vec<(usize, usize)> = (1..nb).map(|b| (rng.gen_range(0..b), b)).collect();
    for _ in 0..nb - 2 {
        let a = rng.gen_range(0..nb);
        let b = rng.gen_range(0..nb);
        if a != b && !edges.iter().any(|&(p, q)| (p, q) == (a, b) || (p, q) == (b, a)) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    let mut generators = Vec::with_capacity(ng);
    for id in 0..ng {
        let p_max = rng.gen_range(30.0..100.0_f64).round();
        let p_min = (p_max * rng.gen_range(0.0..0.4_f64)).round();
        let initial_on = rng.gen_bool(0.6);
        generators.push(Generator {
            id,
            bus: rng.gen_range(0..nb),
            cost: rng.gen_range(5.0..40.0_f64).round(),
            p_min,
            p_max,
            ramp_up: (p_max * rng.gen_range(0.2..0.6)).round(),
            ramp_down: (p_max * rng.gen_range(0.2..0.6)).round(),
            ramp_startup: rng.gen_range(p_min..=p_max).round().max(p_min),
            ramp_shutdown: rng.gen_range(p_min..=p_max).round().max(p_min),
            initial_on,
            initial_output: if initial_on { rng.gen_range(p_min..=p_max).round() } else { 0.0 },
        });
    }
    let capacity: f64 = generators.iter().map(|g| g.p_max).sum();
    let weights: Vec<f64> = (0..nb)
        .map(|_| if rng.gen_bool(0.7) { rng.gen_range(0.2..1.0) } else { 0.0 })
        .collect();
    let wsum: f64 = weights.iter().sum();
    if wsum == 0.0 {
        return None;
    }
    let mut level = rng.gen_range(0.35..0.6);
    let totals: Vec<f64> = (0..horizon)
        .map(|_| {
            level = (level * rng.gen_range(0.9..1.1_f64)).clamp(0.3, 0.7);
            capacity * level
        })
        .collect();
    let rows: Vec<Vec<f64>> = weights
        .iter()
        .map(|w| totals.iter().map(|t| (t * w / wsum * 10.0).round() / 10.0).collect())
        .collect();
    let loads = LoadProfile::from_rows(rows).ok()?;
    // Start near a proportional share of the first step so t = 1 is reachable.
    let on_cap: f64 = generators.iter().filter(|g| g.initial_on).map(|g| g.p_max).sum();
    if on_cap > 0.0 {
        let share = (loads.total(1) / on_cap).min(1.0);
        for g in generators.iter_mut().filter(|g| g.initial_on) {
            g.initial_output = (g.p_max * share).round().clamp(g.p_min, g.p_max);
        }
    }

    // Flows of a capacity-proportional dispatch at the heaviest step.
    let lines_tmp: Vec<Line> = edges
        .iter()
        .enumerate()
        .map(|(id, &(a, b))| Line {
            id,
            from_bus: a,
            to_bus: b,
            susceptance: rng.gen_range(1.0..10.0_f64).round(),
            flow_limit: 1.0,
        })
        .collect();
    let probe = UcInstance::new(buses.clone(), lines_tmp.clone(), generators.clone(), horizon).ok()?;
    let flow = FlowModel::build(&probe).ok()?;
    let peak = (1..=horizon).max_by(|&a, &b| loads.total(a).total_cmp(&loads.total(b)))?;
    let mut inj: Vec<f64> = (0..nb).map(|b| -loads.load(b, peak)).collect();
    for g in &generators {
        inj[g.bus] += g.p_max * loads.total(peak) / capacity;
    }
    let flows = flow.flows_for_injection(&inj).ok()?;
    let lines = lines_tmp
        .into_iter()
        .zip(flows)
        .map(|(mut l, f)| {
            l.flow_limit = (f.abs() * rng.gen_range(0.8..2.0) + 5.0).round();
            l
        })
        .collect();
    let inst = UcInstance::new(buses, lines, generators, horizon).ok()?;
    Some((inst, loads))
}

#[cfg(test)]
mod tests;
