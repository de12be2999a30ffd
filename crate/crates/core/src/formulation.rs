//! Optimization models built from an instance and a load profile: the UC
//! MILP and the single- and multi-interval screening LPs.
//!
//! Every model is an instance of [`ModelSpec`]; the `build_*` functions are
//! the named presets. Variables are laid out block by block in the order
//! `u`, `x`, `f`, then region loads, each block ordered by timestep and then
//! by entity id.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Sense};
use crate::milp::{MipSolution, MixedIntegerProgram};
use crate::model::{CommitmentSchedule, FlowModel, LoadProfile, PartialSchedule, Provenance, UcInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundSense {
    /// `K_j f(k) <= limit`.
    Upper,
    /// `K_j f(k) >= -limit`.
    Lower,
}

impl fmt::Display for BoundSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSense::Upper => "UPPER",
            BoundSense::Lower => "LOWER",
        })
    }
}

/// One flow-limit inequality. The derived order (timestep, line, sense) is
/// the sweep order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScreeningTarget {
    pub timestep: usize,
    pub line: usize,
    pub sense: BoundSense,
}

impl ScreeningTarget {
    pub fn new(line: usize, sense: BoundSense, timestep: usize) -> Self {
        ScreeningTarget { timestep, line, sense }
    }

    /// All `2 m T` targets of an instance in sweep order.
    pub fn all(instance: &UcInstance, horizon: usize) -> Vec<ScreeningTarget> {
        let mut out = Vec::with_capacity(2 * instance.num_lines() * horizon);
        for timestep in 1..=horizon {
            for line in 0..instance.num_lines() {
                for sense in [BoundSense::Upper, BoundSense::Lower] {
                    out.push(ScreeningTarget { timestep, line, sense });
                }
            }
        }
        out
    }

    fn check(&self, instance: &UcInstance, horizon: usize) -> Result<()> {
        if self.line >= instance.num_lines() {
            return Err(Error::Dimension(format!("line {} does not exist", self.line)));
        }
        if self.timestep == 0 || self.timestep > horizon {
            return Err(Error::Dimension(format!(
                "timestep {} outside 1..={horizon}",
                self.timestep
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ScreeningTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {} {} t={}", self.line, self.sense, self.timestep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    GenLower { gen: usize, t: usize },
    GenUpper { gen: usize, t: usize },
    Flow(ScreeningTarget),
    Balance { bus: usize, t: usize },
    Aggregate { t: usize },
    RampUp { gen: usize, t: usize },
    RampDown { gen: usize, t: usize },
}

/// Column indices of each variable block; `None` where a model has no
/// variable. Timesteps are 1-based.
#[derive(Debug, Clone, Default)]
pub struct VariableLayout {
    horizon: usize,
    u: Vec<Vec<Option<usize>>>,
    x: Vec<Vec<Option<usize>>>,
    f: Vec<Vec<Option<usize>>>,
    load: Vec<Vec<Option<usize>>>,
}

impl VariableLayout {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn u(&self, gen: usize, t: usize) -> Option<usize> {
        self.u[gen][t - 1]
    }

    pub fn x(&self, gen: usize, t: usize) -> Option<usize> {
        self.x[gen][t - 1]
    }

    pub fn f(&self, coord: usize, t: usize) -> Option<usize> {
        self.f[coord][t - 1]
    }

    pub fn load(&self, bus: usize, t: usize) -> Option<usize> {
        self.load.get(bus).and_then(|r| r[t - 1])
    }

    pub fn binaries(&self) -> Vec<usize> {
        self.u.iter().flatten().flatten().copied().collect()
    }

    /// `f(t)` read from a primal vector.
    pub fn flows_at(&self, primal: &[f64], t: usize) -> Vec<f64> {
        self.f
            .iter()
            .map(|col| col[t - 1].map_or(0.0, |j| primal[j]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Commitment<'a> {
    /// Binary `u` (left to the MILP).
    Binary,
    /// `u` relaxed to `[0, 1]`.
    Relaxed,
    /// Every `u` fixed from a full schedule.
    Fixed(&'a CommitmentSchedule),
    /// `u` fixed on the schedule's steps, relaxed elsewhere.
    Partial(&'a PartialSchedule),
    /// `u` fixed on the schedule's steps, binary elsewhere.
    PartialBinary(&'a PartialSchedule),
}

#[derive(Debug, Clone, Copy)]
pub enum Loads<'a> {
    Fixed(&'a LoadProfile),
    /// Loads are variables within `[(1 - r) l, (1 + r) l]` per bus and step.
    Region(&'a LoadProfile, f64),
}

#[derive(Debug, Clone, Copy)]
pub enum FlowRows<'a> {
    All,
    Except(ScreeningTarget),
    Only(&'a BTreeSet<ScreeningTarget>),
}

#[derive(Debug, Clone, Copy)]
pub enum Objective {
    Cost,
    Target(ScreeningTarget),
}

/// Complete description of one model.
#[derive(Debug, Clone)]
pub struct ModelSpec<'a> {
    /// Steps carrying `u` and `x`. Ramp rows require `1..=k`.
    pub dispatch_steps: Vec<usize>,
    /// Steps carrying `f`, flow rows and nodal balance.
    pub network_steps: Vec<usize>,
    /// Aggregate balance on dispatch steps without a network.
    pub aggregate: bool,
    pub ramps: bool,
    /// Couple generation bounds to `u`. Without coupling `x` keeps only
    /// `[p_min, p_max]` and `u` appears in ramp rows alone.
    pub coupled_bounds: bool,
    pub commitment: Commitment<'a>,
    pub loads: Loads<'a>,
    pub flows: FlowRows<'a>,
    pub objective: Objective,
}

#[derive(Debug, Clone)]
pub struct Formulation {
    pub lp: LinearProgram,
    pub layout: VariableLayout,
    /// One entry per constraint in row order. When both bounds of a line at
    /// a step are kept they share a single ranged row, which carries two
    /// consecutive entries here.
    pub rows: Vec<RowKind>,
}

impl Formulation {
    pub fn into_mip(self) -> Result<(MixedIntegerProgram, VariableLayout, Vec<RowKind>)> {
        let bins = self.layout.binaries();
        Ok((MixedIntegerProgram::new(self.lp, bins)?, self.layout, self.rows))
    }

    pub fn count(&self, pred: impl Fn(&RowKind) -> bool) -> usize {
        self.rows.iter().filter(|r| pred(r)).count()
    }
}

fn check_loads(instance: &UcInstance, loads: &LoadProfile, horizon: usize) -> Result<()> {
    if loads.num_buses() != instance.num_buses() {
        return Err(Error::Dimension(format!(
            "load profile has {} buses, instance has {}",
            loads.num_buses(),
            instance.num_buses()
        )));
    }
    if loads.horizon() < horizon {
        return Err(Error::Dimension(format!(
            "load profile covers {} steps, {} needed",
            loads.horizon(),
            horizon
        )));
    }
    Ok(())
}

pub fn build(instance: &UcInstance, flow: &FlowModel, spec: &ModelSpec<'_>) -> Result<Formulation> {
    let ng = instance.num_generators();
    let nb = instance.num_buses();
    let nf = flow.num_coords();
    let horizon = spec
        .dispatch_steps
        .iter()
        .chain(&spec.network_steps)
        .copied()
        .max()
        .unwrap_or(0);
    let profile = match spec.loads {
        Loads::Fixed(p) => p,
        Loads::Region(p, r) => {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidRange {
                    value: r,
                    range: "[0, 1)",
                });
            }
            p
        }
    };
    check_loads(instance, profile, horizon)?;
    if spec.ramps && spec.dispatch_steps != (1..=horizon).collect::<Vec<_>>() {
        return Err(Error::Dimension("ramp rows need dispatch on every step 1..=k".into()));
    }
    match spec.commitment {
        Commitment::Fixed(s) => {
            if s.num_generators() != ng || s.horizon() < horizon {
                return Err(Error::ScheduleCoverage(format!(
                    "schedule is {}x{}, model needs {ng}x{horizon}",
                    s.num_generators(),
                    s.horizon()
                )));
            }
        }
        Commitment::Partial(p) | Commitment::PartialBinary(p) => {
            if p.num_generators() != ng {
                return Err(Error::ScheduleCoverage(format!(
                    "partial schedule covers {} generators, instance has {ng}",
                    p.num_generators()
                )));
            }
        }
        _ => {}
    }
    if let FlowRows::Except(t) = spec.flows {
        t.check(instance, horizon)?;
    }
    if let Objective::Target(t) = spec.objective {
        t.check(instance, horizon)?;
    }

    let sense = match spec.objective {
        Objective::Cost => Sense::Minimize,
        Objective::Target(t) => match t.sense {
            BoundSense::Upper => Sense::Maximize,
            BoundSense::Lower => Sense::Minimize,
        },
    };
    let mut lp = LinearProgram::new(sense);
    let mut layout = VariableLayout {
        horizon,
        u: vec![vec![None; horizon]; ng],
        x: vec![vec![None; horizon]; ng],
        f: vec![vec![None; horizon]; nf],
        load: Vec::new(),
    };

    for &t in &spec.dispatch_steps {
        for g in 0..ng {
            let fixed = match spec.commitment {
                Commitment::Binary | Commitment::Relaxed => None,
                Commitment::Fixed(s) => Some(s.is_on(g, t)),
                Commitment::Partial(p) | Commitment::PartialBinary(p) => p.get(g, t),
            };
            let (lo, hi) = match fixed {
                Some(true) => (1.0, 1.0),
                Some(false) => (0.0, 0.0),
                None => (0.0, 1.0),
            };
            layout.u[g][t - 1] = Some(lp.add_var(lo, hi, 0.0));
        }
    }
    for &t in &spec.dispatch_steps {
        for (g, gen) in instance.generators().iter().enumerate() {
            let cost = match spec.objective {
                Objective::Cost => gen.cost,
                Objective::Target(_) => 0.0,
            };
            let lo = if spec.coupled_bounds { 0.0 } else { gen.p_min };
            layout.x[g][t - 1] = Some(lp.add_var(lo, gen.p_max, cost));
        }
    }
    for &t in &spec.network_steps {
        for c in 0..nf {
            layout.f[c][t - 1] = Some(lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 0.0));
        }
    }
    if let Loads::Region(p, r) = spec.loads {
        layout.load = vec![vec![None; horizon]; nb];
        for &t in &spec.dispatch_steps {
            for b in 0..nb {
                let l = p.load(b, t);
                layout.load[b][t - 1] = Some(lp.add_var((1.0 - r) * l, (1.0 + r) * l, 0.0));
            }
        }
    }

    let mut rows = Vec::new();

    // Generation bounds.
    if spec.coupled_bounds {
        for &t in &spec.dispatch_steps {
            for (g, gen) in instance.generators().iter().enumerate() {
                let (u, x) = (layout.u(g, t).unwrap(), layout.x(g, t).unwrap());
                lp.add_row([(x, 1.0), (u, -gen.p_min)], 0.0, f64::INFINITY);
                rows.push(RowKind::GenLower { gen: g, t });
                lp.add_row([(x, 1.0), (u, -gen.p_max)], f64::NEG_INFINITY, 0.0);
                rows.push(RowKind::GenUpper { gen: g, t });
            }
        }
    }

    // Line limits.
    for &t in &spec.network_steps {
        for (j, line) in instance.lines().iter().enumerate() {
            let kept: Vec<ScreeningTarget> = [BoundSense::Upper, BoundSense::Lower]
                .into_iter()
                .map(|s| ScreeningTarget::new(j, s, t))
                .filter(|target| match spec.flows {
                    FlowRows::All => true,
                    FlowRows::Except(e) => e != *target,
                    FlowRows::Only(set) => set.contains(target),
                })
                .collect();
            if kept.is_empty() {
                continue;
            }
            let lo = if kept.iter().any(|k| k.sense == BoundSense::Lower) {
                -line.flow_limit
            } else {
                f64::NEG_INFINITY
            };
            let hi = if kept.iter().any(|k| k.sense == BoundSense::Upper) {
                line.flow_limit
            } else {
                f64::INFINITY
            };
            let coeffs = flow
                .k_row(j)
                .iter()
                .enumerate()
                .map(|(c, &k)| (layout.f(c, t).unwrap(), k));
            lp.add_row(coeffs, lo, hi);
            rows.extend(kept.into_iter().map(RowKind::Flow));
        }
    }

    // Nodal balance.
    let mut gens_at = vec![Vec::new(); nb];
    for (g, gen) in instance.generators().iter().enumerate() {
        gens_at[gen.bus].push(g);
    }
    for &t in &spec.network_steps {
        for b in 0..nb {
            let mut coeffs: Vec<(usize, f64)> = gens_at[b]
                .iter()
                .map(|&g| (layout.x(g, t).expect("dispatch on network step"), 1.0))
                .collect();
            coeffs.extend(
                flow.a_row(b)
                    .iter()
                    .enumerate()
                    .map(|(c, &a)| (layout.f(c, t).unwrap(), a)),
            );
            let rhs = match spec.loads {
                Loads::Fixed(p) => p.load(b, t),
                Loads::Region(..) => {
                    coeffs.push((layout.load(b, t).unwrap(), -1.0));
                    0.0
                }
            };
            lp.add_row(coeffs, rhs, rhs);
            rows.push(RowKind::Balance { bus: b, t });
        }
    }

    // Aggregate balance on steps without a network.
    if spec.aggregate {
        for &t in &spec.dispatch_steps {
            if spec.network_steps.contains(&t) {
                continue;
            }
            let mut coeffs: Vec<(usize, f64)> =
                (0..ng).map(|g| (layout.x(g, t).unwrap(), 1.0)).collect();
            let rhs = match spec.loads {
                Loads::Fixed(p) => p.total(t),
                Loads::Region(..) => {
                    coeffs.extend((0..nb).map(|b| (layout.load(b, t).unwrap(), -1.0)));
                    0.0
                }
            };
            lp.add_row(coeffs, rhs, rhs);
            rows.push(RowKind::Aggregate { t });
        }
    }

    // Ramping; step 1 uses the initial state as constants.
    if spec.ramps {
        for &t in &spec.dispatch_steps {
            for (g, gen) in instance.generators().iter().enumerate() {
                let pmax = gen.p_max;
                let (u, x) = (layout.u(g, t).unwrap(), layout.x(g, t).unwrap());
                // x(t) - x(t-1) <= Rup u(t-1) + Rsu (u(t) - u(t-1)) + pmax (1 - u(t))
                let mut up = vec![(x, 1.0), (u, pmax - gen.ramp_startup)];
                // x(t-1) - x(t) <= Rdn u(t) + Rsd (u(t-1) - u(t)) + pmax (1 - u(t-1))
                let mut down = vec![(x, -1.0), (u, gen.ramp_shutdown - gen.ramp_down)];
                let (mut up_rhs, mut down_rhs) = (pmax, pmax);
                if t == 1 {
                    let u0 = if gen.initial_on { 1.0 } else { 0.0 };
                    let x0 = gen.initial_output;
                    up_rhs += x0 + (gen.ramp_up - gen.ramp_startup) * u0;
                    down_rhs += -x0 + (gen.ramp_shutdown - pmax) * u0;
                } else {
                    let (up_prev, xp) = (layout.u(g, t - 1).unwrap(), layout.x(g, t - 1).unwrap());
                    up.push((xp, -1.0));
                    up.push((up_prev, gen.ramp_startup - gen.ramp_up));
                    down.push((xp, 1.0));
                    down.push((up_prev, pmax - gen.ramp_shutdown));
                }
                lp.add_row(up, f64::NEG_INFINITY, up_rhs);
                rows.push(RowKind::RampUp { gen: g, t });
                lp.add_row(down, f64::NEG_INFINITY, down_rhs);
                rows.push(RowKind::RampDown { gen: g, t });
            }
        }
    }

    if let Objective::Target(target) = spec.objective {
        let t = target.timestep;
        for (c, &k) in flow.k_row(target.line).iter().enumerate() {
            if k != 0.0 {
                lp.set_cost(layout.f(c, t).expect("network on target step"), k);
            }
        }
    }

    Ok(Formulation { lp, layout, rows })
}

/// The UC MILP over steps `1..=horizon`, optionally with some commitments
/// fixed and optionally keeping only the listed flow rows.
pub fn build_uc(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    horizon: usize,
    fixed_u: Option<&PartialSchedule>,
    kept_flows: Option<&BTreeSet<ScreeningTarget>>,
) -> Result<Formulation> {
    if horizon == 0 {
        return Err(Error::Dimension("horizon must be positive".into()));
    }
    let steps: Vec<usize> = (1..=horizon).collect();
    build(
        instance,
        flow,
        &ModelSpec {
            dispatch_steps: steps.clone(),
            network_steps: steps,
            aggregate: false,
            ramps: true,
            coupled_bounds: true,
            commitment: fixed_u.map_or(Commitment::Binary, Commitment::PartialBinary),
            loads: Loads::Fixed(loads),
            flows: kept_flows.map_or(FlowRows::All, FlowRows::Only),
            objective: Objective::Cost,
        },
    )
}

fn multi_spec<'a>(target: ScreeningTarget, commitment: Commitment<'a>, loads: Loads<'a>) -> ModelSpec<'a> {
    ModelSpec {
        dispatch_steps: (1..=target.timestep).collect(),
        network_steps: vec![target.timestep],
        aggregate: true,
        ramps: true,
        coupled_bounds: true,
        commitment,
        loads,
        flows: FlowRows::Except(target),
        objective: Objective::Target(target),
    }
}

/// Screening at step `k` alone, commitments relaxed.
pub fn build_screen_single(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    target: ScreeningTarget,
) -> Result<Formulation> {
    build(
        instance,
        flow,
        &ModelSpec {
            dispatch_steps: vec![target.timestep],
            network_steps: vec![target.timestep],
            aggregate: false,
            ramps: false,
            coupled_bounds: true,
            commitment: Commitment::Relaxed,
            loads: Loads::Fixed(loads),
            flows: FlowRows::Except(target),
            objective: Objective::Target(target),
        },
    )
}

/// Screening over steps `1..=k` with ramping and aggregate balance before
/// `k`, commitments relaxed.
pub fn build_screen_multi_aware(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    target: ScreeningTarget,
) -> Result<Formulation> {
    build(instance, flow, &multi_spec(target, Commitment::Relaxed, Loads::Fixed(loads)))
}

/// As [`build_screen_multi_aware`] with every commitment fixed.
pub fn build_screen_truth(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    target: ScreeningTarget,
    schedule: &CommitmentSchedule,
) -> Result<Formulation> {
    build(instance, flow, &multi_spec(target, Commitment::Fixed(schedule), Loads::Fixed(loads)))
}

/// As [`build_screen_multi_aware`] with commitments fixed on the partial
/// schedule's steps.
pub fn build_screen_partial(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    target: ScreeningTarget,
    partial: &PartialSchedule,
) -> Result<Formulation> {
    build(instance, flow, &multi_spec(target, Commitment::Partial(partial), Loads::Fixed(loads)))
}

/// As [`build_screen_multi_aware`] with every load free within `r` of the
/// nominal profile.
pub fn build_screen_region(
    instance: &UcInstance,
    flow: &FlowModel,
    nominal: &LoadProfile,
    r: f64,
    target: ScreeningTarget,
) -> Result<Formulation> {
    build(instance, flow, &multi_spec(target, Commitment::Relaxed, Loads::Region(nominal, r)))
}

/// Reads the commitment schedule off an optimal UC solution.
pub fn extract_schedule(solution: &MipSolution, layout: &VariableLayout) -> Result<CommitmentSchedule> {
    if !solution.is_optimal() {
        return Err(Error::NotOptimal(format!("MILP status is {:?}", solution.status)));
    }
    let states = layout
        .u
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| c.is_some_and(|j| solution.primal[j] > 0.5))
                .collect()
        })
        .collect();
    CommitmentSchedule::new(states, Provenance::Solved)
}
