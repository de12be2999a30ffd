//! Brute-force references for the MILP solver and for screening verdicts.

use crate::error::{Error, Result};
use crate::formulation::{build, BoundSense, Commitment, FlowRows, Loads, ModelSpec, Objective, ScreeningTarget};
use crate::lp::{solve_lp_restricted, LinearProgram, LpOptions, LpStatus};
use crate::milp::{solve_mip, MipOptions, MipStatus};
use crate::model::{CommitmentSchedule, FlowModel, LoadProfile, Provenance, UcInstance};

/// Largest `ng * T` the oracles accept by default.
pub const DEFAULT_ORACLE_LIMIT: usize = 24;

#[derive(Debug, Clone)]
pub struct OracleUc {
    /// `None` when no commitment pattern is feasible.
    pub objective: Option<f64>,
    pub schedule: Option<CommitmentSchedule>,
    /// No other pattern reaches the optimum within `1e-6` relative.
    pub unique: bool,
    pub lps_solved: usize,
}

struct Search<'a> {
    lp: LinearProgram,
    u: Vec<Vec<usize>>,
    instance: &'a UcInstance,
    loads: &'a LoadProfile,
    opts: LpOptions,
    best: Option<(f64, Vec<Vec<bool>>)>,
    tie: bool,
    lps: usize,
}

impl Search<'_> {
    fn tol(&self) -> f64 {
        self.best.as_ref().map_or(0.0, |(v, _)| 1e-6 * v.abs().max(1.0))
    }

    /// Solves the relaxation with `u` fixed on steps `1..=prefix.len()`.
    fn bound(&mut self, prefix: &[Vec<bool>]) -> Result<Option<f64>> {
        let u = &self.u;
        let fixes: Vec<(usize, f64)> = prefix
            .iter()
            .enumerate()
            .flat_map(|(s, pat)| {
                pat.iter()
                    .enumerate()
                    .map(move |(g, &on)| (u[g][s], if on { 1.0 } else { 0.0 }))
            })
            .collect();
        self.lps += 1;
        let sol = solve_lp_restricted(&self.lp, &fixes, &self.opts)?;
        Ok(match sol.status {
            LpStatus::Optimal => Some(sol.objective_value),
            _ => None,
        })
    }

    fn dfs(&mut self, prefix: &mut Vec<Vec<bool>>) -> Result<()> {
        let horizon = self.instance.horizon();
        let ng = self.instance.num_generators();
        let t = prefix.len() + 1;
        let total = self.loads.total(t);
        for mask in 0..(1u32 << ng) {
            let pat: Vec<bool> = (0..ng).map(|g| mask >> g & 1 == 1).collect();
            let (lo, hi) = self
                .instance
                .generators()
                .iter()
                .zip(&pat)
                .filter(|(_, &on)| on)
                .fold((0.0, 0.0), |(lo, hi), (g, _)| (lo + g.p_min, hi + g.p_max));
            if hi < total - 1e-6 || lo > total + 1e-6 {
                continue;
            }
            prefix.push(pat);
            if let Some(v) = self.bound(prefix)? {
                let prune = self
                    .best
                    .as_ref()
                    .is_some_and(|(b, _)| v > b + 1e-6 * b.abs().max(1.0));
                if !prune {
                    if t == horizon {
                        let tol = self.tol();
                        match &self.best {
                            Some((b, _)) if v >= b - tol => {
                                if v <= b + tol {
                                    self.tie = true;
                                }
                            }
                            _ => {
                                self.best = Some((v, prefix.clone()));
                                self.tie = false;
                            }
                        }
                    } else {
                        self.dfs(prefix)?;
                    }
                }
            }
            prefix.pop();
        }
        Ok(())
    }
}

/// Exhaustive search over commitment patterns, one step at a time, solving
/// the dispatch LP for every pattern prefix. A prefix is discarded only when
/// its relaxation is infeasible or provably worse than the best complete
/// pattern, so the search is exact.
pub fn oracle_uc(instance: &UcInstance, flow: &FlowModel, loads: &LoadProfile, limit: usize) -> Result<OracleUc> {
    let binaries = instance.num_generators() * instance.horizon();
    if binaries > limit {
        return Err(Error::TooLarge { binaries, limit });
    }
    let steps: Vec<usize> = (1..=instance.horizon()).collect();
    let f = build(
        instance,
        flow,
        &ModelSpec {
            dispatch_steps: steps.clone(),
            network_steps: steps.clone(),
            aggregate: false,
            ramps: true,
            coupled_bounds: true,
            commitment: Commitment::Relaxed,
            loads: Loads::Fixed(loads),
            flows: FlowRows::All,
            objective: Objective::Cost,
        },
    )?;
    let u = (0..instance.num_generators())
        .map(|g| steps.iter().map(|&t| f.layout.u(g, t).unwrap()).collect())
        .collect();
    let mut search = Search {
        lp: f.lp,
        u,
        instance,
        loads,
        opts: LpOptions::default(),
        best: None,
        tie: false,
        lps: 0,
    };
    search.dfs(&mut Vec::new())?;
    let (objective, schedule) = match search.best {
        Some((v, pats)) => {
            let states = (0..instance.num_generators())
                .map(|g| pats.iter().map(|p| p[g]).collect())
                .collect();
            (Some(v), Some(CommitmentSchedule::new(states, Provenance::Solved)?))
        }
        None => (None, None),
    };
    Ok(OracleUc {
        objective,
        schedule,
        unique: !search.tie,
        lps_solved: search.lps,
    })
}

fn binding_mip(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    target: ScreeningTarget,
    limit: usize,
) -> Result<crate::milp::MixedIntegerProgram> {
    let binaries = instance.num_generators() * instance.horizon();
    if binaries > limit {
        return Err(Error::TooLarge { binaries, limit });
    }
    let steps: Vec<usize> = (1..=instance.horizon()).collect();
    let f = build(
        instance,
        flow,
        &ModelSpec {
            dispatch_steps: steps.clone(),
            network_steps: steps,
            aggregate: false,
            ramps: true,
            coupled_bounds: true,
            commitment: Commitment::Binary,
            loads: Loads::Fixed(loads),
            flows: FlowRows::Except(target),
            objective: Objective::Target(target),
        },
    )?;
    Ok(f.into_mip()?.0)
}

/// Extreme value of the target's flow over the full UC feasible set (all
/// steps, binaries enforced) with only the target inequality removed.
/// `None` when that set is empty.
pub fn oracle_binding(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    target: ScreeningTarget,
    limit: usize,
) -> Result<Option<f64>> {
    let mip = binding_mip(instance, flow, loads, target, limit)?;
    let sol = solve_mip(&mip, &MipOptions::default())?;
    match sol.status {
        MipStatus::Optimal => Ok(Some(sol.objective_value)),
        MipStatus::Infeasible => Ok(None),
        other => Err(Error::NotOptimal(format!("{other:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certification {
    pub certified: bool,
    /// A feasible flow beyond the bound, when certification fails.
    pub witness: Option<f64>,
}

/// Checks that no point of the full feasible set pushes the target's flow
/// past its bound by more than `1e-6 max(1, limit)`.
pub fn certify(
    instance: &UcInstance,
    flow: &FlowModel,
    loads: &LoadProfile,
    target: ScreeningTarget,
    limit: usize,
) -> Result<Certification> {
    let mip = binding_mip(instance, flow, loads, target, limit)?;
    let f_bar = instance.lines()[target.line].flow_limit;
    let tol = 1e-6 * f_bar.max(1.0);
    let cutoff = match target.sense {
        BoundSense::Upper => f_bar + tol,
        BoundSense::Lower => -f_bar - tol,
    };
    let opts = MipOptions {
        cutoff: Some(cutoff),
        ..MipOptions::default()
    };
    let sol = solve_mip(&mip, &opts)?;
    Ok(match sol.status {
        MipStatus::Infeasible => Certification {
            certified: true,
            witness: None,
        },
        MipStatus::Optimal => Certification {
            certified: false,
            witness: Some(sol.objective_value),
        },
        other => return Err(Error::NotOptimal(format!("{other:?}"))),
    })
}
