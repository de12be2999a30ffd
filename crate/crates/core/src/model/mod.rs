//! Unit-commitment instance data: buses, lines, generators, load profiles,
//! commitment schedules and the DC fundamental-flow matrices.
//!
//! Timesteps in the public API are 1-based (`1..=horizon`); bus, line and
//! generator ids are 0-based and contiguous.

mod case;
mod flow;
mod loads;
mod schedule;

pub use case::{parse_case, to_case_toml};
pub use flow::FlowModel;
pub use loads::{parse_loads, LoadProfile};
pub use schedule::{CommitmentSchedule, PartialSchedule, Provenance};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub is_reference: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: usize,
    pub from_bus: usize,
    pub to_bus: usize,
    /// Per-unit susceptance, strictly positive.
    pub susceptance: f64,
    /// Thermal limit in MW, applied symmetrically to both flow directions.
    pub flow_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: usize,
    pub bus: usize,
    /// Linear energy cost in $/MWh.
    pub cost: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub ramp_startup: f64,
    pub ramp_shutdown: f64,
    /// Commitment state before the first interval.
    pub initial_on: bool,
    /// Output before the first interval.
    pub initial_output: f64,
}

/// A validated unit-commitment instance.
///
/// Construct through [`UcInstance::new`] or [`parse_case`]; both enforce
/// every structural invariant, so downstream code may index freely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcInstance {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    generators: Vec<Generator>,
    horizon: usize,
}

impl UcInstance {
    pub fn new(
        mut buses: Vec<Bus>,
        lines: Vec<Line>,
        generators: Vec<Generator>,
        horizon: usize,
    ) -> Result<Self> {
        if buses.is_empty() {
            return Err(Error::validation("buses", "at least one bus is required"));
        }
        buses.sort_by_key(|b| b.id);
        for (i, bus) in buses.iter().enumerate() {
            if bus.id != i {
                return Err(Error::validation(
                    format!("buses[{i}].id"),
                    format!("bus ids must be contiguous from 0, found {}", bus.id),
                ));
            }
        }
        let refs = buses.iter().filter(|b| b.is_reference).count();
        if refs > 1 {
            return Err(Error::validation(
                "buses",
                format!("exactly one reference bus expected, found {refs}"),
            ));
        }
        if refs == 0 {
            buses[0].is_reference = true;
        }
        let nb = buses.len();

        for (i, line) in lines.iter().enumerate() {
            let path = |f: &str| format!("lines[{i}].{f}");
            if line.id != i {
                return Err(Error::validation(path("id"), "line ids must be contiguous from 0"));
            }
            if line.from_bus >= nb {
                return Err(Error::validation(path("from_bus"), "unknown bus"));
            }
            if line.to_bus >= nb {
                return Err(Error::validation(path("to_bus"), "unknown bus"));
            }
            if line.from_bus == line.to_bus {
                return Err(Error::validation(path("to_bus"), "line endpoints must differ"));
            }
            if !(line.susceptance.is_finite() && line.susceptance > 0.0) {
                return Err(Error::validation(path("susceptance"), "must be finite and positive"));
            }
            if !(line.flow_limit.is_finite() && line.flow_limit > 0.0) {
                return Err(Error::validation(path("flow_limit"), "must be finite and positive"));
            }
        }

        if generators.is_empty() {
            return Err(Error::validation("generators", "at least one generator is required"));
        }
        for (i, g) in generators.iter().enumerate() {
            let path = |f: &str| format!("generators[{i}].{f}");
            if g.id != i {
                return Err(Error::validation(path("id"), "generator ids must be contiguous from 0"));
            }
            if g.bus >= nb {
                return Err(Error::validation(path("bus"), "unknown bus"));
            }
            if !g.cost.is_finite() {
                return Err(Error::validation(path("cost"), "must be finite"));
            }
            if !(g.p_min.is_finite() && g.p_min >= 0.0) {
                return Err(Error::validation(path("p_min"), "must be finite and non-negative"));
            }
            if !(g.p_max.is_finite() && g.p_max >= g.p_min) {
                return Err(Error::validation(path("p_max"), "must be finite and at least p_min"));
            }
            for (name, v) in [
                ("ramp_up", g.ramp_up),
                ("ramp_down", g.ramp_down),
                ("ramp_startup", g.ramp_startup),
                ("ramp_shutdown", g.ramp_shutdown),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::validation(path(name), "must be finite and non-negative"));
                }
            }
            if g.initial_on {
                if !(g.initial_output >= g.p_min && g.initial_output <= g.p_max) {
                    return Err(Error::validation(
                        path("initial_output"),
                        "an initially committed unit must start within [p_min, p_max]",
                    ));
                }
            } else if g.initial_output != 0.0 {
                return Err(Error::validation(
                    path("initial_output"),
                    "an initially decommitted unit must start at zero output",
                ));
            }
        }

        if horizon == 0 {
            return Err(Error::validation("horizon", "must be at least 1"));
        }

        let instance = UcInstance {
            buses,
            lines,
            generators,
            horizon,
        };
        instance.check_connected()?;
        Ok(instance)
    }

    fn check_connected(&self) -> Result<()> {
        let nb = self.buses.len();
        let mut adj = vec![Vec::new(); nb];
        for l in &self.lines {
            adj[l.from_bus].push(l.to_bus);
            adj[l.to_bus].push(l.from_bus);
        }
        let mut seen = vec![false; nb];
        let mut stack = vec![self.reference_bus()];
        seen[self.reference_bus()] = true;
        while let Some(b) = stack.pop() {
            for &n in &adj[b] {
                if !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(bus) => Err(Error::DisconnectedNetwork { bus }),
            None => Ok(()),
        }
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn reference_bus(&self) -> usize {
        self.buses.iter().position(|b| b.is_reference).unwrap_or(0)
    }

    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    /// Same network and fleet with a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::validation("horizon", "must be at least 1"));
        }
        let mut out = self.clone();
        out.horizon = horizon;
        Ok(out)
    }

    /// SHA-256 over the canonical case serialization.
    pub fn fingerprint(&self) -> String {
        let text = to_case_toml(self);
        hex_digest(text.as_bytes())
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
