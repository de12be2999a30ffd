//! TOML case files.
//!
//! ```toml
//! horizon = 2
//!
//! [[buses]]
//! id = 0
//! reference = true
//!
//! [[lines]]
//! id = 0
//! from = 0
//! to = 1
//! susceptance = 1.0
//! limit = 50.0
//!
//! [[generators]]
//! id = 0
//! bus = 0
//! cost = 10.0
//! pmin = 0.0
//! pmax = 100.0
//! ramp_up = 100.0
//! ramp_down = 100.0
//! ramp_su = 100.0
//! ramp_sd = 100.0
//! u0 = true
//! x0 = 40.0
//! ```
//!
//! Unknown keys are rejected. `reference` is optional; bus 0 becomes the
//! reference when no bus claims it.

use serde::{Deserialize, Serialize};

use super::{Bus, Generator, Line, UcInstance};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseDoc {
    horizon: usize,
    buses: Vec<BusDoc>,
    #[serde(default)]
    lines: Vec<LineDoc>,
    generators: Vec<GeneratorDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusDoc {
    id: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    reference: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineDoc {
    id: usize,
    from: usize,
    to: usize,
    susceptance: f64,
    limit: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorDoc {
    id: usize,
    bus: usize,
    cost: f64,
    pmin: f64,
    pmax: f64,
    ramp_up: f64,
    ramp_down: f64,
    ramp_su: f64,
    ramp_sd: f64,
    u0: bool,
    x0: f64,
}

/// Parses and validates a TOML case document.
pub fn parse_case(text: &str) -> Result<UcInstance> {
    let doc: CaseDoc = toml::from_str(text).map_err(|e| Error::Schema(e.message().to_string()))?;
    let buses = doc
        .buses
        .into_iter()
        .map(|b| Bus {
            id: b.id,
            is_reference: b.reference,
        })
        .collect();
    let lines = doc
        .lines
        .into_iter()
        .map(|l| Line {
            id: l.id,
            from_bus: l.from,
            to_bus: l.to,
            susceptance: l.susceptance,
            flow_limit: l.limit,
        })
        .collect();
    let generators = doc
        .generators
        .into_iter()
        .map(|g| Generator {
            id: g.id,
            bus: g.bus,
            cost: g.cost,
            p_min: g.pmin,
            p_max: g.pmax,
            ramp_up: g.ramp_up,
            ramp_down: g.ramp_down,
            ramp_startup: g.ramp_su,
            ramp_shutdown: g.ramp_sd,
            initial_on: g.u0,
            initial_output: g.x0,
        })
        .collect();
    UcInstance::new(buses, lines, generators, doc.horizon)
}

/// Canonical TOML serialization; `parse_case(to_case_toml(x)) == x`.
pub fn to_case_toml(instance: &UcInstance) -> String {
    let doc = CaseDoc {
        horizon: instance.horizon,
        buses: instance
            .buses
            .iter()
            .map(|b| BusDoc {
                id: b.id,
                reference: b.is_reference,
            })
            .collect(),
        lines: instance
            .lines
            .iter()
            .map(|l| LineDoc {
                id: l.id,
                from: l.from_bus,
                to: l.to_bus,
                susceptance: l.susceptance,
                limit: l.flow_limit,
            })
            .collect(),
        generators: instance
            .generators
            .iter()
            .map(|g| GeneratorDoc {
                id: g.id,
                bus: g.bus,
                cost: g.cost,
                pmin: g.p_min,
                pmax: g.p_max,
                ramp_up: g.ramp_up,
                ramp_down: g.ramp_down,
                ramp_su: g.ramp_startup,
                ramp_sd: g.ramp_shutdown,
                u0: g.initial_on,
                x0: g.initial_output,
            })
            .collect(),
    };
    toml::to_string(&doc).expect("case document serializes")
}
