use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Solved,
    Predicted,
    Partial,
    /// Read from a file supplied by the user.
    Given,
}

/// Binary on/off matrix, one row per generator and one column per timestep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitmentSchedule {
    states: Vec<Vec<bool>>,
    pub provenance: Provenance,
}

impl CommitmentSchedule {
    pub fn new(states: Vec<Vec<bool>>, provenance: Provenance) -> Result<Self> {
        let horizon = states.first().map_or(0, Vec::len);
        if states.is_empty() || horizon == 0 {
            return Err(Error::Dimension("schedule must be non-empty".into()));
        }
        if states.iter().any(|r| r.len() != horizon) {
            return Err(Error::Dimension("schedule rows have unequal lengths".into()));
        }
        Ok(CommitmentSchedule { states, provenance })
    }

    pub fn num_generators(&self) -> usize {
        self.states.len()
    }

    pub fn horizon(&self) -> usize {
        self.states[0].len()
    }

    /// State of `gen` in 1-based timestep `step`.
    pub fn is_on(&self, gen: usize, step: usize) -> bool {
        self.states[gen][step - 1]
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.states
    }

    /// States of all generators at `step`.
    pub fn column(&self, step: usize) -> Vec<bool> {
        self.states.iter().map(|r| r[step - 1]).collect()
    }

    /// Number of (generator, timestep) entries that differ.
    pub fn hamming(&self, other: &CommitmentSchedule) -> usize {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count())
            .sum()
    }

    /// Parses a 0/1 matrix (rows = generators) with the same delimiter
    /// rules as load tables.
    pub fn parse_table(text: &str, provenance: Provenance) -> Result<Self> {
        let mut rows = Vec::new();
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .map(|f| match f {
                    "1" => Ok(true),
                    "0" => Ok(false),
                    other => Err(Error::Schema(format!("schedule entry `{other}` is not 0 or 1"))),
                })
                .collect::<Result<Vec<bool>>>()?;
            rows.push(row);
        }
        CommitmentSchedule::new(rows, provenance)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for row in &self.states {
            let cells: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Commitment states fixed on a subset of timesteps (`T_pre`); every
/// generator is fixed at each listed step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialSchedule {
    num_generators: usize,
    horizon: usize,
    fixed: BTreeMap<usize, Vec<bool>>,
}

impl PartialSchedule {
    pub fn new(num_generators: usize, horizon: usize, fixed: BTreeMap<usize, Vec<bool>>) -> Result<Self> {
        for (&step, states) in &fixed {
            if step == 0 || step > horizon {
                return Err(Error::ScheduleCoverage(format!(
                    "fixed step {step} outside 1..={horizon}"
                )));
            }
            if states.len() != num_generators {
                return Err(Error::ScheduleCoverage(format!(
                    "step {step} fixes {} generators, expected {num_generators}",
                    states.len()
                )));
            }
        }
        Ok(PartialSchedule {
            num_generators,
            horizon,
            fixed,
        })
    }

    /// Keeps the columns of `full` at the given steps.
    pub fn from_schedule(full: &CommitmentSchedule, steps: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut fixed = BTreeMap::new();
        for step in steps {
            if step == 0 || step > full.horizon() {
                return Err(Error::ScheduleCoverage(format!(
                    "step {step} outside 1..={}",
                    full.horizon()
                )));
            }
            fixed.insert(step, full.column(step));
        }
        Ok(PartialSchedule {
            num_generators: full.num_generators(),
            horizon: full.horizon(),
            fixed,
        })
    }

    pub fn empty(num_generators: usize, horizon: usize) -> Self {
        PartialSchedule {
            num_generators,
            horizon,
            fixed: BTreeMap::new(),
        }
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// The fixed timesteps, ascending.
    pub fn steps(&self) -> impl Iterator<Item = usize> + '_ {
        self.fixed.keys().copied()
    }

    pub fn get(&self, gen: usize, step: usize) -> Option<bool> {
        self.fixed.get(&step).map(|s| s[gen])
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }
}
