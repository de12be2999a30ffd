use serde::{Deserialize, Serialize};

use super::UcInstance;
use crate::error::{Error, Result};

/// Nodal demand in MW, one row per bus and one column per timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    num_buses: usize,
    horizon: usize,
    /// Row-major `num_buses x horizon`.
    values: Vec<f64>,
}

impl LoadProfile {
    /// Builds a profile from per-bus rows; every row must have the same length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let num_buses = rows.len();
        let horizon = rows.first().map_or(0, Vec::len);
        if num_buses == 0 || horizon == 0 {
            return Err(Error::Dimension("load profile must be non-empty".into()));
        }
        let mut values = Vec::with_capacity(num_buses * horizon);
        for (bus, row) in rows.into_iter().enumerate() {
            if row.len() != horizon {
                return Err(Error::Dimension(format!(
                    "row {bus} has {} columns, expected {horizon}",
                    row.len()
                )));
            }
            for (t, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeLoad {
                        bus,
                        timestep: t + 1,
                        value: v,
                    });
                }
            }
            values.extend(row);
        }
        Ok(LoadProfile {
            num_buses,
            horizon,
            values,
        })
    }

    pub fn zeros(num_buses: usize, horizon: usize) -> Self {
        LoadProfile {
            num_buses,
            horizon,
            values: vec![0.0; num_buses * horizon],
        }
    }

    pub fn num_buses(&self) -> usize {
        self.num_buses
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Load at `bus` in 1-based timestep `step`.
    pub fn load(&self, bus: usize, step: usize) -> f64 {
        debug_assert!(step >= 1 && step <= self.horizon);
        self.values[bus * self.horizon + step - 1]
    }

    pub fn set(&mut self, bus: usize, step: usize, value: f64) {
        self.values[bus * self.horizon + step - 1] = value;
    }

    pub fn total(&self, step: usize) -> f64 {
        (0..self.num_buses).map(|b| self.load(b, step)).sum()
    }

    pub fn row(&self, bus: usize) -> &[f64] {
        &self.values[bus * self.horizon..(bus + 1) * self.horizon]
    }

    /// Flattened bus-major values, the feature vector used by the predictor.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Keeps the first `horizon` columns.
    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 || horizon > self.horizon {
            return Err(Error::Dimension(format!(
                "cannot truncate a {}-step profile to {horizon} steps",
                self.horizon
            )));
        }
        let rows = (0..self.num_buses)
            .map(|b| self.row(b)[..horizon].to_vec())
            .collect();
        LoadProfile::from_rows(rows)
    }

    pub fn check_matches(&self, instance: &UcInstance) -> Result<()> {
        if self.num_buses != instance.num_buses() || self.horizon != instance.horizon() {
            return Err(Error::Dimension(format!(
                "load profile is {}x{}, instance needs {}x{}",
                self.num_buses,
                self.horizon,
                instance.num_buses(),
                instance.horizon()
            )));
        }
        Ok(())
    }

    /// Comma-separated table with a `#` header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# bus");
        for t in 1..=self.horizon {
            out.push_str(&format!(",t{t}"));
        }
        out.push('\n');
        for b in 0..self.num_buses {
            let row: Vec<String> = self.row(b).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parses a delimited numeric table (rows = buses, columns = timesteps).
///
/// Fields may be separated by commas, semicolons, tabs or spaces. Blank lines
/// and lines starting with `#` are skipped, and a first line that is not
/// entirely numeric is treated as a header.
pub fn parse_loads(text: &str, instance: &UcInstance) -> Result<LoadProfile> {
    let mut rows = Vec::new();
    let mut first = true;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if first => {}
            Err(e) => {
                return Err(Error::Schema(format!(
                    "load table line {}: {e}",
                    lineno + 1
                )))
            }
        }
        first = false;
    }
    if rows.len() != instance.num_buses() {
        return Err(Error::Dimension(format!(
            "load table has {} rows, instance has {} buses",
            rows.len(),
            instance.num_buses()
        )));
    }
    if let Some((b, r)) = rows
        .iter()
        .enumerate()
        .find(|(_, r)| r.len() != instance.horizon())
    {
        return Err(Error::Dimension(format!(
            "load table row {b} has {} columns, instance horizon is {}",
            r.len(),
            instance.horizon()
        )));
    }
    LoadProfile::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_case;

    fn two_bus() -> UcInstance {
        parse_case(include_str!("../../../../fixtures/fix2.toml")).unwrap()
    }

    #[test]
    fn parses_simple_table() {
        let p = parse_loads("0,0\n40,40\n", &two_bus()).unwrap();
        assert_eq!(p.load(1, 1), 40.0);
        assert_eq!(p.load(1, 2), 40.0);
        assert_eq!(p.total(2), 40.0);
    }

    #[test]
    fn header_is_optional() {
        let p = parse_loads("bus t1 t2\n0 0\n40 40\n", &two_bus()).unwrap();
        assert_eq!(p.load(1, 2), 40.0);
    }

    #[test]
    fn wrong_width_is_dimension_error() {
        let err = parse_loads("0,0,0\n40,40,40\n", &two_bus()).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn negative_load_rejected() {
        let err = parse_loads("0,0\n40,-1\n", &two_bus()).unwrap_err();
        assert!(matches!(
            err,
            Error::NegativeLoad {
                bus: 1,
                timestep: 2,
                ..
            }
        ));
    }

    #[test]
    fn csv_round_trip() {
        let inst = two_bus();
        let p = parse_loads("0,0\n40,12.5\n", &inst).unwrap();
        assert_eq!(parse_loads(&p.to_csv(), &inst).unwrap(), p);
    }
}
