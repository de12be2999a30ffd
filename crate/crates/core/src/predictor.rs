//! K-nearest-neighbour prediction of commitment schedules from load
//! profiles.
//!
//! Features are the flattened `nb x T` load matrices, standardized per
//! coordinate with the training mean and standard deviation; distance is
//! Euclidean. Each (generator, timestep) entry is voted independently among
//! the K nearest samples, ties going to ON. Neighbours at equal distance are
//! ordered by training index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hex_digest, CommitmentSchedule, LoadProfile, PartialSchedule, Provenance};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub instance: String,
    pub samples: Vec<(LoadProfile, CommitmentSchedule)>,
}

impl TrainingSet {
    pub fn new(instance: impl Into<String>, samples: Vec<(LoadProfile, CommitmentSchedule)>) -> Result<Self> {
        if let Some((l0, s0)) = samples.first() {
            for (i, (l, s)) in samples.iter().enumerate() {
                if l.num_buses() != l0.num_buses()
                    || l.horizon() != l0.horizon()
                    || s.num_generators() != s0.num_generators()
                    || s.horizon() != l0.horizon()
                {
                    return Err(Error::DimensionMismatch(format!(
                        "training sample {i} differs in shape from sample 0"
                    )));
                }
            }
        }
        Ok(TrainingSet {
            instance: instance.into(),
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub schema_version: u32,
    pub instance: String,
    pub k: usize,
    pub num_buses: usize,
    pub horizon: usize,
    pub num_generators: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Standardized training features, one row per sample.
    pub features: Vec<Vec<f64>>,
    /// Training schedules flattened generator-major.
    pub labels: Vec<Vec<bool>>,
}

pub fn train(set: &TrainingSet, k: usize) -> Result<KnnModel> {
    if k == 0 {
        return Err(Error::validation("k", "K must be at least 1"));
    }
    if set.len() < k {
        return Err(Error::EmptyTraining(k));
    }
    let (l0, s0) = &set.samples[0];
    let d = l0.as_slice().len();
    let n = set.len() as f64;
    let mut mean = vec![0.0; d];
    for (l, _) in &set.samples {
        for (m, v) in mean.iter_mut().zip(l.as_slice()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut std = vec![0.0; d];
    for (l, _) in &set.samples {
        for ((s, v), m) in std.iter_mut().zip(l.as_slice()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut std {
        *s = (*s / n).sqrt();
        if *s <= 1e-12 {
            *s = 1.0;
        }
    }
    let features = set
        .samples
        .iter()
        .map(|(l, _)| standardize(l.as_slice(), &mean, &std))
        .collect();
    let labels = set
        .samples
        .iter()
        .map(|(_, s)| s.rows().iter().flatten().copied().collect())
        .collect();
    Ok(KnnModel {
        schema_version: MODEL_SCHEMA_VERSION,
        instance: set.instance.clone(),
        k,
        num_buses: l0.num_buses(),
        horizon: l0.horizon(),
        num_generators: s0.num_generators(),
        mean,
        std,
        features,
        labels,
    })
}

fn standardize(v: &[f64], mean: &[f64], std: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(mean)
        .zip(std)
        .map(|((x, m), s)| (x - m) / s)
        .collect()
}

impl KnnModel {
    /// Indices of the K nearest training samples, nearest first.
    pub fn neighbours(&self, loads: &LoadProfile) -> Result<Vec<usize>> {
        if loads.num_buses() != self.num_buses || loads.horizon() != self.horizon {
            return Err(Error::DimensionMismatch(format!(
                "query is {}x{}, model expects {}x{}",
                loads.num_buses(),
                loads.horizon(),
                self.num_buses,
                self.horizon
            )));
        }
        let q = standardize(loads.as_slice(), &self.mean, &self.std);
        let mut dist: Vec<(f64, usize)> = self
            .features
            .iter()
            .enumerate()
            .map(|(i, f)| (f.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(dist.iter().take(self.k).map(|&(_, i)| i).collect())
    }

    pub fn predict(&self, loads: &LoadProfile) -> Result<CommitmentSchedule> {
        let nn = self.neighbours(loads)?;
        let t = self.horizon;
        let states = (0..self.num_generators)
            .map(|g| {
                (0..t)
                    .map(|s| {
                        let on = nn.iter().filter(|&&i| self.labels[i][g * t + s]).count();
                        2 * on >= nn.len()
                    })
                    .collect()
            })
            .collect();
        CommitmentSchedule::new(states, Provenance::Predicted)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: KnnModel = serde_json::from_str(text)?;
        if model.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model schema_version {}",
                model.schema_version
            )));
        }
        Ok(model)
    }

    /// SHA-256 of the serialized model.
    pub fn fingerprint(&self) -> String {
        hex_digest(self.to_json().as_bytes())
    }
}

/// Keeps the schedule's columns at steps `interval, 2 interval, ...`.
pub fn partial_schedule(full: &CommitmentSchedule, interval: usize) -> Result<PartialSchedule> {
    if interval == 0 {
        return Err(Error::InvalidRange {
            value: 0.0,
            range: "interval >= 1",
        });
    }
    let steps = (1..=full.horizon() / interval).map(|i| i * interval);
    PartialSchedule::from_schedule(full, steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(v: &[f64]) -> LoadProfile {
        LoadProfile::from_rows(vec![v.to_vec()]).unwrap()
    }

    fn sched(v: &[bool]) -> CommitmentSchedule {
        CommitmentSchedule::new(vec![v.to_vec()], Provenance::Solved).unwrap()
    }

    #[test]
    fn identical_samples_vote_for_the_common_schedule() {
        let samples = (0..10).map(|_| (profile(&[5.0, 6.0]), sched(&[true, false]))).collect();
        let model = train(&TrainingSet::new("x", samples).unwrap(), 5).unwrap();
        let out = model.predict(&profile(&[100.0, 3.0])).unwrap();
        assert_eq!(out.rows(), &[vec![true, false]]);
        assert_eq!(out.provenance, Provenance::Predicted);
    }

    #[test]
    fn k1_returns_the_matching_sample() {
        let samples = vec![
            (profile(&[1.0, 2.0]), sched(&[true, false])),
            (profile(&[5.0, 1.0]), sched(&[false, true])),
            (profile(&[9.0, 9.0]), sched(&[false, false])),
        ];
        let model = train(&TrainingSet::new("x", samples).unwrap(), 1).unwrap();
        assert_eq!(model.predict(&profile(&[5.0, 1.0])).unwrap().rows(), &[vec![false, true]]);
    }

    #[test]
    fn ties_go_on() {
        let samples = vec![
            (profile(&[0.0]), sched(&[true])),
            (profile(&[2.0]), sched(&[false])),
        ];
        let model = train(&TrainingSet::new("x", samples).unwrap(), 2).unwrap();
        assert_eq!(model.predict(&profile(&[1.0])).unwrap().rows(), &[vec![true]]);
    }

    #[test]
    fn invalid_k_and_shapes() {
        let samples = vec![(profile(&[0.0]), sched(&[true]))];
        let set = TrainingSet::new("x", samples).unwrap();
        assert!(matches!(train(&set, 0), Err(Error::Validation { .. })));
        assert!(matches!(train(&set, 2), Err(Error::EmptyTraining(2))));
        let model = train(&set, 1).unwrap();
        assert!(matches!(model.predict(&profile(&[0.0, 1.0])), Err(Error::DimensionMismatch(_))));
        let mixed = vec![
            (profile(&[0.0]), sched(&[true])),
            (profile(&[0.0, 1.0]), sched(&[true, true])),
        ];
        assert!(TrainingSet::new("x", mixed).is_err());
    }

    #[test]
    fn model_round_trips_and_fingerprint_is_stable() {
        let samples = vec![
            (profile(&[1.0, 2.0]), sched(&[true, false])),
            (profile(&[3.0, 1.0]), sched(&[false, true])),
        ];
        let set = TrainingSet::new("x", samples).unwrap();
        let a = train(&set, 1).unwrap();
        let b = KnnModel::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), train(&set, 1).unwrap().fingerprint());
    }

    #[test]
    fn insertion_grid() {
        let full = CommitmentSchedule::new(vec![vec![true; 24]], Provenance::Solved).unwrap();
        let p = partial_schedule(&full, 4).unwrap();
        assert_eq!(p.steps().collect::<Vec<_>>(), vec![4, 8, 12, 16, 20, 24]);
        assert_eq!(partial_schedule(&full, 1).unwrap().steps().count(), 24);
        assert!(partial_schedule(&full, 25).unwrap().is_empty());
        assert!(partial_schedule(&full, 0).is_err());
    }
}
