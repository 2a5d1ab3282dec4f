use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::parallel::par_map;
use crate::algebra::{Jet, VectorField};
use crate::bench::Domain;
use crate::error::{Error, Result};
use crate::integrators::{reference_flow, reference_trajectory, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Flow,
    Domain,
}

/// How to generate training pairs `(x_i, phi_T(x_i))`.
#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSpec {
    /// `I + 1` points `x_i = phi_{iT}(x_0)` on one trajectory.
    Flow { x0: Vec<f64>, data_step: f64, length: usize },
    /// `count` uniform samples in a box, each paired with its flow.
    Domain { domain: Domain, data_step: f64, count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub kind: DatasetKind,
    pub data_step: f64,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub x0: Option<Vec<f64>>,
    pub domain: Option<Domain>,
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    /// `x_0, ..., x_I` of a flow dataset.
    pub fn trajectory(&self) -> Result<Vec<Vec<f64>>> {
        if self.kind != DatasetKind::Flow {
            return Err(Error::BadParams("only flow datasets form a trajectory".into()));
        }
        let mut out = self.inputs.clone();
        if let Some(last) = self.targets.last() {
            out.push(last.clone());
        }
        Ok(out)
    }
}

/// Uniform samples in a box from a seeded generator.
pub fn sample_box(domain: &Domain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| domain.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()).collect()
}

pub fn make_dataset<F: VectorField<Jet<f64>> + Sync + ?Sized>(f: &F, spec: &DatasetSpec) -> Result<Dataset> {
    match spec {
        DatasetSpec::Flow { x0, data_step, length } => {
            if *length == 0 {
                return Err(Error::BadParams("flow dataset needs at least one pair".into()));
            }
            let traj = reference_trajectory(f, x0, *data_step, *length, DEFAULT_TOL)?;
            Ok(Dataset {
                kind: DatasetKind::Flow,
                data_step: *data_step,
                inputs: traj[..*length].to_vec(),
                targets: traj[1..].to_vec(),
                x0: Some(x0.clone()),
                domain: None,
                seed: None,
            })
        }
        DatasetSpec::Domain { domain, data_step, count, seed } => {
            if domain.bounds.len() != f.dim() {
                return Err(Error::DimensionMismatch { expected: f.dim(), got: domain.bounds.len() });
            }
            let inputs = sample_box(domain, *count, *seed);
            let targets = par_map(&inputs, |x| reference_flow(f, x, *data_step, DEFAULT_TOL))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            Ok(Dataset {
                kind: DatasetKind::Domain,
                data_step: *data_step,
                inputs,
                targets,
                x0: None,
                domain: Some(domain.clone()),
                seed: Some(*seed),
            })
        }
    }
}
