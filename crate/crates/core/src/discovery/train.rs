use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use super::loss::Objective;
use crate::error::{Error, Result};
use crate::nn::{flat_gradient, Activation, AdamState, LrSchedule, Mlp, Tape};

pub const DEFAULT_LOG_EVERY: u64 = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub objective: Objective,
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub schedule: LrSchedule,
    pub batch_size: usize,
    pub updates: u64,
    pub seed: u64,
    pub log_every: u64,
}

pub struct TrainOutcome {
    pub net: Mlp,
    pub optimizer: AdamState,
    /// `(update, full training loss)` every `log_every` updates and at the end.
    pub curve: Vec<(u64, f64)>,
    pub final_loss: f64,
}

impl TrainConfig {
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        let terms = self.objective.terms(data);
        if self.batch_size > terms {
            return Err(Error::Config(format!("batch size {} exceeds the {terms} available terms", self.batch_size)));
        }
        if self.log_every == 0 {
            return Err(Error::Config("log interval must be positive".into()));
        }
        Ok(())
    }

    pub fn init_net(&self) -> Result<Mlp> {
        Mlp::new(&self.widths, self.activation, self.seed)
    }
}

/// Seeded mini-batch Adam on the configured objective.
pub fn train(config: &TrainConfig, data: &Dataset) -> Result<TrainOutcome> {
    train_from(config, data, config.init_net()?)
}

/// Same as [`train`] from a given starting network.
pub fn train_from(config: &TrainConfig, data: &Dataset, mut net: Mlp) -> Result<TrainOutcome> {
    config.validate(data)?;
    config.objective.validate(&net, data)?;
    let terms = config.objective.terms(data);
    let all: Vec<usize> = (0..terms).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut adam = AdamState::new(net.param_count());
    let mut params = net.params();
    let mut curve = Vec::new();

    let full_loss = |net: &Mlp, step: u64| -> Result<f64> {
        let l = config.objective.loss(net, data)?;
        if !l.is_finite() {
            return Err(Error::NonFinite { step: step as usize, loss: l });
        }
        Ok(l)
    };
    curve.push((0, full_loss(&net, 0)?));

    for step in 1..=config.updates {
        let idx: Vec<usize> = if config.batch_size == terms {
            all.clone()
        } else {
            index::sample(&mut rng, terms, config.batch_size).into_vec()
        };
        let tape = Tape::new();
        let bound = net.bind(&tape);
        let loss = config.objective.loss_var(&bound, data, &idx)?;
        let value = loss.item();
        if !value.is_finite() {
            return Err(Error::NonFinite { step: step as usize, loss: value });
        }
        let grads = flat_gradient(&bound, &tape.backward(&loss));
        adam.step(&mut params, &grads, config.schedule.lr(step - 1))?;
        net.set_params(&params)?;
        if step % config.log_every == 0 || step == config.updates {
            curve.push((step, full_loss(&net, step)?));
        }
    }
    let final_loss = curve.last().map(|c| c.1).unwrap();
    Ok(TrainOutcome { net, optimizer: adam, curve, final_loss })
}
