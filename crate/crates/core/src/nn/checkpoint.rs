use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::mlp::{Activation, Mlp};
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk form of a network, with weights stored row-major per layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema: u32,
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub seed: u64,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<AdamState>,
}

impl Checkpoint {
    pub fn from_net(net: &Mlp, optimizer: Option<&AdamState>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            widths: net.widths().to_vec(),
            activation: net.activation(),
            seed: net.seed(),
            weights: net.weights.iter().map(|w| w.data.clone()).collect(),
            biases: net.biases.clone(),
            optimizer: optimizer.cloned(),
        }
    }

    pub fn to_net(&self) -> Result<Mlp> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported checkpoint schema {}", self.schema)));
        }
        if self.weights.len() + 1 != self.widths.len() {
            return Err(Error::Parse("checkpoint layer count does not match widths".into()));
        }
        let weights = self
            .widths
            .windows(2)
            .zip(&self.weights)
            .map(|(w, data)| {
                if data.len() != w[0] * w[1] {
                    return Err(Error::Parse(format!(
                        "weight block of {} entries for a {}x{} layer",
                        data.len(),
                        w[1],
                        w[0]
                    )));
                }
                Ok(Tensor::new(w[1], w[0], data.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Mlp::from_parts(&self.widths, self.activation, self.seed, weights, self.biases.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let net = Mlp::new(&[2, 4, 2], Activation::Sigmoid, 5).unwrap();
        let mut adam = AdamState::new(net.param_count());
        adam.t = 3;
        let ck = Checkpoint::from_net(&net, Some(&adam));
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_net().unwrap(), net);
        let json: serde_json::Value = serde_json::from_str(&ck.to_json().unwrap()).unwrap();
        assert_eq!(json["schema"], 1);
        assert_eq!(json["activation"], "sigmoid");
    }

    #[test]
    fn rejects_bad_shapes() {
        let net = Mlp::new(&[2, 4, 2], Activation::Tanh, 5).unwrap();
        let mut ck = Checkpoint::from_net(&net, None);
        ck.weights[0].pop();
        assert!(ck.to_net().is_err());
        ck = Checkpoint::from_net(&net, None);
        ck.schema = 2;
        assert!(ck.to_net().is_err());
    }
}
