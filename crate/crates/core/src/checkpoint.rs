//! JSON model checkpoints: architecture plus flattened parameters.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{MlpModel, OutputKind};
use crate::surrogate::LinearSurrogate;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_kind: OutputKind,
    /// Layer-major, weights (row-major) before bias.
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<LinearSurrogate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature_names: Vec<String>,
}

impl Checkpoint {
    pub fn new(
        model: &MlpModel,
        surrogate: Option<&LinearSurrogate>,
        feature_names: &[String],
    ) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            input_dim: model.input_dim(),
            hidden: model.hidden_sizes(),
            output_kind: model.output_kind(),
            params: model.flatten_params(),
            surrogate: surrogate.cloned(),
            feature_names: feature_names.to_vec(),
        }
    }

    /// Rebuilds the model; activations follow the standard architecture.
    pub fn model(&self) -> Result<MlpModel> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {}",
                self.version
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let skeleton = MlpModel::init(self.input_dim, &self.hidden, self.output_kind, &mut rng);
        skeleton.unflatten_params(&self.params)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = MlpModel::init(4, &[5, 3], OutputKind::BinaryProbability, &mut rng);
        let g = LinearSurrogate::new(vec![1.0, -2.0, 0.5, 0.0], 0.25).unwrap();
        let ck = Checkpoint::new(&m, Some(&g), &[]);
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back.model().unwrap(), m);
        assert_eq!(back.surrogate, Some(g));
    }

    #[test]
    fn rejects_unknown_version() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = MlpModel::init(2, &[], OutputKind::RegressionScalar, &mut rng);
        let mut ck = Checkpoint::new(&m, None, &[]);
        ck.version = 9;
        assert!(matches!(ck.model(), Err(Error::Format(_))));
    }
}
