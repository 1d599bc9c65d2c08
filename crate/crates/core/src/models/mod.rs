//! Classifiers: majority class, sentiment rule, lexicon thresholding, NB-SVM,
//! and the shared-encoder multitask network.

pub mod baselines;
pub mod linear;
pub mod loss;
pub mod multitask;
pub mod store;

pub use baselines::{predict_emolex, predict_sentiment_rule, train_majority, MajorityClassifier};
pub use linear::{train_nbsvm, LinearModel, LinearTrainParams, NbSvmOptions};
pub use multitask::{train_multitask, MultitaskExample, MultitaskModel, TrainMode, TrainOutcome};
pub use store::TrainedModel;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decision threshold for lexicon-based emotion classification.
pub const DEFAULT_EMOLEX_THRESHOLD: f64 = 0.001;

/// Shared training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epochs: usize,
    /// Epochs without dev improvement before stopping: 3 for single-task
    /// training, 5 for the joint model.
    pub patience: usize,
    pub lr_head: f64,
    pub lr_encoder: f64,
    pub dropout: f64,
    pub seed: u64,
    pub restarts: usize,
    /// Encoder width.
    pub hidden_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 20,
            patience: 3,
            lr_head: 5e-3,
            lr_encoder: 1e-3,
            dropout: 0.1,
            seed: 0,
            restarts: 3,
            hidden_dim: 256,
        }
    }
}

impl TrainConfig {
    /// Joint training converges more slowly; default patience rises to 5.
    pub fn default_joint() -> Self {
        TrainConfig {
            patience: 5,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patience >= self.max_epochs {
            return Err(Error::Config(format!(
                "patience {} must be below max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if self.lr_head <= 0.0 || self.lr_encoder <= 0.0 {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout {} must lie in [0, 1)",
                self.dropout
            )));
        }
        if self.hidden_dim == 0 {
            return Err(Error::Config("hidden_dim must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        Ok(())
    }
}
