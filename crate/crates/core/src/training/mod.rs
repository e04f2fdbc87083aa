//! Actor-critic PPO with GAE for the prey agents, in two paradigms:
//! Individual Learning (one network per prey slot) and Parameter Sharing
//! (one network fed by every prey).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub mod gae;
pub mod mlp;
pub mod policy;
pub mod ppo;
pub mod trainer;

pub use gae::{compute_gae, Trajectory};
pub use mlp::Mlp;
pub use policy::{ActionSample, PolicyNet};
pub use ppo::{loss_and_gradients, normalize_advantages, ppo_update, Batch, LossTerms, OptimizerState, UpdateStats};
pub use trainer::{train, LearningMode, TrainOutcome, TrainProgress};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OptimizerKind {
    /// Plain gradient steps.
    #[default]
    Sgd,
    Adam,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PpoHyperParams {
    pub gamma: f64,
    pub batch_size: usize,
    pub clip_range: f64,
    pub gae_lambda: f64,
    pub entropy_weight: f64,
    pub actor_step_size: f64,
    pub critic_step_size: f64,
    pub epochs_per_update: usize,
    pub minibatch_size: usize,
    pub episodes: usize,
    pub episode_length: usize,
    pub hidden: Vec<usize>,
    pub optimizer: OptimizerKind,
    pub normalize_advantages: bool,
}

impl Default for PpoHyperParams {
    fn default() -> Self {
        PpoHyperParams {
            gamma: 0.99,
            batch_size: 2048,
            clip_range: 0.1,
            gae_lambda: 0.95,
            entropy_weight: 0.001,
            actor_step_size: 0.001,
            critic_step_size: 0.003,
            epochs_per_update: 4,
            minibatch_size: 16,
            episodes: 4000,
            episode_length: 3000,
            hidden: vec![64, 64],
            optimizer: OptimizerKind::Sgd,
            normalize_advantages: true,
        }
    }
}

impl PpoHyperParams {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |field| Err(TrainError::InvalidHyperParam(field));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma");
        }
        if self.clip_range.is_nan() || self.clip_range <= 0.0 {
            return bad("clip_range");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda");
        }
        if self.batch_size < 1 {
            return bad("batch_size");
        }
        if self.epochs_per_update < 1 {
            return bad("epochs_per_update");
        }
        if self.minibatch_size < 1 {
            return bad("minibatch_size");
        }
        if self.actor_step_size.is_nan() || self.actor_step_size <= 0.0 {
            return bad("actor_step_size");
        }
        if self.critic_step_size.is_nan() || self.critic_step_size <= 0.0 {
            return bad("critic_step_size");
        }
        if self.episode_length < 1 {
            return bad("episode_length");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrainError {
    EmptyTrajectory,
    EmptyBatch,
    NonFiniteLoss { epoch: usize, loss: f64 },
    InvalidHyperParam(&'static str),
    NoLearners,
    Env(crate::env::EnvError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyTrajectory => f.write_str("empty trajectory"),
            TrainError::EmptyBatch => f.write_str("empty batch"),
            TrainError::NonFiniteLoss { epoch, loss } => {
                write!(f, "non-finite loss {loss} in epoch {epoch}; update aborted")
            }
            TrainError::InvalidHyperParam(p) => write!(f, "invalid hyper-parameter `{p}`"),
            TrainError::NoLearners => f.write_str("no prey agents to train"),
            TrainError::Env(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TrainError {}

impl From<crate::env::EnvError> for TrainError {
    fn from(e: crate::env::EnvError) -> Self {
        TrainError::Env(e)
    }
}
