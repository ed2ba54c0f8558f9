//! Random reward perturbation: zero-mean Gaussian noise added to environment
//! rewards and linearly annealed, carried by tabular Q-learning, DQN, and A2C,
//! together with numerical checks of how the noise widens model-output and
//! trajectory variance.

// `!(x > 0.0)` guards are intentional: they reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod diagnostics;
pub mod envs;
pub mod error;
pub mod harness;
pub mod nn;
pub mod noise;
pub mod rng;
pub mod studies;

pub use error::{Result, RrpError};
pub use nn::{DenseNet, Jacobian, LabeledBatch};
pub use noise::{anneal_stored_noise, perturb_reward, sample_gaussian, AnnealMode, NoiseSchedule};
pub use rng::SeededRng;
