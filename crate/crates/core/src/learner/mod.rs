//! Learned water-level policy: the permutation-equivariant network, the
//! Lagrangian it is trained on, primal-dual training and evaluation.

pub mod evaluate;
pub mod network;
pub mod objective;
pub mod train;

pub use evaluate::{evaluate, evaluate_link, LinkReport, LinkSpec, Report};
pub use network::{PolicyParams, DEFAULT_DIMS};
pub use objective::{gradients, lagrangian, LinkSetup, Objective};
pub use train::{train, Checkpoint, DualState, TrainConfig, TrainLog, Trained};
