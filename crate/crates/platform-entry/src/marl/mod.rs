//! Multi-agent reinforcement learning: value networks, replay, and the
//! iterative best-response equilibrium search.

pub mod net;
pub mod replay;
pub mod trainer;

pub use net::Mlp;
pub use replay::{ReplayBuffer, Transition};
pub use trainer::{
    best_response, encode, encoded_dim, find_equilibrium, greedy_value, train_independent,
    Checkpoint, EquilibriumProfile, Hyperparameters, QFunction,
};
