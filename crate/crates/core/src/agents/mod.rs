//! Learners: replay memory, the action-value network, the tabular baseline,
//! and the training/evaluation loops that drive them.

mod network;
mod qtable;
mod replay;
mod trainer;

pub use network::{argmax, Gradients, Linear, QNetwork};
pub use qtable::QTable;
pub use replay::{ReplayMemory, Transition};
pub use trainer::{
    epsilon_at, evaluate, select_action, td_train_step, train, train_with, AdamState, AgentKind,
    Checkpoint, OptimizerKind, TrainConfig, TrainResult, CHECKPOINT_VERSION,
};
