//! Losses, weighted regression trees, the boosting loop and model I/O.

mod config;
mod loss;
mod model;
mod train;
mod tree;

pub use config::{BoostConfig, TrustMode};
pub use loss::{init_score, logistic_gradient, logistic_loss, squared_gradient, Loss};
pub use model::{label_from_proba, sigmoid, Model, SCORE_CLAMP};
pub use train::{train, train_timed, IterationSnapshot, RunTrace, TrainTiming};
pub use tree::{fit_tree_weighted, Node, RegressionTree, TreeParams};
