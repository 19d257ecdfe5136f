//! Training loops and evaluation for node-level boundary identification and
//! graph-level functional classification.

mod metrics;
mod train;

pub use metrics::{binary_prf, evaluate_predictions, ClassMetrics, EvalReport};
pub use train::{
    boundary_report, boundary_report_many, eval_graph, eval_node, graph_label, predict_graph,
    predict_nodes, train_graph, train_node,
};

#[derive(Debug, thiserror::Error)]
pub enum TasksError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("model error: {0}")]
    Model(#[from] crate::model::ModelError),
}
