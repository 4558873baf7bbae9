//! The black-box node classifier: a heterogeneous GraphSAGE model, its
//! training loop, and the [`NodeScorer`] interface the explainer queries.

mod adam;
mod gradcheck;
mod io;
mod model;
mod train;

use ndarray::Array2;

use crate::error::Result;
use crate::graph::{HeteroGraph, NodeId};

pub use adam::Adam;
pub use gradcheck::{compare_gradients, gradient_check, numerical_gradients, FD_STEP};
pub use model::{HeteroSageModel, Triple, INPUT_DIM, LAYERS};
pub use train::{accuracy, argmax, train, EpochMetrics, TrainConfig, TrainReport};

/// Per-label raw scores for graph nodes. Implementations must be
/// deterministic and safe to share across threads.
pub trait NodeScorer: Send + Sync {
    /// Logits for every node, `node_count × labels`.
    fn score_all(&self, graph: &HeteroGraph) -> Result<Array2<f64>>;

    fn score(&self, graph: &HeteroGraph, node: NodeId) -> Result<Vec<f64>> {
        graph.check_node(node)?;
        Ok(self.score_all(graph)?.row(node).to_vec())
    }
}

impl NodeScorer for HeteroSageModel {
    fn score_all(&self, graph: &HeteroGraph) -> Result<Array2<f64>> {
        self.forward_all(graph)
    }
}
