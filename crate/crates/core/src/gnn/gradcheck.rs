//! Finite-difference validation of the analytic gradients.

use ndarray::Array2;

use crate::error::Result;
use crate::graph::{HeteroGraph, NodeId};

use super::model::HeteroSageModel;

pub const FD_STEP: f64 = 1e-4;

/// Below this magnitude both gradients count as zero and the error is
/// measured in absolute terms.
const MAGNITUDE_FLOOR: f64 = 1e-6;

/// Central differences of the loss over every parameter entry.
pub fn numerical_gradients(
    model: &HeteroSageModel,
    graph: &HeteroGraph,
    targets: &[(NodeId, usize)],
    step: f64,
) -> Result<Vec<Array2<f64>>> {
    let mut probe = model.clone();
    let base = model.params().to_vec();
    let mut out = Vec::with_capacity(base.len());
    for (i, p) in base.iter().enumerate() {
        let mut grad = Array2::zeros(p.dim());
        for idx in ndarray::indices(p.dim()) {
            let mut params = base.clone();
            params[i][idx] = p[idx] + step;
            probe.set_params(params.clone())?;
            let up = probe.loss(graph, targets)?;
            params[i][idx] = p[idx] - step;
            probe.set_params(params)?;
            let down = probe.loss(graph, targets)?;
            grad[idx] = (up - down) / (2.0 * step);
        }
        out.push(grad);
    }
    Ok(out)
}

/// Largest entrywise `|a − n| / max(|a|, |n|, floor)`.
pub fn compare_gradients(analytic: &[Array2<f64>], numeric: &[Array2<f64>]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .flat_map(|(a, n)| a.iter().zip(n.iter()))
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(MAGNITUDE_FLOOR))
        .fold(0.0, f64::max)
}

/// Max relative error between analytic and finite-difference gradients of
/// the cross-entropy of `node` against `label`.
pub fn gradient_check(model: &HeteroSageModel, graph: &HeteroGraph, node: NodeId, label: usize) -> Result<f64> {
    let targets = [(node, label)];
    let (_, analytic) = model.loss_and_gradients(graph, &targets)?;
    let numeric = numerical_gradients(model, graph, &targets, FD_STEP)?;
    Ok(compare_gradients(&analytic, &numeric))
}
