//! Full-batch training with best-validation checkpointing.

use crate::error::{Error, Result};
use crate::graph::{HeteroGraph, NodeId};

use super::adam::Adam;
use super::model::{cross_entropy, HeteroSageModel};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 1000, lr: 0.01 }
    }
}

/// Metrics of the parameters after `epoch` optimizer steps.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    /// One row per epoch, starting with the initialization at epoch 0.
    pub history: Vec<EpochMetrics>,
    /// Epoch whose parameters the model holds after training.
    pub best_epoch: usize,
}

/// Fraction of `targets` whose argmax logit equals the label.
pub fn accuracy(model: &HeteroSageModel, graph: &HeteroGraph, targets: &[(NodeId, usize)]) -> Result<f64> {
    let logits = model.forward_all(graph)?;
    accuracy_from_logits(&logits, targets)
}

fn accuracy_from_logits(logits: &ndarray::Array2<f64>, targets: &[(NodeId, usize)]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::EmptySet("accuracy targets"));
    }
    let hits = targets
        .iter()
        .filter(|&&(v, label)| argmax(logits.row(v).iter().copied()) == label)
        .count();
    Ok(hits as f64 / targets.len() as f64)
}

/// Index of the largest value; the first one on ties.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, x) in values.into_iter().enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best.0
}

/// Minimizes mean cross-entropy on `train` with Adam and leaves `model`
/// holding the parameters with the highest validation accuracy (earliest
/// epoch on ties).
pub fn train(
    model: &mut HeteroSageModel,
    graph: &HeteroGraph,
    train: &[(NodeId, usize)],
    val: &[(NodeId, usize)],
    config: &TrainConfig,
) -> Result<TrainReport> {
    if train.is_empty() {
        return Err(Error::EmptySet("training split"));
    }
    if val.is_empty() {
        return Err(Error::EmptySet("validation split"));
    }
    if !(config.lr >= 0.0 && config.lr.is_finite()) {
        return Err(Error::InvalidArgument(format!("learning rate {}", config.lr)));
    }
    let plan = model.plan(graph)?;
    let mut params = model.params().to_vec();
    let mut opt = Adam::new(config.lr, &params);
    let mut history = Vec::with_capacity(config.epochs + 1);
    let mut best: Option<(f64, usize, Vec<ndarray::Array2<f64>>)> = None;
    for epoch in 0..=config.epochs {
        let pass = model.forward_plan(&plan);
        let (loss, dlogits) = cross_entropy(&pass.logits, train)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        let metrics = EpochMetrics {
            epoch,
            train_loss: loss,
            train_accuracy: accuracy_from_logits(&pass.logits, train)?,
            val_accuracy: accuracy_from_logits(&pass.logits, val)?,
        };
        log::debug!(
            "epoch {epoch}: loss {:.5} train {:.4} val {:.4}",
            metrics.train_loss,
            metrics.train_accuracy,
            metrics.val_accuracy
        );
        if best.as_ref().is_none_or(|b| metrics.val_accuracy > b.0) {
            best = Some((metrics.val_accuracy, epoch, params.clone()));
        }
        history.push(metrics);
        if epoch == config.epochs {
            break;
        }
        let grads = model.backward(&plan, &pass, &dlogits);
        opt.step(&mut params, &grads);
        if params.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::Diverged { epoch: epoch + 1, loss });
        }
        model.set_params(params.clone())?;
    }
    let (_, best_epoch, best_params) = best.expect("at least one epoch is evaluated");
    model.set_params(best_params)?;
    Ok(TrainReport { history, best_epoch })
}
