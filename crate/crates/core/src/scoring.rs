//! Candidate scoring.
//!
//! The GNN-output scorer synthesizes graphs from an expression, reads the
//! model's logit for the target label at each root, aggregates them into
//! `gamma` and subtracts `lambda · length`. The fidelity scorer uses the
//! expression as a binary classifier on a held-out graph and reports its
//! agreement with the model's predictions, without a length penalty.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::class_expr::{extension, ClassExpression};
use crate::error::{Error, Result};
use crate::gnn::{argmax, NodeScorer};
use crate::graph::{HeteroGraph, NodeId, Schema};
use crate::metrics::fidelity;
use crate::synth::create_graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Mean,
    Max,
}

impl Aggregation {
    pub fn apply(self, values: &[f64]) -> Result<f64> {
        if values.is_empty() {
            return Err(Error::EmptySet("aggregated outputs"));
        }
        Ok(match self {
            Aggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregation::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Mean => "mean",
            Aggregation::Max => "max",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "max" => Ok(Aggregation::Max),
            _ => Err(Error::InvalidArgument(format!("unknown aggregation {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Gnn,
    Fidelity,
}

impl fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScorerKind::Gnn => "gnn",
            ScorerKind::Fidelity => "fidelity",
        })
    }
}

impl FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gnn" => Ok(ScorerKind::Gnn),
            "fidelity" => Ok(ScorerKind::Fidelity),
            _ => Err(Error::InvalidArgument(format!("unknown scorer {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    /// Weight of the length penalty.
    pub lambda: f64,
    /// Graphs synthesized per expression.
    pub graphs_per_ce: usize,
    pub aggregation: Aggregation,
    /// Label whose logit is read.
    pub label: usize,
    pub class_to_explain: String,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            graphs_per_ce: 100,
            aggregation: Aggregation::Max,
            label: 1,
            class_to_explain: "B".into(),
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.graphs_per_ce == 0 {
            return Err(Error::InvalidArgument("graphs per expression must be >= 1".into()));
        }
        Ok(())
    }

    fn check_root(&self, ce: &ClassExpression) -> Result<()> {
        let root = ce.root_class()?;
        if root != self.class_to_explain {
            return Err(Error::InvalidArgument(format!(
                "expression root {root} differs from the explained class {}",
                self.class_to_explain
            )));
        }
        Ok(())
    }
}

/// A synthesized graph and the node its root class maps onto.
#[derive(Clone, Debug, PartialEq)]
pub struct Evidence {
    pub graph: HeteroGraph,
    pub root: NodeId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredCandidate {
    pub ce: ClassExpression,
    pub score: f64,
    pub length: usize,
    pub scorer: ScorerKind,
    /// Aggregated model output (GNN scorer).
    pub gamma: Option<f64>,
    /// Agreement with the model (fidelity scorer).
    pub fidelity: Option<f64>,
    pub per_graph_outputs: Vec<f64>,
    /// Graph with the highest output (GNN scorer).
    pub evidence: Option<Evidence>,
}

/// Scores the expression with its own random stream.
pub trait CandidateScorer: Send + Sync {
    fn kind(&self) -> ScorerKind;
    fn score(&self, ce: &ClassExpression, rng: &mut ChaCha8Rng) -> Result<ScoredCandidate>;
}

/// `gamma` from synthesized graphs, penalized by length.
pub fn score_ce_gnn(
    ce: &ClassExpression,
    scorer: &dyn NodeScorer,
    schema: &Arc<Schema>,
    config: &ScoreConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ScoredCandidate> {
    config.validate()?;
    config.check_root(ce)?;
    let mut outputs = Vec::with_capacity(config.graphs_per_ce);
    let mut best: Option<(f64, Evidence)> = None;
    for _ in 0..config.graphs_per_ce {
        let outcome = create_graph(ce, schema, rng)?;
        let logits = scorer.score(&outcome.graph, outcome.root)?;
        let value = *logits.get(config.label).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "label {} outside the scorer's {} outputs",
                config.label,
                logits.len()
            ))
        })?;
        outputs.push(value);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((
                value,
                Evidence {
                    graph: outcome.graph,
                    root: outcome.root,
                },
            ));
        }
    }
    let gamma = config.aggregation.apply(&outputs)?;
    let length = ce.length();
    Ok(ScoredCandidate {
        ce: ce.clone(),
        score: gamma - config.lambda * length as f64,
        length,
        scorer: ScorerKind::Gnn,
        gamma: Some(gamma),
        fidelity: None,
        per_graph_outputs: outputs,
        evidence: best.map(|(_, e)| e),
    })
}

pub struct GnnOutputScorer<'a> {
    pub model: &'a dyn NodeScorer,
    pub schema: Arc<Schema>,
    pub config: ScoreConfig,
}

impl CandidateScorer for GnnOutputScorer<'_> {
    fn kind(&self) -> ScorerKind {
        ScorerKind::Gnn
    }

    fn score(&self, ce: &ClassExpression, rng: &mut ChaCha8Rng) -> Result<ScoredCandidate> {
        score_ce_gnn(ce, self.model, &self.schema, &self.config, rng)
    }
}

/// Model predictions on a held-out graph, computed once and reused for
/// every candidate.
pub struct FidelityScorer {
    graph: HeteroGraph,
    predicted_positive: Vec<bool>,
    nodes: Vec<NodeId>,
    config: ScoreConfig,
}

impl FidelityScorer {
    /// Evaluates on every node of the explained class in `graph`.
    pub fn new(model: &dyn NodeScorer, graph: HeteroGraph, config: ScoreConfig) -> Result<Self> {
        config.validate()?;
        let class = graph.schema().require_node_type(&config.class_to_explain)?;
        let nodes: Vec<NodeId> = graph.nodes_of_type(class).collect();
        if nodes.is_empty() {
            return Err(Error::EmptySet("nodes of the explained class"));
        }
        let logits = model.score_all(&graph)?;
        if config.label >= logits.ncols() {
            return Err(Error::InvalidArgument(format!(
                "label {} outside the scorer's {} outputs",
                config.label,
                logits.ncols()
            )));
        }
        let predicted_positive = logits
            .rows()
            .into_iter()
            .map(|row| argmax(row.iter().copied()) == config.label)
            .collect();
        Ok(Self {
            graph,
            predicted_positive,
            nodes,
            config,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn predicted_positive(&self) -> &[bool] {
        &self.predicted_positive
    }

    pub fn fidelity(&self, ce: &ClassExpression) -> Result<f64> {
        let verdicts = extension(&self.graph, ce)?;
        fidelity(&verdicts, &self.predicted_positive, &self.nodes)
    }
}

/// Agreement between `ce` and the model on the held-out graph.
pub fn score_ce_fidelity(ce: &ClassExpression, scorer: &FidelityScorer) -> Result<ScoredCandidate> {
    scorer.config.check_root(ce)?;
    let value = scorer.fidelity(ce)?;
    Ok(ScoredCandidate {
        ce: ce.clone(),
        score: value,
        length: ce.length(),
        scorer: ScorerKind::Fidelity,
        gamma: None,
        fidelity: Some(value),
        per_graph_outputs: Vec::new(),
        evidence: None,
    })
}

impl CandidateScorer for FidelityScorer {
    fn kind(&self) -> ScorerKind {
        ScorerKind::Fidelity
    }

    fn score(&self, ce: &ClassExpression, _rng: &mut ChaCha8Rng) -> Result<ScoredCandidate> {
        score_ce_fidelity(ce, self)
    }
}
