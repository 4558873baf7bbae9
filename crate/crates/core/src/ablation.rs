//! Edge-type ablation: how much a node's logit depends on edges between
//! each pair of node types.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gnn::NodeScorer;
use crate::graph::{HeteroGraph, NodeId};
use crate::metrics::MotifSpec;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationRow {
    /// Removed type pair; `None` for the unmodified graph.
    pub removed: Option<(String, String)>,
    /// Whether the motif has an edge between the two types.
    pub in_motif: bool,
    pub logit: f64,
}

impl AblationRow {
    pub fn label(&self) -> String {
        match &self.removed {
            None => "original".into(),
            Some((a, b)) => format!("{a}-{b}"),
        }
    }
}

/// One row for the original graph, then one per unordered pair of node
/// types in schema order, with all edges between that pair removed.
pub fn edge_type_ablation(
    graph: &HeteroGraph,
    node: NodeId,
    scorer: &dyn NodeScorer,
    label: usize,
    motif: &MotifSpec,
) -> Result<Vec<AblationRow>> {
    graph.check_node(node)?;
    let read = |g: &HeteroGraph| -> Result<f64> {
        let logits = scorer.score(g, node)?;
        logits
            .get(label)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("label {label} outside {} outputs", logits.len())))
    };
    let motif_pairs: Vec<(&str, &str)> = motif
        .edges
        .iter()
        .map(|(s, d, _)| (motif.node_types[*s].as_str(), motif.node_types[*d].as_str()))
        .collect();
    let mut rows = vec![AblationRow {
        removed: None,
        in_motif: false,
        logit: read(graph)?,
    }];
    let schema = graph.schema();
    let types: Vec<_> = schema.node_type_ids().collect();
    for (i, &ta) in types.iter().enumerate() {
        for &tb in &types[i..] {
            let a = schema.node_type_name(ta).unwrap_or_default().to_owned();
            let b = schema.node_type_name(tb).unwrap_or_default().to_owned();
            let ablated = graph.remove_edges_between_types(ta, tb)?;
            let in_motif = motif_pairs
                .iter()
                .any(|&(s, d)| (s == a && d == b) || (s == b && d == a));
            rows.push(AblationRow {
                removed: Some((a, b)),
                in_motif,
                logit: read(&ablated)?,
            });
        }
    }
    Ok(rows)
}
