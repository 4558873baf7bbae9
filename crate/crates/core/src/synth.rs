//! Random graphs whose root node fulfills a given class expression.
//!
//! Construction follows the expression tree. A named class yields one node.
//! An intersection yields a node of its root class; each restriction operand
//! is built and its placeholder root identified with that node. A
//! restriction `∃r.F` either reuses a node of the graph built so far that
//! already fulfills `F` (attempted with probability 1/2) or synthesizes `F`
//! afresh, then connects an untyped placeholder to the filler node.
//! Edges are stored in both directions, like the dataset's logical edges.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::class_expr::{ClassExpression, CompiledExpression};
use crate::error::{Error, Result};
use crate::graph::{HeteroGraph, NodeId, Schema};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisOutcome {
    pub graph: HeteroGraph,
    /// Node the expression's root class maps onto.
    pub root: NodeId,
    pub reuse_events: usize,
}

struct Builder<'a, R: ?Sized> {
    graph: HeteroGraph,
    reuse_events: usize,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> Builder<'_, R> {
    fn build(&mut self, ce: &ClassExpression) -> Result<NodeId> {
        let schema = self.graph.schema().clone();
        match ce {
            ClassExpression::Class(name) => self.graph.add_node(schema.require_node_type(name)?),
            ClassExpression::Intersection(ops) => {
                let class = ce.root_class()?;
                let node = self.graph.add_node(schema.require_node_type(class)?)?;
                for op in ops {
                    if matches!(op, ClassExpression::Class(_)) {
                        continue;
                    }
                    let onode = self.build(op)?;
                    if onode + 1 != self.graph.node_count() {
                        return Err(Error::Internal(
                            "operand root is not the most recent node".into(),
                        ));
                    }
                    self.graph.absorb_last_node(node)?;
                }
                Ok(node)
            }
            ClassExpression::Existential { property, filler } => {
                let etype = schema.require_edge_type(property)?;
                let mut target = None;
                if self.rng.gen_bool(0.5) {
                    let ext = CompiledExpression::new(filler, &schema)?.extension(&self.graph);
                    let candidates: Vec<NodeId> = self
                        .graph
                        .nodes()
                        .filter(|&v| ext[v] && !self.graph.node_type(v).is_untyped())
                        .collect();
                    if let Some(&v) = candidates.choose(self.rng) {
                        target = Some(v);
                        self.reuse_events += 1;
                    }
                }
                let target = match target {
                    Some(v) => v,
                    None => self.build(filler)?,
                };
                let node = self.graph.add_untyped_node();
                self.graph.add_edge_both(node, etype, target)?;
                Ok(node)
            }
        }
    }
}

/// Synthesizes one graph for `ce` over the type universe `schema`.
pub fn create_graph<R: Rng + ?Sized>(
    ce: &ClassExpression,
    schema: &Arc<Schema>,
    rng: &mut R,
) -> Result<SynthesisOutcome> {
    ce.validate()?;
    let mut builder = Builder {
        graph: HeteroGraph::new(schema.clone()),
        reuse_events: 0,
        rng,
    };
    let root = builder.build(ce)?;
    if builder.graph.has_untyped_nodes() {
        return Err(Error::Internal(format!(
            "placeholder left after synthesizing {ce}"
        )));
    }
    Ok(SynthesisOutcome {
        graph: builder.graph,
        root,
        reuse_events: builder.reuse_events,
    })
}

/// `count` independent outcomes drawn in sequence from `rng`.
pub fn create_graph_batch<R: Rng + ?Sized>(
    ce: &ClassExpression,
    count: usize,
    schema: &Arc<Schema>,
    rng: &mut R,
) -> Result<Vec<SynthesisOutcome>> {
    if count == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    (0..count).map(|_| create_graph(ce, schema, rng)).collect()
}
