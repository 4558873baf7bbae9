//! Fulfillment: does a homomorphism from the expression tree into the graph
//! exist that maps the root class onto a given node?
//!
//! Distinct parts of the expression may map onto the same graph node, so the
//! check decomposes over subtrees: a node fulfills `C ⊓ D` iff it fulfills
//! both, and `∃r.F` iff some `r`-successor fulfills `F`.

use std::collections::HashMap;

use super::ClassExpression;
use crate::error::Result;
use crate::graph::{EdgeTypeId, HeteroGraph, NodeId, NodeTypeId, Schema};

#[derive(Clone, Debug)]
enum Step {
    Class(NodeTypeId),
    All(Vec<usize>),
    Exists(EdgeTypeId, usize),
}

/// Expression with names resolved against a schema, stored as an arena in
/// post-order (children before parents, root last).
#[derive(Clone, Debug)]
pub struct CompiledExpression {
    steps: Vec<Step>,
}

impl CompiledExpression {
    pub fn new(ce: &ClassExpression, schema: &Schema) -> Result<Self> {
        let mut steps = Vec::new();
        compile(ce, schema, &mut steps)?;
        Ok(Self { steps })
    }

    fn root(&self) -> usize {
        self.steps.len() - 1
    }

    /// Memoized top-down check for a single node.
    pub fn fulfills(&self, graph: &HeteroGraph, node: NodeId) -> bool {
        let mut memo = HashMap::new();
        self.check(graph, self.root(), node, &mut memo)
    }

    fn check(
        &self,
        graph: &HeteroGraph,
        step: usize,
        node: NodeId,
        memo: &mut HashMap<(usize, NodeId), bool>,
    ) -> bool {
        if let Some(&hit) = memo.get(&(step, node)) {
            return hit;
        }
        let result = match &self.steps[step] {
            Step::Class(ty) => graph.node_type(node) == *ty,
            Step::All(parts) => parts.iter().all(|&p| self.check(graph, p, node, memo)),
            Step::Exists(etype, filler) => {
                let targets: Vec<NodeId> = graph
                    .out_edges(node)
                    .filter(|e| e.etype == *etype)
                    .map(|e| e.dst)
                    .collect();
                targets
                    .into_iter()
                    .any(|t| self.check(graph, *filler, t, memo))
            }
        };
        memo.insert((step, node), result);
        result
    }

    /// Bottom-up evaluation over every node at once.
    pub fn extension(&self, graph: &HeteroGraph) -> Vec<bool> {
        let n = graph.node_count();
        let mut sets: Vec<Vec<bool>> = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            let set = match step {
                Step::Class(ty) => graph.nodes().map(|v| graph.node_type(v) == *ty).collect(),
                Step::All(parts) => (0..n).map(|v| parts.iter().all(|&p| sets[p][v])).collect(),
                Step::Exists(etype, filler) => {
                    let inner = &sets[*filler];
                    let mut set = vec![false; n];
                    for e in graph.edges() {
                        if e.etype == *etype && inner[e.dst] {
                            set[e.src] = true;
                        }
                    }
                    set
                }
            };
            sets.push(set);
        }
        sets.pop().unwrap_or_default()
    }
}

fn compile(ce: &ClassExpression, schema: &Schema, steps: &mut Vec<Step>) -> Result<usize> {
    let step = match ce {
        ClassExpression::Class(name) => Step::Class(schema.require_node_type(name)?),
        ClassExpression::Intersection(ops) => {
            let parts = ops
                .iter()
                .map(|op| compile(op, schema, steps))
                .collect::<Result<Vec<_>>>()?;
            Step::All(parts)
        }
        ClassExpression::Existential { property, filler } => {
            let etype = schema.require_edge_type(property)?;
            let inner = compile(filler, schema, steps)?;
            Step::Exists(etype, inner)
        }
    };
    steps.push(step);
    Ok(steps.len() - 1)
}

/// Whether `node` fulfills `ce` in `graph`.
pub fn fulfills(graph: &HeteroGraph, node: NodeId, ce: &ClassExpression) -> Result<bool> {
    graph.check_node(node)?;
    Ok(CompiledExpression::new(ce, graph.schema())?.fulfills(graph, node))
}

/// Fulfillment flag for every node of `graph`.
pub fn extension(graph: &HeteroGraph, ce: &ClassExpression) -> Result<Vec<bool>> {
    Ok(CompiledExpression::new(ce, graph.schema())?.extension(graph))
}
