#![allow(dead_code)]

use std::sync::Arc;

use elx::graph::{HeteroGraph, NodeId, Schema};
use elx::ClassExpression;
use rand::Rng;

pub const CLASSES: [&str; 4] = ["A", "B", "C", "D"];

pub fn schema() -> Arc<Schema> {
    Arc::new(Schema::new(CLASSES, ["to"]).unwrap())
}

/// Normalized expression with at most `depth` nested restrictions and up to
/// two restrictions per level.
pub fn random_expression<R: Rng>(rng: &mut R, depth: usize, classes: &[&str]) -> ClassExpression {
    let class = classes[rng.gen_range(0..classes.len())];
    let count = if depth == 0 { 0 } else { rng.gen_range(0..=2) };
    let restrictions: Vec<_> = (0..count)
        .map(|_| ("to", random_expression(rng, depth - 1, classes)))
        .collect();
    ClassExpression::with_restrictions(class, restrictions)
}

pub fn random_graph<R: Rng>(rng: &mut R, schema: &Arc<Schema>, nodes: usize, edges: usize) -> HeteroGraph {
    let mut g = HeteroGraph::new(schema.clone());
    let types: Vec<_> = schema.node_type_ids().collect();
    for _ in 0..nodes {
        g.add_node(types[rng.gen_range(0..types.len())]).unwrap();
    }
    let to = schema.require_edge_type("to").unwrap();
    for _ in 0..edges {
        let (s, d) = (rng.gen_range(0..nodes), rng.gen_range(0..nodes));
        g.add_edge(s, to, d).unwrap();
    }
    g
}

/// Pattern node: required class plus `(property, child)` links.
struct Pattern {
    class: String,
    parent: Option<(usize, String)>,
}

fn flatten(ce: &ClassExpression, parent: Option<(usize, String)>, out: &mut Vec<Pattern>) {
    let me = out.len();
    let (class, restrictions): (String, Vec<(&str, &ClassExpression)>) = match ce {
        ClassExpression::Class(c) => (c.clone(), Vec::new()),
        ClassExpression::Intersection(ops) => {
            let class = ops
                .iter()
                .find_map(|o| match o {
                    ClassExpression::Class(c) => Some(c.clone()),
                    _ => None,
                })
                .expect("normalized intersection");
            let rs = ops
                .iter()
                .filter_map(|o| match o {
                    ClassExpression::Existential { property, filler } => Some((property.as_str(), &**filler)),
                    _ => None,
                })
                .collect();
            (class, rs)
        }
        ClassExpression::Existential { .. } => panic!("bare restriction"),
    };
    out.push(Pattern { class, parent });
    for (p, f) in restrictions {
        flatten(f, Some((me, p.to_owned())), out);
    }
}

/// Searches every assignment of pattern nodes to graph nodes, in pre-order,
/// for one that respects node classes and edges.
pub fn brute_force_fulfills(graph: &HeteroGraph, node: NodeId, ce: &ClassExpression) -> bool {
    let mut pattern = Vec::new();
    flatten(ce, None, &mut pattern);
    let mut assignment = vec![usize::MAX; pattern.len()];
    fn fits(graph: &HeteroGraph, p: &Pattern, v: NodeId, assignment: &[usize]) -> bool {
        if graph.node_type_name(v) != p.class {
            return false;
        }
        match &p.parent {
            None => true,
            Some((parent, property)) => graph
                .edges()
                .iter()
                .any(|e| e.src == assignment[*parent] && e.dst == v && graph.schema().edge_type_name(e.etype) == Some(property)),
        }
    }
    fn search(graph: &HeteroGraph, pattern: &[Pattern], i: usize, assignment: &mut Vec<usize>) -> bool {
        if i == pattern.len() {
            return true;
        }
        for v in graph.nodes() {
            if fits(graph, &pattern[i], v, assignment) {
                assignment[i] = v;
                if search(graph, pattern, i + 1, assignment) {
                    return true;
                }
            }
        }
        false
    }
    if !fits(graph, &pattern[0], node, &assignment) {
        return false;
    }
    assignment[0] = node;
    search(graph, &pattern, 1, &mut assignment)
}
