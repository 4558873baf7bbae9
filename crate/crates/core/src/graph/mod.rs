//! Directed, typed multigraph.
//!
//! Node and edge ids are dense and append-only. Every node carries exactly one
//! node type and every edge exactly one edge type; parallel edges are allowed.
//! Type names live in a shared [`Schema`] so that graphs synthesized for
//! scoring and the datasets the model was trained on agree on type ids.

mod json;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use json::{EdgeRecord, GraphFile, NodeRecord};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeTypeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeTypeId(pub u32);

impl NodeTypeId {
    /// Reserved type of nodes created during graph synthesis whose type is
    /// only fixed when they are identified with a typed node.
    pub const UNTYPED: NodeTypeId = NodeTypeId(u32::MAX);

    pub fn is_untyped(self) -> bool {
        self == Self::UNTYPED
    }
}

pub const UNTYPED_NAME: &str = "⊥untyped";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub etype: EdgeTypeId,
    pub dst: NodeId,
}

/// Bijections between type ids and their unique names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Schema {
    node_types: Vec<String>,
    edge_types: Vec<String>,
}

impl Schema {
    pub fn new<N, E, S, T>(node_types: N, edge_types: E) -> Result<Self>
    where
        N: IntoIterator<Item = S>,
        E: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let node_types: Vec<String> = node_types.into_iter().map(Into::into).collect();
        let edge_types: Vec<String> = edge_types.into_iter().map(Into::into).collect();
        for names in [&node_types, &edge_types] {
            for (i, name) in names.iter().enumerate() {
                if names[..i].contains(name) || name == UNTYPED_NAME {
                    return Err(Error::DuplicateTypeName(name.clone()));
                }
            }
        }
        Ok(Self {
            node_types,
            edge_types,
        })
    }

    pub fn node_types(&self) -> &[String] {
        &self.node_types
    }

    pub fn edge_types(&self) -> &[String] {
        &self.edge_types
    }

    pub fn node_type_id(&self, name: &str) -> Option<NodeTypeId> {
        self.node_types
            .iter()
            .position(|n| n == name)
            .map(|i| NodeTypeId(i as u32))
    }

    pub fn edge_type_id(&self, name: &str) -> Option<EdgeTypeId> {
        self.edge_types
            .iter()
            .position(|n| n == name)
            .map(|i| EdgeTypeId(i as u32))
    }

    pub fn require_node_type(&self, name: &str) -> Result<NodeTypeId> {
        self.node_type_id(name)
            .ok_or_else(|| Error::UnknownNodeType(name.to_owned()))
    }

    pub fn require_edge_type(&self, name: &str) -> Result<EdgeTypeId> {
        self.edge_type_id(name)
            .ok_or_else(|| Error::UnknownEdgeType(name.to_owned()))
    }

    pub fn node_type_name(&self, id: NodeTypeId) -> Option<&str> {
        if id.is_untyped() {
            return Some(UNTYPED_NAME);
        }
        self.node_types.get(id.0 as usize).map(String::as_str)
    }

    pub fn edge_type_name(&self, id: EdgeTypeId) -> Option<&str> {
        self.edge_types.get(id.0 as usize).map(String::as_str)
    }

    pub fn node_type_ids(&self) -> impl Iterator<Item = NodeTypeId> {
        (0..self.node_types.len() as u32).map(NodeTypeId)
    }

    pub fn edge_type_ids(&self) -> impl Iterator<Item = EdgeTypeId> {
        (0..self.edge_types.len() as u32).map(EdgeTypeId)
    }

    fn check_node_type(&self, id: NodeTypeId) -> Result<()> {
        if id.is_untyped() || (id.0 as usize) < self.node_types.len() {
            Ok(())
        } else {
            Err(Error::UnknownNodeTypeId(id.0))
        }
    }

    fn check_edge_type(&self, id: EdgeTypeId) -> Result<()> {
        if (id.0 as usize) < self.edge_types.len() {
            Ok(())
        } else {
            Err(Error::UnknownEdgeTypeId(id.0))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeteroGraph {
    schema: Arc<Schema>,
    node_types: Vec<NodeTypeId>,
    edges: Vec<Edge>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
}

impl HeteroGraph {
    pub fn new(schema: Arc<Schema>) -> Self {
        Self {
            schema,
            node_types: Vec::new(),
            edges: Vec::new(),
            out_adj: Vec::new(),
            in_adj: Vec::new(),
        }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn node_count(&self) -> usize {
        self.node_types.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_types.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_type(&self, node: NodeId) -> NodeTypeId {
        self.node_types[node]
    }

    pub fn node_type_name(&self, node: NodeId) -> &str {
        self.schema
            .node_type_name(self.node_types[node])
            .expect("node types are validated on insertion")
    }

    pub fn contains_node(&self, node: NodeId) -> bool {
        node < self.node_types.len()
    }

    pub fn check_node(&self, node: NodeId) -> Result<()> {
        if self.contains_node(node) {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                node,
                count: self.node_count(),
            })
        }
    }

    pub fn nodes_of_type(&self, ty: NodeTypeId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(move |&v| self.node_types[v] == ty)
    }

    pub fn has_untyped_nodes(&self) -> bool {
        self.node_types.iter().any(|t| t.is_untyped())
    }

    pub fn add_node(&mut self, ty: NodeTypeId) -> Result<NodeId> {
        if ty.is_untyped() {
            return Err(Error::UnknownNodeTypeId(ty.0));
        }
        self.schema.check_node_type(ty)?;
        Ok(self.push_node(ty))
    }

    /// Adds a node carrying the reserved placeholder type.
    pub fn add_untyped_node(&mut self) -> NodeId {
        self.push_node(NodeTypeId::UNTYPED)
    }

    fn push_node(&mut self, ty: NodeTypeId) -> NodeId {
        self.node_types.push(ty);
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        self.node_types.len() - 1
    }

    pub fn set_node_type(&mut self, node: NodeId, ty: NodeTypeId) -> Result<()> {
        self.check_node(node)?;
        self.schema.check_node_type(ty)?;
        self.node_types[node] = ty;
        Ok(())
    }

    pub fn add_edge(&mut self, src: NodeId, etype: EdgeTypeId, dst: NodeId) -> Result<EdgeId> {
        self.check_node(src)?;
        self.check_node(dst)?;
        self.schema.check_edge_type(etype)?;
        let id = self.edges.len();
        self.edges.push(Edge { src, etype, dst });
        self.out_adj[src].push(id);
        self.in_adj[dst].push(id);
        Ok(id)
    }

    /// Stores a logical undirected edge as two directed edges.
    pub fn add_edge_both(
        &mut self,
        a: NodeId,
        etype: EdgeTypeId,
        b: NodeId,
    ) -> Result<(EdgeId, EdgeId)> {
        let forward = self.add_edge(a, etype, b)?;
        let backward = self.add_edge(b, etype, a)?;
        Ok((forward, backward))
    }

    pub fn out_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.out_adj[node].iter().map(move |&e| &self.edges[e])
    }

    pub fn in_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.in_adj[node].iter().map(move |&e| &self.edges[e])
    }

    /// Targets of `node`'s outgoing edges of type `etype`, in edge order.
    pub fn out_neighbors(&self, node: NodeId, etype: EdgeTypeId) -> Vec<NodeId> {
        self.out_edges(node)
            .filter(|e| e.etype == etype)
            .map(|e| e.dst)
            .collect()
    }

    /// All distinct neighbors regardless of direction and edge type.
    pub fn undirected_neighbors(&self, node: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .out_edges(node)
            .map(|e| e.dst)
            .chain(self.in_edges(node).map(|e| e.src))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Glues `other` onto this graph, identifying `node_in_self` with
    /// `node_in_other`. The identified node keeps `node_in_self`'s id; the
    /// remaining nodes of `other` are appended in order.
    pub fn merge_on_nodes(
        &self,
        other: &HeteroGraph,
        node_in_self: NodeId,
        node_in_other: NodeId,
    ) -> Result<(HeteroGraph, NodeId)> {
        if self.schema != other.schema {
            return Err(Error::SchemaMismatch);
        }
        self.check_node(node_in_self)?;
        other.check_node(node_in_other)?;
        let mut merged = self.clone();
        let ty = self.identified_type(
            self.node_types[node_in_self],
            other.node_types[node_in_other],
        )?;
        merged.node_types[node_in_self] = ty;

        let mut map = vec![0; other.node_count()];
        for v in other.nodes() {
            map[v] = if v == node_in_other {
                node_in_self
            } else {
                merged.push_node(other.node_types[v])
            };
        }
        for e in &other.edges {
            merged.add_edge(map[e.src], e.etype, map[e.dst])?;
        }
        Ok((merged, node_in_self))
    }

    /// Identifies the most recently added node with `keep` in place, moving
    /// its edges over. Ids stay dense because only the last node is removed.
    pub(crate) fn absorb_last_node(&mut self, keep: NodeId) -> Result<()> {
        let last = self
            .node_count()
            .checked_sub(1)
            .ok_or_else(|| Error::Internal("absorb on empty graph".into()))?;
        if keep >= last {
            return Err(Error::Internal(format!(
                "cannot absorb node {last} into {keep}"
            )));
        }
        let ty = self.identified_type(self.node_types[keep], self.node_types[last])?;
        self.node_types[keep] = ty;
        self.node_types.pop();
        let outs = self.out_adj.pop().unwrap_or_default();
        let ins = self.in_adj.pop().unwrap_or_default();
        for &e in &outs {
            self.edges[e].src = keep;
        }
        for &e in &ins {
            self.edges[e].dst = keep;
        }
        self.out_adj[keep].extend(outs);
        self.out_adj[keep].sort_unstable();
        self.in_adj[keep].extend(ins);
        self.in_adj[keep].sort_unstable();
        Ok(())
    }

    fn identified_type(&self, a: NodeTypeId, b: NodeTypeId) -> Result<NodeTypeId> {
        match (a.is_untyped(), b.is_untyped()) {
            (true, _) => Ok(b),
            (_, true) => Ok(a),
            _ if a == b => Ok(a),
            _ => Err(Error::TypeConflict(
                self.schema.node_type_name(a).unwrap_or("?").to_owned(),
                self.schema.node_type_name(b).unwrap_or("?").to_owned(),
            )),
        }
    }

    /// Copy without any edge whose endpoint types are `{type_a, type_b}`, in
    /// either direction.
    pub fn remove_edges_between_types(
        &self,
        type_a: NodeTypeId,
        type_b: NodeTypeId,
    ) -> Result<HeteroGraph> {
        for t in [type_a, type_b] {
            if t.is_untyped() {
                return Err(Error::UnknownNodeTypeId(t.0));
            }
            self.schema.check_node_type(t)?;
        }
        let mut out = HeteroGraph::new(self.schema.clone());
        for v in self.nodes() {
            out.push_node(self.node_types[v]);
        }
        for e in &self.edges {
            let (s, d) = (self.node_types[e.src], self.node_types[e.dst]);
            let hit = (s == type_a && d == type_b) || (s == type_b && d == type_a);
            if !hit {
                out.add_edge(e.src, e.etype, e.dst)?;
            }
        }
        Ok(out)
    }

    /// Subgraph induced by `keep`, relabelled densely in the order given.
    /// Returns the graph and the old-to-new id map.
    pub fn induced_subgraph(&self, keep: &[NodeId]) -> Result<(HeteroGraph, Vec<Option<NodeId>>)> {
        let mut map = vec![None; self.node_count()];
        let mut out = HeteroGraph::new(self.schema.clone());
        for &v in keep {
            self.check_node(v)?;
            if map[v].is_none() {
                map[v] = Some(out.push_node(self.node_types[v]));
            }
        }
        for e in &self.edges {
            if let (Some(s), Some(d)) = (map[e.src], map[e.dst]) {
                out.add_edge(s, e.etype, d)?;
            }
        }
        Ok((out, map))
    }
}

impl fmt::Display for HeteroGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HeteroGraph({} nodes, {} edges)", self.node_count(), self.edge_count())
    }
}
