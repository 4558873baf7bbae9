use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{HeteroGraph, Schema};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    #[serde(rename = "type")]
    pub node_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: usize,
    pub etype: String,
    pub dst: usize,
}

/// On-disk graph document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub node_types: Vec<String>,
    pub edge_types: Vec<String>,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl GraphFile {
    pub fn from_graph(graph: &HeteroGraph) -> Result<Self> {
        if graph.has_untyped_nodes() {
            return Err(Error::MalformedGraph(
                "graph still contains untyped placeholder nodes".into(),
            ));
        }
        let schema = graph.schema();
        let nodes = graph
            .nodes()
            .map(|v| NodeRecord {
                id: v,
                node_type: graph.node_type_name(v).to_owned(),
                label: None,
                feature: None,
            })
            .collect();
        let edges = graph
            .edges()
            .iter()
            .map(|e| EdgeRecord {
                src: e.src,
                etype: schema
                    .edge_type_name(e.etype)
                    .expect("edge types are validated on insertion")
                    .to_owned(),
                dst: e.dst,
            })
            .collect();
        Ok(Self {
            node_types: schema.node_types().to_vec(),
            edge_types: schema.edge_types().to_vec(),
            nodes,
            edges,
        })
    }

    pub fn to_graph(&self) -> Result<HeteroGraph> {
        let schema = Arc::new(Schema::new(
            self.node_types.iter().cloned(),
            self.edge_types.iter().cloned(),
        )?);
        let mut graph = HeteroGraph::new(schema.clone());
        for (i, rec) in self.nodes.iter().enumerate() {
            if rec.id != i {
                return Err(Error::MalformedGraph(format!(
                    "node ids must be dense and ordered: expected {i}, found {}",
                    rec.id
                )));
            }
            graph.add_node(schema.require_node_type(&rec.node_type)?)?;
        }
        for rec in &self.edges {
            let et = schema.require_edge_type(&rec.etype)?;
            graph.add_edge(rec.src, et, rec.dst)?;
        }
        Ok(graph)
    }
}

impl HeteroGraph {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GraphFile::from_graph(self)?)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<GraphFile>(text)?.to_graph()
    }
}
