//! JSON model files.
//!
//! ```text
//! {hidden_dim, node_types, edge_types,
//!  layers: [{triples: [{src, etype, dst, self_w, neigh_w, bias}]}],
//!  head: {w, bias}}
//! ```
//! Matrices are row-major nested arrays. Unknown fields are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::model::{HeteroSageModel, LAYERS};

#[derive(Serialize, Deserialize)]
struct TripleRecord {
    src: String,
    etype: String,
    dst: String,
    self_w: Vec<Vec<f64>>,
    neigh_w: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LayerRecord {
    triples: Vec<TripleRecord>,
}

#[derive(Serialize, Deserialize)]
struct HeadRecord {
    w: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    hidden_dim: usize,
    node_types: Vec<String>,
    edge_types: Vec<String>,
    layers: Vec<LayerRecord>,
    head: HeadRecord,
}

fn to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(rows: &[Vec<f64>], what: &str) -> Result<Array2<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Shape(format!("{what}: ragged matrix")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat).map_err(|e| Error::Shape(format!("{what}: {e}")))
}

fn row_vector(v: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((1, v.len()), v.to_vec()).expect("1 × len always fits")
}

impl HeteroSageModel {
    pub fn to_json(&self) -> Result<String> {
        let names = self.triples();
        let layers = (0..LAYERS)
            .map(|layer| LayerRecord {
                triples: names
                    .iter()
                    .enumerate()
                    .map(|(t, name)| TripleRecord {
                        src: name.src.clone(),
                        etype: name.etype.clone(),
                        dst: name.dst.clone(),
                        self_w: to_rows(&self.params()[self.param_index(layer, t, 0)]),
                        neigh_w: to_rows(&self.params()[self.param_index(layer, t, 1)]),
                        bias: self.params()[self.param_index(layer, t, 2)].row(0).to_vec(),
                    })
                    .collect(),
            })
            .collect();
        let head = self.head_index();
        let file = ModelFile {
            hidden_dim: self.hidden_dim(),
            node_types: self.node_types().to_vec(),
            edge_types: self.edge_types().to_vec(),
            layers,
            head: HeadRecord {
                w: to_rows(&self.params()[head]),
                bias: self.params()[head + 1].row(0).to_vec(),
            },
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.layers.len() != LAYERS {
            return Err(Error::Shape(format!(
                "expected {LAYERS} layers, found {}",
                file.layers.len()
            )));
        }
        let index = |names: &[String], name: &str, kind: &str| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Shape(format!("triple references unknown {kind} {name:?}")))
        };
        // triple order follows the first layer
        let mut triples = Vec::new();
        for rec in &file.layers[0].triples {
            triples.push((
                index(&file.node_types, &rec.src, "node type")?,
                index(&file.edge_types, &rec.etype, "edge type")?,
                index(&file.node_types, &rec.dst, "node type")?,
            ));
        }
        let mut params = Vec::new();
        for (layer, rec) in file.layers.iter().enumerate() {
            let mut by_key: BTreeMap<(&str, &str, &str), &TripleRecord> = BTreeMap::new();
            for t in &rec.triples {
                if by_key.insert((&t.src, &t.etype, &t.dst), t).is_some() {
                    return Err(Error::Shape(format!(
                        "layer {layer}: duplicate triple ({}, {}, {})",
                        t.src, t.etype, t.dst
                    )));
                }
            }
            if by_key.len() != triples.len() {
                return Err(Error::Shape(format!(
                    "layer {layer} has {} triples, layer 0 has {}",
                    by_key.len(),
                    triples.len()
                )));
            }
            for &(s, e, d) in &triples {
                let key = (
                    file.node_types[s].as_str(),
                    file.edge_types[e].as_str(),
                    file.node_types[d].as_str(),
                );
                let t = by_key.get(&key).ok_or_else(|| {
                    Error::Shape(format!("layer {layer} is missing triple {key:?}"))
                })?;
                params.push(from_rows(&t.self_w, "self_w")?);
                params.push(from_rows(&t.neigh_w, "neigh_w")?);
                params.push(row_vector(&t.bias));
            }
        }
        params.push(from_rows(&file.head.w, "head.w")?);
        params.push(row_vector(&file.head.bias));
        let num_labels = file.head.bias.len();
        HeteroSageModel::from_parts(
            file.hidden_dim,
            num_labels,
            file.node_types,
            file.edge_types,
            triples,
            params,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
