//! Two-layer heterogeneous GraphSAGE with a linear classification head.
//!
//! Every registered `(source type, edge type, destination type)` triple owns
//! a self matrix, a neighbor matrix and a bias per layer. A node of type `d`
//! receives, for each triple ending in `d`, the mean of its incoming
//! neighbor states through that triple times the neighbor matrix, plus its
//! own state times the self matrix, plus the bias; contributions are summed
//! over triples. ReLU follows the first layer only. Input features are the
//! constant 1.

use std::collections::HashMap;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{HeteroGraph, NodeId, Schema};

pub const LAYERS: usize = 2;
pub const INPUT_DIM: usize = 1;

/// Names of one registered type triple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub src: String,
    pub etype: String,
    pub dst: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeteroSageModel {
    hidden_dim: usize,
    num_labels: usize,
    node_types: Vec<String>,
    edge_types: Vec<String>,
    /// Type indices `(src, etype, dst)` into the name lists.
    triples: Vec<(usize, usize, usize)>,
    /// Per layer and triple `[self_w, neigh_w, bias]`, then head weight and
    /// head bias. Biases are stored as `1 × out` matrices.
    params: Vec<Array2<f64>>,
}

/// Graph structure resolved against a model's type universe.
pub(crate) struct Plan {
    n: usize,
    /// Graph nodes of each model node type.
    rows: Vec<Vec<NodeId>>,
    /// Per triple, per row of its destination type: incoming source nodes.
    neighbors: Vec<Vec<Vec<NodeId>>>,
}

pub(crate) struct LayerCache {
    input: Array2<f64>,
    aggs: Vec<Array2<f64>>,
    pre: Array2<f64>,
}

pub(crate) struct ForwardPass {
    layers: Vec<LayerCache>,
    hidden: Array2<f64>,
    pub(crate) logits: Array2<f64>,
}

fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-bound..=bound))
}

impl HeteroSageModel {
    /// Model over every `(src, etype, dst)` combination of `schema`, with
    /// weights drawn from `U(±1/√fan_in)`.
    pub fn new<R: Rng + ?Sized>(
        schema: &Schema,
        hidden_dim: usize,
        num_labels: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut triples = Vec::new();
        for s in 0..schema.node_types().len() {
            for e in 0..schema.edge_types().len() {
                for d in 0..schema.node_types().len() {
                    triples.push((s, e, d));
                }
            }
        }
        Self::with_triples(
            schema.node_types().to_vec(),
            schema.edge_types().to_vec(),
            triples,
            hidden_dim,
            num_labels,
            rng,
        )
    }

    pub(crate) fn with_triples<R: Rng + ?Sized>(
        node_types: Vec<String>,
        edge_types: Vec<String>,
        triples: Vec<(usize, usize, usize)>,
        hidden_dim: usize,
        num_labels: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if hidden_dim == 0 || num_labels == 0 {
            return Err(Error::InvalidArgument(
                "hidden dimension and label count must be positive".into(),
            ));
        }
        let mut params = Vec::with_capacity(LAYERS * triples.len() * 3 + 2);
        for layer in 0..LAYERS {
            let fan_in = if layer == 0 { INPUT_DIM } else { hidden_dim };
            let bound = 1.0 / (fan_in as f64).sqrt();
            for _ in &triples {
                params.push(uniform(fan_in, hidden_dim, bound, rng));
                params.push(uniform(fan_in, hidden_dim, bound, rng));
                params.push(uniform(1, hidden_dim, bound, rng));
            }
        }
        let bound = 1.0 / (hidden_dim as f64).sqrt();
        params.push(uniform(hidden_dim, num_labels, bound, rng));
        params.push(uniform(1, num_labels, bound, rng));
        let model = Self {
            hidden_dim,
            num_labels,
            node_types,
            edge_types,
            triples,
            params,
        };
        model.check_triples()?;
        Ok(model)
    }

    pub(crate) fn from_parts(
        hidden_dim: usize,
        num_labels: usize,
        node_types: Vec<String>,
        edge_types: Vec<String>,
        triples: Vec<(usize, usize, usize)>,
        params: Vec<Array2<f64>>,
    ) -> Result<Self> {
        let model = Self {
            hidden_dim,
            num_labels,
            node_types,
            edge_types,
            triples,
            params,
        };
        model.check_triples()?;
        model.check_shapes(&model.params)?;
        Ok(model)
    }

    fn check_triples(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for &(s, e, d) in &self.triples {
            if s >= self.node_types.len() || d >= self.node_types.len() || e >= self.edge_types.len()
            {
                return Err(Error::Shape(format!("triple ({s}, {e}, {d}) out of range")));
            }
            if !seen.insert((s, e, d)) {
                return Err(Error::Shape(format!("duplicate triple ({s}, {e}, {d})")));
            }
        }
        Ok(())
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn node_types(&self) -> &[String] {
        &self.node_types
    }

    pub fn edge_types(&self) -> &[String] {
        &self.edge_types
    }

    pub fn triples(&self) -> Vec<Triple> {
        self.triples
            .iter()
            .map(|&(s, e, d)| Triple {
                src: self.node_types[s].clone(),
                etype: self.edge_types[e].clone(),
                dst: self.node_types[d].clone(),
            })
            .collect()
    }

    #[cfg(test)]
    pub(crate) fn triple_indices(&self) -> &[(usize, usize, usize)] {
        &self.triples
    }

    /// Flat parameter list; see [`HeteroSageModel::param_index`] for layout.
    pub fn params(&self) -> &[Array2<f64>] {
        &self.params
    }

    pub fn set_params(&mut self, params: Vec<Array2<f64>>) -> Result<()> {
        self.check_shapes(&params)?;
        self.params = params;
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Array2::len).sum()
    }

    /// Index of `[self_w, neigh_w, bias]` (`slot` 0, 1, 2) for a layer and triple.
    pub fn param_index(&self, layer: usize, triple: usize, slot: usize) -> usize {
        (layer * self.triples.len() + triple) * 3 + slot
    }

    pub fn head_index(&self) -> usize {
        LAYERS * self.triples.len() * 3
    }

    pub(crate) fn expected_shapes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for layer in 0..LAYERS {
            let fan_in = if layer == 0 { INPUT_DIM } else { self.hidden_dim };
            for _ in &self.triples {
                out.push((fan_in, self.hidden_dim));
                out.push((fan_in, self.hidden_dim));
                out.push((1, self.hidden_dim));
            }
        }
        out.push((self.hidden_dim, self.num_labels));
        out.push((1, self.num_labels));
        out
    }

    fn check_shapes(&self, params: &[Array2<f64>]) -> Result<()> {
        let expected = self.expected_shapes();
        if params.len() != expected.len() {
            return Err(Error::Shape(format!(
                "expected {} parameter tensors, got {}",
                expected.len(),
                params.len()
            )));
        }
        for (i, (p, want)) in params.iter().zip(&expected).enumerate() {
            if p.dim() != *want {
                return Err(Error::Shape(format!(
                    "parameter {i}: expected {want:?}, got {:?}",
                    p.dim()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Shape(format!("parameter {i} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// Resolves `graph`'s types against the model.
    pub(crate) fn plan(&self, graph: &HeteroGraph) -> Result<Plan> {
        let schema = graph.schema();
        let node_map: Vec<Option<usize>> = schema
            .node_types()
            .iter()
            .map(|name| self.node_types.iter().position(|t| t == name))
            .collect();
        let edge_map: Vec<Option<usize>> = schema
            .edge_types()
            .iter()
            .map(|name| self.edge_types.iter().position(|t| t == name))
            .collect();
        let mut model_type = Vec::with_capacity(graph.node_count());
        let mut rows = vec![Vec::new(); self.node_types.len()];
        let mut pos = Vec::with_capacity(graph.node_count());
        for v in graph.nodes() {
            let ty = graph.node_type(v);
            let idx = node_map
                .get(ty.0 as usize)
                .copied()
                .flatten()
                .ok_or_else(|| {
                    Error::TypeUniverse(format!(
                        "node {v} has type {:?} unknown to the model",
                        graph.node_type_name(v)
                    ))
                })?;
            model_type.push(idx);
            pos.push(rows[idx].len());
            rows[idx].push(v);
        }
        let lookup: HashMap<(usize, usize, usize), usize> = self
            .triples
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, i))
            .collect();
        let mut neighbors: Vec<Vec<Vec<NodeId>>> = self
            .triples
            .iter()
            .map(|&(_, _, d)| vec![Vec::new(); rows[d].len()])
            .collect();
        for e in graph.edges() {
            let et = edge_map[e.etype.0 as usize].ok_or_else(|| {
                Error::TypeUniverse(format!(
                    "edge type {:?} unknown to the model",
                    schema.edge_type_name(e.etype)
                ))
            })?;
            let key = (model_type[e.src], et, model_type[e.dst]);
            let t = *lookup.get(&key).ok_or_else(|| {
                Error::TypeUniverse(format!(
                    "unregistered triple ({}, {}, {})",
                    self.node_types[key.0], self.edge_types[key.1], self.node_types[key.2]
                ))
            })?;
            neighbors[t][pos[e.dst]].push(e.src);
        }
        Ok(Plan {
            n: graph.node_count(),
            rows,
            neighbors,
        })
    }

    pub(crate) fn forward_plan(&self, plan: &Plan) -> ForwardPass {
        let mut h = Array2::from_elem((plan.n, INPUT_DIM), 1.0);
        let mut layers = Vec::with_capacity(LAYERS);
        for layer in 0..LAYERS {
            let in_dim = h.ncols();
            let mut z = Array2::<f64>::zeros((plan.n, self.hidden_dim));
            let mut aggs = Vec::with_capacity(self.triples.len());
            for (t, &(_, _, d)) in self.triples.iter().enumerate() {
                let rows = &plan.rows[d];
                let mut agg = Array2::<f64>::zeros((rows.len(), in_dim));
                for (i, nbrs) in plan.neighbors[t].iter().enumerate() {
                    if nbrs.is_empty() {
                        continue;
                    }
                    let mut row = agg.row_mut(i);
                    for &u in nbrs {
                        row += &h.row(u);
                    }
                    row /= nbrs.len() as f64;
                }
                if !rows.is_empty() {
                    let self_w = &self.params[self.param_index(layer, t, 0)];
                    let neigh_w = &self.params[self.param_index(layer, t, 1)];
                    let bias = self.params[self.param_index(layer, t, 2)].row(0);
                    let own = h.select(Axis(0), rows);
                    let contrib = agg.dot(neigh_w) + own.dot(self_w) + bias;
                    for (i, &v) in rows.iter().enumerate() {
                        let mut zr = z.row_mut(v);
                        zr += &contrib.row(i);
                    }
                }
                aggs.push(agg);
            }
            let next = if layer + 1 < LAYERS {
                z.mapv(|x| x.max(0.0))
            } else {
                z.clone()
            };
            layers.push(LayerCache {
                input: h,
                aggs,
                pre: z,
            });
            h = next;
        }
        let head = self.head_index();
        let logits = h.dot(&self.params[head]) + self.params[head + 1].row(0);
        ForwardPass {
            layers,
            hidden: h,
            logits,
        }
    }

    /// Raw logits for every node, `node_count × num_labels`.
    pub fn forward_all(&self, graph: &HeteroGraph) -> Result<Array2<f64>> {
        let plan = self.plan(graph)?;
        Ok(self.forward_plan(&plan).logits)
    }

    pub fn forward(&self, graph: &HeteroGraph, node: NodeId) -> Result<Array1<f64>> {
        graph.check_node(node)?;
        Ok(self.forward_all(graph)?.row(node).to_owned())
    }

    /// Parameter gradients given the loss gradient with respect to the logits.
    pub(crate) fn backward(&self, plan: &Plan, pass: &ForwardPass, dlogits: &Array2<f64>) -> Vec<Array2<f64>> {
        let mut grads: Vec<Array2<f64>> = self.params.iter().map(|p| Array2::zeros(p.dim())).collect();
        let head = self.head_index();
        grads[head] = pass.hidden.t().dot(dlogits);
        grads[head + 1] = dlogits.sum_axis(Axis(0)).insert_axis(Axis(0));
        let mut dh = dlogits.dot(&self.params[head].t());
        for layer in (0..LAYERS).rev() {
            let cache = &pass.layers[layer];
            let dz = if layer + 1 < LAYERS {
                let mut g = dh;
                g.zip_mut_with(&cache.pre, |g, &z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
                g
            } else {
                dh
            };
            let mut dinput = Array2::<f64>::zeros(cache.input.dim());
            for (t, &(_, _, d)) in self.triples.iter().enumerate() {
                let rows = &plan.rows[d];
                if rows.is_empty() {
                    continue;
                }
                let (si, ni, bi) = (
                    self.param_index(layer, t, 0),
                    self.param_index(layer, t, 1),
                    self.param_index(layer, t, 2),
                );
                let dzd = dz.select(Axis(0), rows);
                let own = cache.input.select(Axis(0), rows);
                let agg = &cache.aggs[t];
                grads[si] = own.t().dot(&dzd);
                grads[ni] = agg.t().dot(&dzd);
                grads[bi] = dzd.sum_axis(Axis(0)).insert_axis(Axis(0));
                if layer == 0 {
                    continue;
                }
                let down_self = dzd.dot(&self.params[si].t());
                let down_agg = dzd.dot(&self.params[ni].t());
                for (i, &v) in rows.iter().enumerate() {
                    let mut r = dinput.row_mut(v);
                    r += &down_self.row(i);
                }
                for (i, nbrs) in plan.neighbors[t].iter().enumerate() {
                    if nbrs.is_empty() {
                        continue;
                    }
                    let share = &down_agg.row(i) / nbrs.len() as f64;
                    for &u in nbrs {
                        let mut r = dinput.row_mut(u);
                        r += &share;
                    }
                }
            }
            dh = dinput;
        }
        grads
    }

    /// Mean cross-entropy over `(node, label)` targets and its parameter
    /// gradients.
    pub fn loss_and_gradients(
        &self,
        graph: &HeteroGraph,
        targets: &[(NodeId, usize)],
    ) -> Result<(f64, Vec<Array2<f64>>)> {
        let plan = self.plan(graph)?;
        let pass = self.forward_plan(&plan);
        let (loss, dlogits) = cross_entropy(&pass.logits, targets)?;
        Ok((loss, self.backward(&plan, &pass, &dlogits)))
    }

    pub fn loss(&self, graph: &HeteroGraph, targets: &[(NodeId, usize)]) -> Result<f64> {
        let logits = self.forward_all(graph)?;
        Ok(cross_entropy(&logits, targets)?.0)
    }
}

/// Mean softmax cross-entropy of the selected rows and its gradient with
/// respect to all logits.
pub(crate) fn cross_entropy(logits: &Array2<f64>, targets: &[(NodeId, usize)]) -> Result<(f64, Array2<f64>)> {
    if targets.is_empty() {
        return Err(Error::EmptySet("loss targets"));
    }
    let mut grad = Array2::zeros(logits.dim());
    let scale = 1.0 / targets.len() as f64;
    let mut loss = 0.0;
    for &(v, label) in targets {
        if v >= logits.nrows() || label >= logits.ncols() {
            return Err(Error::InvalidArgument(format!(
                "target ({v}, {label}) outside logits of shape {:?}",
                logits.dim()
            )));
        }
        let row = logits.row(v);
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let sum: f64 = row.iter().map(|&x| (x - max).exp()).sum();
        let log_z = max + sum.ln();
        loss += (log_z - row[label]) * scale;
        for (j, &x) in row.iter().enumerate() {
            let p = (x - log_z).exp();
            grad[[v, j]] += scale * (p - if j == label { 1.0 } else { 0.0 });
        }
    }
    Ok((loss, grad))
}
