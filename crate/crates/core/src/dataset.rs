//! The Hetero-BA-Shapes node-classification dataset.
//!
//! A Barabási–Albert base graph receives typed house motifs, each attached
//! by a single edge. Base nodes are typed A, B, C with probability 0.2 each
//! and D with 0.4; motif nodes are typed by position (roof A, middle B,
//! bottom C). Every B node is labeled, 1 iff it belongs to a motif. Logical
//! edges are stored in both directions with edge type `to`.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeTypeId, GraphFile, HeteroGraph, NodeId, NodeTypeId, Schema};
use crate::seed::rng_for;

pub const NODE_TYPES: [&str; 4] = ["A", "B", "C", "D"];
pub const EDGE_TYPE: &str = "to";
/// The labeled node type.
pub const ANCHOR_TYPE: &str = "B";

const TYPE_WEIGHTS: [f64; 4] = [0.2, 0.2, 0.2, 0.4];

/// Logical motif edges over `[top, middle₀, middle₁, bottom₀, bottom₁]`.
pub const HOUSE_EDGES: [(usize, usize); 6] = [(3, 4), (3, 1), (4, 2), (1, 2), (1, 0), (2, 0)];
pub const HOUSE_TYPES: [&str; 5] = ["A", "B", "B", "C", "C"];

pub fn house_schema() -> Arc<Schema> {
    Arc::new(Schema::new(NODE_TYPES, [EDGE_TYPE]).expect("fixed names are distinct"))
}

fn type_id(schema: &Schema, name: &str) -> NodeTypeId {
    schema.node_type_id(name).expect("house schema type")
}

fn to_edge(graph: &HeteroGraph) -> Result<EdgeTypeId> {
    graph.schema().require_edge_type(EDGE_TYPE)
}

/// Preferential-attachment graph of `num_nodes` nodes, all typed D.
///
/// Starts from a clique of `edges_per_node + 1` nodes; each later node links
/// to `edges_per_node` distinct earlier nodes drawn proportionally to degree.
pub fn generate_ba<R: Rng + ?Sized>(num_nodes: usize, edges_per_node: usize, rng: &mut R) -> Result<HeteroGraph> {
    if edges_per_node == 0 || num_nodes <= edges_per_node {
        return Err(Error::InvalidArgument(format!(
            "need nodes > edges per node >= 1, got {num_nodes} and {edges_per_node}"
        )));
    }
    let schema = house_schema();
    let d = type_id(&schema, "D");
    let mut graph = HeteroGraph::new(schema);
    let to = to_edge(&graph)?;
    // one entry per edge endpoint: sampling from it is degree-proportional
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * edges_per_node * num_nodes);
    for _ in 0..=edges_per_node {
        graph.add_node(d)?;
    }
    for a in 0..=edges_per_node {
        for b in a + 1..=edges_per_node {
            graph.add_edge_both(a, to, b)?;
            endpoints.extend([a, b]);
        }
    }
    let mut targets = Vec::with_capacity(edges_per_node);
    for _ in edges_per_node + 1..num_nodes {
        targets.clear();
        while targets.len() < edges_per_node {
            let t = *endpoints.choose(rng).expect("seed clique has edges");
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        let v = graph.add_node(d)?;
        for &t in &targets {
            graph.add_edge_both(v, to, t)?;
            endpoints.extend([v, t]);
        }
    }
    Ok(graph)
}

/// Appends `count` house motifs, each linked by one edge from a uniform motif
/// node to a uniform node among those present before the first motif.
/// Returns the motif node ids as `[top, middle₀, middle₁, bottom₀, bottom₁]`.
pub fn attach_house_motifs<R: Rng + ?Sized>(
    graph: &mut HeteroGraph,
    count: usize,
    rng: &mut R,
) -> Result<Vec<[NodeId; 5]>> {
    let base = graph.node_count();
    if base == 0 {
        return Err(Error::InvalidArgument("cannot attach motifs to an empty graph".into()));
    }
    let schema = graph.schema().clone();
    let to = to_edge(graph)?;
    let mut motifs = Vec::with_capacity(count);
    for _ in 0..count {
        let mut nodes = [0; 5];
        for (slot, name) in HOUSE_TYPES.iter().enumerate() {
            nodes[slot] = graph.add_node(schema.require_node_type(name)?)?;
        }
        for (a, b) in HOUSE_EDGES {
            graph.add_edge_both(nodes[a], to, nodes[b])?;
        }
        let inside = nodes[rng.gen_range(0..5)];
        let outside = rng.gen_range(0..base);
        graph.add_edge_both(inside, to, outside)?;
        motifs.push(nodes);
    }
    Ok(motifs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<NodeId>,
    pub val: Vec<NodeId>,
    pub test: Vec<NodeId>,
}

impl Splits {
    pub fn get(&self, split: Split) -> &[NodeId] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub nodes: usize,
    pub motifs: usize,
    pub m_attach: usize,
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            nodes: 10_000,
            motifs: 1000,
            m_attach: 3,
            fractions: [0.40, 0.24, 0.36],
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub graph: HeteroGraph,
    /// Label of every anchor-type node, `None` elsewhere.
    pub labels: Vec<Option<u8>>,
    /// Motif index of each node, `None` for base-graph nodes.
    pub motif_of: Vec<Option<usize>>,
    pub motifs: Vec<[NodeId; 5]>,
    pub splits: Splits,
    pub config: Option<DatasetConfig>,
}

/// Per-node label (anchor type only) and motif index.
pub type NodeAnnotations = (Vec<Option<u8>>, Vec<Option<usize>>);

/// Types the first `base_count` nodes at random and labels every anchor-type
/// node by motif membership. Motif nodes keep their positional types.
pub fn assign_types_and_labels<R: Rng + ?Sized>(
    graph: &mut HeteroGraph,
    base_count: usize,
    motifs: &[[NodeId; 5]],
    rng: &mut R,
) -> Result<NodeAnnotations> {
    if base_count > graph.node_count() {
        return Err(Error::NodeOutOfRange {
            node: base_count,
            count: graph.node_count(),
        });
    }
    let schema = graph.schema().clone();
    let ids: Vec<NodeTypeId> = NODE_TYPES.iter().map(|n| type_id(&schema, n)).collect();
    let dist = WeightedIndex::new(TYPE_WEIGHTS).expect("positive weights");
    for v in 0..base_count {
        graph.set_node_type(v, ids[dist.sample(rng)])?;
    }
    let mut motif_of = vec![None; graph.node_count()];
    for (i, nodes) in motifs.iter().enumerate() {
        for &v in nodes {
            graph.check_node(v)?;
            motif_of[v] = Some(i);
        }
    }
    let anchor = type_id(&schema, ANCHOR_TYPE);
    let labels = graph
        .nodes()
        .map(|v| (graph.node_type(v) == anchor).then(|| u8::from(motif_of[v].is_some())))
        .collect();
    Ok((labels, motif_of))
}

/// Random partition of the labeled nodes, stratified by label. Split sizes
/// are apportioned cumulatively across label classes, so totals are the
/// rounded fractions of the whole set and every class is within one node of
/// its proportional share.
pub fn make_splits<R: Rng + ?Sized>(labels: &[Option<u8>], fractions: [f64; 3], rng: &mut R) -> Result<Splits> {
    if fractions.iter().any(|f| !f.is_finite() || *f < 0.0) || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split fractions must be non-negative and sum to 1, got {fractions:?}"
        )));
    }
    let classes: BTreeSet<u8> = labels.iter().flatten().copied().collect();
    let total = labels.iter().flatten().count();
    let mut splits = Splits::default();
    let mut before = 0usize;
    for class in classes {
        let mut members: Vec<NodeId> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(class))
            .map(|(v, _)| v)
            .collect();
        members.shuffle(rng);
        let after = before + members.len();
        let quota = |count: usize, frac: f64| (count as f64 * frac).round() as usize;
        let n_train = quota(after, fractions[0]) - quota(before, fractions[0]);
        let n_val = (quota(after, fractions[1]) - quota(before, fractions[1])).min(members.len() - n_train);
        splits.train.extend(&members[..n_train]);
        splits.val.extend(&members[n_train..n_train + n_val]);
        splits.test.extend(&members[n_train + n_val..]);
        before = after;
    }
    debug_assert_eq!(before, total);
    for part in [&mut splits.train, &mut splits.val, &mut splits.test] {
        part.sort_unstable();
    }
    Ok(splits)
}

/// Runs the whole generator; each stage draws from its own seeded stream.
pub fn generate(config: &DatasetConfig) -> Result<LabeledDataset> {
    let mut graph = generate_ba(config.nodes, config.m_attach, &mut rng_for(config.seed, &[0]))?;
    let motifs = attach_house_motifs(&mut graph, config.motifs, &mut rng_for(config.seed, &[1]))?;
    let (labels, motif_of) =
        assign_types_and_labels(&mut graph, config.nodes, &motifs, &mut rng_for(config.seed, &[2]))?;
    let splits = make_splits(&labels, config.fractions, &mut rng_for(config.seed, &[3]))?;
    Ok(LabeledDataset {
        graph,
        labels,
        motif_of,
        motifs,
        splits,
        config: Some(config.clone()),
    })
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    #[serde(flatten)]
    graph: GraphFile,
    splits: Splits,
    motifs: Vec<[NodeId; 5]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<DatasetConfig>,
}

impl LabeledDataset {
    /// Anchor-type node count.
    pub fn labeled_count(&self) -> usize {
        self.labels.iter().flatten().count()
    }

    pub fn label(&self, node: NodeId) -> Option<u8> {
        self.labels.get(node).copied().flatten()
    }

    /// `(node, label)` pairs of one split.
    pub fn targets(&self, split: Split) -> Vec<(NodeId, usize)> {
        self.splits
            .get(split)
            .iter()
            .map(|&v| (v, usize::from(self.labels[v].expect("split nodes are labeled"))))
            .collect()
    }

    /// All anchor-type nodes in id order.
    pub fn anchor_nodes(&self) -> Vec<NodeId> {
        self.graph
            .nodes()
            .filter(|&v| self.labels[v].is_some())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut graph = GraphFile::from_graph(&self.graph)?;
        for rec in &mut graph.nodes {
            rec.label = self.labels[rec.id].map(i64::from);
            rec.feature = Some(1.0);
        }
        let file = DatasetFile {
            graph,
            splits: self.splits.clone(),
            motifs: self.motifs.clone(),
            config: self.config.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(text)?;
        let graph = file.graph.to_graph()?;
        let mut labels = Vec::with_capacity(graph.node_count());
        for rec in &file.graph.nodes {
            labels.push(match rec.label {
                None => None,
                Some(l @ 0..=1) => Some(l as u8),
                Some(l) => {
                    return Err(Error::MalformedGraph(format!("node {}: label {l} is not 0 or 1", rec.id)))
                }
            });
        }
        let mut motif_of = vec![None; graph.node_count()];
        for (i, nodes) in file.motifs.iter().enumerate() {
            for &v in nodes {
                graph.check_node(v)?;
                motif_of[v] = Some(i);
            }
        }
        let mut seen = vec![false; graph.node_count()];
        for &v in file.splits.train.iter().chain(&file.splits.val).chain(&file.splits.test) {
            graph.check_node(v)?;
            if labels[v].is_none() {
                return Err(Error::MalformedGraph(format!("split node {v} has no label")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::MalformedGraph(format!("node {v} appears in two splits")));
            }
        }
        Ok(Self {
            graph,
            labels,
            motif_of,
            motifs: file.motifs,
            splits: file.splits,
            config: file.config,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::class_expr::{fulfills, ClassExpression};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn degrees(g: &HeteroGraph) -> Vec<usize> {
        g.nodes().map(|v| g.out_edges(v).count()).collect()
    }

    fn connected(g: &HeteroGraph) -> bool {
        let mut seen = vec![false; g.node_count()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in g.undirected_neighbors(v) {
                if !std::mem::replace(&mut seen[w], true) {
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    #[test]
    fn ba_seed_clique_only() {
        let g = generate_ba(4, 3, &mut rng(0)).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 12);
        for a in 0..4 {
            let mut n = g.out_neighbors(a, EdgeTypeId(0));
            n.sort_unstable();
            let expect: Vec<usize> = (0..4).filter(|&b| b != a).collect();
            assert_eq!(n, expect);
        }
    }

    #[test]
    fn ba_edge_count_closed_form_and_simple() {
        for (n, m) in [(200, 3), (57, 1), (90, 5)] {
            let g = generate_ba(n, m, &mut rng(n as u64)).unwrap();
            assert_eq!(g.edge_count(), 2 * (m * (m + 1) / 2 + m * (n - m - 1)));
            assert!(connected(&g));
            for v in g.nodes() {
                let nb = g.out_neighbors(v, EdgeTypeId(0));
                let distinct: BTreeSet<_> = nb.iter().collect();
                assert_eq!(distinct.len(), nb.len(), "parallel edge at {v}");
                assert!(!nb.contains(&v));
            }
        }
    }

    #[test]
    fn ba_invalid_sizes() {
        assert!(generate_ba(3, 3, &mut rng(0)).is_err());
        assert!(generate_ba(10, 0, &mut rng(0)).is_err());
    }

    #[test]
    fn ba_heavy_tailed() {
        for seed in 0..5 {
            let g = generate_ba(10_000, 3, &mut rng(seed)).unwrap();
            assert_eq!(g.edge_count(), 2 * (6 + 3 * 9_996));
            let mut d = degrees(&g);
            d.sort_unstable();
            let median = d[d.len() / 2];
            assert!(*d.last().unwrap() > 10 * median, "max {} median {median}", d.last().unwrap());
        }
    }

    #[test]
    fn one_motif_structure() {
        let mut g = generate_ba(10, 3, &mut rng(1)).unwrap();
        let (n0, e0) = (g.node_count(), g.edge_count());
        let motifs = attach_house_motifs(&mut g, 1, &mut rng(2)).unwrap();
        assert_eq!(g.node_count(), n0 + 5);
        assert_eq!(g.edge_count(), e0 + 14);
        let [top, m0, m1, b0, b1] = motifs[0];
        let name = |v| g.node_type_name(v).to_owned();
        assert_eq!(
            [name(top), name(m0), name(m1), name(b0), name(b1)],
            ["A", "B", "B", "C", "C"].map(String::from)
        );
        let ce = ClassExpression::with_restrictions(
            "B",
            [("to", ClassExpression::class("A")), ("to", ClassExpression::class("C")), ("to", ClassExpression::class("B"))],
        );
        assert!(fulfills(&g, m0, &ce).unwrap());
        assert!(fulfills(&g, m1, &ce).unwrap());
        // a middle node sees the roof, the other middle and one bottom
        let mut nb = g.out_neighbors(m0, EdgeTypeId(0));
        nb.retain(|&w| w >= n0);
        nb.sort_unstable();
        assert_eq!(nb, vec![top, m1, b0]);
        let to_c = ClassExpression::with_restrictions(
            "B",
            [("to", ClassExpression::with_restrictions("A", [("to", ClassExpression::class("C"))]))],
        );
        // base nodes are still all D here, so the roof has no C neighbor
        assert!(!fulfills(&g, m0, &to_c).unwrap());
    }

    #[test]
    fn ablation_counts_on_motif() {
        let s = house_schema();
        let mut g = HeteroGraph::new(s.clone());
        g.add_node(type_id(&s, "D")).unwrap();
        attach_house_motifs(&mut g, 1, &mut rng(0)).unwrap();
        // the attachment edge touches D, so motif-internal pairs are exact
        let t = |n| type_id(&s, n);
        let total = g.edge_count();
        assert_eq!(g.remove_edges_between_types(t("B"), t("B")).unwrap().edge_count(), total - 2);
        assert_eq!(g.remove_edges_between_types(t("A"), t("B")).unwrap().edge_count(), total - 4);
        assert_eq!(g.remove_edges_between_types(t("A"), t("A")).unwrap().edge_count(), total);
    }

    #[test]
    fn motifs_need_a_base() {
        let mut g = HeteroGraph::new(house_schema());
        assert!(attach_house_motifs(&mut g, 1, &mut rng(0)).is_err());
    }

    #[test]
    fn full_scale_types_and_labels() {
        let ds = generate(&DatasetConfig { seed: 3, ..DatasetConfig::default() }).unwrap();
        let g = &ds.graph;
        assert_eq!(g.node_count(), 15_000);
        assert!(connected(g));
        let mut counts = [0usize; 4];
        for v in 0..10_000 {
            counts[NODE_TYPES.iter().position(|n| *n == g.node_type_name(v)).unwrap()] += 1;
        }
        for (c, p) in counts.iter().zip(TYPE_WEIGHTS) {
            let sigma = (10_000.0 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - 10_000.0 * p).abs() < 3.0 * sigma, "{counts:?}");
        }
        for nodes in &ds.motifs {
            assert_eq!(g.node_type_name(nodes[0]), "A");
        }
        for v in g.nodes() {
            let is_b = g.node_type_name(v) == "B";
            assert_eq!(ds.labels[v].is_some(), is_b);
            if is_b {
                assert_eq!(ds.labels[v], Some(u8::from(v >= 10_000)));
            }
        }
        let positive = ds.labels.iter().flatten().filter(|&&l| l == 1).count();
        assert_eq!(positive, 2000);
        let share = positive as f64 / ds.labeled_count() as f64;
        assert!((0.45..0.55).contains(&share), "{share}");
    }

    #[test]
    fn split_sizes_and_stratification() {
        // 4000 labeled nodes, 1500 positive
        let labels: Vec<Option<u8>> = (0..5000)
            .map(|v| match v % 5 {
                0 => None,
                1 | 2 => Some(0),
                3 => Some(u8::from(v % 2 == 0)),
                _ => Some(1),
            })
            .collect();
        let s = make_splits(&labels, [0.40, 0.24, 0.36], &mut rng(5)).unwrap();
        assert!(s.train.len().abs_diff(1600) <= 1);
        assert!(s.val.len().abs_diff(960) <= 1);
        assert!(s.test.len().abs_diff(1440) <= 1);
        let all: BTreeSet<_> = s.train.iter().chain(&s.val).chain(&s.test).collect();
        assert_eq!(all.len(), 4000);
        let global = labels.iter().flatten().filter(|&&l| l == 1).count() as f64 / 4000.0;
        for part in [&s.train, &s.val, &s.test] {
            let r = part.iter().filter(|&&v| labels[v] == Some(1)).count() as f64 / part.len() as f64;
            assert!((r - global).abs() < 0.02);
        }
    }

    #[test]
    fn degenerate_fractions() {
        let labels = vec![Some(0), Some(1), None, Some(1)];
        let s = make_splits(&labels, [1.0, 0.0, 0.0], &mut rng(0)).unwrap();
        assert_eq!(s.train, vec![0, 1, 3]);
        assert!(s.val.is_empty() && s.test.is_empty());
        assert!(make_splits(&labels, [0.5, 0.5, 0.5], &mut rng(0)).is_err());
        assert!(make_splits(&labels, [1.5, -0.5, 0.0], &mut rng(0)).is_err());
        assert!(make_splits(&labels, [f64::NAN, 0.5, 0.5], &mut rng(0)).is_err());
    }

    #[test]
    fn deterministic_and_round_trips() {
        let cfg = DatasetConfig { nodes: 300, motifs: 30, seed: 9, ..DatasetConfig::default() };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        let text = a.to_json().unwrap();
        assert_eq!(text, b.to_json().unwrap());
        let back = LabeledDataset::from_json(&text).unwrap();
        assert_eq!(back, a);
        let other = generate(&DatasetConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(other.to_json().unwrap(), text);
    }

    #[test]
    fn malformed_files_rejected() {
        let cfg = DatasetConfig { nodes: 50, motifs: 5, seed: 1, ..DatasetConfig::default() };
        let ds = generate(&cfg).unwrap();
        let mut doc: serde_json::Value = serde_json::from_str(&ds.to_json().unwrap()).unwrap();
        let d_node = ds.graph.nodes().find(|&v| ds.labels[v].is_none()).unwrap();
        doc["splits"]["train"].as_array_mut().unwrap().push(serde_json::json!(d_node));
        assert!(LabeledDataset::from_json(&doc.to_string()).is_err());
        let mut doc: serde_json::Value = serde_json::from_str(&ds.to_json().unwrap()).unwrap();
        doc["nodes"][0]["label"] = serde_json::json!(7);
        assert!(LabeledDataset::from_json(&doc.to_string()).is_err());
    }
}
