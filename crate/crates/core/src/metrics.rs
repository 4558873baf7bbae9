//! Explanation quality against a known motif.
//!
//! Explanation accuracy maps the expression homomorphically onto the motif
//! extended by one abstract node that is linked to every motif node through
//! every edge type, in both directions. Each class occurrence lands on a
//! motif node of its own type or on the abstract node. True positives are
//! the distinct motif nodes covered, false negatives the uncovered ones and
//! false positives the occurrences placed on the abstract node; the score is
//! `tp / (tp + fp + fn)`, maximized over all mappings.

use std::collections::BTreeMap;

use crate::class_expr::ClassExpression;
use crate::dataset::{ANCHOR_TYPE, EDGE_TYPE, HOUSE_EDGES, HOUSE_TYPES};
use crate::error::{Error, Result};
use crate::graph::NodeId;

/// A small typed pattern with undirected edges, at most 16 nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotifSpec {
    pub node_types: Vec<String>,
    /// Undirected edges as `(a, b, edge type)`.
    pub edges: Vec<(usize, usize, String)>,
    /// Type every expression root must have.
    pub anchor: String,
}

impl MotifSpec {
    pub fn new(node_types: Vec<String>, edges: Vec<(usize, usize, String)>, anchor: impl Into<String>) -> Result<Self> {
        let spec = Self {
            node_types,
            edges,
            anchor: anchor.into(),
        };
        let n = spec.node_types.len();
        if n == 0 || n > 16 {
            return Err(Error::InvalidArgument(format!("motif must have 1..=16 nodes, got {n}")));
        }
        if let Some(e) = spec.edges.iter().find(|e| e.0 >= n || e.1 >= n) {
            return Err(Error::InvalidArgument(format!("motif edge {e:?} out of range")));
        }
        if !spec.node_types.contains(&spec.anchor) {
            return Err(Error::InvalidArgument(format!(
                "anchor type {} does not occur in the motif",
                spec.anchor
            )));
        }
        Ok(spec)
    }

    /// The house: roof A, middles B, bottoms C, anchored at B.
    pub fn house() -> Self {
        Self::new(
            HOUSE_TYPES.iter().map(|s| s.to_string()).collect(),
            HOUSE_EDGES.iter().map(|&(a, b)| (a, b, EDGE_TYPE.to_owned())).collect(),
            ANCHOR_TYPE,
        )
        .expect("house motif is well formed")
    }

    pub fn len(&self) -> usize {
        self.node_types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_types.is_empty()
    }

    fn full_mask(&self) -> u16 {
        ((1u32 << self.len()) - 1) as u16
    }

    fn adjacent(&self, a: usize, b: usize, property: &str) -> bool {
        self.edges
            .iter()
            .any(|(x, y, t)| t == property && ((*x == a && *y == b) || (*x == b && *y == a)))
    }
}

/// Expression tree with one node per class occurrence.
#[derive(Clone, Debug)]
struct Individual {
    class: String,
    children: Vec<(String, Individual)>,
}

impl Individual {
    fn from_ce(ce: &ClassExpression) -> Result<Self> {
        let class = ce.root_class()?.to_owned();
        let children = ce
            .restrictions()
            .into_iter()
            .map(|(p, f)| Ok((p.to_owned(), Individual::from_ce(f)?)))
            .collect::<Result<_>>()?;
        Ok(Self { class, children })
    }
}

/// Minimum false-positive count for each coverage mask.
type Table = BTreeMap<u16, usize>;

fn merge_min(into: &mut Table, mask: u16, fp: usize) {
    into.entry(mask)
        .and_modify(|cur| *cur = (*cur).min(fp))
        .or_insert(fp);
}

struct Solver<'a> {
    motif: &'a MotifSpec,
}

impl Solver<'_> {
    /// Tables for every placement of `ind`: index `i < motif.len()` is a
    /// motif node, the last entry the abstract node.
    fn tables(&self, ind: &Individual) -> Vec<Table> {
        let abstract_node = self.motif.len();
        let child_tables: Vec<Vec<Table>> = ind.children.iter().map(|(_, c)| self.tables(c)).collect();
        (0..=abstract_node)
            .map(|place| {
                let mut acc = Table::new();
                if place == abstract_node {
                    acc.insert(0, 1);
                } else if self.motif.node_types[place] == ind.class {
                    acc.insert(1 << place, 0);
                } else {
                    return acc;
                }
                for ((property, child), tables) in ind.children.iter().zip(&child_tables) {
                    let mut options = Table::new();
                    for (target, table) in tables.iter().enumerate() {
                        let allowed = target == abstract_node
                            || (self.motif.node_types[target] == child.class
                                && (place == abstract_node
                                    || self.motif.adjacent(place, target, property)));
                        if allowed {
                            for (&mask, &fp) in table {
                                merge_min(&mut options, mask, fp);
                            }
                        }
                    }
                    let mut next = Table::new();
                    for (&m1, &f1) in &acc {
                        for (&m2, &f2) in &options {
                            merge_min(&mut next, m1 | m2, f1 + f2);
                        }
                    }
                    acc = next;
                }
                acc
            })
            .collect()
    }

    fn root_table(&self, ce: &ClassExpression) -> Result<Table> {
        ce.validate()?;
        let root = Individual::from_ce(ce)?;
        if root.class != self.motif.anchor {
            return Err(Error::InvalidArgument(format!(
                "expression root {} is not the motif anchor {}",
                root.class, self.motif.anchor
            )));
        }
        let mut out = Table::new();
        for table in &self.tables(&root)[..self.motif.len()] {
            for (&mask, &fp) in table {
                merge_min(&mut out, mask, fp);
            }
        }
        Ok(out)
    }
}

/// Best `tp / (tp + fp + fn)` over all mappings of `ce` onto `motif`.
pub fn explanation_accuracy(ce: &ClassExpression, motif: &MotifSpec) -> Result<f64> {
    let table = Solver { motif }.root_table(ce)?;
    let n = motif.len();
    Ok(table
        .iter()
        .map(|(&mask, &fp)| mask.count_ones() as f64 / (n + fp) as f64)
        .fold(0.0, f64::max))
}

/// Whether some mapping avoiding the abstract node covers every motif node.
pub fn is_ground_truth_ce(ce: &ClassExpression, motif: &MotifSpec) -> Result<bool> {
    let table = Solver { motif }.root_table(ce)?;
    Ok(table.get(&motif.full_mask()) == Some(&0))
}

/// Share of nodes where the expression's verdict matches the predicted
/// positive flag.
pub fn fidelity(ce_verdicts: &[bool], predicted_positive: &[bool], nodes: &[NodeId]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptySet("fidelity evaluation nodes"));
    }
    let agree = nodes
        .iter()
        .filter(|&&v| ce_verdicts[v] == predicted_positive[v])
        .count();
    Ok(agree as f64 / nodes.len() as f64)
}
