//! Global explanations for heterogeneous graph neural networks using EL class
//! expressions.
//!
//! The crate bundles everything needed to run the pipeline end to end: a typed
//! multigraph ([`graph`]), EL class expressions with fulfillment checking
//! ([`class_expr`]), random graph synthesis from an expression ([`synth`]), a
//! small heterogeneous GraphSAGE model with training ([`gnn`]), the synthetic
//! Hetero-BA-Shapes dataset ([`dataset`]), candidate scoring and beam search
//! ([`scoring`], [`search`]), evaluation metrics ([`metrics`]), and the
//! edge-type ablation probe ([`ablation`]).

pub mod ablation;
pub mod class_expr;
pub mod dataset;
pub mod error;
pub mod gnn;
pub mod graph;
pub mod metrics;
pub mod scoring;
pub mod search;
pub mod seed;
pub mod synth;

pub use class_expr::ClassExpression;
pub use error::{Error, Result};
pub use graph::{HeteroGraph, NodeId, Schema};
