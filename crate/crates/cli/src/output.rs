//! File formats written by the commands.

use std::path::Path;

use anyhow::{Context, Result};
use elx::graph::GraphFile;
use elx::scoring::{Aggregation, ScorerKind};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplainSettings {
    pub model: String,
    pub scorer: ScorerKind,
    pub dataset: Option<String>,
    pub test_dataset: Option<String>,
    pub seed: u64,
    pub beam_width: usize,
    pub iterations: usize,
    pub lambda: f64,
    pub graphs_per_ce: usize,
    pub aggr: Aggregation,
    pub label: usize,
    pub root_class: String,
    pub top: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub root: usize,
    pub graph: GraphFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub ce: String,
    pub score: f64,
    pub length: usize,
    /// Aggregated model output; for fidelity-scored candidates computed
    /// after the search with the same settings.
    pub gamma: Option<f64>,
    /// Fidelity on the scorer's dataset.
    pub fidelity: Option<f64>,
    pub test_fidelity: Option<f64>,
    /// Explanation accuracy against the house motif; `None` when the root
    /// class is not the motif's anchor.
    pub ea: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_graph_outputs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<EvidenceRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultsFile {
    pub config: ExplainSettings,
    pub best_per_iteration: Vec<f64>,
    pub candidates: Vec<CandidateRecord>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// CSV whose first line is `# config: <json>`.
pub fn write_csv<C: Serialize, R: Serialize>(path: &Path, config: &C, rows: &[R]) -> Result<()> {
    let mut buf = format!("# config: {}\n", serde_json::to_string(config)?).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    std::fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}
