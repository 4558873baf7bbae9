//! Command implementations.

use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use elx::ablation::edge_type_ablation;
use elx::class_expr::Vocabulary;
use elx::dataset::{generate, DatasetConfig, LabeledDataset, Split};
use elx::gnn::{accuracy, train as fit, HeteroSageModel, TrainConfig};
use elx::graph::GraphFile;
use elx::metrics::{explanation_accuracy, is_ground_truth_ce, MotifSpec};
use elx::scoring::{
    score_ce_fidelity, score_ce_gnn, CandidateScorer, FidelityScorer, GnnOutputScorer, ScoreConfig,
    ScoredCandidate, ScorerKind,
};
use elx::search::{beam_search, BeamConfig};
use elx::seed::rng_for;
use elx::{ClassExpression, Schema};
use log::info;
use serde::Serialize;

use crate::output::{
    read_json, write_csv, write_json, CandidateRecord, EvidenceRecord, ExplainSettings, ResultsFile,
};
use crate::{AblateArgs, EvalArgs, ExplainArgs, GenDatasetArgs, ScoreArgs, TrainArgs};

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn load_dataset(path: &Path) -> Result<LabeledDataset> {
    LabeledDataset::load(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn load_model(path: &Path) -> Result<HeteroSageModel> {
    HeteroSageModel::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn model_schema(model: &HeteroSageModel) -> Result<Arc<Schema>> {
    Ok(Arc::new(Schema::new(model.node_types(), model.edge_types())?))
}

fn score_config(args: &ScoreArgs) -> ScoreConfig {
    ScoreConfig {
        lambda: args.lambda,
        graphs_per_ce: args.graphs_per_ce,
        aggregation: args.aggr,
        label: args.label,
        class_to_explain: args.root_class.clone(),
    }
}

/// `None` when the expression's root is not the motif anchor.
fn motif_accuracy(ce: &ClassExpression, motif: &MotifSpec) -> Option<f64> {
    explanation_accuracy(ce, motif).ok()
}

pub fn gen_dataset(args: &GenDatasetArgs) -> Result<()> {
    let config = DatasetConfig {
        nodes: args.nodes,
        motifs: args.motifs,
        m_attach: args.m_attach,
        seed: args.seed,
        ..DatasetConfig::default()
    };
    let ds = generate(&config)?;
    info!(
        "{} nodes, {} edges, {} labeled ({} positive)",
        ds.graph.node_count(),
        ds.graph.edge_count(),
        ds.labeled_count(),
        ds.labels.iter().flatten().filter(|&&l| l == 1).count()
    );
    ds.save(&args.out)?;
    Ok(())
}

#[derive(Serialize)]
struct TrainSettings {
    dataset: String,
    seed: u64,
    epochs: usize,
    lr: f64,
    hidden: usize,
}

#[derive(Serialize)]
struct TrainSummary {
    config: TrainSettings,
    best_epoch: usize,
    train_accuracy: f64,
    val_accuracy: f64,
    test_accuracy: f64,
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let ds = load_dataset(&args.dataset)?;
    let mut rng = rng_for(args.seed, &[0]);
    let mut model = HeteroSageModel::new(ds.graph.schema(), args.hidden, 2, &mut rng)?;
    let config = TrainConfig {
        epochs: args.epochs,
        lr: args.lr,
    };
    let (tr, va, te) = (ds.targets(Split::Train), ds.targets(Split::Val), ds.targets(Split::Test));
    let report = fit(&mut model, &ds.graph, &tr, &va, &config)?;
    let settings = TrainSettings {
        dataset: path_string(&args.dataset),
        seed: args.seed,
        epochs: args.epochs,
        lr: args.lr,
        hidden: args.hidden,
    };
    let summary = TrainSummary {
        best_epoch: report.best_epoch,
        train_accuracy: accuracy(&model, &ds.graph, &tr)?,
        val_accuracy: accuracy(&model, &ds.graph, &va)?,
        test_accuracy: if te.is_empty() { f64::NAN } else { accuracy(&model, &ds.graph, &te)? },
        config: settings,
    };
    info!(
        "best epoch {}: train {:.4} val {:.4} test {:.4}",
        summary.best_epoch, summary.train_accuracy, summary.val_accuracy, summary.test_accuracy
    );
    model.save(&args.out)?;
    if let Some(path) = &args.metrics {
        write_csv(path, &summary.config, &report.history)?;
    }
    if let Some(path) = &args.summary {
        write_json(path, &summary)?;
    }
    Ok(())
}

struct Reporter<'a> {
    model: &'a HeteroSageModel,
    schema: Arc<Schema>,
    config: ScoreConfig,
    test: Option<FidelityScorer>,
    motif: MotifSpec,
    seed: u64,
}

/// Stream reserved for computing gamma of fidelity-scored candidates after
/// the search; search iterations use small indices.
const REPORT_STREAM: u64 = u64::MAX;

fn record(c: &ScoredCandidate, rank: usize, r: &Reporter) -> Result<CandidateRecord> {
    let gamma = match c.gamma {
        Some(g) => Some(g),
        None => {
            let mut rng = rng_for(r.seed, &[REPORT_STREAM, rank as u64]);
            score_ce_gnn(&c.ce, r.model, &r.schema, &r.config, &mut rng)?.gamma
        }
    };
    let evidence = match &c.evidence {
        Some(e) => Some(EvidenceRecord {
            root: e.root,
            graph: GraphFile::from_graph(&e.graph)?,
        }),
        None => None,
    };
    Ok(CandidateRecord {
        ce: c.ce.to_string(),
        score: c.score,
        length: c.length,
        gamma,
        fidelity: c.fidelity,
        test_fidelity: r.test.as_ref().map(|t| t.fidelity(&c.ce)).transpose()?,
        ea: motif_accuracy(&c.ce, &r.motif),
        per_graph_outputs: c.per_graph_outputs.clone(),
        evidence,
    })
}

pub fn explain(args: &ExplainArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let schema = model_schema(&model)?;
    let config = score_config(&args.score);
    config.validate()?;
    schema
        .require_node_type(&config.class_to_explain)
        .context("root class")?;
    let vocab = Vocabulary::new(model.node_types(), model.edge_types())?;
    let fidelity_on = |path: &Path| -> Result<FidelityScorer> {
        let ds = load_dataset(path)?;
        Ok(FidelityScorer::new(&model, ds.graph, config.clone())?)
    };
    let scorer: Box<dyn CandidateScorer + '_> = match args.scorer {
        ScorerKind::Gnn => Box::new(GnnOutputScorer {
            model: &model,
            schema: Arc::clone(&schema),
            config: config.clone(),
        }),
        ScorerKind::Fidelity => {
            let path = args
                .dataset
                .as_ref()
                .ok_or_else(|| anyhow!("--scorer fidelity needs --dataset"))?;
            Box::new(fidelity_on(path)?)
        }
    };
    let test = args.test_dataset.as_deref().map(fidelity_on).transpose()?;
    let beam = BeamConfig {
        beam_width: args.beam_width,
        iterations: args.iterations,
        seed: args.seed,
    };
    let result = beam_search(&beam, &vocab, &config.class_to_explain, scorer.as_ref(), args.workers)?;
    let reporter = Reporter {
        model: &model,
        schema,
        config: config.clone(),
        test,
        motif: MotifSpec::house(),
        seed: args.seed,
    };
    let candidates = result
        .beam
        .iter()
        .take(args.top)
        .enumerate()
        .map(|(rank, c)| record(c, rank, &reporter))
        .collect::<Result<Vec<_>>>()?;
    if let Some(best) = candidates.first() {
        info!("best: {} (score {:.4})", best.ce, best.score);
    }
    let settings = ExplainSettings {
        model: path_string(&args.model),
        scorer: args.scorer,
        dataset: args.dataset.as_deref().map(path_string),
        test_dataset: args.test_dataset.as_deref().map(path_string),
        seed: args.seed,
        beam_width: args.beam_width,
        iterations: args.iterations,
        lambda: config.lambda,
        graphs_per_ce: config.graphs_per_ce,
        aggr: config.aggregation,
        label: config.label,
        root_class: config.class_to_explain.clone(),
        top: args.top,
    };
    if let Some(path) = &args.csv {
        let rows: Vec<SummaryRow> = candidates
            .iter()
            .enumerate()
            .map(|(rank, c)| SummaryRow {
                rank,
                ce: c.ce.clone(),
                fidelity: c.test_fidelity.or(c.fidelity),
                ea: c.ea,
                gnn: c.gamma,
                score: c.score,
                length: c.length,
            })
            .collect();
        write_csv(path, &settings, &rows)?;
    }
    write_json(
        &args.out,
        &ResultsFile {
            config: settings,
            best_per_iteration: result.best_per_iteration,
            candidates,
        },
    )
}

/// One line of the ranked summary table.
#[derive(Serialize)]
struct SummaryRow {
    rank: usize,
    ce: String,
    /// Test fidelity when a test dataset is given.
    fidelity: Option<f64>,
    ea: Option<f64>,
    gnn: Option<f64>,
    score: f64,
    length: usize,
}

#[derive(Serialize)]
struct EvalSettings {
    ce: String,
    model: Option<String>,
    dataset: Option<String>,
    seed: u64,
    lambda: f64,
    graphs_per_ce: usize,
    aggr: elx::scoring::Aggregation,
    label: usize,
    root_class: String,
}

#[derive(Serialize)]
struct EvalReport {
    config: EvalSettings,
    ce: String,
    length: usize,
    ea: Option<f64>,
    ground_truth: Option<bool>,
    fidelity: Option<f64>,
    gamma: Option<f64>,
    score: Option<f64>,
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let ce: ClassExpression = args
        .ce
        .parse()
        .map_err(|e| anyhow!("cannot parse {:?}: {e}", args.ce))?;
    let config = score_config(&args.score);
    let motif = MotifSpec::house();
    let model = args.model.as_deref().map(load_model).transpose()?;
    let (gamma, score) = match &model {
        Some(m) => {
            let mut rng = rng_for(args.seed, &[0]);
            let s = score_ce_gnn(&ce, m, &model_schema(m)?, &config, &mut rng)?;
            (s.gamma, Some(s.score))
        }
        None => (None, None),
    };
    let fidelity = match (&args.dataset, &model) {
        (Some(path), Some(m)) => {
            let ds = load_dataset(path)?;
            let scorer = FidelityScorer::new(m, ds.graph, config.clone())?;
            score_ce_fidelity(&ce, &scorer)?.fidelity
        }
        (Some(_), None) => bail!("--dataset needs --model to compute fidelity"),
        _ => None,
    };
    let report = EvalReport {
        ce: ce.to_string(),
        length: ce.length(),
        ea: motif_accuracy(&ce, &motif),
        ground_truth: is_ground_truth_ce(&ce, &motif).ok(),
        fidelity,
        gamma,
        score,
        config: EvalSettings {
            ce: args.ce.clone(),
            model: args.model.as_deref().map(path_string),
            dataset: args.dataset.as_deref().map(path_string),
            seed: args.seed,
            lambda: config.lambda,
            graphs_per_ce: config.graphs_per_ce,
            aggr: config.aggregation,
            label: config.label,
            root_class: config.class_to_explain.clone(),
        },
    };
    info!("{}: length {} ea {:?} fidelity {:?} gamma {:?}", report.ce, report.length, report.ea, report.fidelity, report.gamma);
    write_json(&args.out, &report)
}

#[derive(Serialize)]
struct AblateSettings {
    model: String,
    results: String,
    rank: usize,
    label: usize,
    ce: String,
}

#[derive(Serialize)]
struct AblateRow {
    removed: String,
    in_motif: bool,
    logit: f64,
}

pub fn ablate(args: &AblateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let results: ResultsFile = read_json(&args.results)?;
    let candidate = results.candidates.get(args.rank).ok_or_else(|| {
        anyhow!(
            "rank {} out of range: results hold {} candidates",
            args.rank,
            results.candidates.len()
        )
    })?;
    let evidence = candidate
        .evidence
        .as_ref()
        .ok_or_else(|| anyhow!("candidate {} has no synthesized graph; use a gnn-scored results file", args.rank))?;
    let graph = evidence.graph.to_graph()?;
    let rows = edge_type_ablation(&graph, evidence.root, &model, args.label, &MotifSpec::house())?;
    let settings = AblateSettings {
        model: path_string(&args.model),
        results: path_string(&args.results),
        rank: args.rank,
        label: args.label,
        ce: candidate.ce.clone(),
    };
    let rows: Vec<AblateRow> = rows
        .iter()
        .map(|r| AblateRow {
            removed: r.label(),
            in_motif: r.in_motif,
            logit: r.logit,
        })
        .collect();
    write_csv(&args.out, &settings, &rows)
}
