//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line and
//! then asserts on the same condition.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{brute_force_fulfills, random_expression, random_graph, schema, CLASSES};
use elx::class_expr::{extension, fulfills, mutate_ce, random_ce, Vocabulary};
use elx::dataset::house_schema;
use elx::gnn::{gradient_check, HeteroSageModel, NodeScorer};
use elx::graph::{GraphFile, HeteroGraph};
use elx::metrics::{explanation_accuracy, is_ground_truth_ce, MotifSpec};
use elx::seed::rng_for;
use elx::synth::create_graph;
use elx::ClassExpression;
use rand::Rng;
use serde_json::Value;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const GROUND_TRUTH: [&str; 3] = [
    "B and (to some (B and (to some C))) and (to some A) and (to some C)",
    "B and (to some (C and (to some C))) and (to some (B and (to some C))) and (to some (A and (to some B)))",
    "B and (to some (A and (to some B))) and (to some (B and (to some A) and (to some C))) and (to some (C and (to some C)))",
];

/// Written to the stdout handle directly so the line survives test output
/// capture.
fn report(criterion: u32, ok: bool, detail: &str) {
    let line = format!("{} criterion {criterion}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

fn elx_in(dir: &Path, args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_elx"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("spawn elx");
    assert!(
        out.status.success(),
        "elx {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(s: &str) -> ClassExpression {
    s.parse().unwrap()
}

/// Desk-scale artifacts for one seed: three datasets, a model, and results
/// of both scorers.
struct SeedRun {
    seed: u64,
    dir: PathBuf,
    test_accuracy: f64,
    train_seconds: f64,
    explain_seconds: f64,
}

const DESK: [&str; 6] = ["--nodes", "1000", "--motifs", "100", "--m-attach", "3"];

fn run_seed(root: &Path, seed: u64) -> SeedRun {
    let dir = root.join(format!("seed{seed}"));
    std::fs::create_dir_all(&dir).unwrap();
    let s = seed.to_string();
    let started = Instant::now();
    for (k, name) in ["train.json", "fid.json", "test.json"].iter().enumerate() {
        let ds_seed = (seed * 10 + k as u64).to_string();
        let mut args = vec!["gen-dataset", "--seed", &ds_seed, "--out", name];
        args.extend(DESK);
        elx_in(&dir, &args);
    }
    elx_in(&dir, &[
        "train", "--dataset", "train.json", "--epochs", "300", "--seed", &s, "--out", "model.json",
        "--metrics", "metrics.csv", "--summary", "summary.json",
    ]);
    let train_seconds = started.elapsed().as_secs_f64();
    let started = Instant::now();
    elx_in(&dir, &[
        "explain", "--model", "model.json", "--scorer", "fidelity", "--dataset", "fid.json",
        "--test-dataset", "test.json", "--beam-width", "200", "--iterations", "5", "--seed", &s,
        "--top", "10", "--out", "fidelity.json", "--csv", "fidelity.csv",
    ]);
    let explain_seconds = started.elapsed().as_secs_f64();
    elx_in(&dir, &[
        "explain", "--model", "model.json", "--scorer", "gnn", "--aggr", "max", "--beam-width", "200",
        "--iterations", "5", "--seed", &s, "--top", "200", "--workers", "8", "--out", "gnn.json",
    ]);
    elx_in(&dir, &["eval", "--ce", GROUND_TRUTH[0], "--model", "model.json", "--dataset", "test.json", "--seed", &s, "--out", "gt1.json"]);
    elx_in(&dir, &["ablate", "--model", "model.json", "--results", "gnn.json", "--out", "ablation.csv"]);
    let test_accuracy = read_json(&dir.join("summary.json"))["test_accuracy"].as_f64().unwrap();
    SeedRun { seed, dir, test_accuracy, train_seconds, explain_seconds }
}

fn desk_runs() -> &'static [SeedRun] {
    static RUNS: OnceLock<(tempfile::TempDir, Vec<SeedRun>)> = OnceLock::new();
    &RUNS
        .get_or_init(|| {
            let root = tempfile::tempdir().unwrap();
            let runs = std::thread::scope(|scope| {
                let handles: Vec<_> = SEEDS
                    .iter()
                    .map(|&seed| {
                        let path = root.path().to_path_buf();
                        scope.spawn(move || run_seed(&path, seed))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().unwrap()).collect()
            });
            (root, runs)
        })
        .1
}

#[test]
fn criterion_1_accuracy_worked_examples() {
    let started = Instant::now();
    let house = MotifSpec::house();
    let a = explanation_accuracy(&p("B and (to some A)"), &house).unwrap();
    let b = explanation_accuracy(&p("B and (to some (A and (to some C)))"), &house).unwrap();
    let elapsed = started.elapsed();
    let ok = a == 0.4 && b == 1.0 / 3.0 && elapsed < Duration::from_secs(1);
    report(1, ok, &format!("EA {a} and {b} in {elapsed:?}"));
    assert!(ok);
}

#[test]
fn criterion_2_ground_truth_expressions() {
    let started = Instant::now();
    let house = MotifSpec::house();
    let values: Vec<(f64, bool)> = GROUND_TRUTH
        .iter()
        .map(|s| {
            let ce = p(s);
            (explanation_accuracy(&ce, &house).unwrap(), is_ground_truth_ce(&ce, &house).unwrap())
        })
        .collect();
    let elapsed = started.elapsed();
    let ok = values.iter().all(|&(ea, gt)| ea == 1.0 && gt) && elapsed < Duration::from_secs(1);
    report(2, ok, &format!("{values:?} in {elapsed:?}"));
    assert!(ok);
}

#[test]
fn criterion_3_synthesis_soundness() {
    let started = Instant::now();
    let schema = house_schema();
    let vocab = Vocabulary::new(CLASSES, ["to"]).unwrap();
    let mut rng = rng_for(3, &[]);
    let (mut checked, mut failures) = (0, 0);
    for _ in 0..1000 {
        let mut ce = random_ce(&vocab, CLASSES[rng.gen_range(0..4)], &mut rng);
        let target = rng.gen_range(2..=8);
        while ce.length() < target {
            ce = mutate_ce(&ce, &vocab, &mut rng).unwrap();
        }
        assert!(ce.length() <= 8);
        for _ in 0..10 {
            let out = create_graph(&ce, &schema, &mut rng).unwrap();
            let ours = fulfills(&out.graph, out.root, &ce).unwrap();
            let independent = brute_force_fulfills(&out.graph, out.root, &ce);
            checked += 1;
            if !(ours && independent) {
                failures += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    let ok = failures == 0 && checked == 10_000 && elapsed < Duration::from_secs(30);
    report(3, ok, &format!("{failures} failures over {checked} graphs in {elapsed:?}"));
    assert!(ok);
}

#[test]
fn criterion_4_fulfillment_oracle() {
    let schema = schema();
    let mut rng = rng_for(4, &[]);
    let ces: Vec<ClassExpression> = (0..200)
        .map(|_| {
            let depth = rng.gen_range(0..=3);
            random_expression(&mut rng, depth, &CLASSES)
        })
        .collect();
    assert!(ces.iter().all(|c| c.depth() <= 3));
    let mut graphs = Vec::new();
    // every graph on up to 3 nodes over two types, then random graphs of
    // every size up to 12 over all four types
    let to = schema.require_edge_type("to").unwrap();
    let two = [schema.require_node_type("A").unwrap(), schema.require_node_type("B").unwrap()];
    for n in 1..=3usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|s| (0..n).map(move |d| (s, d))).collect();
        for typing in 0..(1u32 << n) {
            for edge_set in 0..(1u32 << pairs.len()) {
                let mut g = HeteroGraph::new(schema.clone());
                for v in 0..n {
                    g.add_node(two[(typing >> v & 1) as usize]).unwrap();
                }
                for (i, &(s, d)) in pairs.iter().enumerate() {
                    if edge_set >> i & 1 == 1 {
                        g.add_edge(s, to, d).unwrap();
                    }
                }
                graphs.push(g);
            }
        }
    }
    for n in 1..=12 {
        for _ in 0..10 {
            let edges = rng.gen_range(0..=3 * n);
            graphs.push(random_graph(&mut rng, &schema, n, edges));
        }
    }
    let mut disagreements = 0usize;
    let mut checks = 0usize;
    for g in &graphs {
        for ce in &ces {
            let ext = extension(g, ce).unwrap();
            for v in g.nodes() {
                checks += 1;
                if ext[v] != brute_force_fulfills(g, v, ce) {
                    disagreements += 1;
                }
            }
        }
    }
    let ok = disagreements == 0;
    report(4, ok, &format!("{disagreements} disagreements over {checks} checks on {} graphs", graphs.len()));
    assert!(ok);
}

#[test]
fn criterion_5_gnn_trainability() {
    let runs = desk_runs();
    let accs: Vec<f64> = runs.iter().map(|r| r.test_accuracy).collect();
    let passing = accs.iter().filter(|&&a| a >= 0.90).count();
    let slowest = runs.iter().map(|r| r.train_seconds).fold(0.0, f64::max);
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let sd = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / accs.len() as f64).sqrt();
    let ok = passing >= 4 && slowest < 300.0;
    report(
        5,
        ok,
        &format!("desk test accuracy {accs:?} (mean {mean:.4} sd {sd:.4}), {passing}/5 >= 0.90, slowest {slowest:.1}s"),
    );
    assert!(ok);
}

/// Full-scale run; reported, not gated.
#[test]
fn criterion_5_full_scale_report() {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    elx_in(dir.path(), &["gen-dataset", "--seed", "100", "--out", "full.json"]);
    elx_in(dir.path(), &["train", "--dataset", "full.json", "--epochs", "1000", "--out", "model.json", "--summary", "summary.json"]);
    let acc = read_json(&dir.path().join("summary.json"))["test_accuracy"].as_f64().unwrap();
    report(5, acc >= 0.90, &format!("full-scale test accuracy {acc:.4} in {:?} (not gated)", started.elapsed()));
}

#[test]
fn criterion_6_gradient_check() {
    let schema = house_schema();
    let errors: Vec<f64> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..10u64)
            .map(|seed| {
                let schema = schema.clone();
                scope.spawn(move || {
                    let mut rng = rng_for(6, &[seed]);
                    let n = rng.gen_range(3..=10);
                    let g = random_graph(&mut rng, &schema, n, 3 * n);
                    let model = HeteroSageModel::new(&schema, 16, 2, &mut rng).unwrap();
                    let node = rng.gen_range(0..n);
                    gradient_check(&model, &g, node, (seed % 2) as usize).unwrap()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let ok = worst < 1e-4;
    report(6, ok, &format!("max relative error {worst:.3e} over 10 graphs"));
    assert!(ok);
}

#[test]
fn criterion_7_fidelity_search() {
    let runs = desk_runs();
    let mut lines = Vec::new();
    let mut passing = 0;
    for r in runs {
        let top = &read_json(&r.dir.join("fidelity.json"))["candidates"][0];
        let fid = top["test_fidelity"].as_f64().unwrap();
        let ea = top["ea"].as_f64().unwrap();
        if fid >= 0.90 && ea >= 0.6 {
            passing += 1;
        }
        lines.push(format!("seed {}: {} fidelity {fid:.3} EA {ea:.2} ({:.1}s)", r.seed, top["ce"], r.explain_seconds));
    }
    let slowest = runs.iter().map(|r| r.explain_seconds).fold(0.0, f64::max);
    let ok = passing >= 3 && slowest < 600.0;
    report(7, ok, &format!("{passing}/5 seeds with test fidelity >= 0.90 and EA >= 0.6; {}", lines.join("; ")));
    assert!(ok);
}

#[test]
fn criterion_8_score_identity() {
    let mut checked = 0;
    let mut violations = 0;
    for r in desk_runs() {
        let results = read_json(&r.dir.join("gnn.json"));
        let lambda = results["config"]["lambda"].as_f64().unwrap();
        for c in results["candidates"].as_array().unwrap() {
            let gamma = c["gamma"].as_f64().unwrap();
            let length = c["length"].as_u64().unwrap() as f64;
            checked += 1;
            if c["score"].as_f64().unwrap() != gamma - lambda * length {
                violations += 1;
            }
        }
    }
    let ok = violations == 0 && checked == 5 * 200;
    report(8, ok, &format!("{violations} violations over {checked} candidates"));
    assert!(ok);
}

#[test]
fn criterion_9_spurious_correlation() {
    let mut lines = Vec::new();
    let mut above = 0;
    let mut ablation_ok = true;
    for r in desk_runs() {
        let results = read_json(&r.dir.join("gnn.json"));
        let top = &results["candidates"][0];
        let top_gamma = top["gamma"].as_f64().unwrap();
        let gt_gamma = read_json(&r.dir.join("gt1.json"))["gamma"].as_f64().unwrap();
        if top_gamma > gt_gamma {
            above += 1;
        }
        lines.push(format!("seed {}: top {} gamma {top_gamma:.3} vs ground truth {gt_gamma:.3}", r.seed, top["ce"]));

        let text = std::fs::read_to_string(r.dir.join("ablation.csv")).unwrap();
        let (config_line, table) = text.split_once('\n').unwrap();
        assert!(config_line.starts_with("# config: "));
        let mut reader = csv::Reader::from_reader(table.as_bytes());
        let rows: Vec<(String, bool, f64)> = reader
            .records()
            .map(|rec| {
                let rec = rec.unwrap();
                (rec[0].to_owned(), rec[1].parse().unwrap(), rec[2].parse().unwrap())
            })
            .collect();
        let flagged: Vec<&str> = rows.iter().filter(|r| r.1).map(|r| r.0.as_str()).collect();
        let evidence: GraphFile = serde_json::from_value(top["evidence"]["graph"].clone()).unwrap();
        let root = top["evidence"]["root"].as_u64().unwrap() as usize;
        let model = HeteroSageModel::load(r.dir.join("model.json")).unwrap();
        let direct = model.score(&evidence.to_graph().unwrap(), root).unwrap()[1];
        ablation_ok &= rows.len() == 11
            && rows[0].0 == "original"
            && flagged == ["A-B", "B-B", "B-C", "C-C"]
            && rows[0].2 == direct;
    }
    let ok = above == 5 && ablation_ok;
    report(9, ok, &format!("{above}/5 seeds with top gamma above ground truth #1; ablation table {}; {}", if ablation_ok { "ok" } else { "wrong" }, lines.join("; ")));
    assert!(ok);
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn criterion_10_determinism() {
    let root = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| -> PathBuf {
        let dir = root.path().join(name);
        std::fs::create_dir_all(&dir).unwrap();
        let mut gen = vec!["gen-dataset", "--seed", "7", "--out", "d.json"];
        gen.extend(["--nodes", "300", "--motifs", "30"]);
        elx_in(&dir, &gen);
        let mut gen = vec!["gen-dataset", "--seed", "8", "--out", "v.json"];
        gen.extend(["--nodes", "300", "--motifs", "30"]);
        elx_in(&dir, &gen);
        elx_in(&dir, &["train", "--dataset", "d.json", "--epochs", "40", "--seed", "7", "--out", "m.json", "--metrics", "m.csv", "--summary", "s.json"]);
        elx_in(&dir, &[
            "explain", "--model", "m.json", "--beam-width", "30", "--iterations", "3", "--graphs-per-ce", "10",
            "--seed", "7", "--workers", workers, "--top", "30", "--out", "g.json", "--csv", "g.csv",
        ]);
        elx_in(&dir, &[
            "explain", "--model", "m.json", "--scorer", "fidelity", "--dataset", "v.json", "--test-dataset", "v.json",
            "--beam-width", "30", "--iterations", "3", "--seed", "7", "--workers", workers, "--out", "f.json",
        ]);
        elx_in(&dir, &["eval", "--ce", GROUND_TRUTH[1], "--model", "m.json", "--dataset", "v.json", "--seed", "7", "--out", "e.json"]);
        elx_in(&dir, &["ablate", "--model", "m.json", "--results", "g.json", "--out", "a.csv"]);
        dir
    };
    let a = files(&run("a", "1"));
    let b = files(&run("b", "8"));
    let names: Vec<&str> = a.iter().map(|f| f.0.as_str()).collect();
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let ok = a.len() == 10 && differing.is_empty();
    report(10, ok, &format!("{} files compared across --workers 1 and 8, differing: {differing:?} ({names:?})", a.len()));
    assert!(ok);
}

#[test]
fn cli_rejects_malformed_expression() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_elx"))
        .current_dir(dir.path())
        .args(["eval", "--ce", "B and (to some", "--out", "e.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("parse error at byte"), "{stderr}");
    assert!(!dir.path().join("e.json").exists());
}

#[test]
fn cli_eval_without_model() {
    let dir = tempfile::tempdir().unwrap();
    elx_in(dir.path(), &["eval", "--ce", "B and (to some A)", "--out", "e.json"]);
    let v = read_json(&dir.path().join("e.json"));
    assert_eq!(v["ea"].as_f64(), Some(0.4));
    assert_eq!(v["length"].as_u64(), Some(2));
    assert!(v["gamma"].is_null());
    elx_in(dir.path(), &["eval", "--ce", GROUND_TRUTH[0], "--out", "gt.json"]);
    assert_eq!(read_json(&dir.path().join("gt.json"))["ea"].as_f64(), Some(1.0));
}

#[test]
fn cli_single_candidate_beam() {
    let dir = tempfile::tempdir().unwrap();
    elx_in(dir.path(), &["gen-dataset", "--nodes", "100", "--motifs", "10", "--out", "d.json"]);
    elx_in(dir.path(), &["train", "--dataset", "d.json", "--epochs", "5", "--out", "m.json"]);
    elx_in(dir.path(), &["explain", "--model", "m.json", "--beam-width", "1", "--iterations", "1", "--graphs-per-ce", "5", "--out", "r.json"]);
    let v = read_json(&dir.path().join("r.json"));
    assert_eq!(v["candidates"].as_array().unwrap().len(), 1);
    assert_eq!(v["best_per_iteration"].as_array().unwrap().len(), 2);
}
