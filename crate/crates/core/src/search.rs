//! Beam search over class expressions.
//!
//! The beam starts with `k` random expressions. Each iteration mutates every
//! survivor once, scores the mutants and keeps the best `k` of survivors and
//! mutants together. Candidate `i` of iteration `t` (0 for the initial
//! beam) draws from its own stream `rng_for(seed, [t, i])`, so the result
//! does not depend on the number of worker threads.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::class_expr::{mutate_ce, random_ce, Vocabulary};
use crate::error::{Error, Result};
use crate::scoring::{CandidateScorer, ScoredCandidate};
use crate::seed::rng_for;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BeamConfig {
    pub beam_width: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            beam_width: 10_000,
            iterations: 10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    /// Final beam, best first.
    pub beam: Vec<ScoredCandidate>,
    /// Best score after the initial beam and after each iteration.
    pub best_per_iteration: Vec<f64>,
}

/// Score descending, then shorter first; `sort_by` is stable, so earlier
/// insertion wins remaining ties.
fn rank(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.score.total_cmp(&a.score).then(a.length.cmp(&b.length))
}

pub fn beam_search(
    config: &BeamConfig,
    vocab: &Vocabulary,
    class_to_explain: &str,
    scorer: &dyn CandidateScorer,
    workers: usize,
) -> Result<SearchResult> {
    if config.beam_width == 0 {
        return Err(Error::InvalidArgument("beam width must be >= 1".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidArgument("worker count must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| {
        let mut beam: Vec<ScoredCandidate> = (0..config.beam_width)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_for(config.seed, &[0, i as u64]);
                let ce = random_ce(vocab, class_to_explain, &mut rng);
                scorer.score(&ce, &mut rng)
            })
            .collect::<Result<_>>()?;
        beam.sort_by(rank);
        let mut best = vec![beam[0].score];
        log::info!("initial beam: best {:.4} ({})", beam[0].score, beam[0].ce);
        for iteration in 1..=config.iterations {
            let mutants: Vec<ScoredCandidate> = beam
                .par_iter()
                .enumerate()
                .map(|(i, parent)| {
                    let mut rng = rng_for(config.seed, &[iteration as u64, i as u64]);
                    let ce = mutate_ce(&parent.ce, vocab, &mut rng)?;
                    scorer.score(&ce, &mut rng)
                })
                .collect::<Result<_>>()?;
            beam.extend(mutants);
            beam.sort_by(rank);
            beam.truncate(config.beam_width);
            best.push(beam[0].score);
            log::info!(
                "iteration {iteration}: best {:.4} ({})",
                beam[0].score,
                beam[0].ce
            );
        }
        Ok(SearchResult {
            beam,
            best_per_iteration: best,
        })
    })
}
