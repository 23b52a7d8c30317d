//! Perplexity measurement, model comparison, and parameter grid search.
//!
//! Perplexity is `exp(-(1/N) * sum of ln P(w_i | w_{i-1}))` over all
//! within-sentence adjacent pairs of the test text, with natural logarithms.
//! Each scored bigram is routed to the seen or unseen partition by its
//! training count, matching the estimator's own branch, and sub-perplexities
//! are reported per partition.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::backoff::{BackoffError, BackoffModel, Estimator, UnigramScheme};
use crate::corpus::WordId;
use crate::similarity::{similarity_estimator, KlMode, SimilarityParams};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("model assigned zero probability to bigram ({0:?}, {1:?})")]
    ZeroProbability(String, String),
    #[error("no bigrams to score in the test text")]
    NoScoredBigrams,
    #[error("empty tuning set")]
    EmptyTuningSet,
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("models do not share a vocabulary")]
    VocabularyMismatch,
    #[error(transparent)]
    Backoff(#[from] BackoffError),
}

/// Anything that yields a conditional bigram probability. Implemented by the
/// back-off [`Estimator`]; tests use synthetic scorers.
pub trait BigramScorer {
    fn score(&self, w1: WordId, w2: WordId) -> Result<f64, BackoffError>;
}

impl BigramScorer for Estimator {
    fn score(&self, w1: WordId, w2: WordId) -> Result<f64, BackoffError> {
        self.prob(w1, w2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerplexityReport {
    pub total_bigrams_scored: u64,
    pub unseen_fraction: f64,
    pub overall_perplexity: f64,
    pub seen_perplexity: f64,
    pub unseen_perplexity: f64,
    pub seen_count: u64,
    pub unseen_count: u64,
}

/// Scores every within-sentence bigram of `test` under `scorer`, partitioning
/// by the training counts of `model`. Test tokens must already be mapped
/// through the training vocabulary by the caller (`Vocabulary::id_or_unk`).
pub fn perplexity<S: BigramScorer>(
    scorer: &S,
    model: &BackoffModel,
    test: &[Vec<WordId>],
) -> Result<PerplexityReport, EvalError> {
    let mut seen_log = 0.0f64;
    let mut unseen_log = 0.0f64;
    let mut seen_n = 0u64;
    let mut unseen_n = 0u64;

    for sent in test {
        for pair in sent.windows(2) {
            let (w1, w2) = (pair[0], pair[1]);
            let p = scorer.score(w1, w2)?;
            if p <= 0.0 {
                return Err(EvalError::ZeroProbability(
                    model.vocab().word(w1).to_string(),
                    model.vocab().word(w2).to_string(),
                ));
            }
            if model.is_seen(w1, w2) {
                seen_log += p.ln();
                seen_n += 1;
            } else {
                unseen_log += p.ln();
                unseen_n += 1;
            }
        }
    }

    let n = seen_n + unseen_n;
    if n == 0 {
        return Err(EvalError::NoScoredBigrams);
    }
    let pp = |log_sum: f64, count: u64| -> f64 {
        if count == 0 {
            1.0
        } else {
            (-log_sum / count as f64).exp()
        }
    };
    Ok(PerplexityReport {
        total_bigrams_scored: n,
        unseen_fraction: unseen_n as f64 / n as f64,
        overall_perplexity: pp(seen_log + unseen_log, n),
        seen_perplexity: pp(seen_log, seen_n),
        unseen_perplexity: pp(unseen_log, unseen_n),
        seen_count: seen_n,
        unseen_count: unseen_n,
    })
}

/// Maps raw test sentences through a vocabulary, sending OOV tokens to unk.
pub fn map_tokens(vocab: &crate::corpus::Vocabulary, test: &[Vec<String>]) -> Vec<Vec<WordId>> {
    test.iter()
        .map(|s| s.iter().map(|t| vocab.id_or_unk(t)).collect())
        .collect()
}

/// Relative perplexity reduction of `b` against baseline `a`, in percent.
pub fn reduction_pct(pp_a: f64, pp_b: f64) -> f64 {
    100.0 * (1.0 - pp_b / pp_a)
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub reports: Vec<(String, PerplexityReport)>,
    /// (name_a, name_b, overall reduction %, unseen reduction %) for every
    /// ordered pair a -> b.
    pub reductions: Vec<(String, String, f64, f64)>,
}

/// Evaluates several estimators over one vocabulary and reports pairwise
/// perplexity reductions.
pub fn compare(
    evaluators: &[(String, &Estimator)],
    test: &[Vec<WordId>],
) -> Result<ComparisonReport, EvalError> {
    assert!(evaluators.len() >= 2, "compare needs at least two models");
    let first = evaluators[0].1.model();
    for (_, e) in evaluators.iter().skip(1) {
        if e.model().vocab() != first.vocab() {
            return Err(EvalError::VocabularyMismatch);
        }
    }
    let mut reports = Vec::new();
    for (name, e) in evaluators {
        reports.push((name.clone(), perplexity(*e, e.model(), test)?));
    }
    let mut reductions = Vec::new();
    for (na, ra) in &reports {
        for (nb, rb) in &reports {
            if na == nb {
                continue;
            }
            reductions.push((
                na.clone(),
                nb.clone(),
                reduction_pct(ra.overall_perplexity, rb.overall_perplexity),
                reduction_pct(ra.unseen_perplexity, rb.unseen_perplexity),
            ));
        }
    }
    Ok(ComparisonReport {
        reports,
        reductions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub k: usize,
    pub t: f64,
    pub beta: f64,
    pub gamma: f64,
    pub training_reduction_pct: f64,
    pub test_reduction_pct: f64,
}

#[derive(Debug, Clone, Default)]
pub struct GridResult {
    /// Best configuration per k, sorted by descending training reduction.
    pub rows: Vec<GridRow>,
}

#[derive(Debug, Clone)]
pub struct ParamGrid {
    pub k: Vec<usize>,
    pub t: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for ParamGrid {
    // a coarse sweep around the similarity defaults
    fn default() -> Self {
        ParamGrid {
            k: vec![10, 20, 30, 40, 50, 60],
            t: vec![1.5, 2.5],
            beta: vec![3.5, 4.0, 4.5],
            gamma: vec![0.1, 0.15, 0.2, 0.25, 0.3],
        }
    }
}

/// Exhaustive grid search over similarity parameters.
///
/// For every combination, measures the unseen-bigram perplexity reduction of
/// the similarity model against the Katz baseline on the tuning text; keeps
/// the best combination for each k and reports its reduction on the test
/// text, rows sorted by descending tuning reduction.
pub fn grid_search(
    model: Arc<BackoffModel>,
    grid: &ParamGrid,
    tune: &[Vec<WordId>],
    test: &[Vec<WordId>],
    kl_mode: KlMode,
) -> Result<GridResult, EvalError> {
    if grid.k.is_empty() || grid.t.is_empty() || grid.beta.is_empty() || grid.gamma.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    if tune.iter().all(|s| s.len() < 2) {
        return Err(EvalError::EmptyTuningSet);
    }
    let katz = Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme));
    let base_tune = perplexity(&katz, &model, tune)?;
    let base_test = perplexity(&katz, &model, test)?;

    let mut rows: Vec<GridRow> = Vec::new();
    for &k in &grid.k {
        let mut best: Option<(f64, SimilarityParams)> = None;
        for &t in &grid.t {
            for &beta in &grid.beta {
                for &gamma in &grid.gamma {
                    let params = SimilarityParams { k, t, beta, gamma };
                    let est = similarity_estimator(Arc::clone(&model), params, kl_mode);
                    let rep = perplexity(&est, &model, tune)?;
                    let red = reduction_pct(base_tune.unseen_perplexity, rep.unseen_perplexity);
                    if best.is_none_or(|(b, _)| red > b) {
                        best = Some((red, params));
                    }
                }
            }
        }
        let (train_red, params) = best.unwrap();
        let est = similarity_estimator(Arc::clone(&model), params, kl_mode);
        let test_rep = perplexity(&est, &model, test)?;
        rows.push(GridRow {
            k: params.k,
            t: params.t,
            beta: params.beta,
            gamma: params.gamma,
            training_reduction_pct: train_red,
            test_reduction_pct: reduction_pct(
                base_test.unseen_perplexity,
                test_rep.unseen_perplexity,
            ),
        });
    }
    rows.sort_by(|a, b| {
        b.training_reduction_pct
            .partial_cmp(&a.training_reduction_pct)
            .unwrap()
    });
    Ok(GridResult { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format {:?} (expected text or csv)", other)),
        }
    }
}

pub fn format_perplexity(report: &PerplexityReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => {
            let mut s = String::new();
            writeln!(s, "bigrams scored     {:>12}", report.total_bigrams_scored).unwrap();
            writeln!(s, "unseen fraction    {:>12.4}", report.unseen_fraction).unwrap();
            writeln!(s, "overall perplexity {:>12.4}", report.overall_perplexity).unwrap();
            writeln!(s, "seen perplexity    {:>12.4}", report.seen_perplexity).unwrap();
            writeln!(s, "unseen perplexity  {:>12.4}", report.unseen_perplexity).unwrap();
            s
        }
        ReportFormat::Csv => {
            let mut s = String::new();
            writeln!(
                s,
                "bigrams_scored,unseen_fraction,overall_perplexity,seen_perplexity,unseen_perplexity"
            )
            .unwrap();
            writeln!(
                s,
                "{},{},{},{},{}",
                report.total_bigrams_scored,
                report.unseen_fraction,
                report.overall_perplexity,
                report.seen_perplexity,
                report.unseen_perplexity
            )
            .unwrap();
            s
        }
    }
}

pub fn format_grid(result: &GridResult, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => {
            let mut s = String::new();
            writeln!(
                s,
                "{:>5} {:>6} {:>6} {:>6} {:>18} {:>14}",
                "k", "t", "beta", "gamma", "training_red_%", "test_red_%"
            )
            .unwrap();
            for r in &result.rows {
                writeln!(
                    s,
                    "{:>5} {:>6.2} {:>6.2} {:>6.2} {:>18.4} {:>14.4}",
                    r.k, r.t, r.beta, r.gamma, r.training_reduction_pct, r.test_reduction_pct
                )
                .unwrap();
            }
            s
        }
        ReportFormat::Csv => {
            let mut s = String::from("k,t,beta,gamma,training_reduction_pct,test_reduction_pct\n");
            for r in &result.rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.k, r.t, r.beta, r.gamma, r.training_reduction_pct, r.test_reduction_pct
                )
                .unwrap();
            }
            s
        }
    }
}
