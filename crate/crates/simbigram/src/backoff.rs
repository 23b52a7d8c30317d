//! Katz-style back-off estimation with Good-Turing discounting.
//!
//! Seen bigrams get a discounted conditional `P_d(w2|w1) = c*(w1,w2)/c(w1)`;
//! the leftover mass `beta_tilde(w1) = 1 - sum P_d` is redistributed across
//! unseen successors by a pluggable [`RedistributionScheme`], scaled by the
//! normalizer `alpha(w1)` so every conditional sums to one.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::corpus::{CountTable, Vocabulary, WordId};

#[derive(Debug, Error)]
pub enum BackoffError {
    #[error("({0}, {1}) is not a seen bigram")]
    NotSeen(WordId, WordId),
    #[error("word {0} has zero conditioning count")]
    ZeroConditioningCount(WordId),
    #[error("count must be positive, got {0}")]
    NonPositiveCount(i64),
    #[error("degenerate redistribution for word {0}: scheme assigns all mass to seen successors")]
    DegenerateDistribution(WordId),
}

/// Counts-of-counts histogram: `n_c` = number of distinct bigram types with
/// frequency exactly `c`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreqOfFreq {
    n: HashMap<u64, u64>,
}

impl FreqOfFreq {
    pub fn n(&self, c: u64) -> u64 {
        self.n.get(&c).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.n.iter().map(|(&c, &n)| (c, n))
    }
}

/// Tallies the exact histogram of bigram count values.
pub fn counts_of_counts(counts: &CountTable) -> FreqOfFreq {
    let mut n = HashMap::new();
    for (_, _, c) in counts.bigrams() {
        *n.entry(c).or_insert(0u64) += 1;
    }
    FreqOfFreq { n }
}

/// Good-Turing discounted count `c* = (c+1) n_{c+1} / n_c`.
///
/// With a finite `ceiling`, counts at or above it are left undiscounted, and
/// the raw formula is replaced by `c* = c` wherever it is undefined
/// (`n_c = 0` or `n_{c+1} = 0`) or would exceed the raw count. With
/// `ceiling = None` the raw formula applies everywhere, which preserves the
/// aggregate identity `sum of c* over seen types = N - n_1` but can emit
/// zero for the largest observed count.
pub fn discounted_count(
    c: u64,
    fof: &FreqOfFreq,
    ceiling: Option<u64>,
) -> Result<f64, BackoffError> {
    if c == 0 {
        return Err(BackoffError::NonPositiveCount(0));
    }
    let nc = fof.n(c);
    let nc1 = fof.n(c + 1);
    match ceiling {
        Some(ceil) => {
            if c >= ceil {
                return Ok(c as f64);
            }
            if nc == 0 || nc1 == 0 || (c + 1) * nc1 > c * nc {
                return Ok(c as f64);
            }
            Ok((c + 1) as f64 * nc1 as f64 / nc as f64)
        }
        None => {
            if nc == 0 {
                return Ok(c as f64);
            }
            Ok((c + 1) as f64 * nc1 as f64 / nc as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackoffConfig {
    /// Counts at or above this are not discounted. `None` selects pure
    /// Good-Turing discounting with no floor.
    pub discount_ceiling: Option<u64>,
    /// Bigrams with training count below this are treated as unseen. Their
    /// occurrences still contribute to `c(w1)` and `N`.
    pub min_bigram_count: u64,
}

impl Default for BackoffConfig {
    fn default() -> Self {
        BackoffConfig {
            discount_ceiling: Some(5),
            min_bigram_count: 2,
        }
    }
}

/// Immutable discounted model state shared by every redistribution scheme.
#[derive(Debug)]
pub struct BackoffModel {
    vocab: Vocabulary,
    counts: CountTable,
    config: BackoffConfig,
    fof: FreqOfFreq,
    /// Seen successors of each conditioning word with their P_d values,
    /// sorted by successor id.
    seen: HashMap<WordId, Vec<(WordId, f64)>>,
    beta_tilde: Vec<f64>,
    unigram_dist: Vec<f64>,
}

impl BackoffModel {
    pub fn new(
        vocab: Vocabulary,
        counts: CountTable,
        config: BackoffConfig,
    ) -> Result<Self, BackoffError> {
        assert_eq!(vocab.len(), counts.vocab_size());
        let fof = counts_of_counts(&counts);

        let total_tokens = counts.total_tokens() as f64;
        let unigram_dist: Vec<f64> = (0..vocab.len() as WordId)
            .map(|w| counts.unigram(w) as f64 / total_tokens)
            .collect();

        let mut seen: HashMap<WordId, Vec<(WordId, f64)>> = HashMap::new();
        for (w1, w2, c) in counts.bigrams() {
            if c < config.min_bigram_count {
                continue;
            }
            let cstar = discounted_count(c, &fof, config.discount_ceiling)?;
            let pd = cstar / counts.unigram(w1) as f64;
            seen.entry(w1).or_default().push((w2, pd));
        }
        for succ in seen.values_mut() {
            succ.sort_unstable_by_key(|&(w2, _)| w2);
        }

        let mut beta_tilde = vec![0.0; vocab.len()];
        for w1 in 0..vocab.len() as WordId {
            if counts.unigram(w1) == 0 {
                continue;
            }
            let seen_mass: f64 = seen
                .get(&w1)
                .map(|s| s.iter().map(|&(_, p)| p).sum())
                .unwrap_or(0.0);
            beta_tilde[w1 as usize] = 1.0 - seen_mass;
        }

        Ok(BackoffModel {
            vocab,
            counts,
            config,
            fof,
            seen,
            beta_tilde,
            unigram_dist,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn counts(&self) -> &CountTable {
        &self.counts
    }

    pub fn config(&self) -> BackoffConfig {
        self.config
    }

    pub fn fof(&self) -> &FreqOfFreq {
        &self.fof
    }

    /// Whether (w1, w2) counts as seen under this model's threshold.
    pub fn is_seen(&self, w1: WordId, w2: WordId) -> bool {
        self.counts.bigram(w1, w2) >= self.config.min_bigram_count
    }

    /// Discounted conditional for a seen bigram (Katz's discounted branch).
    pub fn p_d(&self, w1: WordId, w2: WordId) -> Result<f64, BackoffError> {
        if self.counts.unigram(w1) == 0 {
            return Err(BackoffError::ZeroConditioningCount(w1));
        }
        if !self.is_seen(w1, w2) {
            return Err(BackoffError::NotSeen(w1, w2));
        }
        let succ = &self.seen[&w1];
        let idx = succ.binary_search_by_key(&w2, |&(w, _)| w).unwrap();
        Ok(succ[idx].1)
    }

    /// Seen successors of w1 with their discounted conditionals.
    pub fn seen_successors(&self, w1: WordId) -> &[(WordId, f64)] {
        self.seen.get(&w1).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Leftover probability mass for unseen successors of w1.
    pub fn beta_tilde(&self, w1: WordId) -> f64 {
        self.beta_tilde[w1 as usize]
    }

    /// MLE unigram probability over the closed vocabulary.
    pub fn p_unigram(&self, w2: WordId) -> f64 {
        self.unigram_dist[w2 as usize]
    }

    pub fn unigram_dist(&self) -> &[f64] {
        &self.unigram_dist
    }
}

/// A model for redistributing the leftover mass across unseen successors.
/// For a fixed conditioning word the values over the whole vocabulary must
/// form a proper distribution.
pub trait RedistributionScheme: Send + Sync {
    fn prob(&self, w1: WordId, w2: WordId, model: &BackoffModel) -> f64;

    /// Short name used in reports.
    fn name(&self) -> &str;
}

/// Katz's original choice: redistribute in proportion to word frequency.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnigramScheme;

impl RedistributionScheme for UnigramScheme {
    fn prob(&self, _w1: WordId, w2: WordId, model: &BackoffModel) -> f64 {
        model.p_unigram(w2)
    }

    fn name(&self) -> &str {
        "katz"
    }
}

/// Uniform redistribution over the vocabulary. Mostly useful as a reference
/// point in tests; it has a closed-form normalizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformScheme;

impl RedistributionScheme for UniformScheme {
    fn prob(&self, _w1: WordId, _w2: WordId, model: &BackoffModel) -> f64 {
        1.0 / model.vocab().len() as f64
    }

    fn name(&self) -> &str {
        "uniform"
    }
}

/// Binds a [`BackoffModel`] to one [`RedistributionScheme`] and evaluates the
/// full conditional estimator, caching the per-word normalizer.
pub struct Estimator {
    model: Arc<BackoffModel>,
    scheme: Arc<dyn RedistributionScheme>,
    alpha_cache: RwLock<HashMap<WordId, f64>>,
}

impl Estimator {
    pub fn new(model: Arc<BackoffModel>, scheme: Arc<dyn RedistributionScheme>) -> Self {
        Estimator {
            model,
            scheme,
            alpha_cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn model(&self) -> &BackoffModel {
        &self.model
    }

    pub fn model_arc(&self) -> Arc<BackoffModel> {
        Arc::clone(&self.model)
    }

    pub fn scheme_name(&self) -> &str {
        self.scheme.name()
    }

    /// Raw redistribution probability P_r(w2 | w1) under this scheme.
    pub fn scheme_prob(&self, w1: WordId, w2: WordId) -> f64 {
        self.scheme.prob(w1, w2, &self.model)
    }

    /// Normalizer alpha(w1), computed by the seen-sum formulation:
    /// `beta_tilde(w1) / (1 - sum over seen w2 of P_r(w2|w1))`.
    pub fn alpha(&self, w1: WordId) -> Result<f64, BackoffError> {
        if let Some(&a) = self.alpha_cache.read().unwrap().get(&w1) {
            return Ok(a);
        }
        let beta = self.model.beta_tilde(w1);
        let alpha = if beta == 0.0 {
            0.0
        } else {
            let seen_pr: f64 = self
                .model
                .seen_successors(w1)
                .iter()
                .map(|&(w2, _)| self.scheme.prob(w1, w2, &self.model))
                .sum();
            let denom = 1.0 - seen_pr;
            if denom <= 0.0 {
                return Err(BackoffError::DegenerateDistribution(w1));
            }
            beta / denom
        };
        self.alpha_cache.write().unwrap().insert(w1, alpha);
        Ok(alpha)
    }

    /// The full back-off conditional estimate.
    ///
    /// Seen pairs take the discounted branch; unseen pairs take
    /// `alpha(w1) * P_r(w2|w1)`. Conditioning words that never occurred in
    /// training fall back to the unigram distribution.
    pub fn prob(&self, w1: WordId, w2: WordId) -> Result<f64, BackoffError> {
        if self.model.counts().unigram(w1) == 0 {
            return Ok(self.model.p_unigram(w2));
        }
        if self.model.is_seen(w1, w2) {
            return self.model.p_d(w1, w2);
        }
        Ok(self.alpha(w1)? * self.scheme.prob(w1, w2, &self.model))
    }

    /// The full conditional row for `w1` over the entire vocabulary.
    /// Equivalent to calling [`Estimator::prob`] for each word, but fills the
    /// unseen entries with one vector pass.
    pub fn conditional_row(&self, w1: WordId) -> Result<Vec<f64>, BackoffError> {
        let vsize = self.model.vocab().len() as WordId;
        if self.model.counts().unigram(w1) == 0 {
            return Ok(self.model.unigram_dist().to_vec());
        }
        let alpha = self.alpha(w1)?;
        let mut row: Vec<f64> = (0..vsize)
            .map(|w2| alpha * self.scheme.prob(w1, w2, &self.model))
            .collect();
        for &(w2, pd) in self.model.seen_successors(w1) {
            row[w2 as usize] = pd;
        }
        Ok(row)
    }
}
