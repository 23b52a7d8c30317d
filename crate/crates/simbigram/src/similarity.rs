//! Similarity-based redistribution of unseen-bigram mass.
//!
//! The distance between two conditioning words is the KL divergence between
//! their conditional successor distributions under the baseline Katz model.
//! Each word's neighbor set holds its `k` nearest words within distance `t`;
//! the redistribution estimate averages the neighbors' conditionals with
//! weights `10^(-beta * D)` and interpolates the result with the unigram
//! distribution. All logarithms and exponentials here are base 10.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::backoff::{BackoffError, BackoffModel, Estimator, RedistributionScheme, UnigramScheme};
use crate::corpus::WordId;

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("word {0} has zero conditioning count")]
    ZeroConditioningCount(WordId),
    #[error("empty neighbor set for word {0}")]
    EmptyNeighborSet(WordId),
    #[error(transparent)]
    Backoff(#[from] BackoffError),
}

/// Tuning parameters of the similarity model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityParams {
    /// Maximum neighbor count.
    pub k: usize,
    /// KL distance threshold (base-10 scale).
    pub t: f64,
    /// Weight decay exponent; 0 gives equal weights.
    pub beta: f64,
    /// Interpolation weight of the unigram distribution, in [0, 1].
    pub gamma: f64,
}

impl Default for SimilarityParams {
    // defaults chosen as a strong general-purpose operating point
    fn default() -> Self {
        SimilarityParams {
            k: 60,
            t: 2.5,
            beta: 4.0,
            gamma: 0.15,
        }
    }
}

impl SimilarityParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.k < 1 {
            return Err("k must be at least 1".into());
        }
        // NaN fails both checks
        if self.t.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err("t must be positive".into());
        }
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err("beta must be nonnegative".into());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err("gamma must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// How the KL sum is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KlMode {
    /// Sum over the entire vocabulary; always nonnegative.
    #[default]
    Exact,
    /// Sum only over observed successors of the left argument, clamped at 0.
    Truncated,
}

/// The nearest neighbors of one conditioning word, sorted by ascending
/// distance, with normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    pub center: WordId,
    /// (neighbor, KL distance, normalized weight), ascending by distance.
    pub neighbors: Vec<(WordId, f64, f64)>,
}

impl NeighborSet {
    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Computes KL distances and neighbor sets against a fixed baseline Katz
/// model, caching the dense conditional rows it needs.
pub struct SimilarityModel {
    baseline: Estimator,
    params: SimilarityParams,
    kl_mode: KlMode,
    rows: RwLock<HashMap<WordId, Arc<Vec<f64>>>>,
    neighbor_cache: RwLock<HashMap<WordId, Arc<NeighborSet>>>,
}

impl SimilarityModel {
    /// Builds the similarity machinery on top of the baseline (unigram-scheme)
    /// estimator for `model`.
    pub fn new(model: Arc<BackoffModel>, params: SimilarityParams, kl_mode: KlMode) -> Self {
        SimilarityModel {
            baseline: Estimator::new(model, Arc::new(UnigramScheme)),
            params,
            kl_mode,
            rows: RwLock::new(HashMap::new()),
            neighbor_cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn params(&self) -> SimilarityParams {
        self.params
    }

    pub fn baseline(&self) -> &Estimator {
        &self.baseline
    }

    fn model(&self) -> &BackoffModel {
        self.baseline.model()
    }

    /// Dense baseline conditional row P(. | w1), cached.
    fn row(&self, w1: WordId) -> Result<Arc<Vec<f64>>, SimilarityError> {
        if let Some(r) = self.rows.read().unwrap().get(&w1) {
            return Ok(Arc::clone(r));
        }
        let row = Arc::new(self.baseline.conditional_row(w1)?);
        self.rows
            .write()
            .unwrap()
            .entry(w1)
            .or_insert_with(|| Arc::clone(&row));
        Ok(row)
    }

    /// KL distance D(w1 || w1_prime) between baseline conditional
    /// distributions, in base-10 logarithms.
    pub fn kl_distance(&self, w1: WordId, w1_prime: WordId) -> Result<f64, SimilarityError> {
        let counts = self.model().counts();
        if counts.unigram(w1) == 0 {
            return Err(SimilarityError::ZeroConditioningCount(w1));
        }
        if counts.unigram(w1_prime) == 0 {
            return Err(SimilarityError::ZeroConditioningCount(w1_prime));
        }
        let p = self.row(w1)?;
        let q = self.row(w1_prime)?;
        match self.kl_mode {
            KlMode::Exact => {
                let mut d = 0.0;
                for (pi, qi) in p.iter().zip(q.iter()) {
                    if *pi > 0.0 {
                        d += pi * (pi / qi).log10();
                    }
                }
                // the full-vocabulary sum is nonnegative up to rounding noise
                Ok(d.max(0.0))
            }
            KlMode::Truncated => {
                let mut d = 0.0;
                for &(w2, _) in counts.successors(w1).iter() {
                    let pi = p[w2 as usize];
                    let qi = q[w2 as usize];
                    if pi > 0.0 {
                        d += pi * (pi / qi).log10();
                    }
                }
                Ok(d.max(0.0))
            }
        }
    }

    /// Neighbor set of `w1`: among all other words with positive conditioning
    /// count, those with distance below `t`, keeping the `k` nearest.
    /// Distance ties break by ascending word id. Weights are proportional to
    /// `10^(-beta * D)`, normalized to sum to one.
    pub fn neighbor_set(&self, w1: WordId) -> Result<Arc<NeighborSet>, SimilarityError> {
        if let Some(ns) = self.neighbor_cache.read().unwrap().get(&w1) {
            return Ok(Arc::clone(ns));
        }
        let counts = self.model().counts();
        if counts.unigram(w1) == 0 {
            return Err(SimilarityError::ZeroConditioningCount(w1));
        }
        let mut candidates: Vec<(WordId, f64)> = Vec::new();
        for cand in 0..self.model().vocab().len() as WordId {
            if cand == w1 || counts.unigram(cand) == 0 {
                continue;
            }
            let d = self.kl_distance(w1, cand)?;
            if d < self.params.t {
                candidates.push((cand, d));
            }
        }
        candidates.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        candidates.truncate(self.params.k);

        let weights: Vec<f64> = candidates
            .iter()
            .map(|&(_, d)| 10f64.powf(-self.params.beta * d))
            .collect();
        let wsum: f64 = weights.iter().sum();
        let neighbors = candidates
            .into_iter()
            .zip(weights)
            .map(|((id, d), w)| (id, d, w / wsum))
            .collect();

        let ns = Arc::new(NeighborSet {
            center: w1,
            neighbors,
        });
        self.neighbor_cache
            .write()
            .unwrap()
            .entry(w1)
            .or_insert_with(|| Arc::clone(&ns));
        Ok(ns)
    }

    /// Weighted average of the neighbors' baseline conditionals.
    pub fn p_sim(&self, w2: WordId, neighbors: &NeighborSet) -> Result<f64, SimilarityError> {
        if neighbors.is_empty() {
            return Err(SimilarityError::EmptyNeighborSet(neighbors.center));
        }
        let mut p = 0.0;
        for &(n, _, w) in &neighbors.neighbors {
            p += w * self.row(n)?[w2 as usize];
        }
        Ok(p)
    }

    /// The redistribution estimate: unigram-interpolated similarity average.
    /// An empty neighbor set degrades to the plain unigram probability.
    pub fn p_r(&self, w2: WordId, w1: WordId) -> Result<f64, SimilarityError> {
        let gamma = self.params.gamma;
        let unigram = self.model().p_unigram(w2);
        let ns = self.neighbor_set(w1)?;
        if ns.is_empty() {
            return Ok(unigram);
        }
        Ok(gamma * unigram + (1.0 - gamma) * self.p_sim(w2, &ns)?)
    }
}

/// Adapter exposing the similarity redistribution as a scheme for the
/// back-off estimator. The scheme owns its similarity machinery, which is
/// built over the same model the enclosing estimator uses.
pub struct SimilarityScheme {
    sim: SimilarityModel,
}

impl SimilarityScheme {
    pub fn new(model: Arc<BackoffModel>, params: SimilarityParams, kl_mode: KlMode) -> Self {
        SimilarityScheme {
            sim: SimilarityModel::new(model, params, kl_mode),
        }
    }

    pub fn similarity(&self) -> &SimilarityModel {
        &self.sim
    }
}

impl RedistributionScheme for SimilarityScheme {
    fn prob(&self, w1: WordId, w2: WordId, _model: &BackoffModel) -> f64 {
        // zero-count w1 never reaches here: the estimator routes it to the
        // unigram fallback first
        self.sim
            .p_r(w2, w1)
            .expect("similarity P_r evaluation failed")
    }

    fn name(&self) -> &str {
        "sim"
    }
}

/// Convenience constructor: the full similarity-smoothed back-off estimator.
pub fn similarity_estimator(
    model: Arc<BackoffModel>,
    params: SimilarityParams,
    kl_mode: KlMode,
) -> Estimator {
    let scheme = Arc::new(SimilarityScheme::new(Arc::clone(&model), params, kl_mode));
    Estimator::new(model, scheme)
}
