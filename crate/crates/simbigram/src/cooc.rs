//! Cooccurrence smoothing via confusion probabilities.
//!
//! The confusion probability `P_C(w1'|w1)` measures how readily `w1'`
//! substitutes for `w1` in an arbitrary context, built entirely from MLE
//! bigram statistics. The smoothed estimate `P_S(w2|w1)` averages MLE
//! successor conditionals over all candidate conditioning words, weighted by
//! their confusion probabilities. Both are row-stochastic, and `P_S` plugs
//! into the back-off estimator as a redistribution scheme.
//!
//! All component probabilities derive from the joint bigram MLE. The
//! contexts `w2` in a confusion row are the words that follow the center
//! (the probability that `w1` is followed by the same words as `w1'`), so
//! `P(w1|w2)` is the predecessor conditional, `P(w2)` the right marginal,
//! and the leading `1/P(w1)` uses the left marginal. This is the unique
//! normalization under which both `P_C` and `P_S` rows sum exactly to one.

use std::collections::HashMap;
use std::sync::RwLock;

use thiserror::Error;

use crate::backoff::{BackoffModel, RedistributionScheme};
use crate::corpus::{CountTable, WordId};

#[derive(Debug, Error)]
pub enum CoocError {
    #[error("word {0} has zero probability as a conditioning word; confusion row undefined")]
    ZeroCenterProbability(WordId),
}

/// Sparse confusion row P_C(. | w1).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionRow {
    pub center: WordId,
    pub entries: HashMap<WordId, f64>,
}

impl ConfusionRow {
    pub fn prob(&self, w1_prime: WordId) -> f64 {
        self.entries.get(&w1_prime).copied().unwrap_or(0.0)
    }
}

/// MLE bigram statistics reshaped for confusion-probability sums: successor
/// rows, predecessor columns, and both marginals.
pub struct CoocModel {
    vocab_size: usize,
    /// row_sum[w] = number of bigram tokens starting with w
    row_sum: Vec<u64>,
    /// col_sum[w] = number of bigram tokens ending with w
    col_sum: Vec<u64>,
    successors: Vec<Vec<(WordId, u64)>>,
    predecessors: Vec<Vec<(WordId, u64)>>,
    total: u64,
    rows: RwLock<HashMap<WordId, ConfusionRow>>,
}

impl CoocModel {
    pub fn new(counts: &CountTable) -> Self {
        let vocab_size = counts.vocab_size();
        let mut row_sum = vec![0u64; vocab_size];
        let mut col_sum = vec![0u64; vocab_size];
        let mut successors = vec![Vec::new(); vocab_size];
        let mut predecessors = vec![Vec::new(); vocab_size];
        for (w1, w2, c) in counts.bigrams() {
            row_sum[w1 as usize] += c;
            col_sum[w2 as usize] += c;
            successors[w1 as usize].push((w2, c));
            predecessors[w2 as usize].push((w1, c));
        }
        for v in successors.iter_mut().chain(predecessors.iter_mut()) {
            v.sort_unstable();
        }
        CoocModel {
            vocab_size,
            row_sum,
            col_sum,
            successors,
            predecessors,
            total: counts.total_bigrams(),
            rows: RwLock::new(HashMap::new()),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// MLE successor conditional P(w2 | w1).
    pub fn p_cond(&self, w2: WordId, w1: WordId) -> f64 {
        let r = self.row_sum[w1 as usize];
        if r == 0 {
            return 0.0;
        }
        let succ = &self.successors[w1 as usize];
        match succ.binary_search_by_key(&w2, |&(w, _)| w) {
            Ok(i) => succ[i].1 as f64 / r as f64,
            Err(_) => 0.0,
        }
    }

    /// Marginal probability of w occurring as a conditioning (left) word.
    pub fn p_left(&self, w: WordId) -> f64 {
        self.row_sum[w as usize] as f64 / self.total as f64
    }

    /// Marginal probability of w occurring as a conditioned (right) word.
    pub fn p_right(&self, w: WordId) -> f64 {
        self.col_sum[w as usize] as f64 / self.total as f64
    }

    /// MLE predecessor conditional P(w1 | w2): the probability that the word
    /// preceding an occurrence of w2 is w1.
    pub fn p_pred(&self, w1: WordId, w2: WordId) -> f64 {
        let c = self.col_sum[w2 as usize];
        if c == 0 {
            return 0.0;
        }
        let pred = &self.predecessors[w2 as usize];
        match pred.binary_search_by_key(&w1, |&(w, _)| w) {
            Ok(i) => pred[i].1 as f64 / c as f64,
            Err(_) => 0.0,
        }
    }

    /// Confusion probability P_C(w1' | w1) =
    /// (1 / P(w1)) * sum over contexts w2 of P(w1|w2) P(w1'|w2) P(w2).
    pub fn confusion_prob(&self, w1_prime: WordId, w1: WordId) -> Result<f64, CoocError> {
        Ok(self.confusion_row(w1)?.prob(w1_prime))
    }

    /// The whole confusion row for w1, computed over the contexts that
    /// actually follow w1 and cached.
    pub fn confusion_row(&self, w1: WordId) -> Result<ConfusionRow, CoocError> {
        if let Some(row) = self.rows.read().unwrap().get(&w1) {
            return Ok(row.clone());
        }
        if self.row_sum[w1 as usize] == 0 {
            return Err(CoocError::ZeroCenterProbability(w1));
        }
        let mut entries: HashMap<WordId, f64> = HashMap::new();
        for &(w2, c_w1_w2) in &self.successors[w1 as usize] {
            // P(w1|w2) P(w2) / P(w1) collapses to c(w1,w2) / row_sum(w1)
            let outer = c_w1_w2 as f64 / self.row_sum[w1 as usize] as f64;
            for &(w1p, c_w1p_w2) in &self.predecessors[w2 as usize] {
                let p_w1p_given_w2 = c_w1p_w2 as f64 / self.col_sum[w2 as usize] as f64;
                *entries.entry(w1p).or_insert(0.0) += outer * p_w1p_given_w2;
            }
        }
        let row = ConfusionRow {
            center: w1,
            entries,
        };
        self.rows
            .write()
            .unwrap()
            .entry(w1)
            .or_insert_with(|| row.clone());
        Ok(row)
    }

    /// Cooccurrence-smoothed estimate P_S(w2 | w1) =
    /// sum over w1' of P(w2|w1') P_C(w1'|w1).
    pub fn p_cooc(&self, w2: WordId, w1: WordId) -> Result<f64, CoocError> {
        let row = self.confusion_row(w1)?;
        let mut p = 0.0;
        for (&w1p, &pc) in &row.entries {
            p += self.p_cond(w2, w1p) * pc;
        }
        Ok(p)
    }
}

/// Exposes P_S as a redistribution scheme for the back-off estimator.
/// Conditioning words with an undefined confusion row degrade to the unigram
/// distribution so the estimator stays total.
pub struct CoocScheme {
    cooc: CoocModel,
}

impl CoocScheme {
    pub fn new(counts: &CountTable) -> Self {
        CoocScheme {
            cooc: CoocModel::new(counts),
        }
    }

    pub fn model(&self) -> &CoocModel {
        &self.cooc
    }
}

impl RedistributionScheme for CoocScheme {
    fn prob(&self, w1: WordId, w2: WordId, model: &BackoffModel) -> f64 {
        match self.cooc.p_cooc(w2, w1) {
            Ok(p) => p,
            Err(CoocError::ZeroCenterProbability(_)) => model.p_unigram(w2),
        }
    }

    fn name(&self) -> &str {
        "cooc"
    }
}

/// Full interpolated model in the style of cooccurrence-smoothing systems:
/// `l1 * MLE bigram + l2 * P_S + l3 * unigram` with user-supplied weights
/// summing to one.
pub struct InterpolatedCooc<'a> {
    cooc: &'a CoocModel,
    model: &'a BackoffModel,
    pub lambdas: [f64; 3],
}

impl<'a> InterpolatedCooc<'a> {
    pub fn new(
        cooc: &'a CoocModel,
        model: &'a BackoffModel,
        lambdas: [f64; 3],
    ) -> Result<Self, String> {
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("lambdas must sum to 1, got {}", sum));
        }
        if lambdas.iter().any(|&l| l < 0.0) {
            return Err("lambdas must be nonnegative".into());
        }
        Ok(InterpolatedCooc {
            cooc,
            model,
            lambdas,
        })
    }

    pub fn prob(&self, w1: WordId, w2: WordId) -> Result<f64, CoocError> {
        let [l1, l2, l3] = self.lambdas;
        let mle = self.cooc.p_cond(w2, w1);
        let ps = match self.cooc.p_cooc(w2, w1) {
            Ok(p) => p,
            Err(CoocError::ZeroCenterProbability(_)) => self.model.p_unigram(w2),
        };
        Ok(l1 * mle + l2 * ps + l3 * self.model.p_unigram(w2))
    }
}
