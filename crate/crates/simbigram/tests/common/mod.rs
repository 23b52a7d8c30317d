#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use simbigram::backoff::BackoffError;
use simbigram::corpus::{build_counts, CorpusError};
use simbigram::lattice::{Arc as LatArc, Lattice};
use simbigram::synth::seeded_rng;
use simbigram::{BackoffConfig, BackoffModel, CountTable, Estimator, Vocabulary, WordId};

/// Random sentences over a vocabulary of `vocab_size` surface words.
pub fn random_sentences(
    vocab_size: usize,
    sentences: usize,
    max_len: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<String>> {
    (0..sentences)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            (0..len)
                .map(|_| format!("w{}", rng.gen_range(0..vocab_size)))
                .collect()
        })
        .collect()
}

pub fn random_model(
    vocab_size: usize,
    sentences: usize,
    config: BackoffConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vocabulary, CountTable, BackoffModel), CorpusError> {
    let corpus = random_sentences(vocab_size, sentences, 12, rng);
    let (vocab, counts) = build_counts(&corpus, 1)?;
    let model = BackoffModel::new(vocab.clone(), counts.clone(), config)
        .expect("model construction failed");
    Ok((vocab, counts, model))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    seeded_rng(seed)
}

/// The unseen-sum formulation of the back-off weight: beta~ divided by the
/// redistribution mass actually sitting on unseen successors.
pub fn alpha_unseen_sum(est: &Estimator, w1: WordId) -> Result<f64, BackoffError> {
    let model = est.model();
    let beta = model.beta_tilde(w1);
    if beta == 0.0 {
        return Ok(0.0);
    }
    let mut denom = 0.0;
    for w2 in model.vocab().ids_iter() {
        if !model.is_seen(w1, w2) {
            denom += est.scheme_prob(w1, w2);
        }
    }
    if denom <= 0.0 {
        return Err(BackoffError::DegenerateDistribution(w1));
    }
    Ok(beta / denom)
}

/// Word ids with positive unigram count (the unk sentinel is excluded when
/// nothing mapped to it).
pub fn positive_words(vocab: &Vocabulary, counts: &CountTable) -> Vec<WordId> {
    vocab
        .ids_iter()
        .filter(|&w| counts.unigram(w) > 0)
        .collect()
}

/// Layered random DAG lattice with at most ~200 start-to-end paths. Every
/// node lies on some start-to-end path by construction. Arc words are drawn
/// from `words`.
pub fn random_lattice(words: &[WordId], rng: &mut ChaCha8Rng) -> Lattice {
    let num_layers = rng.gen_range(1..=3usize);
    let mut layers: Vec<Vec<usize>> = vec![vec![0]];
    let mut next_id = 1usize;
    for _ in 0..num_layers {
        let width = rng.gen_range(1..=2usize);
        layers.push((0..width).map(|i| next_id + i).collect());
        next_id += width;
    }
    let end = next_id;
    layers.push(vec![end]);

    let mut arcs = Vec::new();
    for pair in layers.windows(2) {
        for &from in &pair[0] {
            for &to in &pair[1] {
                // 1 or 2 parallel arcs, but cap out-degree at 3
                let parallel = rng.gen_range(1..=2usize);
                for _ in 0..parallel {
                    arcs.push(LatArc {
                        from,
                        to,
                        word: words[rng.gen_range(0..words.len())],
                        acoustic_score: rng.gen_range(0.0..3.0),
                    });
                }
            }
        }
    }
    // trim any node's out-degree to 3, keeping connectivity (first arc per
    // (from, to) pair is always kept)
    let mut kept: Vec<LatArc> = Vec::new();
    for arc in arcs {
        let out_degree = kept.iter().filter(|a| a.from == arc.from).count();
        let pair_covered = kept.iter().any(|a| a.from == arc.from && a.to == arc.to);
        if !pair_covered || out_degree < 3 {
            kept.push(arc);
        }
    }
    let lattice = Lattice {
        node_count: end + 1,
        start: 0,
        end,
        arcs: kept,
        reference: None,
    };
    lattice.validate().expect("generated lattice invalid");
    lattice
}

/// Random token sequences drawn from `words`.
pub fn random_token_sentences(
    words: &[WordId],
    sentences: usize,
    max_len: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<WordId>> {
    (0..sentences)
        .map(|_| {
            let len = rng.gen_range(2..=max_len);
            (0..len)
                .map(|_| words[rng.gen_range(0..words.len())])
                .collect()
        })
        .collect()
}

/// Exhaustive best path: enumerate every start-to-end path, score it with the
/// same cost the decoder uses (summed back to front so float totals match),
/// and pick the minimum with lexicographic word tie-break.
pub fn brute_force_best(lattice: &Lattice, est: &Estimator, lm_weight: f64) -> (Vec<WordId>, f64) {
    let mut best: Option<(f64, Vec<WordId>)> = None;
    for path in lattice.all_paths() {
        let mut costs = Vec::new();
        let mut prev: Option<WordId> = None;
        for &ai in &path {
            let arc = &lattice.arcs[ai];
            let p = match prev {
                None => est.model().p_unigram(arc.word),
                Some(w1) => est.prob(w1, arc.word).expect("probability failed"),
            };
            costs.push(arc.acoustic_score + lm_weight * -p.ln());
            prev = Some(arc.word);
        }
        let total = costs.iter().rev().fold(0.0f64, |acc, c| c + acc);
        let words: Vec<WordId> = path.iter().map(|&ai| lattice.arcs[ai].word).collect();
        let better = match &best {
            None => true,
            Some((bs, bw)) => total < *bs || (total == *bs && words < *bw),
        };
        if better {
            best = Some((total, words));
        }
    }
    let (score, words) = best.expect("lattice has no path");
    (words, score)
}
