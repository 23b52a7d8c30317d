//! Synthetic data for controlled experiments: a planted class-structured
//! bigram model, bigram-type holdout, and confusable lattice generation.
//!
//! The planted model partitions the vocabulary into word classes whose
//! members share one successor distribution, so distributionally similar
//! words exist by construction. Generated corpora therefore reward
//! redistribution schemes that exploit similarity over plain frequency.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use crate::corpus::{Vocabulary, WordId};
use crate::lattice::{Arc, Lattice};

/// Deterministic RNG for all synthetic generation.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A bigram model over `num_classes * words_per_class` words in which every
/// member of a class has the same class-level successor distribution.
pub struct PlantedModel {
    pub num_classes: usize,
    pub words_per_class: usize,
    /// transition[i][j] = probability that a word of class i is followed by
    /// some word of class j; rows sum to one.
    pub transition: Vec<Vec<f64>>,
    /// words[c][m] is the surface form of member m of class c.
    pub words: Vec<Vec<String>>,
}

impl PlantedModel {
    /// Builds the standard experiment model: each class strongly prefers the
    /// next class in cyclic order, with smaller mass elsewhere.
    pub fn class_structured(num_classes: usize, words_per_class: usize) -> Self {
        let mut transition = vec![vec![0.0; num_classes]; num_classes];
        for (i, row) in transition.iter_mut().enumerate() {
            row[(i + 1) % num_classes] = 0.6;
            row[(i + 2) % num_classes] = 0.3;
            row[i] = 0.1;
        }
        let words = (0..num_classes)
            .map(|c| {
                (0..words_per_class)
                    .map(|m| format!("c{}w{}", c, m))
                    .collect()
            })
            .collect();
        PlantedModel {
            num_classes,
            words_per_class,
            transition,
            words,
        }
    }

    pub fn class_of_surface(&self, word: &str) -> Option<usize> {
        for (c, members) in self.words.iter().enumerate() {
            if members.iter().any(|w| w == word) {
                return Some(c);
            }
        }
        None
    }

    /// True conditional probability P(w2 | w1) under the planted model.
    pub fn true_prob(&self, w1: &str, w2: &str) -> Option<f64> {
        let c1 = self.class_of_surface(w1)?;
        let c2 = self.class_of_surface(w2)?;
        Some(self.transition[c1][c2] / self.words_per_class as f64)
    }

    fn sample_class(&self, from: usize, rng: &mut ChaCha8Rng) -> usize {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        for (j, &p) in self.transition[from].iter().enumerate() {
            acc += p;
            if r < acc {
                return j;
            }
        }
        self.num_classes - 1
    }

    fn sample_word(&self, class: usize, rng: &mut ChaCha8Rng) -> String {
        let m = rng.gen_range(0..self.words_per_class);
        self.words[class][m].clone()
    }

    /// Samples one sentence of the given length.
    pub fn sample_sentence(&self, len: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
        let mut out = Vec::with_capacity(len);
        let mut class = rng.gen_range(0..self.num_classes);
        out.push(self.sample_word(class, rng));
        for _ in 1..len {
            class = self.sample_class(class, rng);
            out.push(self.sample_word(class, rng));
        }
        out
    }

    /// Samples a corpus of sentences with lengths drawn from `len_range`.
    pub fn sample_corpus(
        &self,
        sentences: usize,
        len_range: std::ops::RangeInclusive<usize>,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Vec<String>> {
        (0..sentences)
            .map(|_| {
                let len = rng.gen_range(len_range.clone());
                self.sample_sentence(len, rng)
            })
            .collect()
    }
}

/// Removes a random fraction of bigram types from a corpus by splitting
/// sentences wherever a held-out pair occurs adjacently. The returned corpus
/// contains no occurrence of any held-out type; unigram content is preserved.
pub fn holdout_bigram_types(
    corpus: &[Vec<String>],
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<String>>, HashSet<(String, String)>) {
    let mut types: Vec<(String, String)> = {
        let mut set = HashSet::new();
        for sent in corpus {
            for pair in sent.windows(2) {
                set.insert((pair[0].clone(), pair[1].clone()));
            }
        }
        let mut v: Vec<_> = set.into_iter().collect();
        v.sort();
        v
    };
    types.shuffle(rng);
    let keep = (types.len() as f64 * fraction).round() as usize;
    let held: HashSet<(String, String)> = types.into_iter().take(keep).collect();

    let mut out = Vec::new();
    for sent in corpus {
        let mut current: Vec<String> = Vec::new();
        for tok in sent {
            if let Some(prev) = current.last() {
                if held.contains(&(prev.clone(), tok.clone())) {
                    out.push(std::mem::take(&mut current));
                }
            }
            current.push(tok.clone());
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    (out, held)
}

/// Controls confusable-lattice generation.
#[derive(Debug, Clone)]
pub struct LatticeGenConfig {
    /// Probability of adding a confusable alternative at each position past
    /// the first.
    pub corrupt_prob: f64,
    /// Acoustic penalty put on the correct word at corrupted positions; the
    /// language model must recover at least this margin.
    pub acoustic_margin: f64,
    pub sentence_len: std::ops::RangeInclusive<usize>,
}

impl Default for LatticeGenConfig {
    fn default() -> Self {
        LatticeGenConfig {
            corrupt_prob: 0.3,
            acoustic_margin: 0.5,
            sentence_len: 6..=12,
        }
    }
}

/// Samples a sentence from the planted model and builds a chain lattice with
/// confusable parallel arcs: at corrupted positions the correct word carries
/// the acoustic margin while an out-of-class alternative scores zero, so a
/// decoder following acoustics alone prefers the wrong word.
pub fn generate_lattice(
    planted: &PlantedModel,
    vocab: &Vocabulary,
    config: &LatticeGenConfig,
    rng: &mut ChaCha8Rng,
) -> Lattice {
    let len = rng.gen_range(config.sentence_len.clone());
    let sentence = planted.sample_sentence(len, rng);
    let reference: Vec<WordId> = sentence.iter().map(|w| vocab.id_or_unk(w)).collect();

    let mut arcs = Vec::new();
    for (i, word) in sentence.iter().enumerate() {
        let (from, to) = (i, i + 1);
        let correct = vocab.id_or_unk(word);
        if i >= 1 && rng.gen::<f64>() < config.corrupt_prob {
            // alternative from a class the true model rarely or never puts here
            let class = planted.class_of_surface(word).unwrap();
            let prev_class = planted.class_of_surface(&sentence[i - 1]).unwrap();
            let mut worst_class = class;
            let mut worst_p = f64::INFINITY;
            for c in 0..planted.num_classes {
                if c == class {
                    continue;
                }
                let p = planted.transition[prev_class][c];
                if p < worst_p {
                    worst_p = p;
                    worst_class = c;
                }
            }
            let alternative = planted.sample_word(worst_class, rng);
            arcs.push(Arc {
                from,
                to,
                word: correct,
                acoustic_score: config.acoustic_margin,
            });
            arcs.push(Arc {
                from,
                to,
                word: vocab.id_or_unk(&alternative),
                acoustic_score: 0.0,
            });
        } else {
            arcs.push(Arc {
                from,
                to,
                word: correct,
                acoustic_score: 0.0,
            });
        }
    }
    Lattice {
        node_count: len + 1,
        start: 0,
        end: len,
        arcs,
        reference: Some(reference),
    }
}

/// A batch of confusable lattices with references attached.
pub fn generate_lattices(
    planted: &PlantedModel,
    vocab: &Vocabulary,
    config: &LatticeGenConfig,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Lattice> {
    (0..count)
        .map(|_| generate_lattice(planted, vocab, config, rng))
        .collect()
}

/// Writes a lattice in the external text format.
pub fn format_lattice(lattice: &Lattice, vocab: &Vocabulary) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    writeln!(
        s,
        "LATTICE {} {} {}",
        lattice.node_count, lattice.start, lattice.end
    )
    .unwrap();
    for a in &lattice.arcs {
        writeln!(
            s,
            "A {} {} {} {}",
            a.from,
            a.to,
            vocab.word(a.word),
            a.acoustic_score
        )
        .unwrap();
    }
    if let Some(reference) = &lattice.reference {
        let words: Vec<&str> = reference.iter().map(|&w| vocab.word(w)).collect();
        writeln!(s, "REF {}", words.join(" ")).unwrap();
    }
    s
}
