//! Generate a class-structured synthetic corpus and hold out a fraction of
//! its bigram types, the setup used throughout the other examples.
//!
//!     cargo run --example synthetic_corpus

use simbigram::corpus::build_counts;
use simbigram::synth::{holdout_bigram_types, seeded_rng, PlantedModel};

fn main() {
    let planted = PlantedModel::class_structured(3, 5);
    let mut rng = seeded_rng(99);

    println!("true transition probabilities (by class):");
    for w1 in ["c0w0", "c1w0", "c2w0"] {
        for w2 in ["c0w0", "c1w0", "c2w0"] {
            let p = planted.true_prob(w1, w2).unwrap();
            print!("  P({} | {}) = {:.3}", w2, w1, p);
        }
        println!();
    }

    let corpus = planted.sample_corpus(500, 6..=12, &mut rng);
    println!("\nsampled {} sentences; first three:", corpus.len());
    for sent in corpus.iter().take(3) {
        println!("  {}", sent.join(" "));
    }

    let tokens_before: usize = corpus.iter().map(|s| s.len()).sum();
    let (train, held) = holdout_bigram_types(&corpus, 0.2, &mut rng);
    let tokens_after: usize = train.iter().map(|s| s.len()).sum();
    println!("\nheld out {} bigram types", held.len());
    println!(
        "token count preserved: {} -> {}",
        tokens_before, tokens_after
    );

    // The held-out adjacencies are really gone from the training counts.
    let (vocab, counts) = build_counts(&train, 1).expect("counting failed");
    let survivors = held
        .iter()
        .filter(|(a, b)| match (vocab.id(a), vocab.id(b)) {
            (Some(x), Some(y)) => counts.bigram(x, y) > 0,
            _ => false,
        })
        .count();
    println!("held-out types still present in counts: {}", survivors);
}
