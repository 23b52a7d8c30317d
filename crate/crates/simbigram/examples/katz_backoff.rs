//! Inspect the pieces of the back-off estimator: Good-Turing discounts,
//! the reserved mass, the back-off weight, and the final probabilities.
//!
//!     cargo run --example katz_backoff

use std::sync::Arc;

use simbigram::backoff::{discounted_count, UnigramScheme};
use simbigram::corpus::{build_counts, tokenize};
use simbigram::{BackoffConfig, BackoffModel, Estimator};

fn main() {
    let text = "\
the cat sat on the mat
the cat ate the fish
the dog sat on the mat
a dog ate a bone
the fish saw the cat
";
    let sentences = tokenize(text);
    let (vocab, counts) = build_counts(&sentences, 1).expect("counting failed");
    let config = BackoffConfig {
        min_bigram_count: 1,
        ..BackoffConfig::default()
    };
    let model = Arc::new(BackoffModel::new(vocab, counts, config).expect("model failed"));

    println!("counts-of-counts:");
    for (c, n) in model.fof().entries() {
        println!("  n_{} = {}", c, n);
    }
    println!("discounted counts:");
    for c in 1..=3u64 {
        if let Ok(d) = discounted_count(c, model.fof(), model.config().discount_ceiling) {
            println!("  {} -> {:.4}", c, d);
        }
    }

    let est = Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme));
    let the = model.vocab().id("the").unwrap();
    println!("\nconditioning on \"the\":");
    println!("  reserved mass beta~ = {:.4}", model.beta_tilde(the));
    println!("  back-off weight alpha = {:.4}", est.alpha(the).unwrap());

    for w in ["cat", "bone", "the"] {
        let id = model.vocab().id(w).unwrap();
        let tag = if model.is_seen(the, id) {
            "seen"
        } else {
            "backed off"
        };
        let p = est.prob(the, id).unwrap();
        println!("  P({:<4} | the) = {:.4}  ({})", w, p, tag);
    }

    // Every conditional row sums to one.
    let row = est.conditional_row(the).unwrap();
    println!(
        "\nrow sum over the vocabulary: {:.12}",
        row.iter().sum::<f64>()
    );
}
