//! Cooccurrence smoothing: confusion rows, the smoothed conditional, and a
//! three-way interpolation with the MLE bigram and unigram.
//!
//!     cargo run --example confusion_smoothing

use simbigram::cooc::{CoocModel, InterpolatedCooc};
use simbigram::corpus::{build_counts, tokenize};
use simbigram::{BackoffConfig, BackoffModel};

fn main() {
    let text = "\
the cat sat on the mat
the dog sat on the rug
a cat slept on a mat
the dog ran to the cat
a dog and a cat sat
";
    let sentences = tokenize(text);
    let (vocab, counts) = build_counts(&sentences, 1).expect("counting failed");
    let cooc = CoocModel::new(&counts);

    let cat = vocab.id("cat").unwrap();
    let row = cooc.confusion_row(cat).expect("confusion row failed");
    println!("confusion row for \"cat\" (how substitutable each word is):");
    let mut entries: Vec<_> = vocab.ids_iter().map(|w| (row.prob(w), w)).collect();
    entries.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (p, w) in entries.iter().take(5) {
        println!("  {:<6} {:.4}", vocab.word(*w), p);
    }
    let total: f64 = vocab.ids_iter().map(|w| row.prob(w)).sum();
    println!("  row sum = {:.12}", total);

    println!("\nsmoothed conditionals P_S(. | cat):");
    for w in ["sat", "ran", "slept"] {
        let id = vocab.id(w).unwrap();
        println!("  {:<6} {:.4}", w, cooc.p_cooc(id, cat).unwrap());
    }

    let config = BackoffConfig {
        min_bigram_count: 1,
        ..BackoffConfig::default()
    };
    let model = BackoffModel::new(vocab, counts, config).expect("model failed");
    let interp = InterpolatedCooc::new(&cooc, &model, [0.5, 0.3, 0.2]).expect("bad lambdas");
    println!("\ninterpolated (0.5 MLE + 0.3 smoothed + 0.2 unigram):");
    for w in ["sat", "ran", "slept"] {
        let id = model.vocab().id(w).unwrap();
        println!("  {:<6} {:.4}", w, interp.prob(cat, id).unwrap());
    }
}
