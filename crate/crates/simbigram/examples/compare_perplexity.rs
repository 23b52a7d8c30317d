//! Train on a corpus with a fifth of its bigram types held out, then compare
//! test perplexity across redistribution schemes. The similarity scheme
//! should recover much of the unseen-bigram mass the unigram back-off
//! misplaces.
//!
//!     cargo run --release --example compare_perplexity

use std::sync::Arc;

use simbigram::backoff::UnigramScheme;
use simbigram::cooc::CoocScheme;
use simbigram::corpus::build_counts;
use simbigram::eval::{compare, map_tokens};
use simbigram::similarity::{similarity_estimator, KlMode};
use simbigram::synth::{holdout_bigram_types, seeded_rng, PlantedModel};
use simbigram::{BackoffConfig, BackoffModel, Estimator, SimilarityParams};

fn main() {
    let planted = PlantedModel::class_structured(4, 25);
    let mut rng = seeded_rng(11);
    let raw_train = planted.sample_corpus(2000, 6..=14, &mut rng);
    let (train, held) = holdout_bigram_types(&raw_train, 0.2, &mut rng);
    let test = planted.sample_corpus(400, 6..=14, &mut rng);
    println!("held out {} bigram types from training", held.len());

    let (vocab, counts) = build_counts(&train, 1).expect("counting failed");
    let test_ids = map_tokens(&vocab, &test);
    let model =
        Arc::new(BackoffModel::new(vocab, counts, BackoffConfig::default()).expect("model failed"));

    let katz = Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme));
    let sim = similarity_estimator(
        Arc::clone(&model),
        SimilarityParams::default(),
        KlMode::Exact,
    );
    let cooc = Estimator::new(
        Arc::clone(&model),
        Arc::new(CoocScheme::new(model.counts())),
    );

    let report = compare(
        &[
            ("katz".into(), &katz),
            ("sim".into(), &sim),
            ("cooc".into(), &cooc),
        ],
        &test_ids,
    )
    .expect("evaluation failed");

    println!(
        "{:<6} {:>10} {:>10} {:>10} {:>8}",
        "model", "overall", "seen", "unseen", "red_%"
    );
    let base = report.reports[0].1.unseen_perplexity;
    for (name, pp) in &report.reports {
        println!(
            "{:<6} {:>10.3} {:>10.3} {:>10.3} {:>8.2}",
            name,
            pp.overall_perplexity,
            pp.seen_perplexity,
            pp.unseen_perplexity,
            simbigram::eval::reduction_pct(base, pp.unseen_perplexity)
        );
    }
}
