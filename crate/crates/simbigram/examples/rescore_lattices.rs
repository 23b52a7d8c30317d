//! Rescore confusable word lattices with two language models and test
//! whether their disagreements favor one of them.
//!
//!     cargo run --release --example rescore_lattices

use std::sync::Arc;

use simbigram::backoff::UnigramScheme;
use simbigram::corpus::build_counts;
use simbigram::lattice::{best_path, disagreement_report};
use simbigram::similarity::{similarity_estimator, KlMode};
use simbigram::synth::{
    generate_lattices, holdout_bigram_types, seeded_rng, LatticeGenConfig, PlantedModel,
};
use simbigram::{BackoffConfig, BackoffModel, Estimator, SimilarityParams};

fn main() {
    let planted = PlantedModel::class_structured(4, 25);
    let mut rng = seeded_rng(5);
    let raw_train = planted.sample_corpus(2000, 6..=14, &mut rng);
    let (train, _) = holdout_bigram_types(&raw_train, 0.2, &mut rng);
    let (vocab, counts) = build_counts(&train, 1).expect("counting failed");

    let lattices = generate_lattices(
        &planted,
        &vocab,
        &LatticeGenConfig::default(),
        200,
        &mut rng,
    );

    let model =
        Arc::new(BackoffModel::new(vocab, counts, BackoffConfig::default()).expect("model failed"));
    let katz = Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme));
    let sim = similarity_estimator(
        Arc::clone(&model),
        SimilarityParams::default(),
        KlMode::Exact,
    );

    // Decode one lattice by hand to show what a path looks like.
    let path = best_path(&lattices[0], &katz, 1.0).expect("decoding failed");
    let words: Vec<&str> = path.words.iter().map(|&w| model.vocab().word(w)).collect();
    println!("first lattice, katz decode: {}", words.join(" "));
    println!(
        "  total {:.3} = acoustic {:.3} + lm {:.3}",
        path.total_score, path.acoustic_score, path.lm_score
    );

    let rep = disagreement_report(&lattices, &katz, &sim, 1.0).expect("rescoring failed");
    println!(
        "\n{} lattices, {} disagreements",
        lattices.len(),
        rep.disagreements
    );
    println!("katz correct: {}", rep.model_a_correct);
    println!("sim  correct: {}", rep.model_b_correct);
    println!("two-sided sign test p = {:.4}", rep.sign_test_p);
}
