//! Tune similarity parameters by grid search: for each neighbor count k the
//! best (t, beta, gamma) on a tuning set is kept and scored on a test set.
//!
//!     cargo run --release --example grid_search

use std::sync::Arc;

use simbigram::corpus::build_counts;
use simbigram::eval::{format_grid, grid_search, map_tokens, ParamGrid, ReportFormat};
use simbigram::similarity::KlMode;
use simbigram::synth::{holdout_bigram_types, seeded_rng, PlantedModel};
use simbigram::{BackoffConfig, BackoffModel};

fn main() {
    let planted = PlantedModel::class_structured(4, 25);
    let mut rng = seeded_rng(23);
    let raw_train = planted.sample_corpus(2000, 6..=14, &mut rng);
    let (train, _) = holdout_bigram_types(&raw_train, 0.2, &mut rng);
    let tune = planted.sample_corpus(300, 6..=14, &mut rng);
    let test = planted.sample_corpus(300, 6..=14, &mut rng);

    let (vocab, counts) = build_counts(&train, 1).expect("counting failed");
    let tune_ids = map_tokens(&vocab, &tune);
    let test_ids = map_tokens(&vocab, &test);
    let model =
        Arc::new(BackoffModel::new(vocab, counts, BackoffConfig::default()).expect("model failed"));

    let grid = ParamGrid {
        k: vec![10, 20, 40, 60],
        t: vec![1.5, 2.5],
        beta: vec![4.0],
        gamma: vec![0.1, 0.3, 0.5, 0.7],
    };
    let result =
        grid_search(model, &grid, &tune_ids, &test_ids, KlMode::Exact).expect("grid search failed");

    print!("{}", format_grid(&result, ReportFormat::Text));
    let best = result.rows[0];
    println!(
        "\nbest: k={} t={} beta={} gamma={}",
        best.k, best.t, best.beta, best.gamma
    );
}
