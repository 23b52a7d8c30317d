//! Find the distributionally nearest neighbors of a word. Words drawn from
//! the same planted class share successor statistics, so they should end up
//! close under the KL-based distance.
//!
//!     cargo run --example neighbors

use std::sync::Arc;

use simbigram::backoff::BackoffConfig;
use simbigram::corpus::build_counts;
use simbigram::similarity::{KlMode, SimilarityModel};
use simbigram::synth::{seeded_rng, PlantedModel};
use simbigram::{BackoffModel, SimilarityParams};

fn main() {
    let planted = PlantedModel::class_structured(4, 10);
    let mut rng = seeded_rng(42);
    let corpus = planted.sample_corpus(1500, 6..=12, &mut rng);
    let (vocab, counts) = build_counts(&corpus, 1).expect("counting failed");
    let model =
        Arc::new(BackoffModel::new(vocab, counts, BackoffConfig::default()).expect("model failed"));

    let params = SimilarityParams {
        k: 8,
        ..SimilarityParams::default()
    };
    let sim = SimilarityModel::new(Arc::clone(&model), params, KlMode::Exact);

    let center = "c1w3";
    let id = model.vocab().id(center).unwrap();
    let ns = sim.neighbor_set(id).expect("neighbor search failed");

    println!(
        "neighbors of {} (class {:?}):",
        center,
        planted.class_of_surface(center)
    );
    println!(
        "{:>4}  {:<8} {:>10} {:>10}  class",
        "rank", "word", "distance", "weight"
    );
    let mut same_class = 0;
    for (rank, &(n, dist, weight)) in ns.neighbors.iter().enumerate() {
        let word = model.vocab().word(n);
        let class = planted.class_of_surface(word);
        if class == planted.class_of_surface(center) {
            same_class += 1;
        }
        println!(
            "{:>4}  {:<8} {:>10.5} {:>10.5}  {:?}",
            rank + 1,
            word,
            dist,
            weight,
            class
        );
    }
    println!(
        "\n{}/{} neighbors share the center's class",
        same_class,
        ns.neighbors.len()
    );

    let total: f64 = ns.neighbors.iter().map(|&(_, _, w)| w).sum();
    println!("weights sum to {:.12}", total);
}
