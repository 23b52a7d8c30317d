//! Acceptance gate: one test per headline requirement, each printing a
//! single PASS line with its runtime. Run with `cargo test --test acceptance`.

mod common;

use std::sync::Arc;
use std::time::Instant;

use simbigram::backoff::{counts_of_counts, discounted_count, UnigramScheme};
use simbigram::cooc::{CoocModel, CoocScheme};
use simbigram::corpus::build_counts;
use simbigram::eval::{compare, grid_search, map_tokens, perplexity, reduction_pct, ParamGrid};
use simbigram::lattice::{best_path, disagreement_report, sign_test_two_sided};
use simbigram::similarity::{similarity_estimator, KlMode, SimilarityModel};
use simbigram::synth::{
    generate_lattices, holdout_bigram_types, seeded_rng, LatticeGenConfig, PlantedModel,
};
use simbigram::{BackoffConfig, BackoffModel, Estimator, SimilarityParams};

use common::{
    alpha_unseen_sum, brute_force_best, positive_words, random_lattice, random_sentences,
};

fn pass(name: &str, started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_s,
        "{}: took {:.1}s, budget {:.0}s",
        name,
        elapsed,
        budget_s
    );
    println!("PASS {} ({:.2}s)", name, elapsed);
}

#[test]
fn normalization_all_schemes_500_vocab() {
    let start = Instant::now();
    let mut rng = seeded_rng(101);
    let corpus = random_sentences(500, 4000, 12, &mut rng);
    let (vocab, counts) = build_counts(&corpus, 1).unwrap();
    assert!(
        vocab.len() > 450,
        "corpus must exercise a ~500-word vocabulary"
    );
    let model = Arc::new(
        BackoffModel::new(vocab.clone(), counts.clone(), BackoffConfig::default()).unwrap(),
    );
    let estimators = [
        Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme)),
        similarity_estimator(
            Arc::clone(&model),
            SimilarityParams::default(),
            KlMode::Exact,
        ),
        Estimator::new(Arc::clone(&model), Arc::new(CoocScheme::new(&counts))),
    ];
    for est in &estimators {
        for w1 in vocab.ids_iter() {
            let sum: f64 = est.conditional_row(w1).unwrap().iter().sum();
            assert!(
                (sum - 1.0).abs() < 1e-6,
                "{}: row {} sums to {:.9}",
                est.scheme_name(),
                w1,
                sum
            );
        }
    }
    pass(
        "normalization: all rows stochastic under katz/sim/cooc",
        start,
        60.0,
    );
}

#[test]
fn good_turing_mass_conservation() {
    let start = Instant::now();
    use rand::Rng;
    let mut rng = seeded_rng(202);
    for table_idx in 0..100 {
        // random table whose count histogram has no internal gaps: a gap at
        // value c would make n_{c-1} = 0 silently drop the c * n_c term from
        // the aggregate, so the identity is stated for gapless histograms
        let max_c = rng.gen_range(1..=6u64);
        let extra_types = rng.gen_range(0..40usize);
        let vocab_size = 40u32;
        let mut counts = simbigram::CountTable::new(vocab_size as usize);
        let mut used = std::collections::HashSet::new();
        let fresh_pair =
            |rng: &mut rand_chacha::ChaCha8Rng,
             used: &mut std::collections::HashSet<(u32, u32)>| loop {
                let pair = (rng.gen_range(0..vocab_size), rng.gen_range(0..vocab_size));
                if used.insert(pair) {
                    return pair;
                }
            };
        for c in 1..=max_c {
            let (w1, w2) = fresh_pair(&mut rng, &mut used);
            counts.add_bigram(w1, w2, c);
        }
        for _ in 0..extra_types {
            let (w1, w2) = fresh_pair(&mut rng, &mut used);
            counts.add_bigram(w1, w2, rng.gen_range(1..=max_c));
        }
        let fof = counts_of_counts(&counts);
        let discounted: f64 = counts
            .bigrams()
            .map(|(_, _, c)| discounted_count(c, &fof, None).unwrap())
            .sum();
        let expected = (counts.total_bigrams() - fof.n(1)) as f64;
        let rel = if expected == 0.0 {
            discounted.abs()
        } else {
            ((discounted - expected) / expected).abs()
        };
        assert!(
            rel < 1e-6,
            "table {}: discounted mass {} vs N - n1 = {}",
            table_idx,
            discounted,
            expected
        );
    }
    pass(
        "good-turing: discounted mass equals N - n1 on 100 tables",
        start,
        10.0,
    );
}

#[test]
fn alpha_formulation_equivalence_1000_pairs() {
    let start = Instant::now();
    let mut rng = seeded_rng(303);
    let corpus = random_sentences(120, 600, 10, &mut rng);
    let (vocab, counts) = build_counts(&corpus, 1).unwrap();
    let model = Arc::new(
        BackoffModel::new(vocab.clone(), counts.clone(), BackoffConfig::default()).unwrap(),
    );
    let estimators = [
        Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme)),
        similarity_estimator(
            Arc::clone(&model),
            SimilarityParams::default(),
            KlMode::Exact,
        ),
        Estimator::new(Arc::clone(&model), Arc::new(CoocScheme::new(&counts))),
    ];
    use rand::Rng;
    let mut checked = 0;
    while checked < 1000 {
        let w1 = rng.gen_range(0..vocab.len()) as u32;
        let est = &estimators[rng.gen_range(0..estimators.len())];
        let a = est.alpha(w1).unwrap();
        let b = alpha_unseen_sum(est, w1).unwrap();
        assert!(
            (a - b).abs() < 1e-9,
            "{} w1={}: {} vs {}",
            est.scheme_name(),
            w1,
            a,
            b
        );
        checked += 1;
    }
    pass(
        "alpha: seen-sum and unseen-sum formulations agree on 1000 pairs",
        start,
        30.0,
    );
}

#[test]
fn kl_properties_and_gamma_endpoint() {
    let start = Instant::now();
    let mut rng = seeded_rng(404);
    let corpus = random_sentences(200, 1200, 10, &mut rng);
    let (vocab, counts) = build_counts(&corpus, 1).unwrap();
    assert!(vocab.len() >= 190);
    let model = Arc::new(
        BackoffModel::new(vocab.clone(), counts.clone(), BackoffConfig::default()).unwrap(),
    );
    let sim = SimilarityModel::new(
        Arc::clone(&model),
        SimilarityParams::default(),
        KlMode::Exact,
    );
    // the distance is defined for words that actually occur
    let active = positive_words(&vocab, &counts);
    for &w in &active {
        assert_eq!(
            sim.kl_distance(w, w).unwrap(),
            0.0,
            "self-distance of {}",
            w
        );
    }
    for &a in &active {
        for &b in &active {
            assert!(sim.kl_distance(a, b).unwrap() >= 0.0, "D({}, {}) < 0", a, b);
        }
    }

    let katz = Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme));
    let endpoint = similarity_estimator(
        Arc::clone(&model),
        SimilarityParams {
            gamma: 1.0,
            ..SimilarityParams::default()
        },
        KlMode::Exact,
    );
    for w1 in vocab.ids_iter() {
        let base = katz.conditional_row(w1).unwrap();
        let collapsed = endpoint.conditional_row(w1).unwrap();
        for (w2, (p, q)) in base.iter().zip(&collapsed).enumerate() {
            assert!(
                (p - q).abs() < 1e-12,
                "gamma=1 row {} col {}: {} vs {}",
                w1,
                w2,
                p,
                q
            );
        }
    }
    pass(
        "kl: self-distance 0, nonnegative, gamma=1 collapses to baseline",
        start,
        60.0,
    );
}

#[test]
fn confusion_model_laws() {
    let start = Instant::now();
    let mut rng = seeded_rng(505);
    let corpus = random_sentences(50, 250, 10, &mut rng);
    let (vocab, counts) = build_counts(&corpus, 1).unwrap();
    assert!(vocab.len() <= 51);
    let cooc = CoocModel::new(&counts);
    let active: Vec<u32> = positive_words(&vocab, &counts)
        .into_iter()
        .filter(|&w| counts.successors(w).iter().any(|&(_, c)| c > 0))
        .collect();

    for &w1 in &active {
        let row = cooc.confusion_row(w1).unwrap();
        let row_sum: f64 = vocab.ids_iter().map(|w| row.prob(w)).sum();
        assert!(
            (row_sum - 1.0).abs() < 1e-6,
            "P_C row {} sums to {}",
            w1,
            row_sum
        );
        let smoothed_sum: f64 = vocab
            .ids_iter()
            .map(|w2| cooc.p_cooc(w2, w1).unwrap())
            .sum();
        assert!(
            (smoothed_sum - 1.0).abs() < 1e-6,
            "P_S row {} sums to {}",
            w1,
            smoothed_sum
        );
    }

    // symmetry in cross-multiplied form: P_C(w'|w) P(w) = P_C(w|w') P(w')
    for &w in &active {
        for &wp in &active {
            let lhs = cooc.confusion_prob(wp, w).unwrap() * cooc.p_left(w);
            let rhs = cooc.confusion_prob(w, wp).unwrap() * cooc.p_left(wp);
            assert!(
                (lhs - rhs).abs() < 1e-9,
                "symmetry {} {}: {} vs {}",
                w,
                wp,
                lhs,
                rhs
            );
        }
    }

    // expanded triple sum equals the smoothed conditional
    for &w1 in &active {
        for w2 in vocab.ids_iter() {
            let mut total = 0.0;
            for w1p in vocab.ids_iter() {
                let p_ctx = cooc.p_cond(w2, w1p);
                if p_ctx == 0.0 {
                    continue;
                }
                for w2p in vocab.ids_iter() {
                    total += p_ctx * cooc.p_pred(w1p, w2p) * cooc.p_cond(w2p, w1);
                }
            }
            let direct = cooc.p_cooc(w2, w1).unwrap();
            assert!(
                (total - direct).abs() < 1e-9,
                "triple sum ({}, {}): {} vs {}",
                w1,
                w2,
                total,
                direct
            );
        }
    }
    pass(
        "cooc: stochastic rows, symmetry law, triple-sum identity",
        start,
        120.0,
    );
}

#[test]
fn synthetic_corpus_end_to_end() {
    let start = Instant::now();
    let planted = PlantedModel::class_structured(4, 25);
    let mut rng = seeded_rng(606);
    let raw_train = planted.sample_corpus(2000, 6..=14, &mut rng);
    let (train, _) = holdout_bigram_types(&raw_train, 0.2, &mut rng);
    let tune = planted.sample_corpus(300, 6..=14, &mut rng);
    let test = planted.sample_corpus(300, 6..=14, &mut rng);

    let (vocab, counts) = build_counts(&train, 1).unwrap();
    let tune_ids = map_tokens(&vocab, &tune);
    let test_ids = map_tokens(&vocab, &test);
    let model = Arc::new(BackoffModel::new(vocab, counts, BackoffConfig::default()).unwrap());

    let grid = ParamGrid {
        k: vec![20, 40, 60],
        t: vec![2.5],
        beta: vec![4.0],
        gamma: vec![0.1, 0.3, 0.5, 0.7, 0.9],
    };
    let result = grid_search(
        Arc::clone(&model),
        &grid,
        &tune_ids,
        &test_ids,
        KlMode::Exact,
    )
    .unwrap();
    let best = result.rows[0];
    assert!(best.gamma < 0.5, "selected gamma {} not < 0.5", best.gamma);

    let katz = Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme));
    let tuned = similarity_estimator(
        Arc::clone(&model),
        SimilarityParams {
            k: best.k,
            t: best.t,
            beta: best.beta,
            gamma: best.gamma,
        },
        KlMode::Exact,
    );
    let base = perplexity(&katz, &model, &test_ids).unwrap();
    let ours = perplexity(&tuned, &model, &test_ids).unwrap();
    assert!(
        ours.unseen_perplexity < base.unseen_perplexity,
        "similarity {} not below baseline {}",
        ours.unseen_perplexity,
        base.unseen_perplexity
    );
    let red = reduction_pct(base.unseen_perplexity, ours.unseen_perplexity);
    pass(
        &format!(
            "synthetic end-to-end: unseen perplexity {:.1} -> {:.1} ({:.1}% reduction), gamma {}",
            base.unseen_perplexity, ours.unseen_perplexity, red, best.gamma
        ),
        start,
        300.0,
    );
}

#[test]
fn grid_report_sorted_and_consistent() {
    let start = Instant::now();
    let planted = PlantedModel::class_structured(4, 10);
    let mut rng = seeded_rng(707);
    let train = planted.sample_corpus(800, 6..=12, &mut rng);
    let tune = planted.sample_corpus(150, 6..=12, &mut rng);
    let test = planted.sample_corpus(150, 6..=12, &mut rng);
    let (vocab, counts) = build_counts(&train, 1).unwrap();
    let tune_ids = map_tokens(&vocab, &tune);
    let test_ids = map_tokens(&vocab, &test);
    let model = Arc::new(BackoffModel::new(vocab, counts, BackoffConfig::default()).unwrap());

    let grid = ParamGrid {
        k: vec![10, 20, 40],
        t: vec![1.5, 2.5],
        beta: vec![4.0],
        gamma: vec![0.1, 0.3],
    };
    let result = grid_search(
        Arc::clone(&model),
        &grid,
        &tune_ids,
        &test_ids,
        KlMode::Exact,
    )
    .unwrap();
    for pair in result.rows.windows(2) {
        assert!(
            pair[0].training_reduction_pct >= pair[1].training_reduction_pct,
            "rows not sorted: {} before {}",
            pair[0].training_reduction_pct,
            pair[1].training_reduction_pct
        );
    }

    // a one-point grid must reproduce a standalone comparison exactly
    let point = SimilarityParams {
        k: 20,
        t: 2.5,
        beta: 4.0,
        gamma: 0.1,
    };
    let single = ParamGrid {
        k: vec![point.k],
        t: vec![point.t],
        beta: vec![point.beta],
        gamma: vec![point.gamma],
    };
    let row = grid_search(
        Arc::clone(&model),
        &single,
        &tune_ids,
        &test_ids,
        KlMode::Exact,
    )
    .unwrap()
    .rows[0];
    let katz = Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme));
    let sim = similarity_estimator(Arc::clone(&model), point, KlMode::Exact);
    let report = compare(&[("katz".into(), &katz), ("sim".into(), &sim)], &test_ids).unwrap();
    let (_, _, _, unseen_red) = report
        .reductions
        .iter()
        .find(|(a, b, _, _)| a == "katz" && b == "sim")
        .unwrap()
        .clone();
    assert_eq!(
        row.test_reduction_pct, unseen_red,
        "single-point grid disagrees with compare"
    );
    pass(
        "grid search: sorted report, single point matches compare",
        start,
        60.0,
    );
}

#[test]
fn lattice_decoder_oracle_and_sign_test() {
    let start = Instant::now();
    let mut rng = seeded_rng(808);
    let corpus = random_sentences(30, 300, 10, &mut rng);
    let (vocab, counts) = build_counts(&corpus, 1).unwrap();
    let words = positive_words(&vocab, &counts);
    let config = BackoffConfig {
        min_bigram_count: 1,
        ..BackoffConfig::default()
    };
    let model = Arc::new(BackoffModel::new(vocab, counts, config).unwrap());
    let est = Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme));
    for i in 0..500 {
        let lattice = random_lattice(&words, &mut rng);
        assert!(lattice.all_paths().len() <= 200, "lattice {} too large", i);
        let decoded = best_path(&lattice, &est, 1.0).unwrap();
        let (best_words, best_score) = brute_force_best(&lattice, &est, 1.0);
        assert_eq!(decoded.words, best_words, "lattice {}", i);
        assert!(
            (decoded.total_score - best_score).abs() < 1e-9,
            "lattice {}",
            i
        );
    }

    let cases = [
        (3u64, 0u64, 0.25),
        (0, 0, 1.0),
        (1, 1, 1.0),
        (5, 1, 14.0 / 64.0),
        (2, 2, 1.0),
        (10, 0, 2.0 / 1024.0),
    ];
    for (a, b, expected) in cases {
        let p = sign_test_two_sided(a, b);
        assert!(
            (p - expected).abs() < 1e-12,
            "sign test ({}, {}): {} vs {}",
            a,
            b,
            p,
            expected
        );
    }
    pass(
        "lattice: decoder matches enumeration on 500 lattices, sign test closed forms",
        start,
        60.0,
    );
}

#[test]
fn synthetic_rescoring_experiment() {
    let start = Instant::now();
    let mut wins = 0;
    let seeds = 10;
    for seed in 0..seeds {
        let planted = PlantedModel::class_structured(4, 25);
        let mut rng = seeded_rng(900 + seed);
        let raw_train = planted.sample_corpus(2000, 6..=14, &mut rng);
        let (train, _) = holdout_bigram_types(&raw_train, 0.2, &mut rng);
        let (vocab, counts) = build_counts(&train, 1).unwrap();
        let lattices = generate_lattices(
            &planted,
            &vocab,
            &LatticeGenConfig {
                acoustic_margin: 0.5,
                ..LatticeGenConfig::default()
            },
            200,
            &mut rng,
        );
        let model = Arc::new(BackoffModel::new(vocab, counts, BackoffConfig::default()).unwrap());
        let katz = Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme));
        let sim = similarity_estimator(
            Arc::clone(&model),
            SimilarityParams::default(),
            KlMode::Exact,
        );
        let rep = disagreement_report(&lattices, &katz, &sim, 1.0).unwrap();
        if rep.model_b_correct > rep.model_a_correct {
            wins += 1;
        }
    }
    assert!(
        wins >= 9,
        "similarity model won only {}/{} seeds",
        wins,
        seeds
    );
    pass(
        &format!(
            "rescoring: similarity model wins disagreements in {}/{} seeds",
            wins, seeds
        ),
        start,
        300.0,
    );
}
