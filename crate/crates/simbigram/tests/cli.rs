//! End-to-end tests of the command-line binary: exit codes, reproducibility,
//! and agreement with direct library calls.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use simbigram::backoff::UnigramScheme;
use simbigram::corpus::{build_counts, read_counts};
use simbigram::lattice::{disagreement_report, parse_lattice};
use simbigram::similarity::{similarity_estimator, KlMode};
use simbigram::{BackoffConfig, BackoffModel, Estimator, SimilarityParams};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simbigram"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary failed to launch")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Generates a workspace with corpus, counts, and lattices once per test.
fn setup(dir: &Path) {
    let gen = run(
        &[
            "gen",
            ".",
            "--seed",
            "5",
            "--train-sentences",
            "400",
            "--tune-sentences",
            "80",
            "--test-sentences",
            "80",
            "--lattices",
            "30",
        ],
        dir,
    );
    assert_code(&gen, 0);
    let train = run(&["train", "train.txt", "counts.txt"], dir);
    assert_code(&train, 0);
}

#[test]
fn exit_codes_cover_success_usage_and_io() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());

    // 0: success
    assert_code(&run(&["eval", "counts.txt", "test.txt"], dir.path()), 0);

    // 1: usage/config errors
    assert_code(
        &run(
            &["eval", "counts.txt", "test.txt", "--scheme", "bogus"],
            dir.path(),
        ),
        1,
    );
    assert_code(
        &run(
            &["eval", "counts.txt", "test.txt", "--gamma", "1.5"],
            dir.path(),
        ),
        1,
    );
    assert_code(
        &run(&["neighbors", "counts.txt", "no-such-word"], dir.path()),
        1,
    );
    assert_code(&run(&["gen", "out", "--holdout", "1.5"], dir.path()), 1);
    fs::write(dir.path().join("bad.toml"), "not_a_known_key = 3\n").unwrap();
    assert_code(
        &run(
            &["eval", "counts.txt", "test.txt", "--config", "bad.toml"],
            dir.path(),
        ),
        1,
    );
    fs::write(dir.path().join("bad-counts.txt"), "N 5\nU a 2\nB a a 1\n").unwrap();
    assert_code(&run(&["eval", "bad-counts.txt", "test.txt"], dir.path()), 1);

    // 2: I/O errors
    assert_code(&run(&["eval", "missing.txt", "test.txt"], dir.path()), 2);
    assert_code(&run(&["train", "missing.txt", "out.txt"], dir.path()), 2);
    assert_code(
        &run(&["rescore", "counts.txt", "no-such-dir"], dir.path()),
        2,
    );

    // clap's own usage failure
    let out = run(&["no-such-subcommand"], dir.path());
    assert_eq!(out.status.code(), Some(2)); // clap reserves 2 for argument parse errors
}

#[test]
fn gen_is_byte_reproducible_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = run(
            &[
                "gen",
                ".",
                "--seed",
                "12",
                "--train-sentences",
                "100",
                "--tune-sentences",
                "20",
                "--test-sentences",
                "20",
                "--lattices",
                "5",
            ],
            dir,
        );
        assert_code(&out, 0);
    }
    for name in [
        "train.txt",
        "tune.txt",
        "test.txt",
        "lattices/0000.lat",
        "lattices/0004.lat",
    ] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{} differs between identical seeds", name);
    }
    // a different seed must actually change the data
    let out = run(
        &[
            "gen",
            "other",
            "--seed",
            "13",
            "--train-sentences",
            "100",
            "--tune-sentences",
            "20",
            "--test-sentences",
            "20",
            "--lattices",
            "0",
        ],
        a.path(),
    );
    assert_code(&out, 0);
    assert_ne!(
        fs::read(a.path().join("train.txt")).unwrap(),
        fs::read(a.path().join("other/train.txt")).unwrap()
    );
}

#[test]
fn train_output_matches_library_counts() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let text = fs::read_to_string(dir.path().join("train.txt")).unwrap();
    let sentences = simbigram::corpus::tokenize(&text);
    let (vocab, counts) = build_counts(&sentences, 1).unwrap();

    let file = fs::File::open(dir.path().join("counts.txt")).unwrap();
    let (cli_vocab, cli_counts) = read_counts(std::io::BufReader::new(file)).unwrap();
    assert_eq!(vocab.words(), cli_vocab.words());
    assert_eq!(counts, cli_counts);
}

#[test]
fn sim_with_gamma_one_equals_katz() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let katz = run(
        &["eval", "counts.txt", "test.txt", "--scheme", "katz"],
        dir.path(),
    );
    let sim = run(
        &[
            "eval",
            "counts.txt",
            "test.txt",
            "--scheme",
            "sim",
            "--gamma",
            "1.0",
        ],
        dir.path(),
    );
    assert_code(&katz, 0);
    assert_code(&sim, 0);
    assert_eq!(stdout(&katz), stdout(&sim));
}

#[test]
fn csv_format_emits_header_and_row() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = run(
        &["eval", "counts.txt", "test.txt", "--format", "csv"],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "csv output: {:?}", lines);
    assert!(
        lines[0].starts_with("bigrams_scored,"),
        "header: {}",
        lines[0]
    );
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
}

#[test]
fn neighbors_excludes_the_word_itself() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = run(
        &["neighbors", "counts.txt", "c0w0", "--k", "30"],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = stdout(&out);
    assert!(
        !text
            .lines()
            .any(|l| l.split_whitespace().nth(1) == Some("c0w0")),
        "{}",
        text
    );
    assert!(text.lines().count() > 0);
}

#[test]
fn prob_on_seen_pair_is_scheme_independent() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    // find a seen pair straight from the counts file
    let file = fs::File::open(dir.path().join("counts.txt")).unwrap();
    let (vocab, counts) = read_counts(std::io::BufReader::new(file)).unwrap();
    let (w1, w2, _) = counts.bigrams().find(|&(_, _, c)| c >= 2).unwrap();
    let out = run(
        &["prob", "counts.txt", vocab.word(w1), vocab.word(w2)],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = stdout(&out);
    let values: Vec<&str> = text
        .lines()
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    assert_eq!(values.len(), 3);
    assert!(values.windows(2).all(|p| p[0] == p[1]), "{:?}", values);
}

#[test]
fn rescore_matches_direct_library_run() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let out = run(&["rescore", "counts.txt", "lattices"], dir.path());
    assert_code(&out, 0);
    let text = stdout(&out);

    let file = fs::File::open(dir.path().join("counts.txt")).unwrap();
    let (vocab, counts) = read_counts(std::io::BufReader::new(file)).unwrap();
    let mut lattices = Vec::new();
    let mut names: Vec<_> = fs::read_dir(dir.path().join("lattices"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    names.sort();
    for path in names {
        let f = fs::File::open(path).unwrap();
        let (lat, _) = parse_lattice(std::io::BufReader::new(f), &vocab).unwrap();
        lattices.push(lat);
    }
    let model = Arc::new(BackoffModel::new(vocab, counts, BackoffConfig::default()).unwrap());
    let katz = Estimator::new(Arc::clone(&model), Arc::new(UnigramScheme));
    let sim = similarity_estimator(
        Arc::clone(&model),
        SimilarityParams::default(),
        KlMode::Exact,
    );
    let rep = disagreement_report(&lattices, &katz, &sim, 1.0).unwrap();

    let field = |label: &str| -> u64 {
        text.lines()
            .find(|l| l.starts_with(label))
            .unwrap_or_else(|| panic!("missing {:?} in {}", label, text))
            .split_whitespace()
            .last()
            .unwrap()
            .parse()
            .unwrap()
    };
    assert_eq!(field("disagreements"), rep.disagreements);
    assert_eq!(field("katz"), rep.model_a_correct);
    assert_eq!(field("sim"), rep.model_b_correct);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    fs::write(
        dir.path().join("cfg.toml"),
        "scheme = \"sim\"\ngamma = 1.0\n",
    )
    .unwrap();
    // config alone: sim at gamma 1 is the katz baseline
    let via_config = run(
        &["eval", "counts.txt", "test.txt", "--config", "cfg.toml"],
        dir.path(),
    );
    let plain_katz = run(&["eval", "counts.txt", "test.txt"], dir.path());
    assert_code(&via_config, 0);
    assert_eq!(stdout(&via_config), stdout(&plain_katz));
    // flag beats config
    let overridden = run(
        &[
            "eval",
            "counts.txt",
            "test.txt",
            "--config",
            "cfg.toml",
            "--gamma",
            "0.15",
        ],
        dir.path(),
    );
    assert_code(&overridden, 0);
    assert_ne!(stdout(&overridden), stdout(&plain_katz));
}
