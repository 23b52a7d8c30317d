//! Command-line front end: corpus -> counts -> models -> reports.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 I/O error.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use simbigram::backoff::{counts_of_counts, BackoffConfig, BackoffModel, Estimator, UnigramScheme};
use simbigram::cooc::{CoocModel, CoocScheme, InterpolatedCooc};
use simbigram::corpus::{build_counts, read_counts, tokenize_bytes, write_counts, Vocabulary};
use simbigram::eval::{
    format_grid, format_perplexity, grid_search, map_tokens, perplexity, BigramScorer, ParamGrid,
    ReportFormat,
};
use simbigram::lattice::{disagreement_report, parse_lattice, Lattice};
use simbigram::similarity::{similarity_estimator, KlMode, SimilarityModel, SimilarityParams};
use simbigram::synth::{
    format_lattice, generate_lattices, holdout_bigram_types, seeded_rng, LatticeGenConfig,
    PlantedModel,
};

#[derive(Parser)]
#[command(
    name = "simbigram",
    version,
    about = "Bigram language modeling with similarity-based smoothing"
)]
struct Cli {
    /// Optional TOML config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count bigrams in a training text and write a counts file.
    Train {
        /// Training text, one sentence per line.
        input: PathBuf,
        /// Output counts file.
        output: PathBuf,
        /// Words rarer than this map to the unknown token.
        #[arg(long, default_value_t = 1)]
        min_word_count: u64,
    },
    /// Report perplexity of a model on a test text.
    Eval {
        /// Counts file from `train`.
        counts: PathBuf,
        /// Test text, one sentence per line.
        test: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "text")]
        format: ReportFormat,
    },
    /// Grid-search similarity parameters on a tuning text.
    Tune {
        counts: PathBuf,
        /// Tuning text used to pick parameters.
        tune: PathBuf,
        /// Held-out text the chosen parameters are reported on.
        test: PathBuf,
        /// Comma-separated k grid.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        /// Comma-separated t grid.
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
        /// Comma-separated beta grid.
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<f64>>,
        /// Comma-separated gamma grid.
        #[arg(long, value_delimiter = ',')]
        gamma: Option<Vec<f64>>,
        #[command(flatten)]
        backoff: BackoffArgs,
        #[arg(long, default_value = "text")]
        format: ReportFormat,
    },
    /// Print the nearest neighbors of a word with distances and weights.
    Neighbors {
        counts: PathBuf,
        word: String,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Print P(w2|w1) under every scheme side by side.
    Prob {
        counts: PathBuf,
        w1: String,
        w2: String,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Rescore lattices with two models and count disagreements.
    Rescore {
        counts: PathBuf,
        /// Directory of lattice files (one lattice per file).
        lattice_dir: PathBuf,
        /// Scheme for the baseline model.
        #[arg(long, default_value = "katz")]
        scheme_a: String,
        /// Scheme for the challenger model.
        #[arg(long, default_value = "sim")]
        scheme_b: String,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        lm_weight: Option<f64>,
    },
    /// Generate synthetic class-structured corpora and confusable lattices.
    Gen {
        /// Output directory.
        out_dir: PathBuf,
        /// RNG seed; the same seed reproduces the same data byte for byte.
        #[arg(long, default_value_t = 17)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        classes: usize,
        #[arg(long, default_value_t = 25)]
        words_per_class: usize,
        #[arg(long, default_value_t = 2000)]
        train_sentences: usize,
        #[arg(long, default_value_t = 300)]
        tune_sentences: usize,
        #[arg(long, default_value_t = 300)]
        test_sentences: usize,
        /// Fraction of training bigram types to hold out.
        #[arg(long, default_value_t = 0.2)]
        holdout: f64,
        /// Number of lattices to generate (0 to skip).
        #[arg(long, default_value_t = 200)]
        lattices: usize,
        /// Acoustic margin favoring the confusable word.
        #[arg(long, default_value_t = 0.5)]
        acoustic_margin: f64,
    },
}

/// Back-off parameters shared by every model-evaluating subcommand.
#[derive(Args, Debug, Clone, Copy)]
struct BackoffArgs {
    /// Bigrams rarer than this count as unseen.
    #[arg(long)]
    min_bigram_count: Option<u64>,
    /// Counts at or above this are not discounted (0 = no ceiling).
    #[arg(long)]
    discount_ceiling: Option<u64>,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Redistribution scheme: katz, sim, or cooc.
    #[arg(long)]
    scheme: Option<String>,
    #[command(flatten)]
    backoff: BackoffArgs,
    /// Maximum neighbor count.
    #[arg(long)]
    k: Option<usize>,
    /// KL distance threshold.
    #[arg(long)]
    t: Option<f64>,
    /// Neighbor weight decay.
    #[arg(long)]
    beta: Option<f64>,
    /// Unigram interpolation weight.
    #[arg(long)]
    gamma: Option<f64>,
    /// Interpolation weights for the full cooccurrence model
    /// (MLE bigram, smoothed, unigram); must sum to 1.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
}

/// Defaults loadable from a TOML config file. Flags override these; these
/// override the built-in defaults.
#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    scheme: Option<String>,
    min_bigram_count: Option<u64>,
    discount_ceiling: Option<u64>,
    k: Option<usize>,
    t: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    lm_weight: Option<f64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => write!(f, "{}", m),
        }
    }
}

fn io_err<E: std::fmt::Display>(context: &str, e: E) -> CliError {
    CliError::Io(format!("{}: {}", context, e))
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn read_text(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| io_err(&path.display().to_string(), e))?;
    tokenize_bytes(&bytes).map_err(usage)
}

fn load_counts(path: &Path) -> Result<(Vocabulary, simbigram::CountTable), CliError> {
    let file = File::open(path).map_err(|e| io_err(&path.display().to_string(), e))?;
    read_counts(BufReader::new(file)).map_err(usage)
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| io_err(&p.display().to_string(), e))?;
            toml::from_str(&text).map_err(usage)
        }
    }
}

fn backoff_config(args: BackoffArgs, file: &FileConfig) -> BackoffConfig {
    let defaults = BackoffConfig::default();
    let ceiling = match args.discount_ceiling.or(file.discount_ceiling) {
        Some(0) => None,
        Some(c) => Some(c),
        None => defaults.discount_ceiling,
    };
    BackoffConfig {
        discount_ceiling: ceiling,
        min_bigram_count: args
            .min_bigram_count
            .or(file.min_bigram_count)
            .unwrap_or(defaults.min_bigram_count),
    }
}

fn sim_params(args: &ModelArgs, file: &FileConfig) -> Result<SimilarityParams, CliError> {
    let d = SimilarityParams::default();
    let params = SimilarityParams {
        k: args.k.or(file.k).unwrap_or(d.k),
        t: args.t.or(file.t).unwrap_or(d.t),
        beta: args.beta.or(file.beta).unwrap_or(d.beta),
        gamma: args.gamma.or(file.gamma).unwrap_or(d.gamma),
    };
    params.validate().map_err(CliError::Usage)?;
    Ok(params)
}

fn build_estimator(
    scheme: &str,
    model: Arc<BackoffModel>,
    params: SimilarityParams,
) -> Result<Estimator, CliError> {
    match scheme {
        "katz" => Ok(Estimator::new(model, Arc::new(UnigramScheme))),
        "sim" => Ok(similarity_estimator(model, params, KlMode::Exact)),
        "cooc" => {
            let scheme = Arc::new(CoocScheme::new(model.counts()));
            Ok(Estimator::new(model, scheme))
        }
        other => Err(CliError::Usage(format!(
            "unknown scheme {:?} (expected katz, sim, or cooc)",
            other
        ))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_cfg = load_file_config(&cli.config)?;
    match cli.command {
        Command::Train {
            input,
            output,
            min_word_count,
        } => {
            if min_word_count < 1 {
                return Err(CliError::Usage("min-word-count must be at least 1".into()));
            }
            let sentences = read_text(&input)?;
            let (vocab, table) = build_counts(&sentences, min_word_count).map_err(usage)?;
            let mut out =
                File::create(&output).map_err(|e| io_err(&output.display().to_string(), e))?;
            write_counts(&mut out, &table, &vocab).map_err(usage)?;
            let fof = counts_of_counts(&table);
            println!(
                "vocab {}  N {}  n1 {}",
                vocab.len(),
                table.total_bigrams(),
                fof.n(1)
            );
            Ok(())
        }
        Command::Eval {
            counts,
            test,
            model: margs,
            format,
        } => {
            let (vocab, table) = load_counts(&counts)?;
            let config = backoff_config(margs.backoff, &file_cfg);
            let params = sim_params(&margs, &file_cfg)?;
            let scheme = margs
                .scheme
                .clone()
                .or_else(|| file_cfg.scheme.clone())
                .unwrap_or_else(|| "katz".into());
            let test_ids = map_tokens(&vocab, &read_text(&test)?);
            let model = Arc::new(BackoffModel::new(vocab, table, config).map_err(usage)?);
            let report = if let Some(lambdas) = &margs.lambdas {
                if lambdas.len() != 3 {
                    return Err(CliError::Usage("--lambdas needs three values".into()));
                }
                let cooc = CoocModel::new(model.counts());
                let interp =
                    InterpolatedCooc::new(&cooc, &model, [lambdas[0], lambdas[1], lambdas[2]])
                        .map_err(CliError::Usage)?;
                struct InterpScorer<'a>(&'a InterpolatedCooc<'a>);
                impl BigramScorer for InterpScorer<'_> {
                    fn score(
                        &self,
                        w1: simbigram::WordId,
                        w2: simbigram::WordId,
                    ) -> Result<f64, simbigram::backoff::BackoffError> {
                        Ok(self.0.prob(w1, w2).unwrap_or(0.0))
                    }
                }
                perplexity(&InterpScorer(&interp), &model, &test_ids).map_err(usage)?
            } else {
                let est = build_estimator(&scheme, Arc::clone(&model), params)?;
                perplexity(&est, &model, &test_ids).map_err(usage)?
            };
            print!("{}", format_perplexity(&report, format));
            Ok(())
        }
        Command::Tune {
            counts,
            tune,
            test,
            k,
            t,
            beta,
            gamma,
            backoff,
            format,
        } => {
            let (vocab, table) = load_counts(&counts)?;
            let config = backoff_config(backoff, &file_cfg);
            let tune_ids = map_tokens(&vocab, &read_text(&tune)?);
            let test_ids = map_tokens(&vocab, &read_text(&test)?);
            let model = Arc::new(BackoffModel::new(vocab, table, config).map_err(usage)?);
            let defaults = ParamGrid::default();
            let grid = ParamGrid {
                k: k.unwrap_or(defaults.k),
                t: t.unwrap_or(defaults.t),
                beta: beta.unwrap_or(defaults.beta),
                gamma: gamma.unwrap_or(defaults.gamma),
            };
            let result =
                grid_search(model, &grid, &tune_ids, &test_ids, KlMode::Exact).map_err(usage)?;
            print!("{}", format_grid(&result, format));
            Ok(())
        }
        Command::Neighbors {
            counts,
            word,
            model: margs,
        } => {
            let (vocab, table) = load_counts(&counts)?;
            let config = backoff_config(margs.backoff, &file_cfg);
            let params = sim_params(&margs, &file_cfg)?;
            let id = vocab
                .id(&word)
                .ok_or_else(|| CliError::Usage(format!("word {:?} not in vocabulary", word)))?;
            let model = Arc::new(BackoffModel::new(vocab, table, config).map_err(usage)?);
            let sim = SimilarityModel::new(Arc::clone(&model), params, KlMode::Exact);
            let ns = sim.neighbor_set(id).map_err(usage)?;
            let mut stdout = std::io::stdout().lock();
            for (rank, &(n, d, w)) in ns.neighbors.iter().enumerate() {
                writeln!(
                    stdout,
                    "{} {} {:.6} {:.6}",
                    rank + 1,
                    model.vocab().word(n),
                    d,
                    w
                )
                .map_err(|e| io_err("stdout", e))?;
            }
            Ok(())
        }
        Command::Prob {
            counts,
            w1,
            w2,
            model: margs,
        } => {
            let (vocab, table) = load_counts(&counts)?;
            let config = backoff_config(margs.backoff, &file_cfg);
            let params = sim_params(&margs, &file_cfg)?;
            let a = vocab.id_or_unk(&w1);
            let b = vocab.id_or_unk(&w2);
            let model = Arc::new(BackoffModel::new(vocab, table, config).map_err(usage)?);
            for scheme in ["katz", "sim", "cooc"] {
                let est = build_estimator(scheme, Arc::clone(&model), params)?;
                let p = est.prob(a, b).map_err(usage)?;
                println!("{:5} {:.10e}", scheme, p);
            }
            Ok(())
        }
        Command::Rescore {
            counts,
            lattice_dir,
            scheme_a,
            scheme_b,
            model: margs,
            lm_weight,
        } => {
            let (vocab, table) = load_counts(&counts)?;
            let config = backoff_config(margs.backoff, &file_cfg);
            let params = sim_params(&margs, &file_cfg)?;
            let lm_weight = lm_weight.or(file_cfg.lm_weight).unwrap_or(1.0);
            let mut lattices: Vec<Lattice> = Vec::new();
            let mut entries: Vec<PathBuf> = std::fs::read_dir(&lattice_dir)
                .map_err(|e| io_err(&lattice_dir.display().to_string(), e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            entries.sort();
            for path in &entries {
                let file = File::open(path).map_err(|e| io_err(&path.display().to_string(), e))?;
                let (lat, unknown) = parse_lattice(BufReader::new(file), &vocab).map_err(usage)?;
                for w in unknown {
                    eprintln!(
                        "warning: {}: unknown word {:?} mapped to unk",
                        path.display(),
                        w
                    );
                }
                lattices.push(lat);
            }
            let model = Arc::new(BackoffModel::new(vocab, table, config).map_err(usage)?);
            let a = build_estimator(&scheme_a, Arc::clone(&model), params)?;
            let b = build_estimator(&scheme_b, Arc::clone(&model), params)?;
            let rep = disagreement_report(&lattices, &a, &b, lm_weight).map_err(usage)?;
            println!("lattices          {:>8}", lattices.len());
            println!("disagreements     {:>8}", rep.disagreements);
            println!("{:<8} correct  {:>8}", scheme_a, rep.model_a_correct);
            println!("{:<8} correct  {:>8}", scheme_b, rep.model_b_correct);
            println!("sign test p       {:>8.4}", rep.sign_test_p);
            Ok(())
        }
        Command::Gen {
            out_dir,
            seed,
            classes,
            words_per_class,
            train_sentences,
            tune_sentences,
            test_sentences,
            holdout,
            lattices,
            acoustic_margin,
        } => {
            if !(0.0..1.0).contains(&holdout) {
                return Err(CliError::Usage("holdout must lie in [0, 1)".into()));
            }
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| io_err(&out_dir.display().to_string(), e))?;
            let planted = PlantedModel::class_structured(classes, words_per_class);
            let mut rng = seeded_rng(seed);
            let raw_train = planted.sample_corpus(train_sentences, 6..=14, &mut rng);
            let (train, held) = holdout_bigram_types(&raw_train, holdout, &mut rng);
            let tune = planted.sample_corpus(tune_sentences, 6..=14, &mut rng);
            let test = planted.sample_corpus(test_sentences, 6..=14, &mut rng);

            let write_corpus = |name: &str, corpus: &[Vec<String>]| -> Result<(), CliError> {
                let path = out_dir.join(name);
                let mut text = String::new();
                for sent in corpus {
                    text.push_str(&sent.join(" "));
                    text.push('\n');
                }
                std::fs::write(&path, text).map_err(|e| io_err(&path.display().to_string(), e))
            };
            write_corpus("train.txt", &train)?;
            write_corpus("tune.txt", &tune)?;
            write_corpus("test.txt", &test)?;

            if lattices > 0 {
                let (vocab, _) = build_counts(&train, 1).map_err(usage)?;
                let lat_dir = out_dir.join("lattices");
                std::fs::create_dir_all(&lat_dir)
                    .map_err(|e| io_err(&lat_dir.display().to_string(), e))?;
                let config = LatticeGenConfig {
                    acoustic_margin,
                    ..LatticeGenConfig::default()
                };
                for (i, lat) in generate_lattices(&planted, &vocab, &config, lattices, &mut rng)
                    .iter()
                    .enumerate()
                {
                    let path = lat_dir.join(format!("{:04}.lat", i));
                    std::fs::write(&path, format_lattice(lat, &vocab))
                        .map_err(|e| io_err(&path.display().to_string(), e))?;
                }
            }
            println!(
                "seed {}  train {} sentences  held-out bigram types {}",
                seed,
                train.len(),
                held.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}
