//! `ttner`: one binary wiring the pipeline stages together. Exit codes:
//! 0 success, 1 usage error, 2 data or format error (one-line diagnostic
//! on stderr).

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use ttner_core::corpus::{
    dataset_stats, filter_non_turkish, load_wordlist, preprocess, read_conll, write_conll,
};
use ttner_core::embeddings::{train_skipgram, Embeddings, SgnsConfig};
use ttner_core::eval::{cross_validate, report_kv, report_table, score_tagged};
use ttner_core::harness::run_grid_file;
use ttner_core::normalizer::{normalize_sentences, plugin_by_name, Normalizer};
use ttner_core::tagger::{load_model, save_model, tag, train, TaggerConfig};
use ttner_core::{Result, Sentence};

#[derive(Parser)]
#[command(
    name = "ttner",
    version,
    about = "Two-stage Turkish tweet NER: skip-gram embeddings and an averaged perceptron BILOU tagger"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_switch(s: &str) -> std::result::Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(format!("expected \"on\" or \"off\", got {s:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize raw tweets (one per line) into processed token lines
    Preprocess {
        /// Raw text file, one tweet per line
        input: PathBuf,
        /// Output file (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Wordlist of known Turkish surface forms; drops sentences whose
        /// known-word fraction is below theta
        #[arg(long)]
        wordlist: Option<PathBuf>,
        /// Minimum fraction of known alphabetic tokens to keep a sentence
        #[arg(long, default_value_t = 0.2)]
        theta: f64,
    },
    /// Train skip-gram word embeddings on a preprocessed corpus
    EmbedTrain {
        /// Corpus file: whitespace-separated tokens, one sentence per line
        #[arg(long)]
        corpus: PathBuf,
        /// Output vector file (word2vec text format)
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 200)]
        dim: usize,
        /// Context half-width
        #[arg(long, default_value_t = 2)]
        window: usize,
        /// Negative samples per (center, context) pair
        #[arg(long, default_value_t = 5)]
        negatives: usize,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        /// Initial learning rate
        #[arg(long, default_value_t = 0.025)]
        alpha: f64,
        #[arg(long, default_value_t = 5)]
        min_count: u64,
        /// Frequent-word subsampling threshold (off when omitted)
        #[arg(long)]
        subsample: Option<f64>,
        /// Worker threads; one keeps training bit-reproducible
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, env = "TTNER_SEED", default_value_t = 1)]
        seed: u64,
    },
    /// Print a word's nearest neighbors by cosine similarity
    EmbedQuery {
        #[arg(long)]
        vectors: PathBuf,
        word: String,
        /// Number of neighbors
        #[arg(short = 'n', long, default_value_t = 10)]
        count: usize,
    },
    /// Train the averaged perceptron tagger on a labeled CoNLL file
    NerTrain {
        /// Labeled CoNLL training file (BIO or BILOU)
        #[arg(long)]
        train: PathBuf,
        /// Output model file
        #[arg(long)]
        model: PathBuf,
        /// Word vector file enabling embedding features
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Token normalizer: none, deasciify, or lexicon (with --lexicon)
        #[arg(long, default_value = "none")]
        normalizer: String,
        /// Lexicon file for --normalizer lexicon
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Capitalization features
        #[arg(long, default_value = "on", value_parser = parse_switch, action = clap::ArgAction::Set)]
        cap: bool,
        /// Multiplier on embedding feature values
        #[arg(long, default_value_t = 1.0)]
        emb_scale: f64,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, env = "TTNER_SEED", default_value_t = 1)]
        seed: u64,
    },
    /// Tag input sentences and emit CoNLL with predicted labels
    NerTag {
        #[arg(long)]
        model: PathBuf,
        /// Input: .conll file (labels ignored) or plain text with
        /// whitespace-separated tokens, one sentence per line
        #[arg(long)]
        input: PathBuf,
        /// Output file (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long, default_value = "none")]
        normalizer: String,
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Score a predicted CoNLL file against gold
    NerEval { gold: PathBuf, pred: PathBuf },
    /// k-fold cross-validation on a labeled CoNLL file
    Crossval {
        #[arg(long)]
        data: PathBuf,
        #[arg(short, long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long, default_value = "none")]
        normalizer: String,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value = "on", value_parser = parse_switch, action = clap::ArgAction::Set)]
        cap: bool,
        #[arg(long, default_value_t = 1.0)]
        emb_scale: f64,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, env = "TTNER_SEED", default_value_t = 1)]
        seed: u64,
    },
    /// Entity, token and sentence counts of a labeled CoNLL file
    Stats { data: PathBuf },
    /// Run an experiment grid from a config file and render the table
    Grid { config: PathBuf },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli.command) {
        eprintln!("ttner: {e}");
        std::process::exit(2);
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn load_normalizer(name: &str, lexicon: Option<&Path>) -> Result<Box<dyn Normalizer>> {
    plugin_by_name(name, lexicon)
}

fn load_vectors(path: Option<&Path>) -> Result<Option<Embeddings>> {
    path.map(Embeddings::load_w2v_text).transpose()
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Preprocess {
            input,
            output,
            wordlist,
            theta,
        } => {
            let text = fs::read_to_string(&input)?;
            let mut sentences: Vec<Sentence> = text
                .lines()
                .map(preprocess)
                .filter(|s| !s.is_empty())
                .collect();
            if let Some(wordlist) = wordlist {
                let words = load_wordlist(&wordlist)?;
                let (kept, removed) = filter_non_turkish(&sentences, &words, theta);
                eprintln!(
                    "kept {} sentences, filtered {} below theta {theta}",
                    kept.len(),
                    removed.len()
                );
                sentences = kept;
            }
            let mut out = String::new();
            for sentence in &sentences {
                let processed: Vec<&str> = sentence
                    .tokens
                    .iter()
                    .map(|t| t.processed.as_str())
                    .collect();
                out.push_str(&processed.join(" "));
                out.push('\n');
            }
            emit(output.as_deref(), &out)
        }
        Command::EmbedTrain {
            corpus,
            output,
            dim,
            window,
            negatives,
            epochs,
            alpha,
            min_count,
            subsample,
            workers,
            seed,
        } => {
            let text = fs::read_to_string(&corpus)?;
            let sentences: Vec<Vec<String>> = text
                .lines()
                .map(|l| l.split_whitespace().map(str::to_string).collect::<Vec<_>>())
                .filter(|s: &Vec<String>| !s.is_empty())
                .collect();
            let config = SgnsConfig {
                dim,
                window,
                negatives,
                epochs,
                alpha0: alpha,
                min_count,
                seed,
                subsample,
                workers,
            };
            let model = train_skipgram(&sentences, &config)?;
            for (i, loss) in model.epoch_loss.iter().enumerate() {
                eprintln!("epoch {} mean loss {loss:.6}", i + 1);
            }
            model.embeddings.save_w2v_text(&output)
        }
        Command::EmbedQuery {
            vectors,
            word,
            count,
        } => {
            let emb = Embeddings::load_w2v_text(&vectors)?;
            let mut out = String::new();
            for (neighbor, cosine) in emb.nearest_neighbors(&word, count)? {
                out.push_str(&format!("{neighbor}\t{cosine:.6}\n"));
            }
            emit(None, &out)
        }
        Command::NerTrain {
            train: train_path,
            model: model_path,
            vectors,
            normalizer,
            lexicon,
            cap,
            emb_scale,
            epochs,
            seed,
        } => {
            let plugin = load_normalizer(&normalizer, lexicon.as_deref())?;
            let sentences = normalize_sentences(&read_conll(&train_path)?, plugin.as_ref());
            let emb = load_vectors(vectors.as_deref())?;
            let config = TaggerConfig {
                epochs,
                seed,
                cap,
                emb_scale,
            };
            let model = train(&sentences, &config, emb.as_ref())?;
            eprintln!(
                "trained on {} sentences ({} steps)",
                sentences.len(),
                model.config().steps
            );
            save_model(&model, &model_path)
        }
        Command::NerTag {
            model,
            input,
            output,
            vectors,
            normalizer,
            lexicon,
        } => {
            let model = load_model(&model)?;
            let plugin = load_normalizer(&normalizer, lexicon.as_deref())?;
            let emb = load_vectors(vectors.as_deref())?;
            if model.config().emb && emb.is_none() {
                eprintln!("ttner: warning: model uses embedding features but no --vectors given");
            }
            let sentences: Vec<Sentence> = if input.extension().is_some_and(|e| e == "conll") {
                read_conll(&input)?
            } else {
                fs::read_to_string(&input)?
                    .lines()
                    .map(|l| Sentence::from_surfaces(&l.split_whitespace().collect::<Vec<_>>()))
                    .filter(|s| !s.is_empty())
                    .collect()
            };
            let sentences = normalize_sentences(&sentences, plugin.as_ref());
            let tagged: Vec<Sentence> = sentences
                .into_iter()
                .map(|s| {
                    let (tags, _) = tag(&model, &s, emb.as_ref());
                    s.with_labels(tags)
                })
                .collect();
            match output {
                Some(path) => write_conll(&tagged, path),
                None => emit(None, &ttner_core::corpus::conll_to_string(&tagged)?),
            }
        }
        Command::NerEval { gold, pred } => {
            let gold = read_conll(&gold)?;
            let pred = read_conll(&pred)?;
            let report = score_tagged(&gold, &pred)?;
            emit(
                None,
                &format!("{}\n{}", report_table(&report), report_kv(&report)),
            )
        }
        Command::Crossval {
            data,
            k,
            vectors,
            normalizer,
            lexicon,
            cap,
            emb_scale,
            epochs,
            seed,
        } => {
            let plugin = load_normalizer(&normalizer, lexicon.as_deref())?;
            let sentences = normalize_sentences(&read_conll(&data)?, plugin.as_ref());
            let emb = load_vectors(vectors.as_deref())?;
            let config = TaggerConfig {
                epochs,
                seed,
                cap,
                emb_scale,
            };
            let report = cross_validate(&sentences, k, &config, emb.as_ref())?;
            let mut out = String::new();
            for (i, fold) in report.folds.iter().enumerate() {
                out.push_str(&format!(
                    "fold_{} precision={:.6} recall={:.6} f1={:.6}\n",
                    i + 1,
                    fold.overall.precision(),
                    fold.overall.recall(),
                    fold.overall.f1()
                ));
            }
            out.push_str(&format!("mean_f1={:.6}\n", report.mean_f1));
            emit(None, &out)
        }
        Command::Stats { data } => {
            let stats = dataset_stats(&read_conll(&data)?)?;
            emit(None, &format!("{stats}\n"))
        }
        Command::Grid { config } => {
            let (_, rendered) = run_grid_file(&config)?;
            emit(None, &rendered)
        }
    }
}
