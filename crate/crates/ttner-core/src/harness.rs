//! Experiment-grid runner: trains and scores one tagger per cell of a
//! (normalizer × capitalization × embedding source) grid described by a
//! declarative config file, and renders the results as a fixed-width
//! ladder table (BL, BL+Norm, BL+WordE, BL+WordE+Norm, each with and
//! without Cap).
//!
//! Cell failures (missing vector file, training error) are recorded and
//! the rest of the grid still runs. All outputs are pure functions of
//! the config and seeds, so reruns are byte-identical.

use crate::corpus::{read_conll, Sentence};
use crate::embeddings::Embeddings;
use crate::error::{Error, Result};
use crate::eval::{score_sentences, ScoreReport};
use crate::normalizer::{normalize_sentences, plugin_by_name};
use crate::tagger::{train, TaggerConfig};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// One grid cell's coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub train: String,
    pub test: String,
    /// Embedding source name from the config; "none" disables vectors.
    pub source: String,
    pub cap: bool,
    pub normalizer: String,
    pub seed: u64,
}

/// Parsed grid config. Axis entries keep config order; paths are
/// resolved relative to the config file's directory.
#[derive(Debug, Clone)]
pub struct GridConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    pub seed: u64,
    pub epochs: usize,
    pub emb_scale: f64,
    pub results: Option<PathBuf>,
    pub embeddings: Vec<(String, Option<PathBuf>)>,
    pub normalizers: Vec<(String, Option<PathBuf>)>,
    pub caps: Vec<bool>,
    /// FNV-1a hash of the raw config text (provenance).
    pub hash: u64,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

enum Section {
    Top,
    Embeddings,
    Normalizer,
    Cap,
}

/// Parses the declarative grid format: top-level `key = value` lines
/// (train, test, seed, epochs, emb_scale, results), then axis sections
/// `[embeddings]`, `[normalizer]`, `[cap]` holding `name` or
/// `name = path` entries. `#` starts a comment.
pub fn parse_grid_config(text: &str, base: &Path) -> Result<GridConfig> {
    let mut config = GridConfig {
        train: PathBuf::new(),
        test: PathBuf::new(),
        seed: 1,
        epochs: 10,
        emb_scale: 1.0,
        results: None,
        embeddings: Vec::new(),
        normalizers: Vec::new(),
        caps: Vec::new(),
        hash: fnv1a(text.as_bytes()),
    };
    let mut section = Section::Top;
    let mut saw_train = false;
    let mut saw_test = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| Error::FormatError { line: lineno, msg };

        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| fail(format!("unterminated section header {line:?}")))?;
            section = match name {
                "embeddings" => Section::Embeddings,
                "normalizer" => Section::Normalizer,
                "cap" => Section::Cap,
                _ => return Err(fail(format!("unknown section [{name}]"))),
            };
            continue;
        }

        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (line, None),
        };
        if key.is_empty() {
            return Err(fail("empty key".to_string()));
        }

        match section {
            Section::Top => {
                let value =
                    value.ok_or_else(|| fail(format!("expected key = value, got {line:?}")))?;
                match key {
                    "train" => {
                        config.train = base.join(value);
                        saw_train = true;
                    }
                    "test" => {
                        config.test = base.join(value);
                        saw_test = true;
                    }
                    "seed" => {
                        config.seed = value
                            .parse()
                            .map_err(|_| fail(format!("bad seed {value:?}")))?
                    }
                    "epochs" => {
                        config.epochs = value
                            .parse()
                            .map_err(|_| fail(format!("bad epochs {value:?}")))?
                    }
                    "emb_scale" => {
                        config.emb_scale = value
                            .parse()
                            .map_err(|_| fail(format!("bad emb_scale {value:?}")))?
                    }
                    "results" => config.results = Some(base.join(value)),
                    _ => return Err(fail(format!("unknown key {key:?}"))),
                }
            }
            Section::Embeddings | Section::Normalizer => {
                let axis = if matches!(section, Section::Embeddings) {
                    &mut config.embeddings
                } else {
                    &mut config.normalizers
                };
                if axis.iter().any(|(n, _)| n == key) {
                    return Err(fail(format!("duplicate entry {key:?}")));
                }
                let path = value.map(|v| base.join(v));
                if key == "none" && path.is_some() {
                    return Err(fail("\"none\" takes no path".to_string()));
                }
                axis.push((key.to_string(), path));
            }
            Section::Cap => {
                let on = match (key, value) {
                    ("on", None) => true,
                    ("off", None) => false,
                    _ => return Err(fail(format!("cap entries are on/off, got {line:?}"))),
                };
                if config.caps.contains(&on) {
                    return Err(fail(format!("duplicate entry {key:?}")));
                }
                config.caps.push(on);
            }
        }
    }

    if !saw_train {
        return Err(Error::FormatError {
            line: 0,
            msg: "missing required key \"train\"".to_string(),
        });
    }
    if !saw_test {
        return Err(Error::FormatError {
            line: 0,
            msg: "missing required key \"test\"".to_string(),
        });
    }
    if config.embeddings.is_empty() {
        config.embeddings.push(("none".to_string(), None));
    }
    if config.normalizers.is_empty() {
        config.normalizers.push(("none".to_string(), None));
    }
    if config.caps.is_empty() {
        config.caps.push(true);
    }
    Ok(config)
}

pub fn load_grid_config(path: impl AsRef<Path>) -> Result<GridConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_grid_config(&text, base)
}

/// One executed cell: its spec, table coordinates, and either a score
/// report or the failure message.
#[derive(Debug, Clone)]
pub struct GridCell {
    pub spec: ExperimentSpec,
    pub row: String,
    pub column: String,
    pub outcome: std::result::Result<ScoreReport, String>,
}

/// All executed cells plus provenance. The timestamp never appears in
/// rendered output, keeping reruns byte-identical.
#[derive(Debug, Clone)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    pub config_hash: u64,
    pub started_unix: u64,
}

fn row_label(worde: bool, normalizer: &str, cap: bool, plain_norm: bool) -> String {
    let mut label = String::from("BL");
    if worde {
        label.push_str("+WordE");
    }
    if normalizer != "none" {
        if plain_norm {
            label.push_str("+Norm");
        } else {
            let _ = write!(label, "+Norm({normalizer})");
        }
    }
    if cap {
        label.push_str("+Cap");
    }
    label
}

/// Runs every cell: rows iterate (no-vectors first, then with vectors) ×
/// normalizer × cap in config order; columns are the embedding sources.
/// Datasets must load; vector files and normalizer lexicons are
/// per-cell, so their failures mark cells failed and the grid continues.
pub fn run_grid(config: &GridConfig) -> Result<GridResult> {
    let train_set = read_conll(&config.train)?;
    let test_set = read_conll(&config.test)?;

    // shared per-source vector loads
    let mut vectors: HashMap<&str, std::result::Result<Embeddings, String>> = HashMap::new();
    for (name, path) in &config.embeddings {
        if name == "none" {
            continue;
        }
        let loaded = match path {
            Some(p) => Embeddings::load_w2v_text(p).map_err(|e| e.to_string()),
            None => Err(format!("embedding source {name:?} has no vector file")),
        };
        vectors.insert(name, loaded);
    }

    // shared per-normalizer dataset views
    type Prepared = std::result::Result<(Vec<Sentence>, Vec<Sentence>), String>;
    let mut datasets: HashMap<&str, Prepared> = HashMap::new();
    for (name, path) in &config.normalizers {
        let prepared = plugin_by_name(name, path.as_deref())
            .map(|plugin| {
                (
                    normalize_sentences(&train_set, plugin.as_ref()),
                    normalize_sentences(&test_set, plugin.as_ref()),
                )
            })
            .map_err(|e| e.to_string());
        datasets.insert(name, prepared);
    }

    let non_none_normalizers = config
        .normalizers
        .iter()
        .filter(|(n, _)| n != "none")
        .count();
    let has_none_source = config.embeddings.iter().any(|(n, _)| n == "none");
    let non_none_sources: Vec<&str> = config
        .embeddings
        .iter()
        .map(|(n, _)| n.as_str())
        .filter(|n| *n != "none")
        .collect();

    let mut cells = Vec::new();
    for worde in [false, true] {
        let columns: &[&str] = if worde {
            &non_none_sources
        } else if has_none_source {
            &["none"]
        } else {
            &[]
        };
        for (normalizer, _) in &config.normalizers {
            for &cap in &config.caps {
                for &source in columns {
                    let spec = ExperimentSpec {
                        train: config.train.display().to_string(),
                        test: config.test.display().to_string(),
                        source: source.to_string(),
                        cap,
                        normalizer: normalizer.clone(),
                        seed: config.seed,
                    };
                    let row = row_label(worde, normalizer, cap, non_none_normalizers <= 1);
                    let outcome = run_cell(
                        &spec,
                        config,
                        datasets.get(normalizer.as_str()).expect("prepared above"),
                        if worde {
                            Some(vectors.get(source).expect("loaded above"))
                        } else {
                            None
                        },
                    );
                    cells.push(GridCell {
                        spec,
                        row,
                        column: source.to_string(),
                        outcome,
                    });
                }
            }
        }
    }

    Ok(GridResult {
        cells,
        config_hash: config.hash,
        started_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    })
}

fn run_cell(
    spec: &ExperimentSpec,
    config: &GridConfig,
    dataset: &std::result::Result<(Vec<Sentence>, Vec<Sentence>), String>,
    vectors: Option<&std::result::Result<Embeddings, String>>,
) -> std::result::Result<ScoreReport, String> {
    let (train_set, test_set) = dataset.as_ref().map_err(String::clone)?;
    let embeddings = match vectors {
        Some(Ok(e)) => Some(e),
        Some(Err(msg)) => return Err(msg.clone()),
        None => None,
    };
    let tagger_config = TaggerConfig {
        epochs: config.epochs,
        seed: spec.seed,
        cap: spec.cap,
        emb_scale: config.emb_scale,
    };
    let model = train(train_set, &tagger_config, embeddings).map_err(|e| e.to_string())?;
    score_sentences(&model, test_set, embeddings).map_err(|e| e.to_string())
}

/// Renders the fixed-width result table. Cells show overall F1 with two
/// decimals; '*' marks row maxima and '_' column maxima (only where the
/// row or column has at least two scored cells); failed cells show
/// FAILED and inapplicable row/column pairs show '-'. Failure details
/// follow the table.
pub fn render_table(result: &GridResult) -> String {
    let mut rows: Vec<&str> = Vec::new();
    let mut columns: Vec<&str> = Vec::new();
    for cell in &result.cells {
        if !rows.contains(&cell.row.as_str()) {
            rows.push(&cell.row);
        }
        if !columns.contains(&cell.column.as_str()) {
            columns.push(&cell.column);
        }
    }

    let find = |row: &str, column: &str| {
        result
            .cells
            .iter()
            .find(|c| c.row == row && c.column == column)
    };
    let f1 = |cell: &GridCell| cell.outcome.as_ref().ok().map(|r| r.overall.f1());

    let mut texts: HashMap<(usize, usize), String> = HashMap::new();
    for (ri, row) in rows.iter().enumerate() {
        for (ci, column) in columns.iter().enumerate() {
            let Some(cell) = find(row, column) else {
                texts.insert((ri, ci), "-".to_string());
                continue;
            };
            let mut text = match &cell.outcome {
                Ok(report) => format!("{:.2}", report.overall.f1()),
                Err(_) => "FAILED".to_string(),
            };
            if let Some(score) = f1(cell) {
                let row_scores: Vec<f64> = columns
                    .iter()
                    .filter_map(|c| find(row, c).and_then(&f1))
                    .collect();
                if row_scores.len() >= 2
                    && score >= row_scores.iter().cloned().fold(f64::MIN, f64::max)
                {
                    text.push('*');
                }
                let col_scores: Vec<f64> = rows
                    .iter()
                    .filter_map(|r| find(r, column).and_then(&f1))
                    .collect();
                if col_scores.len() >= 2
                    && score >= col_scores.iter().cloned().fold(f64::MIN, f64::max)
                {
                    text.push('_');
                }
            }
            texts.insert((ri, ci), text);
        }
    }

    let label_width = rows
        .iter()
        .map(|r| r.chars().count())
        .chain(["Setting".len()])
        .max()
        .unwrap_or(0);
    let col_width = |ci: usize| {
        rows.iter()
            .enumerate()
            .map(|(ri, _)| texts[&(ri, ci)].chars().count())
            .chain([columns[ci].chars().count()])
            .max()
            .unwrap_or(0)
    };

    let mut out = String::new();
    let _ = write!(out, "{:<label_width$}", "Setting");
    for (ci, column) in columns.iter().enumerate() {
        let _ = write!(out, "  {:>w$}", column, w = col_width(ci));
    }
    out.push('\n');
    for (ri, row) in rows.iter().enumerate() {
        let _ = write!(out, "{row:<label_width$}");
        for ci in 0..columns.len() {
            let _ = write!(out, "  {:>w$}", texts[&(ri, ci)], w = col_width(ci));
        }
        out.push('\n');
    }

    let failures: Vec<&GridCell> = result.cells.iter().filter(|c| c.outcome.is_err()).collect();
    if !failures.is_empty() {
        out.push('\n');
        for cell in failures {
            let msg = cell.outcome.as_ref().unwrap_err();
            let _ = writeln!(out, "failed: {} x {}: {msg}", cell.row, cell.column);
        }
    }
    out
}

/// Loads a config, runs the grid, writes the results file when
/// configured, and returns the result with its rendered table.
pub fn run_grid_file(path: impl AsRef<Path>) -> Result<(GridResult, String)> {
    let config = load_grid_config(path)?;
    let result = run_grid(&config)?;
    let mut rendered = format!("# grid fnv1a:{:016x}\n", result.config_hash);
    rendered.push_str(&render_table(&result));
    if let Some(results_path) = &config.results {
        fs::write(results_path, &rendered)?;
    }
    Ok((result, rendered))
}
