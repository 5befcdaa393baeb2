//! End-to-end checks for the `ttner` binary: exit-code contract, error
//! prefix, and equivalence with the library the subcommands wrap.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use ttner_core::corpus::{dataset_stats, read_conll};
use ttner_core::embeddings::Embeddings;
use ttner_core::eval::{report_kv, report_table, score_tagged};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../ttner-core/data")
}

fn ttner<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_ttner"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    for args in [
        vec!["--help"],
        vec!["-h"],
        vec!["--version"],
        vec!["ner-train", "--help"],
    ] {
        let out = ttner(args.clone());
        assert_eq!(out.status.code(), Some(0), "{args:?}");
    }
    assert!(stdout(&ttner(["--help"])).contains("ttner"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["frobnicate"],
        vec!["stats"],
        vec!["stats", "--bogus-flag"],
        vec!["ner-train", "--train"],
    ] {
        let out = ttner(args.clone());
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn data_errors_exit_two_with_prefix() {
    let out = ttner(["stats", "/nonexistent/missing.conll"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.starts_with("ttner: "), "stderr was {err:?}");
    assert_eq!(err.lines().count(), 1, "one-line diagnostic expected");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conll");
    std::fs::write(&bad, "ali U-PER\n\n").unwrap(); // space, not tab
    let out = ttner(["stats".as_ref(), bad.as_os_str()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("ttner: "));
}

#[test]
fn empty_training_set_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.conll");
    std::fs::write(&empty, "").unwrap();
    let model = dir.path().join("out.model");
    let out = ttner([
        "ner-train".as_ref(),
        "--train".as_ref(),
        empty.as_os_str(),
        "--model".as_ref(),
        model.as_os_str(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("ttner: "));
    assert!(!model.exists());
}

#[test]
fn stats_matches_library_output() {
    let path = data_dir().join("twtds1.conll");
    let out = ttner(["stats".as_ref(), path.as_os_str()]);
    assert_eq!(out.status.code(), Some(0));
    let expected = format!("{}\n", dataset_stats(&read_conll(&path).unwrap()).unwrap());
    assert_eq!(stdout(&out), expected);
}

#[test]
fn eval_self_score_matches_library() {
    let path = data_dir().join("twtds2.conll");
    let out = ttner(["ner-eval".as_ref(), path.as_os_str(), path.as_os_str()]);
    assert_eq!(out.status.code(), Some(0));
    let gold = read_conll(&path).unwrap();
    let report = score_tagged(&gold, &gold).unwrap();
    let expected = format!("{}\n{}", report_table(&report), report_kv(&report));
    assert_eq!(stdout(&out), expected);
    assert!(stdout(&out).contains("overall_f1=1.000000"));
}

#[test]
fn seed_env_var_matches_flag() {
    let dir = tempfile::tempdir().unwrap();
    let train = data_dir().join("synth/train.conll");
    let by_flag = dir.path().join("flag.model");
    let by_env = dir.path().join("env.model");
    let other = dir.path().join("other.model");

    let out = ttner([
        "ner-train".as_ref(),
        "--train".as_ref(),
        train.as_os_str(),
        "--model".as_ref(),
        by_flag.as_os_str(),
        "--epochs".as_ref(),
        "2".as_ref(),
        "--seed".as_ref(),
        "7".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = Command::new(env!("CARGO_BIN_EXE_ttner"))
        .env("TTNER_SEED", "7")
        .arg("ner-train")
        .arg("--train")
        .arg(&train)
        .arg("--model")
        .arg(&by_env)
        .args(["--epochs", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = ttner([
        "ner-train".as_ref(),
        "--train".as_ref(),
        train.as_os_str(),
        "--model".as_ref(),
        other.as_os_str(),
        "--epochs".as_ref(),
        "2".as_ref(),
        "--seed".as_ref(),
        "8".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let flag_bytes = std::fs::read(&by_flag).unwrap();
    assert_eq!(flag_bytes, std::fs::read(&by_env).unwrap());
    assert_ne!(flag_bytes, std::fs::read(&other).unwrap());
}

#[test]
fn embed_query_matches_library_neighbors() {
    let vectors = data_dir().join("synth/synth.vec");
    let emb = Embeddings::load_w2v_text(&vectors).unwrap();
    let word = emb.vocab().word(0).to_string();

    let out = ttner([
        "embed-query".as_ref(),
        "--vectors".as_ref(),
        vectors.as_os_str(),
        word.as_ref(),
        "-n".as_ref(),
        "5".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let expected: String = emb
        .nearest_neighbors(&word, 5)
        .unwrap()
        .into_iter()
        .map(|(neighbor, cosine)| format!("{neighbor}\t{cosine:.6}\n"))
        .collect();
    assert_eq!(stdout(&out), expected);

    let out = ttner([
        "embed-query".as_ref(),
        "--vectors".as_ref(),
        vectors.as_os_str(),
        "noSuchWordAnywhere".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn preprocess_applies_twitter_conventions() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tweets.txt");
    std::fs::write(&input, "@ali İstanbul'da 3 gün http://t.co/x #tatil :)\n\n").unwrap();
    let out = ttner(["preprocess".as_ref(), input.as_os_str()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let line = stdout(&out);
    let tokens: Vec<&str> = line.trim_end().split(' ').collect();
    assert_eq!(
        tokens,
        [
            "<MENTION>",
            "istanbul'da",
            "0",
            "gün",
            "<URL>",
            "<HASHTAG>",
            "<SMILEY>"
        ]
    );
}

#[test]
fn preprocess_wordlist_filters_foreign_lines() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mixed.txt");
    std::fs::write(
        &input,
        "bugün hava çok güzel ve ben mutluyum\nthe quick brown fox jumps over everything\n",
    )
    .unwrap();
    let wordlist = data_dir().join("turkish_words.txt");
    let out = ttner([
        "preprocess".as_ref(),
        input.as_os_str(),
        "--wordlist".as_ref(),
        wordlist.as_os_str(),
        "--theta".as_ref(),
        "0.2".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("bugün"));
    assert!(!text.contains("quick"));
    assert!(stderr(&out).contains("filtered 1"));
}

#[test]
fn tag_eval_pipeline_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let train = data_dir().join("synth/train.conll");
    let test = data_dir().join("synth/test.conll");
    let model = dir.path().join("m.model");
    let pred = dir.path().join("pred.conll");

    let out = ttner([
        "ner-train".as_ref(),
        "--train".as_ref(),
        train.as_os_str(),
        "--model".as_ref(),
        model.as_os_str(),
        "--epochs".as_ref(),
        "3".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = ttner([
        "ner-tag".as_ref(),
        "--model".as_ref(),
        model.as_os_str(),
        "--input".as_ref(),
        test.as_os_str(),
        "--output".as_ref(),
        pred.as_os_str(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    // predictions align token-for-token with the input
    let gold = read_conll(&test).unwrap();
    let tagged = read_conll(&pred).unwrap();
    assert_eq!(gold.len(), tagged.len());
    for (g, p) in gold.iter().zip(&tagged) {
        assert_eq!(g.len(), p.len());
        assert!(p.labels.is_some());
    }

    let out = ttner(["ner-eval".as_ref(), test.as_os_str(), pred.as_os_str()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("overall_f1="));

    // plain-text input tags whitespace tokens
    let plain = dir.path().join("plain.txt");
    std::fs::write(&plain, "ali ankara gitti\n").unwrap();
    let out = ttner([
        "ner-tag".as_ref(),
        "--model".as_ref(),
        model.as_os_str(),
        "--input".as_ref(),
        plain.as_os_str(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "three token lines plus blank separator");
    assert!(lines[0].starts_with("ali\t"));
}

#[test]
fn cap_switch_takes_a_value() {
    let dir = tempfile::tempdir().unwrap();
    let train = data_dir().join("synth/train.conll");
    let model = dir.path().join("m.model");
    let out = ttner([
        "ner-train".as_ref(),
        "--train".as_ref(),
        train.as_os_str(),
        "--model".as_ref(),
        model.as_os_str(),
        "--epochs".as_ref(),
        "1".as_ref(),
        "--cap".as_ref(),
        "off".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let header: String = std::fs::read_to_string(&model)
        .unwrap()
        .lines()
        .take(2)
        .collect();
    assert!(header.contains("cap=off"), "{header}");

    let out = ttner([
        "ner-train".as_ref(),
        "--train".as_ref(),
        train.as_os_str(),
        "--model".as_ref(),
        model.as_os_str(),
        "--cap".as_ref(),
        "sideways".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn crossval_reports_every_fold() {
    let data = data_dir().join("synth/train.conll");
    let out = ttner([
        "crossval".as_ref(),
        "--data".as_ref(),
        data.as_os_str(),
        "-k".as_ref(),
        "3".as_ref(),
        "--epochs".as_ref(),
        "2".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for i in 1..=3 {
        assert!(text.contains(&format!("fold_{i} precision=")), "{text}");
    }
    assert!(text.lines().last().unwrap().starts_with("mean_f1="));

    // k larger than the corpus is a data error
    let out = ttner([
        "crossval".as_ref(),
        "--data".as_ref(),
        data.as_os_str(),
        "-k".as_ref(),
        "100000".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("ttner: "));
}
