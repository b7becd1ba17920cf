//! The full command-line pipeline on a small synthetic log.

use std::fs;
use std::path::{Path, PathBuf};

use caps::cli::run;

pub fn run_in(args: &[&str]) -> i32 {
    let mut argv = vec!["caps"];
    argv.extend_from_slice(args);
    run(argv)
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub const TRAIN_FLAGS: [&str; 8] = ["--preset", "desk", "--epochs", "2", "--embed-dim", "8", "--rnn-hidden", "8"];

/// Every stage of the pipeline into `root`; returns the files produced.
pub fn pipeline(root: &Path) -> Vec<PathBuf> {
    let data = root.join("data");
    assert_eq!(
        run_in(&["synth", "--seed", "5", "--users", "8", "--pois", "30", "--days", "8", "--min-checkins", "5", "--out", s(&data)]),
        0
    );
    let ingested = root.join("ingested");
    assert_eq!(
        run_in(&[
            "ingest",
            "--checkins",
            s(&data.join("checkins.csv")),
            "--friends",
            s(&data.join("friends.csv")),
            "--min-checkins",
            "5",
            "--out",
            s(&ingested),
        ]),
        0
    );
    assert_eq!(run_in(&["features", "--data", s(&data), "--out", s(&root.join("features.json"))]), 0);
    let ckpt = root.join("model.bin");
    let mut train = vec!["train", "--data", s(&data), "--model", "caps-rnn", "--out", s(&ckpt), "--lstm-hidden", "8"];
    train.extend_from_slice(&TRAIN_FLAGS);
    assert_eq!(run_in(&train), 0);

    let encodings: serde_json::Value = serde_json::from_str(&fs::read_to_string(data.join("encodings.json")).unwrap()).unwrap();
    let user = encodings["users"].as_object().unwrap().keys().next().unwrap().clone();
    let poi = encodings["pois"].as_object().unwrap().keys().next().unwrap().clone();
    let gen = root.join("generated.jsonl");
    let mut args = vec![
        "generate", "--data", s(&data), "--checkpoint", s(&ckpt), "--user", &user, "--start", &poi, "--time",
        "2021-03-01T09:30:00", "--length", "6", "--k", "3", "--out", s(&gen),
    ];
    args.extend_from_slice(&["--candidates", "5"]);
    assert_eq!(run_in(&args), 0);
    let base = root.join("popularity.jsonl");
    assert_eq!(
        run_in(&[
            "generate", "--data", s(&data), "--method", "popularity", "--start", &poi, "--time", "1614590000",
            "--length", "4", "--out", s(&base),
        ]),
        0
    );

    let eval = root.join("eval");
    let mut args = vec![
        "evaluate", "--data", s(&data), "--models", "popularity,markov,apriori,hits,plain-rnn,caps-lstm", "--folds",
        "2", "--lengths", "3,5", "--out", s(&eval), "--lstm-hidden", "8", "--candidates", "3", "--diversity-raw",
    ];
    args.extend_from_slice(&TRAIN_FLAGS);
    assert_eq!(run_in(&args), 0);
    let rep = root.join("rerendered");
    assert_eq!(run_in(&["report", "--input", s(&eval), "--out", s(&rep), "--diversity-raw"]), 0);

    let mut files: Vec<PathBuf> = Vec::new();
    for dir in [&data, &ingested, &eval, &rep, &root.to_path_buf()] {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_file() && p.file_name().unwrap() != "timings.csv" {
                files.push(p);
            }
        }
    }
    files.sort();
    files
}

/// Byte comparison of two pipeline runs; returns the number of files compared.
pub fn compare_runs(a: &Path, fa: &[PathBuf], b: &Path, fb: &[PathBuf]) -> Result<usize, String> {
    let rel = |root: &Path, f: &[PathBuf]| f.iter().map(|p| p.strip_prefix(root).unwrap().to_path_buf()).collect::<Vec<_>>();
    if rel(a, fa) != rel(b, fb) {
        return Err(format!("file sets differ: {:?} vs {:?}", rel(a, fa), rel(b, fb)));
    }
    for (x, y) in fa.iter().zip(fb) {
        if fs::read(x).unwrap() != fs::read(y).unwrap() {
            return Err(format!("{} differs", x.strip_prefix(a).unwrap().display()));
        }
    }
    Ok(fa.len())
}
