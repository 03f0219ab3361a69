mod common;

use std::fs;

use common::{assert_ok, assert_tables_close, bin, fixture, read_csv, stage, stderr};
use serde_json::Value;

#[test]
fn extract_gold_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = stage(&fixture("gold_corpus.jsonl"), dir.path(), &[], "extract");
    assert_ok(&o);
    assert_eq!(
        fs::read(dir.path().join("constructions.jsonl")).unwrap(),
        fs::read(fixture("gold_constructions.jsonl")).unwrap()
    );
    let (_, rows) = read_csv(&dir.path().join("extraction_summary.csv"));
    let counts: Vec<(&str, &str)> = rows.iter().map(|r| (r[0].as_str(), r[1].as_str())).collect();
    assert_eq!(
        counts,
        [("EXPLICIT", "7"), ("IMPLICIT", "5"), ("OTHER_THAT", "6"), ("FILTERED_OUT", "1")]
    );
    let (_, roles) = read_csv(&dir.path().join("that_roles.csv"));
    assert_eq!(roles[0], ["SCONJ", "9"]);
    assert_eq!(roles[3], ["RELATIVE_PRONOUN", "1"]);
}

#[test]
fn extract_synthetic_recovers_generator_truth() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&stage(&fixture("synthetic_corpus.jsonl"), dir.path(), &[], "extract"));
    assert_eq!(
        fs::read_to_string(dir.path().join("constructions.jsonl")).unwrap(),
        fs::read_to_string(fixture("synthetic_constructions.jsonl")).unwrap()
    );
}

#[test]
fn featurize_matches_counting_oracle() {
    for (corpus, oracle) in [
        ("gold_corpus.jsonl", "gold_features_oracle.csv"),
        ("synthetic_corpus.jsonl", "synthetic_features_oracle.csv"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        assert_ok(&stage(&fixture(corpus), dir.path(), &[], "extract"));
        assert_ok(&stage(&fixture(corpus), dir.path(), &["--jobs", "3"], "featurize"));
        assert_tables_close(&dir.path().join("features.csv"), &fixture(oracle), 1e-9);
        let meta: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("features.meta.json")).unwrap()).unwrap();
        assert_eq!(meta["provider"]["kind"], "ngram");
        assert_eq!(meta["provider"]["order"], 2);
        assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn lemma_filter_keeps_only_that_lemma() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("synthetic_corpus.jsonl");
    assert_ok(&stage(&corpus, dir.path(), &[], "extract"));
    assert_ok(&stage(&corpus, dir.path(), &["--set", "features.lemma_filter=think"], "featurize"));
    let (header, rows) = read_csv(&dir.path().join("features.csv"));
    let lemma = header.iter().position(|h| h == "main_verb_lemma").unwrap();
    assert_eq!(rows.len(), 152);
    assert!(rows.iter().all(|r| r[lemma] == "think"));
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn fit_matches_reference_fits_for_both_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("synthetic_corpus.jsonl");
    let scenarios = ["--set", r#"fit.scenarios=["all","think"]"#];
    assert_ok(&stage(&corpus, dir.path(), &[], "extract"));
    assert_ok(&stage(&corpus, dir.path(), &[], "featurize"));
    let o = stage(&corpus, dir.path(), &scenarios, "fit");
    assert_ok(&o);
    let printed = String::from_utf8(o.stdout).unwrap();
    assert!(printed.contains("scenario: all") && printed.contains("scenario: think"));
    assert!(dir.path().join("regression_all.txt").exists());
    assert!(dir.path().join("regression_think.txt").exists());

    let got: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("regression.json")).unwrap()).unwrap();
    let want: Value = serde_json::from_str(&fs::read_to_string(fixture("synthetic_fit_oracle.json")).unwrap()).unwrap();
    let got = got["scenarios"].as_array().unwrap();
    let want = want.as_array().unwrap();
    assert_eq!(got.len(), 2);
    for (g, w) in got.iter().zip(want) {
        assert_eq!(g["scenario"], w["scenario"]);
        assert_eq!(g["n"], w["n"]);
        assert!(close(g["log_likelihood"].as_f64().unwrap(), w["log_likelihood"].as_f64().unwrap(), 1e-9));
        assert_eq!(g["accuracy"].as_f64(), w["accuracy"].as_f64());
        let coefs = g["coefficients"].as_array().unwrap();
        let names: Vec<&str> = coefs.iter().map(|c| c["predictor"].as_str().unwrap()).collect();
        let want_names: Vec<&str> = w["predictors"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        assert_eq!(names, want_names);
        for (j, c) in coefs.iter().enumerate() {
            for field in ["beta", "std_error", "ci_low", "ci_high", "p_value"] {
                let (a, b) = (c[field].as_f64().unwrap(), w[field][j].as_f64().unwrap());
                assert!(close(a, b, 1e-6), "{} {field}[{j}]: {a} vs {b}", g["scenario"]);
            }
        }
    }
}

#[test]
fn report_writes_every_family_and_a_reproducible_sample() {
    let corpus = fixture("synthetic_corpus.jsonl");
    let mut samples = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        for s in ["extract", "featurize", "report"] {
            assert_ok(&stage(&corpus, dir.path(), &["--set", "report.sample_size=100"], s));
        }
        for name in ["summary.csv", "lemmas.csv", "correlations.csv", "annotation_sample.csv"] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        let kde: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().starts_with("kde_"))
            .collect();
        assert_eq!(kde.len(), 12);

        let (_, corr) = read_csv(&dir.path().join("correlations.csv"));
        let pairs: Vec<(&str, &str)> = corr.iter().map(|r| (r[0].as_str(), r[1].as_str())).collect();
        assert!(pairs.contains(&("sc_onset_surprisal", "sc_onset_entropy")));
        assert!(pairs.contains(&("mc_verb_frequency", "sc_onset_surprisal")));
        assert!(pairs.contains(&("sc_onset_surprisal", "sc_onset_frequency")));

        let (_, sample) = read_csv(&dir.path().join("annotation_sample.csv"));
        assert_eq!(sample.len(), 100);
        assert_eq!(sample.iter().filter(|r| r[1] == "EXPLICIT").count(), 50);
        samples.push(fs::read(dir.path().join("annotation_sample.csv")).unwrap());
    }
    assert_eq!(samples[0], samples[1]);
}

#[test]
fn sample_is_strict_about_size() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("gold_corpus.jsonl");
    assert_ok(&stage(&corpus, dir.path(), &[], "extract"));
    let ok = bin()
        .arg("--corpus").arg(&corpus)
        .arg("--output-dir").arg(dir.path())
        .args(["sample", "--size", "10"])
        .output()
        .unwrap();
    assert_ok(&ok);
    let (_, rows) = read_csv(&dir.path().join("annotation_sample.csv"));
    assert_eq!(rows.len(), 10);
    // only 5 implicit constructions exist
    let too_many = bin()
        .arg("--corpus").arg(&corpus)
        .arg("--output-dir").arg(dir.path())
        .args(["sample", "--size", "12"])
        .output()
        .unwrap();
    assert_eq!(too_many.status.code(), Some(4), "{}", stderr(&too_many));
}

#[test]
fn config_file_paths_resolve_relative_to_it() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("gold_corpus.jsonl"), dir.path().join("corpus.jsonl")).unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "corpus = \"corpus.jsonl\"\noutput_dir = \"results\"\nseed = 5\n\n[ngram]\norder = 3\n",
    )
    .unwrap();
    let o = bin().arg("--config").arg(dir.path().join("run.toml")).arg("extract").output().unwrap();
    assert_ok(&o);
    assert!(dir.path().join("results/constructions.jsonl").exists());
}
