use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use attentopo::io::{read_feature_matrix, read_model, write_feature_matrix};
use attentopo::schema::Family;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attentopo"))
        .args(args)
        .current_dir(dir)
        .env_remove("ATTENTOPO_WORKERS")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// Small synthetic corpus with extracted train/valid/test matrices and a trained model.
fn trained(dir: &Path) {
    ok(
        dir,
        &[
            "synth", "--out", "corpus", "--n", "10", "--train", "20", "--valid", "10", "--test", "10",
        ],
    );
    for split in ["train", "valid", "test"] {
        ok(
            dir,
            &[
                "extract",
                "--corpus",
                &format!("corpus/{split}"),
                "--out",
                &format!("{split}.atfm"),
            ],
        );
    }
    ok(
        dir,
        &[
            "train",
            "--train",
            "train.atfm",
            "--valid",
            "valid.atfm",
            "--model",
            "model.json",
            "--report",
            "grid.csv",
        ],
    );
}

#[test]
fn barcodes_of_the_triangle_sample() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = fixtures().join("k3");
    let k3 = k3.to_str().unwrap();
    let clique = ok(dir.path(), &["barcodes", "--sample", k3]);
    assert_eq!(clique, "# layer 0 head 0\n0 0 0.1\n0 0 0.2\n0 0 inf\n1 0.8 0.8\n");
    let graph = ok(dir.path(), &["barcodes", "--sample", k3, "--h1-mode", "graph"]);
    assert!(graph.ends_with("1 0.8 inf\n"), "{graph}");
}

#[test]
fn extract_reads_numpy_written_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("corpus");
    ok(
        dir.path(),
        &[
            "extract",
            "--corpus",
            corpus.to_str().unwrap(),
            "--out",
            "toy.atfm",
            "--csv",
            "toy.csv",
        ],
    );
    let m = read_feature_matrix(&dir.path().join("toy.atfm")).unwrap();
    assert_eq!((m.rows(), m.width()), (2, 332));
    assert_eq!(m.sample_ids, ["alpha", "beta"]);
    let csv = std::fs::read_to_string(dir.path().join("toy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("sample_id,label,topo/L0/H0/t=0.025/beta0,"));
}

#[test]
fn feature_family_selection_changes_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("corpus");
    let corpus = corpus.to_str().unwrap();
    ok(
        dir.path(),
        &["extract", "--corpus", corpus, "--out", "a.atfm", "--no-cycles"],
    );
    let m = read_feature_matrix(&dir.path().join("a.atfm")).unwrap();
    assert_eq!(m.width(), 4 * (6 * 4 + 18 + 35));
    assert!(m.schema.slots.iter().all(|s| s.kind != "cycles"));

    ok(
        dir.path(),
        &[
            "extract",
            "--corpus",
            corpus,
            "--out",
            "b.atfm",
            "--features",
            "barcode",
            "--thresholds",
            "0.1,0.5",
        ],
    );
    let m = read_feature_matrix(&dir.path().join("b.atfm")).unwrap();
    assert_eq!(m.width(), 4 * 18);
    assert!(m.schema.slots.iter().all(|s| s.family == Family::Barcode));
}

#[test]
fn train_eval_predict_round() {
    let dir = tempfile::tempdir().unwrap();
    trained(dir.path());
    let grid = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 55);
    assert_eq!(grid.lines().filter(|l| l.ends_with(",1")).count(), 1);

    let table = ok(
        dir.path(),
        &["eval", "--model", "model.json", "--features", "test.atfm"],
    );
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("features,samples,accuracy,precision,recall"));
    assert!(lines.next().unwrap().starts_with("test.atfm,10,"));

    let predictions = ok(
        dir.path(),
        &["predict", "--model", "model.json", "--features", "test.atfm"],
    );
    assert_eq!(predictions.lines().count(), 11);
    assert!(predictions.lines().nth(1).unwrap().starts_with("test-00000,"));
}

#[test]
fn schema_mismatch_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    trained(dir.path());
    let test = read_feature_matrix(&dir.path().join("test.atfm")).unwrap();
    write_feature_matrix(&test.select(&[0, 1, 2]), &dir.path().join("narrow.atfm")).unwrap();
    let out = run(
        dir.path(),
        &["eval", "--model", "model.json", "--features", "narrow.atfm"],
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn error_kinds_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let out = run(d, &["extract", "--corpus", "missing", "--out", "x.atfm"]);
    assert_eq!(code(&out), 4);

    std::fs::write(d.join("junk.atfm"), b"not a feature file").unwrap();
    std::fs::write(d.join("model.json"), b"{}").unwrap();
    let out = run(d, &["predict", "--model", "model.json", "--features", "junk.atfm"]);
    assert_eq!(code(&out), 2);

    let out = run(
        d,
        &["extract", "--corpus", ".", "--out", "x.atfm", "--thresholds", "0.5,0.2"],
    );
    assert_eq!(code(&out), 1);

    assert_eq!(code(&run(d, &["extract"])), 1);
    assert_eq!(code(&run(d, &["--help"])), 0);
    assert_eq!(code(&run(d, &["--version"])), 0);
}

#[test]
fn invalid_samples_abort_unless_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth", "--out", "corpus", "--n", "6", "--train", "4", "--valid", "2", "--test", "2",
        ],
    );
    let bad = d.join("corpus/train/train-00001/attn.npy");
    let mut bytes = std::fs::read(&bad).unwrap();
    let end = bytes.len();
    bytes[end - 4..].copy_from_slice(&2.0f32.to_le_bytes());
    std::fs::write(&bad, bytes).unwrap();

    let out = run(d, &["extract", "--corpus", "corpus/train", "--out", "t.atfm"]);
    assert_eq!(code(&out), 2);
    ok(
        d,
        &[
            "extract",
            "--corpus",
            "corpus/train",
            "--out",
            "t.atfm",
            "--skip-invalid",
        ],
    );
    assert_eq!(read_feature_matrix(&d.join("t.atfm")).unwrap().rows(), 3);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let defaults = ok(d, &["print-config"]);
    assert!(
        defaults.contains("cycle_cap = 500") && defaults.contains("h1_mode = \"clique\""),
        "{defaults}"
    );
    std::fs::write(
        d.join("cfg.toml"),
        defaults.replace("use_pattern = true", "use_pattern = false"),
    )
    .unwrap();
    ok(
        d,
        &[
            "--config", "cfg.toml", "synth", "--out", "corpus", "--n", "6", "--train", "4", "--valid", "2", "--test",
            "2",
        ],
    );
    ok(
        d,
        &[
            "--config",
            "cfg.toml",
            "extract",
            "--corpus",
            "corpus/train",
            "--out",
            "t.atfm",
            "--no-cycles",
        ],
    );
    let m = read_feature_matrix(&d.join("t.atfm")).unwrap();
    assert_eq!(m.width(), 4 * (6 * 4 + 18));

    ok(d, &["extract", "--corpus", "corpus/valid", "--out", "v.atfm"]);
    let out = run(
        d,
        &[
            "--config", "cfg.toml", "train", "--train", "t.atfm", "--valid", "v.atfm", "--model", "m.json",
        ],
    );
    assert_eq!(code(&out), 3);
    let out = run(
        d,
        &[
            "train",
            "--train",
            "t.atfm",
            "--valid",
            "t.atfm",
            "--model",
            "m.json",
            "--c",
            "0.5",
            "--max-iter",
            "4",
        ],
    );
    assert!(out.status.success());
    let model = read_model(&d.join("m.json")).unwrap();
    assert_eq!((model.c, model.max_iter), (0.5, 4));
}

#[test]
fn worker_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth", "--out", "corpus", "--n", "6", "--train", "6", "--valid", "2", "--test", "2",
        ],
    );
    ok(
        d,
        &[
            "extract",
            "--corpus",
            "corpus/train",
            "--out",
            "a.atfm",
            "--workers",
            "1",
        ],
    );
    let out = Command::new(env!("CARGO_BIN_EXE_attentopo"))
        .args(["extract", "--corpus", "corpus/train", "--out", "b.atfm"])
        .current_dir(d)
        .env("ATTENTOPO_WORKERS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(d.join("a.atfm")).unwrap(),
        std::fs::read(d.join("b.atfm")).unwrap()
    );

    let out = Command::new(env!("CARGO_BIN_EXE_attentopo"))
        .args(["extract", "--corpus", "corpus/train", "--out", "c.atfm"])
        .current_dir(d)
        .env("ATTENTOPO_WORKERS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
}
