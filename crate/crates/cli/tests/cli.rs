use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discoparse"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn assert_one_line_error(o: &Output, kind: &str) {
    assert!(!o.status.success());
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{}", err);
    assert!(err.starts_with(&format!("error: {}: ", kind)), "{}", err);
}

fn corpus(dir: &Path, name: &str, count: &str, seed: &str, format: &str) {
    let o = run(dir, &["synth", "--count", count, "--seed", seed, "--format", format, "--output", name]);
    assert!(o.status.success(), "{}", stderr(&o));
}

const SMALL: [&str; 10] = [
    "--set", "word_dim=8", "--set", "char_dim=8", "--set", "char_hidden=8", "--set", "hidden=16", "--set", "mlp=16",
];

fn train_small(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["train", "--train", "train.export", "--dev", "dev.export", "--out", "model", "--epochs", "4"];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(extra);
    run(dir, &args)
}

#[test]
fn version_reports_model_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("model format 1"));
}

#[test]
fn incompatible_combinations_fail_before_training() {
    let dir = tempfile::tempdir().unwrap();
    corpus(dir.path(), "train.export", "5", "1", "export");
    for bad in [["--system", "mlgap", "--features", "lex"], ["--system", "mlgaplex", "--oracle", "eager"]] {
        let mut args = vec!["train", "--train", "train.export", "--out", "m"];
        args.extend_from_slice(&bad);
        let o = run(dir.path(), &args);
        assert_one_line_error(&o, "usage");
        assert_eq!(o.status.code(), Some(2));
        assert!(!dir.path().join("m").exists());
    }
    let o = run(dir.path(), &["frobnicate"]);
    assert_one_line_error(&o, "usage");
}

#[test]
fn train_parse_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "train.export", "12", "1", "export");
    corpus(d, "dev.export", "4", "2", "export");
    let o = train_small(d, &["--system", "mlgap", "--oracle", "eager", "--features", "base"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["model.bin", "config.txt", "train.log.tsv"] {
        assert!(d.join("model").join(f).exists(), "{}", f);
    }
    let log = fs::read_to_string(d.join("model/train.log.tsv")).unwrap();
    assert_eq!(log.lines().count(), 1 + 4);

    let one = run(d, &["parse", "--model", "model", "--input", "dev.export", "--format", "export", "--workers", "1"]);
    let three = run(d, &["parse", "--model", "model", "--input", "dev.export", "--format", "export", "--workers", "3"]);
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(one.stdout, three.stdout);
    assert!(stderr(&one).contains("tok/s"));
    fs::write(d.join("pred.export"), &one.stdout).unwrap();

    let o = run(d, &["eval", "--gold", "dev.export", "--pred", "pred.export", "--tsv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("labelled_f1\t"));

    let o = run(d, &["parse", "--model", "model", "--input", "dev.export", "--format", "discbracket"]);
    assert_one_line_error(&o, "format");
    let o = run(d, &["parse", "--model", "missing", "--input", "dev.export", "--format", "export"]);
    assert_one_line_error(&o, "model");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "train.export", "3", "1", "export");
    corpus(d, "dev.export", "2", "2", "export");
    fs::write(d.join("c.txt"), "epochs=8\nseed=5\nlr=0.02\n").unwrap();
    let o = train_small(d, &["--config", "c.txt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let snapshot = fs::read_to_string(d.join("model/config.txt")).unwrap();
    assert!(snapshot.contains("epochs=4\n"));
    assert!(snapshot.contains("seed=5\n"));
    assert!(snapshot.contains("lr=0.02\n"));
}

#[test]
fn same_seed_same_model_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "train.export", "4", "1", "export");
    corpus(d, "dev.export", "2", "2", "export");
    assert!(train_small(d, &["--workers", "1"]).status.success());
    let a = fs::read(d.join("model/model.bin")).unwrap();
    let log_a = fs::read(d.join("model/train.log.tsv")).unwrap();
    assert!(train_small(d, &["--workers", "2"]).status.success());
    assert_eq!(a, fs::read(d.join("model/model.bin")).unwrap());
    assert_eq!(log_a, fs::read(d.join("model/train.log.tsv")).unwrap());
}

#[test]
fn self_evaluation_with_default_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "gold.disc", "20", "3", "discbracket");
    let o = run(d, &["eval", "--gold", "gold.disc", "--pred", "gold.disc", "--tsv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("labelled_f1\t100.0000"));
    assert!(out.contains("disc_f1\t100.0000"));
    let o = run(d, &["eval", "--gold", "gold.disc", "--pred", "gold.disc", "--param", "absent.prm"]);
    assert_one_line_error(&o, "io");
}

#[test]
fn oracle_check_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    corpus(d, "t.export", "30", "9", "export");
    for (system, oracle) in [("mlgap", "eager"), ("srgapunlex", "eager"), ("mlgaplex", "head"), ("srgap", "head")] {
        let o = run(
            d,
            &["oracle", "--input", "t.export", "--system", system, "--oracle", oracle, "--check", "--derivations", "d.txt"],
        );
        assert!(o.status.success(), "{} {}: {}", system, oracle, stderr(&o));
        assert!(stdout(&o).contains("# 30 of 30 sentences round-trip"));
        assert_eq!(fs::read_to_string(d.join("d.txt")).unwrap().lines().count(), 30);
    }
    let o = run(d, &["oracle", "--input", "t.export", "--system", "mlgap", "--oracle", "eager", "--stats"]);
    let out = stdout(&o);
    let header: Vec<&str> = out.lines().next().unwrap().split('\t').collect();
    for col in ["total_gaps", "mean_consecutive_gaps", "max_consecutive_gaps", "mean_stack_size"] {
        assert!(header.contains(&col), "{}", col);
    }
}

#[test]
fn broken_input_names_the_sentence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.disc"), "(S (NN 0=a) (VB 1=b))\n(S (NN 0=a) (VB 0=b))\n").unwrap();
    let o = run(d, &["oracle", "--input", "bad.disc", "--system", "mlgap", "--oracle", "eager", "--check"]);
    assert_one_line_error(&o, "format");
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}
