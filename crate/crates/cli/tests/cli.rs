use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn families() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../families")
}

fn run(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankone"))
        .args(args)
        .env("RANKONE_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn family(name: &str) -> String {
    families().join(name).to_str().unwrap().to_owned()
}

#[test]
fn build_reports_heights_and_offsets() {
    let dir = TempDir::new().unwrap();
    let out = run(&["build", &family("example.json"), "--stage", "1"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("H_1=41\n"), "{text}");
    assert!(text.contains("offsets_1=[0,4,15,20]\n"), "{text}");
    assert!(text.ends_with("RESULT=PASS\n"));
    // The second run reads the cached report and prints the same bytes.
    let again = run(&["build", &family("example.json"), "--stage", "1"], dir.path());
    assert_eq!(stdout(&again), text);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn malformed_family_files_exit_2() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let out = run(&["build", empty.to_str().unwrap(), "--stage", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty document"));
}

#[test]
fn cut_counts_not_above_l_name_the_stage() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"format_version":1,"kind":"vl","params":{"L":3,"r":{"form":"constant","value":3}}}"#,
    )
    .unwrap();
    let out = run(&["build", bad.to_str().unwrap(), "--stage", "2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage 1"));
}

#[test]
fn classify_exit_codes_encode_the_regime() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| run(args, dir.path()).status.code();
    assert_eq!(code(&["classify", &family("preset.json"), "--ratio", "1/2"]), Some(4));
    assert_eq!(code(&["classify", &family("example.json"), "--ratio", "1/2"]), Some(5));

    let ergodic = dir.path().join("ergodic.json");
    let out = run(
        &[
            "synthesize",
            "--R",
            "1/2",
            "--stages",
            "6",
            "--out",
            ergodic.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(
        code(&["classify", ergodic.to_str().unwrap(), "--ratio", "1/2"]),
        Some(0)
    );
    assert_eq!(code(&["verify", ergodic.to_str().unwrap()]), Some(0));

    let three = dir.path().join("three.json");
    let out = run(
        &[
            "synthesize",
            "--mode",
            "three-way",
            "--R2",
            "1/2",
            "--stages",
            "6",
            "--out",
            three.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(code(&["classify", three.to_str().unwrap(), "--ratio", "1/2"]), Some(3));
}

#[test]
fn non_reduced_targets_are_rejected() {
    let dir = TempDir::new().unwrap();
    let out = run(&["synthesize", "--R", "2/2", "--stages", "4"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn correlate_writes_exact_csv() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &["correlate", &family("example.json"), "--set", "0:0", "--range", "4..4"],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(stdout(&out), "lag,correlation\n4,1/4\n");
}

#[test]
fn witness_passes_and_reports_tail_failures() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &[
            "witness",
            &family("vl_geometric.json"),
            "--k",
            "2",
            "--n",
            "2",
            "--M",
            "3",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("zero_correlation=pass"), "{text}");
    assert!(text.contains("corrupted_control=nonzero"), "{text}");

    let flat = dir.path().join("flat.json");
    std::fs::write(
        &flat,
        r#"{"format_version":1,"kind":"vl","params":{"L":2,"r":{"form":"constant","value":4}}}"#,
    )
    .unwrap();
    let out = run(
        &["witness", flat.to_str().unwrap(), "--k", "2", "--n", "2", "--M", "3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tail"));
}

#[test]
fn output_is_deterministic_across_modes() {
    let dir = TempDir::new().unwrap();
    let args = [
        "correlate",
        &family("preset.json"),
        "--set",
        "2:0..20",
        "--range",
        "-3000..3000",
        "--nonzero",
    ];
    let a = run(&args, dir.path());
    let mut seq = vec!["--sequential"];
    seq.extend(args);
    let b = run(&seq, dir.path());
    assert!(a.status.success());
    assert!(stdout(&a).lines().count() > 10);
    assert_eq!(stdout(&a), stdout(&b));
}
