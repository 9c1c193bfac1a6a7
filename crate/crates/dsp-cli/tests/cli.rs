//! End-to-end runs of the `dsp` binary against the fixture corpus.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn dsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn decide_exit_codes_follow_status() {
    let out = dsp(&["decide", fixture("n1_solvable.dsp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("status: solvable"));

    let out = dsp(&["decide", fixture("char_not_one.dsp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("certificate: character_not_one"));
    assert!(text.contains("character_value: 2/3"));

    let out = dsp(&["decide", fixture("not_root.dsp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("certificate: not_positive_root"));

    let out = dsp(&["decide", fixture("case1_two_delta.dsp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("certificate: violating_decomposition"));
    assert!(text.contains("parts:"));
}

#[test]
fn decide_guard_exceeded_is_exit_2() {
    let out = dsp(&[
        "decide",
        fixture("case1_two_delta.dsp").to_str().unwrap(),
        "--max-box",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("certificate: guard_exceeded"));
}

#[test]
fn guard_env_variable_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_dsp"))
        .args(["decide", fixture("case1_two_delta.dsp").to_str().unwrap()])
        .env("DSP_MAX_BOX", "8")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    // but an explicit flag overrides the environment
    let out = Command::new(env!("CARGO_BIN_EXE_dsp"))
        .args([
            "decide",
            fixture("case1_two_delta.dsp").to_str().unwrap(),
            "--max-box",
            "100000",
        ])
        .env("DSP_MAX_BOX", "8")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parse_errors_are_exit_3_with_position() {
    let dir = std::env::temp_dir().join("dsp-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.dsp");
    std::fs::write(&bad, "format: 1\nkind: instance\nweights: [2, 2\n").unwrap();
    let out = dsp(&["decide", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr(&out);
    assert!(msg.contains("line 3"), "stderr was: {msg}");

    // semantic error: xi arm shorter than the weight
    let short = dir.join("short.dsp");
    std::fs::write(
        &short,
        "format: 1\nkind: instance\nweights: [2]\nxi:\n  - [5]\nalpha: [1, 0]\n",
    )
    .unwrap();
    let out = dsp(&["decide", short.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("arm 1"));

    // zero eigenvalue
    let zero = dir.join("zero.dsp");
    std::fs::write(
        &zero,
        "format: 1\nkind: instance\nweights: [1]\nxi:\n  - [0]\nalpha: [1]\n",
    )
    .unwrap();
    let out = dsp(&["decide", zero.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // non-strict alpha is an instance-validation error
    let nonstrict = dir.join("nonstrict.dsp");
    std::fs::write(
        &nonstrict,
        "format: 1\nkind: instance\nweights: [2]\nxi:\n  - [2, 3]\nalpha: [1, 2]\n",
    )
    .unwrap();
    let out = dsp(&["decide", nonstrict.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("strict"));

    // unrealizable rank data names the arm
    let unreal = dir.join("unrealizable.dsp");
    std::fs::write(
        &unreal,
        "format: 1\nkind: instance\nweights: [2]\nxi:\n  - [3, 3]\nalpha: [2, 2]\n",
    )
    .unwrap();
    let out = dsp(&["decide", unreal.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("realizable"));
}

#[test]
fn roots_lists_the_d4_roots() {
    let out = dsp(&["roots", fixture("rigid_2x2.dsp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("count: 12"));
    assert!(text.contains("alpha_kind: real"));
    // deterministic order: the first root in lex order is epsilon at the
    // last arm vertex
    let first = text.lines().find(|l| l.trim_start().starts_with("- ")).unwrap();
    assert_eq!(first.trim(), "- [0, 0, 0, 1]");
}

#[test]
fn reflect_round_trips_and_rejects_inadmissible() {
    let out = dsp(&[
        "reflect",
        fixture("rigid_2x2.dsp").to_str().unwrap(),
        "--vertex",
        "star",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("kind: pair"));
    assert!(text.contains("admissible: true"));
    // s_*(2,1,1,1) = (1,1,1,1) on the D4 star
    assert!(text.contains("alpha: [1, 1, 1, 1]"));

    let dir = std::env::temp_dir().join("dsp-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let ones = dir.join("ones.dsp");
    std::fs::write(
        &ones,
        "format: 1\nkind: instance\nweights: [1]\nxi:\n  - [1]\nalpha: [1]\n",
    )
    .unwrap();
    let out = dsp(&["reflect", ones.to_str().unwrap(), "--vertex", "*"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("not admissible"));

    let out = dsp(&[
        "reflect",
        fixture("rigid_2x2.dsp").to_str().unwrap(),
        "--vertex",
        "9.9",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn classify_reports_cases() {
    let out = dsp(&["classify", fixture("case1_two_delta.dsp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("quiver_class: extended_dynkin"));
    assert!(text.contains("delta: [2, 1, 1, 1, 1]"));
    assert!(text.contains("reduced_case: case_i"));
    assert!(text.contains("m: 1"));
    assert!(text.contains("h: 2"));

    let out = dsp(&["classify", fixture("case3_ext_tubular.dsp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("quiver_class: wild"));
    assert!(text.contains("reduced_case: case_iii"));
    assert!(text.contains("j: 1.2"));
    assert!(text.contains("k: 1.1"));

    let out = dsp(&["classify", fixture("rigid_2x2.dsp").to_str().unwrap()]);
    let text = stdout(&out);
    assert!(text.contains("quiver_class: dynkin"));
    assert!(text.contains("reduced_case: none"));
}

#[test]
fn oracle_finds_scalars_and_rejects_sym() {
    let out = dsp(&[
        "oracle",
        fixture("n1_solvable.dsp").to_str().unwrap(),
        "--restarts",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("found: true"));
    assert!(text.contains("irreducible: true"));
    assert!(text.contains("word_rank: 1"));

    let out = dsp(&["oracle", fixture("sym_free.dsp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("oracle unavailable"));
}

#[test]
fn sym_mode_decides() {
    let out = dsp(&["decide", fixture("sym_free.dsp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("status: solvable"));
    assert!(text.contains("mode: sym"));
}

#[test]
fn matrices_path_derives_alpha() {
    let out = dsp(&["decide", fixture("jordan_matrices.dsp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("alpha: [2, 1]"));
    assert!(text.contains("certificate: not_positive_root"));
}

#[test]
fn validate_cert_accepts_real_and_rejects_tampered() {
    let dir = std::env::temp_dir().join("dsp-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();

    for name in [
        "n1_solvable.dsp",
        "char_not_one.dsp",
        "not_root.dsp",
        "case1_two_delta.dsp",
        "case3_ext_tubular.dsp",
    ] {
        let out = dsp(&["decide", fixture(name).to_str().unwrap()]);
        let verdict_path = dir.join(format!("{name}.verdict"));
        std::fs::write(&verdict_path, stdout(&out)).unwrap();
        let out = dsp(&["validate-cert", verdict_path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        assert!(stdout(&out).contains("valid: true"));
    }

    // flip unsolvable -> solvable: the certificate no longer matches
    let out = dsp(&["decide", fixture("case1_two_delta.dsp").to_str().unwrap()]);
    let tampered = stdout(&out).replace("status: unsolvable", "status: solvable");
    let path = dir.join("tampered.verdict");
    std::fs::write(&path, tampered).unwrap();
    let out = dsp(&["validate-cert", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("valid: false"));
}

#[test]
fn verdict_documents_reparse() {
    // print(parse(d)) round-trip at the document level
    let out = dsp(&["decide", fixture("case1_two_delta.dsp").to_str().unwrap()]);
    let text = stdout(&out);
    let doc = dsp_cli::doc::parse(&text).unwrap();
    let rerendered = dsp_cli::doc::render(&doc);
    let doc2 = dsp_cli::doc::parse(&rerendered).unwrap();
    assert_eq!(doc.entries.len(), doc2.entries.len());
    for ((k1, v1, _), (k2, v2, _)) in doc.entries.iter().zip(&doc2.entries) {
        assert_eq!(k1, k2);
        assert_eq!(v1, v2);
    }
}
