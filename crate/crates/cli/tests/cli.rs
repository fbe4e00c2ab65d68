//! End-to-end subcommand tests against the built binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rankcanon"));
    cmd.env_remove("RANKCANON_WORKERS");
    cmd
}

fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const SWAP_BLOCK: &str = "blockmatrix 2 2 2 2\n1 0 0 0\n0 0 1 0\n0 1 0 0\n0 0 0 1\n";

const GHZ3: &str = "density 2 2 2\n\
1 0 0 0 0 0 0 1\n\
0 0 0 0 0 0 0 0\n\
0 0 0 0 0 0 0 0\n\
0 0 0 0 0 0 0 0\n\
0 0 0 0 0 0 0 0\n\
0 0 0 0 0 0 0 0\n\
0 0 0 0 0 0 0 0\n\
1 0 0 0 0 0 0 1\n";

fn ghz4() -> String {
    let mut out = String::from("density 2 2 2 2\n");
    for i in 0..16 {
        let row: Vec<&str> = (0..16)
            .map(|j| {
                if (i == 0 || i == 15) && (j == 0 || j == 15) {
                    "1"
                } else {
                    "0"
                }
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[test]
fn verify_holds_on_valid_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "swap.bm", SWAP_BLOCK);
    let out = bin().args(["verify", "--in"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("holds"));
}

#[test]
fn verify_machine_mode_is_key_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "swap.bm", SWAP_BLOCK);
    let out = bin()
        .args(["--machine", "verify", "--in"])
        .arg(&path)
        .output()
        .unwrap();
    let text = stdout(&out);
    assert!(text.contains("schmidt_rank=4"));
    assert!(text.contains("inner_transpose_rank=1"));
    assert!(text.contains("inner_holds=true"));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.bm", "blockmatrix 1 1 2 2\n1 0\n0 q\n");
    let out = bin().args(["verify", "--in"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("line 3"), "{err}");

    let out = bin().args(["verify", "--in", "does-not-exist.bm"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().arg("verify").output().unwrap();
    assert_eq!(out.status.code(), Some(2), "missing --in is a usage error");
}

#[test]
fn canon_writes_parseable_output_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "swap.bm", SWAP_BLOCK);
    let out_path = dir.path().join("canon.bm");
    let cert_path = dir.path().join("cert.txt");
    let out = bin()
        .args(["canon", "--in"])
        .arg(&input)
        .arg("--out")
        .arg(&out_path)
        .arg("--cert")
        .arg(&cert_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("p = 2"), "{text}");
    assert!(text.contains("k = [2,2]"), "{text}");

    // the written canonical form is a valid document with identical
    // invariants
    let doc = rankcanon_cli::format::parse(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let n = doc.into_block_matrix().unwrap();
    let report = rankcanon::check_transpose_rank_bound(&n);
    assert_eq!(report.rank, 4);
    assert_eq!(report.schmidt_rank, 4);
    assert_eq!(report.inner_transpose_rank, 1);

    let cert_text = std::fs::read_to_string(&cert_path).unwrap();
    for factor in ["outer_left", "inner_left", "outer_right", "inner_right"] {
        assert!(cert_text.contains(&format!("factor {factor}")), "{cert_text}");
    }
}

#[test]
fn entropy_suites_per_party_count() {
    let dir = tempfile::tempdir().unwrap();
    let three = write(dir.path(), "ghz3.den", GHZ3);
    let out = bin().args(["entropy", "--in"]).arg(&three).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("12 inequalities over 3 subsystems: all hold"));

    let four = write(dir.path(), "ghz4.den", &ghz4());
    let out = bin().args(["entropy", "--in"]).arg(&four).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("over 4 subsystems: all hold"));

    // an indefinite matrix is an input error, not a mathematical failure
    let bad = write(
        dir.path(),
        "bad.den",
        "density 2 2 2\n-1 0 0 0 0 0 0 0\n0 1 0 0 0 0 0 0\n0 0 1 0 0 0 0 0\n0 0 0 1 0 0 0 0\n\
         0 0 0 0 1 0 0 0\n0 0 0 0 0 1 0 0\n0 0 0 0 0 0 1 0\n0 0 0 0 0 0 0 1\n",
    );
    let out = bin().args(["entropy", "--in"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn marginal_counterexample_files() {
    let dir = tempfile::tempdir().unwrap();
    let ab = write(
        dir.path(),
        "ab.den",
        "density 2 2\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n",
    );
    let pair = "density 2 2\n1 0 0 1\n0 0 0 0\n0 0 0 0\n1 0 0 1\n";
    let ac = write(dir.path(), "ac.den", pair);
    let bc = write(dir.path(), "bc.den", pair);

    let out = bin()
        .args(["marginal", "--ab"])
        .arg(&ab)
        .arg("--ac")
        .arg(&ac)
        .arg("--bc")
        .arg(&bc)
        .output()
        .unwrap();
    // the check itself succeeded, so the exit code is 0
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("one-party marginal A: consistent"));
    assert!(text.contains("r(AB) = 4, r(AC) = 1, r(BC) = 1"));
    assert!(text.contains("verdict: no joint state can exist"));

    // scripting flag flips the exit code
    let out = bin()
        .args(["marginal", "--expect-consistent", "--ab"])
        .arg(&ab)
        .arg("--ac")
        .arg(&ac)
        .arg("--bc")
        .arg(&bc)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn marginal_passes_on_consistent_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let mixed = "density 2 2\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";
    let ab = write(dir.path(), "ab.den", mixed);
    let ac = write(dir.path(), "ac.den", mixed);
    let bc = write(dir.path(), "bc.den", mixed);
    let out = bin()
        .args(["marginal", "--expect-consistent", "--ab"])
        .arg(&ab)
        .arg("--ac")
        .arg(&ac)
        .arg("--bc")
        .arg(&bc)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("necessary conditions pass"));
}

#[test]
fn vec_prints_the_seven_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let four = write(dir.path(), "ghz4.den", &ghz4());
    let out = bin().args(["vec", "--in"]).arg(&four).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("(2, 2, 2, 2, 2, 2, 2)"));

    // a mixed state has no zero-entropy vector: input error
    let mixed = write(
        dir.path(),
        "mixed.den",
        "density 2 2\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n",
    );
    let out = bin().args(["vec", "--in"]).arg(&mixed).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fuzz_small_run_passes() {
    let out = bin()
        .args(["fuzz", "--trials", "10", "--seed", "3", "--dims", "2,2,2,2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("10/10 trials passed"));

    let out = bin()
        .args(["fuzz", "--trials", "5", "--seed", "3", "--dims", "2,2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "bad --dims is a usage error");
}

#[test]
fn fuzz_respects_max_sr() {
    let out = bin()
        .args([
            "--machine",
            "fuzz",
            "--trials",
            "8",
            "--seed",
            "11",
            "--dims",
            "2,2,2,2",
            "--max-sr",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines() {
        if let Some(pos) = line.find("sr=") {
            let sr: usize = line[pos + 3..]
                .split_whitespace()
                .next()
                .unwrap()
                .parse()
                .unwrap();
            assert!(sr <= 2, "{line}");
        }
    }
}
