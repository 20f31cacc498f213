//! Exit-code and error-path checks for the `bsk` binary.

use std::process::Command;

fn bsk(dir: &std::path::Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bsk"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn invalid_input_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // missing file
    let out = bsk(dir, &["coherence", "--dict", "nope.bsk1"]);
    assert_eq!(out.status.code(), Some(2));

    // malformed header
    std::fs::write(dir.join("bad.bsk1"), "BSK1 oops\n").unwrap();
    let out = bsk(dir, &["coherence", "--dict", "bad.bsk1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    // unknown algorithm
    let out = bsk(
        dir,
        &["recover", "--alg", "magic", "--dict", "bad.bsk1", "--y", "bad.bsk1",
          "--out", "o", "--report", "r"],
    );
    assert_eq!(out.status.code(), Some(2));

    // config with k out of range
    std::fs::write(
        dir.join("cfg"),
        "source = pair\nM = 4\nd = 2\nkMin = 1\nkMax = 9\nalgorithms = bomp\ntrialsPerCell = 1\nmasterSeed = 1\n",
    )
    .unwrap();
    let out = bsk(dir, &["phase", "--config", "cfg", "--out", "p.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_env_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bsk"))
        .current_dir(tmp.path())
        .env("BSK_THREADS", "zero")
        .args(["gen", "pair", "--M", "2", "--d", "1", "--out-phi", "a", "--out-psi", "b"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3_with_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    bsk(dir, &["gen", "dict", "--L", "16", "--M", "8", "--d", "2", "--seed", "1", "--out", "d.bsk1"]);
    bsk(dir, &["gen", "signal", "--M", "8", "--d", "2", "--k", "2", "--seed", "2", "--out", "x.bsk1"]);
    // y = D x computed in-process to keep the test self-contained
    let dict = bsk_core::io::read_matrix_file(dir.join("d.bsk1")).unwrap();
    let x = bsk_core::io::read_vector_file(dir.join("x.bsk1")).unwrap();
    let y = bsk_core::BlockVector::new(dict.col_shape(), dict.mul_vector(&x).unwrap()).unwrap();
    bsk_core::io::write_vector_file(dir.join("y.bsk1"), &y).unwrap();

    // starved iteration budget: solver runs but cannot converge
    std::fs::write(dir.join("params"), "maxIterations = 1\n").unwrap();
    let out = bsk(
        dir,
        &["recover", "--alg", "l21", "--dict", "d.bsk1", "--y", "y.bsk1",
          "--params", "params", "--out", "xhat.bsk1", "--report", "rep.txt"],
    );
    assert_eq!(out.status.code(), Some(3));
    let report = std::fs::read_to_string(dir.join("rep.txt")).unwrap();
    assert!(report.contains("converged = false"));
    assert!(dir.join("xhat.bsk1").exists());
}

#[test]
fn recover_round_trip_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    bsk(dir, &["gen", "dict", "--L", "16", "--M", "8", "--d", "2", "--seed", "4", "--out", "d.bsk1"]);
    bsk(dir, &["gen", "signal", "--M", "8", "--d", "2", "--k", "1", "--seed", "6", "--out", "x.bsk1"]);
    let dict = bsk_core::io::read_matrix_file(dir.join("d.bsk1")).unwrap();
    let x = bsk_core::io::read_vector_file(dir.join("x.bsk1")).unwrap();
    let y = bsk_core::BlockVector::new(dict.col_shape(), dict.mul_vector(&x).unwrap()).unwrap();
    bsk_core::io::write_vector_file(dir.join("y.bsk1"), &y).unwrap();

    let out = bsk(
        dir,
        &["recover", "--alg", "bomp", "--dict", "d.bsk1", "--y", "y.bsk1", "--k", "1",
          "--out", "xhat.bsk1", "--report", "rep.txt"],
    );
    assert_eq!(out.status.code(), Some(0));
    let xhat = bsk_core::io::read_vector_file(dir.join("xhat.bsk1")).unwrap();
    let err = (xhat.values() - x.values()).norm();
    assert!(err <= 1e-8 * x.values().norm());
    let report = std::fs::read_to_string(dir.join("rep.txt")).unwrap();
    assert!(report.contains("converged = true"));
}
