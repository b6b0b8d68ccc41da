use std::path::PathBuf;

use selfsim::cli::{run, EXIT_DATA, EXIT_NEGATIVE, EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE};
use selfsim::graphs::import_json;

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "corpus", &format!("{name}.ssg")].iter().collect();
    p.to_string_lossy().into_owned()
}

fn selfsim(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("selfsim").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn nucleus_lists_basilica() {
    let (code, out, _) = selfsim(&["nucleus", &corpus("basilica")]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("contracting: 7 elements"));
    assert_eq!(lines.count(), 7);
}

#[test]
fn exit_codes() {
    let basilica = corpus("basilica");
    assert_eq!(selfsim(&["trivial", &basilica, "[b, a^-1 b a]", "--backend", "tree"]).0, EXIT_OK);
    assert_eq!(selfsim(&["trivial", &basilica, "[b, a^-1 b a]"]).0, EXIT_NEGATIVE);
    assert_eq!(selfsim(&["tiles", &corpus("long-range"), "-n", "2"]).0, EXIT_UNKNOWN);
    assert_eq!(selfsim(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(selfsim(&["schreier", &basilica, "-n", "2", "--format", "pdf"]).0, EXIT_USAGE);
    assert_eq!(selfsim(&["trivial", &basilica, "a q"]).0, EXIT_DATA);
    assert_eq!(selfsim(&["parse", "/nonexistent/x.ssg"]).0, EXIT_DATA);
    let (code, out, _) = selfsim(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("nucleus"));
}

#[test]
fn empty_file_is_invalid_data() {
    let f = tempfile::NamedTempFile::new().unwrap();
    let (code, _, err) = selfsim(&["parse", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_DATA);
    assert!(!err.is_empty());
}

#[test]
fn parse_round_trips() {
    let (code, out, _) = selfsim(&["parse", &corpus("hanoi")]);
    assert_eq!(code, EXIT_OK);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("again.ssg");
    std::fs::write(&p, &out).unwrap();
    let (code, again, _) = selfsim(&["parse", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(again, out);
}

#[test]
fn certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("hanoi.json");
    let cert = cert.to_str().unwrap();
    let (code, out, err) = selfsim(&["dim-cert", &corpus("hanoi"), "-n", "2", "-d", "1", "--emit", cert]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(err.contains(cert));
    let printed: serde_json::Value = serde_json::from_str(&out).unwrap();
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(cert).unwrap()).unwrap();
    assert_eq!(printed, written);
    let (code, out, _) = selfsim(&["dim-cert", "verify", cert]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("at most 1"));

    // a tampered certificate must not verify
    let mut bad = written;
    bad["parts"] = serde_json::json!([["00"], ["01", "02", "10", "11", "12", "20", "21", "22"]]);
    std::fs::write(cert, serde_json::to_string(&bad).unwrap()).unwrap();
    assert_ne!(selfsim(&["dim-cert", "verify", cert]).0, EXIT_OK);
}

#[test]
fn output_does_not_depend_on_jobs() {
    let carpet = corpus("sierpinski-carpet");
    let hanoi = corpus("hanoi");
    let runs: [&[&str]; 3] = [
        &["nucleus", &carpet],
        &["tiles", &hanoi, "-n", "3", "--format", "graphml"],
        &["dim-cert", &hanoi, "-n", "2", "-d", "1", "--strategy", "random", "--seed", "3"],
    ];
    for args in runs {
        let one = selfsim(&[&["--jobs", "1"], args].concat());
        let many = selfsim(&[&["--jobs", "4"], args].concat());
        assert_eq!(one, many, "{args:?}");
    }
}

#[test]
fn schreier_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("basilica.json");
    let (code, out, _) =
        selfsim(&["schreier", &corpus("basilica"), "-n", "3", "--format", "json", "-o", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let g = import_json(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(g.vertex_count(), 8);
    assert_eq!(g.edges.len(), 16);
}
