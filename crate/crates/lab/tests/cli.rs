use std::path::Path;
use std::process::{Command, Output};

use coarse_lab::binfmt::read_matrix;
use coarse_lab::json::OperatorDoc;
use coarse_lab::pgm::parse_pgm;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarse-lab")).args(args).output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn json(p: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn pipeline_recovers_a_scrambled_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let (space, map, u, bin, report) =
        (path(dir.path(), "x.json"), path(dir.path(), "f.json"), path(dir.path(), "u.json"), path(dir.path(), "u.bin"), path(dir.path(), "r.json"));
    assert!(lab(&["gen-space", "--kind", "interval", "--size", "24", "--out", &space]).status.success());
    assert!(lab(&["gen-map", "--space", &space, "--distortion", "2", "--seed", "3", "--out", &map]).status.success());
    let built = lab(&["build-unitary", "--space", &space, "--map", &map, "--scramble", "1", "--seed", "4", "--out", &u, "--binary", &bin]);
    assert!(built.status.success(), "{}", String::from_utf8_lossy(&built.stderr));

    let doc: OperatorDoc = serde_json::from_value(json(&u)).unwrap();
    let op = doc.to_operator().unwrap();
    assert!(op.unitarity_defect() < 1e-12);
    let m = read_matrix(std::fs::File::open(&bin).unwrap()).unwrap();
    assert_eq!(&m, op.matrix());

    let out = lab(&["extract", "--unitary", &u, "--map", &map, "--delta", "0.1", "--out", &report]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&report);
    assert_eq!(r["verdict"], "recovered");
    assert!(r["closeness"].as_u64().unwrap() <= 2 + 2 + 2);
    assert!(r["steps"][0]["F_scale"].is_u64());

    let fixed = lab(&["extract", "--unitary", &u, "--schedule", "1,1;2,2", "--mode", "windows"]);
    let r: serde_json::Value = serde_json::from_slice(&fixed.stdout).unwrap();
    assert_eq!(r["steps"][0]["mode"], "windows");
}

#[test]
fn unrecoverable_threshold_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let (space, map, u) = (path(dir.path(), "x.json"), path(dir.path(), "f.json"), path(dir.path(), "u.json"));
    lab(&["gen-space", "--kind", "interval", "--size", "12", "--out", &space]);
    lab(&["gen-map", "--space", &space, "--distortion", "1", "--out", &map]);
    lab(&["build-unitary", "--space", &space, "--map", &map, "--scramble", "2", "--seed", "1", "--out", &u]);
    // no block of a well-mixed unitary reaches this norm, so nothing is covered
    let out = lab(&["extract", "--unitary", &u, "--map", &map, "--delta", "0.999"]);
    assert_eq!(out.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["verdict"], "not_recovered");
    assert_eq!(r["closeness"], "inf");
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(lab(&["gen-map", "--space", "/nonexistent.json", "--distortion", "1"]).status.code(), Some(2));
    assert_eq!(lab(&["gen-space", "--kind", "interval", "--size", "0"]).status.code(), Some(2));
    assert_eq!(lab(&["sweep", "--kind", "interval", "--size", "5", "--delta", "1.5"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, "{\"source_space\": 3}").unwrap();
    assert_eq!(lab(&["extract", "--unitary", &bad]).status.code(), Some(2));
    assert_eq!(lab(&["extract", "--unitary", &bad, "--schedule", "1;2"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv) = (path(dir.path(), "s.json"), path(dir.path(), "s.csv"));
    let run = lab(&[
        "sweep", "--kind", "multi_component", "--size", "6", "--components", "2", "--distortion", "2", "--scramble", "1",
        "--runs", "4", "--seed", "10", "--out", &out, "--csv", &csv,
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let results = json(&out);
    assert_eq!(results.as_array().unwrap().len(), 4);
    assert_eq!(results[3]["config"]["seed"], 13);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().next().unwrap().starts_with("seed,kind,size"));
}

#[test]
fn module_flag_zeroes_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let dims = path(dir.path(), "dims.json");
    std::fs::write(&dims, "[1, 0, 2, 1, 1, 0, 1, 1]").unwrap();
    let run = lab(&["sweep", "--kind", "interval", "--size", "8", "--scramble", "1", "--runs", "3", "--module", &dims]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let r: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(r[0]["config"]["dims"][2], 2);
    std::fs::write(&dims, "[1, 1]").unwrap();
    let short = lab(&["sweep", "--kind", "interval", "--size", "8", "--module", &dims]);
    assert_eq!(short.status.code(), Some(2));
}

#[test]
fn heatmap_and_laws_commands() {
    let dir = tempfile::tempdir().unwrap();
    let img = path(dir.path(), "band.pgm");
    assert!(lab(&["heatmap", "--band", "1", "--size", "20", "--out", &img]).status.success());
    let bytes = std::fs::read(&img).unwrap();
    let (w, h, px) = parse_pgm(&bytes).unwrap();
    assert_eq!((w, h), (20, 20));
    assert!((0..20).all(|i| (0..20).all(|j| (px[i * 20 + j] != 0) == (i.abs_diff(j) <= 1))));

    let laws = lab(&["verify-laws", "--criterion", "7"]);
    assert_eq!(laws.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&laws.stdout).starts_with("criterion 7 (heatmap band): PASS"));
    assert_eq!(lab(&["verify-laws", "--criterion", "9"]).status.code(), Some(2));
}
