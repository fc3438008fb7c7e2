use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cubex::io::load_measure;
use cubex::measures::is_invariant;
use serde_json::Value;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

fn cubex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubex")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dbar_on_bundled_constants() {
    let d0 = data("measures/delta0_n2.measure");
    let d1 = data("measures/delta1_n2.measure");
    let half = data("measures/half_n2.measure");
    let out = cubex(&["dbar", "--mu", path(&d0), "--nu", path(&d1)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["result"]["value"], "1/1");
    assert_eq!(report["verified"], true);

    let out = cubex(&["dbar", "--mu", path(&d0), "--nu", path(&half), "--all-vertices"]);
    assert_eq!(json(&out)["result"]["value"], "1/2");
}

#[test]
fn manifest_paths_resolve_next_to_the_manifest() {
    let out = cubex(&["run", "--manifest", path(&data("manifests/dbar_constants.toml"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["result"]["value"], "1/1");
}

#[test]
fn hyperplane_save_writes_a_loadable_measure() {
    let dir = tempfile::tempdir().unwrap();
    let out = cubex(&["--out", path(dir.path()), "hyperplane", "--n", "3", "--p", "1/4", "--subcube", "2", "--save"]);
    assert_eq!(out.status.code(), Some(0));
    let mu = load_measure(dir.path().join("hyperplane.measure")).unwrap();
    assert_eq!(mu.len(), 16);
    assert!(is_invariant(&mu));
    assert!(dir.path().join("hyperplane.json").exists());

    // the saved file feeds straight back into the distance command
    let saved = dir.path().join("hyperplane.measure");
    let out = cubex(&["dbar", "--mu", path(&saved), "--nu", path(&saved)]);
    assert_eq!(json(&out)["result"]["value"], "0/1");
}

#[test]
fn identical_manifests_give_identical_bytes() {
    for name in ["hyperplane.toml", "testability.toml", "dmt_hypergraph.toml", "mixture.toml"] {
        let manifest = data(&format!("manifests/{name}"));
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let first = cubex(&["--out", path(a.path()), "run", "--manifest", path(&manifest)]);
        let second = cubex(&["--out", path(b.path()), "run", "--manifest", path(&manifest)]);
        assert_eq!(first.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&first.stderr));
        assert_eq!(first.stdout, second.stdout, "{name}");
        let mut files: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        files.sort();
        assert!(!files.is_empty());
        for f in files {
            assert_eq!(fs::read(a.path().join(&f)).unwrap(), fs::read(b.path().join(&f)).unwrap(), "{name}: {f:?}");
        }
    }
}

#[test]
fn report_file_matches_stdout_and_csv_carries_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = cubex(&["--out", path(dir.path()), "run", "--manifest", path(&data("manifests/testability.toml"))]);
    assert_eq!(fs::read(dir.path().join("testability.json")).unwrap(), out.stdout);
    let hash = json(&out)["manifest_sha256"].as_str().unwrap().to_string();
    let csv = fs::read_to_string(dir.path().join("testability.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), format!("# manifest_sha256: {hash}"));
    assert_eq!(lines.next().unwrap(), "n,J,r,trials,passes,exact_p,distance,rel_distance");
    assert_eq!(lines.count(), 11);
}

#[test]
fn flags_and_manifest_agree() {
    let flags = cubex(&["hyperplane", "--n", "4", "--p", "1/8", "--subcube", "3"]);
    let manifest = cubex(&["run", "--manifest", path(&data("manifests/hyperplane.toml"))]);
    assert_eq!(flags.stdout, manifest.stdout);
    assert_eq!(json(&flags)["result"]["allzero_enumerated"], "343/1024");
}

#[test]
fn sampled_modes_require_a_seed() {
    let out = cubex(&["testability", "--dim", "4", "--n", "10", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error(&out)["error"]["kind"], "invalid_argument");
    let out = cubex(&["--seed", "5", "testability", "--dim", "4", "--n", "10", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "command = \"group\"\n[params\n").unwrap();
    let out = cubex(&["run", "--manifest", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let e = error(&out);
    assert_eq!(e["error"]["kind"], "parse");
    assert_eq!(e["error"]["line"], 2);

    let measure = dir.path().join("bad.measure");
    fs::write(&measure, "cubex-measure 1\nn 2\nk 2\nentries 1\n0 1/2\n").unwrap();
    let out = cubex(&["decompose", "--measure", path(&measure)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error(&out)["error"]["kind"], "invalid_measure");

    let out = cubex(&["hyperplane", "--n", "12", "--p", "1/2", "--subcube", "2", "--max-support", "100"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error(&out)["error"]["kind"], "resource_limit");

    let missing = dir.path().join("missing.measure");
    let out = cubex(&["decompose", "--measure", path(&missing)]);
    assert_eq!(out.status.code(), Some(4));

    let out = cubex(&["hyperplane", "--n", "3", "--p", "3/2", "--subcube", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cubex(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decompose_reports_components() {
    let out = cubex(&["decompose", "--measure", path(&data("measures/half_n2.measure"))]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["verified"], true);
}

#[test]
fn dmt_flags() {
    let out = cubex(&["dmt", "--context", "hypergraph", "--n", "5", "--i", "1+2", "--j", "3+4"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["result"]["rows"][0]["fraction"], "23/50");
}
