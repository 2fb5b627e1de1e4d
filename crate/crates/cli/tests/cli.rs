use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bipartite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bipartite"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn small_config(out: &Path) -> String {
    format!(
        r#"kind = "gaussian_entangled"
seed = 3
out = "{}"

[grid]
points = 128
half_width = 16.0

[evolution]
snapshots = [0.0, 1.0, 2.0]

[analysis]
residuals = true
"#,
        out.display()
    )
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn same_config_and_seed_give_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.toml");
    fs::write(&cfg, small_config(&tmp.path().join("unused"))).unwrap();
    let mut runs = Vec::new();
    for name in ["one", "two"] {
        let out = tmp.path().join(name);
        let o = bipartite(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        runs.push(read_dir(&out));
    }
    assert!(runs[0].contains_key("frames.csv"));
    assert!(runs[0].contains_key("residuals.csv"));
    assert!(runs[0].contains_key("rho_t2.pgm"));
    for (name, bytes) in &runs[0] {
        if name != "manifest.toml" {
            assert_eq!(Some(bytes), runs[1].get(name), "{name} differs");
        }
    }
}

#[test]
fn manifest_reruns_to_the_same_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = tmp.path().join("small.toml");
    fs::write(&cfg, small_config(&out)).unwrap();
    assert_eq!(code(&bipartite(&["run", cfg.to_str().unwrap()])), 0);
    let first = read_dir(&out);

    let manifest = tmp.path().join("manifest.toml");
    fs::copy(out.join("manifest.toml"), &manifest).unwrap();
    fs::remove_dir_all(&out).unwrap();
    assert_eq!(code(&bipartite(&["run", manifest.to_str().unwrap()])), 0);
    assert_eq!(first, read_dir(&out));
}

#[test]
fn dry_run_prints_resolved_config_without_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let o = bipartite(&[
        "run",
        "--preset",
        "fig2",
        "--dry-run",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("points = 1024"));
    assert!(text.contains("stride = 79"));
    assert!(!out.exists());
}

#[test]
fn malformed_config_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "kind = \"gaussian_entangled\"\nbogus_key = 1\n").unwrap();
    assert_eq!(code(&bipartite(&["run", cfg.to_str().unwrap()])), 1);
    assert_eq!(code(&bipartite(&["run", "/nonexistent/config.toml"])), 1);
    assert_eq!(code(&bipartite(&["run", "--preset", "nope"])), 1);
}

#[test]
fn oversized_step_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.toml");
    fs::write(&cfg, small_config(&tmp.path().join("run"))).unwrap();
    let o = bipartite(&["run", cfg.to_str().unwrap(), "--dt", "1.0"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_exit_codes() {
    let o = bipartite(&["verify", "core"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("suite,check,measured,tolerance,status"));
    assert!(!text.contains("FAIL"));

    let o = bipartite(&["verify", "solver", "--fault", "kinetic-sign"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL"));
}

#[test]
fn fluct_writes_samples_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fluct");
    let o = bipartite(&[
        "fluct",
        "--count",
        "20000",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let samples = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 20001);
    assert!(out.join("summary.csv").exists());

    let again = tmp.path().join("again");
    bipartite(&[
        "fluct",
        "--count",
        "20000",
        "--seed",
        "5",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(
        samples,
        fs::read_to_string(again.join("samples.csv")).unwrap()
    );
}
