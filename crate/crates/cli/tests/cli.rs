//! End-to-end checks of the binary: argument handling, exit codes, and the
//! files a run leaves behind.

use std::path::Path;
use std::process::{Command, Output};

fn lieblab(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lieblab"));
    cmd.args(args).env_remove(lieblab_cli::THREADS_ENV);
    cmd
}

fn run(args: &[&str]) -> Output {
    lieblab(args).output().expect("binary spawns")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn results_json(base: &Path, name: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(base.join(name).join("results.json")).expect("results");
    serde_json::from_str(&text).expect("results parse")
}

#[test]
fn malformed_config_exits_with_a_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "name = \"x\"\nscenario = \"kernel_diagnostics\"\nbogus = 1\n").unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("bogus"));
}

#[test]
fn unknown_preset_names_point_at_the_catalog() {
    let out = run(&["run", "no_such_experiment"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("no such config file or preset"));
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = run(&["run", "kernel_ring_L4_N1", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn the_catalog_listing_covers_every_preset() {
    let out = run(&["list-presets"]);
    assert_eq!(out.status.code(), Some(0));
    let listing = String::from_utf8_lossy(&out.stdout).into_owned();
    for entry in lieblab_cli::catalog::filtered(None, None) {
        assert!(listing.contains(entry.name), "{} missing", entry.name);
    }
}

#[test]
fn catalog_filters_narrow_the_listing() {
    let by_query = run(&["list-presets", "cancellation"]);
    let text = String::from_utf8_lossy(&by_query.stdout).into_owned();
    assert!(text.contains("cancellation_4ring") && text.contains("cancellation_6ring"));
    assert!(!text.contains("kernel_ring_L4_N1"));

    let by_tag = run(&["list-presets", "--tag", "conditioning"]);
    let text = String::from_utf8_lossy(&by_tag.stdout).into_owned();
    assert!(text.contains("conditioning_family"));
    assert!(!text.contains("cancellation_4ring"));
}

#[test]
fn a_run_leaves_results_meta_and_tables_behind() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().to_str().unwrap().to_string();
    let out = run(&["run", "kernel_ring_L4_N1", "--out", &base]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let doc = results_json(dir.path(), "kernel_ring_L4_N1");
    assert_eq!(doc["verdict"], "kernel_clean");
    assert_eq!(doc["system"]["sites"], 4);

    let exp = dir.path().join("kernel_ring_L4_N1");
    assert!(exp.join("run_meta.json").is_file());
    assert!(exp.join("kernel.csv").is_file());
    assert!(exp.join("alphas.csv").is_file());

    // timing lives only in the meta file, never in results
    let results_text = std::fs::read_to_string(exp.join("results.json")).unwrap();
    assert!(!results_text.contains("elapsed"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(exp.join("run_meta.json")).unwrap())
            .unwrap();
    assert!(meta["started_unix_ms"].as_u64().is_some());

    // payload echoes the results document on stdout
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(stdout.contains("kernel_clean"));
}

#[test]
fn quiet_runs_still_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().to_str().unwrap().to_string();
    let out = run(&["run", "kernel_ring_L2_N1", "--out", &base, "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(dir
        .path()
        .join("kernel_ring_L2_N1")
        .join("results.json")
        .is_file());
}

#[test]
fn config_files_work_from_arbitrary_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.cfg");
    std::fs::write(
        &cfg,
        concat!(
            "name = \"tiny_ring\"\n",
            "scenario = \"kernel_diagnostics\"\n\n",
            "[system]\n",
            "sites = 2\n",
            "topology = \"ring\"\n",
            "particles = 1\n",
        ),
    )
    .unwrap();
    let base = dir.path().join("out");
    let out = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert_eq!(results_json(&base, "tiny_ring")["verdict"], "kernel_clean");
}

#[test]
fn non_smooth_targets_still_exit_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().to_str().unwrap().to_string();
    let out = run(&["run", "zero_density_chain", "--out", &base]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert_eq!(
        results_json(dir.path(), "zero_density_chain")["verdict"],
        "non_smooth"
    );
}

#[test]
fn the_seed_flag_overrides_every_config() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().to_str().unwrap().to_string();
    let out = run(&["run", "cancellation_6ring", "--out", &base, "--seed", "99"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert_eq!(results_json(dir.path(), "cancellation_6ring")["seed"], 99);
}

#[test]
fn duplicate_experiment_names_are_rejected_up_front() {
    let out = run(&["run", "kernel_ring_L4_N1", "kernel_ring_L4_N1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("duplicate"));
}

#[test]
fn the_thread_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().to_str().unwrap().to_string();

    let ok = lieblab(&["run", "kernel_ring_L2_N1", "--out", &base, "--quiet"])
        .env(lieblab_cli::THREADS_ENV, "1")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "stderr: {}", stderr_of(&ok));

    let bad = lieblab(&["list-presets"])
        .env(lieblab_cli::THREADS_ENV, "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr_of(&bad).contains("LIEBLAB_THREADS"));
}
