//! Result serialization. `results.json` and the CSV files are functions of
//! the config and seed alone, so reruns are byte-identical; wall-clock data
//! lives in `run_meta.json` and nowhere else.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::{Scenario, SystemSection};

/// Copy of the lattice parameters the experiment actually used.
#[derive(Clone, Debug, Serialize)]
pub struct SystemEcho {
    pub sites: usize,
    pub topology: String,
    pub spacing: f64,
    pub particles: usize,
}

impl SystemEcho {
    pub fn from_section(s: &SystemSection) -> SystemEcho {
        SystemEcho {
            sites: s.sites,
            topology: match s.topology {
                crate::config::TopologyName::Ring => "ring".into(),
                crate::config::TopologyName::Chain => "chain".into(),
            },
            spacing: s.spacing,
            particles: s.particles,
        }
    }
}

/// The deterministic result payload written to `results.json`.
#[derive(Serialize)]
pub struct ResultsDoc {
    pub name: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub system: Option<SystemEcho>,
    pub verdict: String,
    pub report: serde_json::Value,
}

/// Everything one experiment produces.
pub struct RunArtifacts {
    pub doc: ResultsDoc,
    /// (file name, contents) pairs; names must be unique per experiment.
    pub csv_files: Vec<(String, String)>,
}

/// Timestamps and host facts, quarantined away from the result payload.
#[derive(Serialize)]
pub struct RunMeta {
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
    pub threads: usize,
}

pub fn now_unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn render_results(doc: &ResultsDoc) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("results serialize");
    text.push('\n');
    text
}

/// Writes results.json, run_meta.json, and the CSV files into
/// `<base>/<experiment name>/`; returns that directory.
pub fn write_artifacts(base: &Path, artifacts: &RunArtifacts, meta: &RunMeta) -> io::Result<PathBuf> {
    let dir = base.join(&artifacts.doc.name);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("results.json"), render_results(&artifacts.doc))?;
    let mut meta_text = serde_json::to_string_pretty(meta).expect("meta serialize");
    meta_text.push('\n');
    fs::write(dir.join("run_meta.json"), meta_text)?;
    for (name, text) in &artifacts.csv_files {
        fs::write(dir.join(name), text)?;
    }
    Ok(dir)
}

/// CSV column formatting used everywhere: 17 significant digits, enough to
/// round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_do_not_contain_timestamps() {
        let doc = ResultsDoc {
            name: "x".into(),
            scenario: Scenario::KernelDiagnostics,
            seed: 5,
            system: None,
            verdict: "ok".into(),
            report: serde_json::json!({"value": 1.5}),
        };
        let text = render_results(&doc);
        assert!(text.contains("\"verdict\": \"ok\""));
        assert!(!text.contains("unix"));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn float_formatting_round_trips() {
        let x = 0.1 + 0.2;
        let s = fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}
