//! Command-line front end: resolves configs (files or embedded presets),
//! runs experiments in a worker pool, and writes per-experiment result
//! files.
//!
//! Exit codes: 0 success, 2 validation or capacity error, 3 numerical
//! failure. Solver non-convergence that a scenario reports through its
//! verdict is still a successful run.

pub mod catalog;
pub mod config;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use config::ExperimentConfig;
use lieblab::LabError;
use output::{now_unix_ms, render_results, write_artifacts, RunMeta};

/// Overrides the worker-pool size when set to a positive integer.
pub const THREADS_ENV: &str = "LIEBLAB_THREADS";

#[derive(Parser)]
#[command(
    name = "lieblab",
    version,
    about = "Desk-scale numerical laboratory for lattice DFT",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiment configs (file paths or preset names)
    Run {
        #[arg(required = true, value_name = "CFG")]
        configs: Vec<String>,
        /// Base directory for result files (default: config `[output] dir`,
        /// then "runs")
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Override the random seed of every config
        #[arg(long)]
        seed: Option<u64>,
        /// Do not print result payloads; files are still written
        #[arg(long)]
        quiet: bool,
    },
    /// Print the preset catalog, optionally filtered
    ListPresets {
        /// Keep presets whose name contains this substring
        #[arg(value_name = "QUERY")]
        query: Option<String>,
        /// Keep presets carrying this tag
        #[arg(long, value_name = "TAG")]
        tag: Option<String>,
    },
}

pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    if let Err(msg) = init_thread_pool() {
        eprintln!("error: {msg}");
        return 2;
    }
    match cli.command {
        Command::Run {
            configs,
            out,
            seed,
            quiet,
        } => run_command(&configs, out.as_deref(), seed, quiet),
        Command::ListPresets { query, tag } => {
            let entries = catalog::filtered(query.as_deref(), tag.as_deref());
            print!("{}", catalog::render_listing(&entries));
            0
        }
    }
}

fn init_thread_pool() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err(format!("{THREADS_ENV} must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot size the worker pool: {e}"))
}

fn exit_code(e: &LabError) -> i32 {
    match e {
        LabError::Validation(_) | LabError::Capacity(_) => 2,
        LabError::Numerical(_) => 3,
    }
}

/// An existing file wins; otherwise the argument (or its file stem, so that
/// `presets/foo.cfg` works even from another directory) names an embedded
/// preset.
fn load_config(arg: &str) -> Result<ExperimentConfig, (i32, String)> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| (2, format!("cannot read {arg}: {e}")))?
    } else if let Some(p) = catalog::find(arg) {
        p.text.to_string()
    } else if let Some(p) = path
        .file_stem()
        .and_then(|s| s.to_str())
        .and_then(catalog::find)
    {
        p.text.to_string()
    } else {
        return Err((
            2,
            format!("{arg}: no such config file or preset (try `lieblab list-presets`)"),
        ));
    };
    ExperimentConfig::parse(&text).map_err(|e| (exit_code(&e), format!("{arg}: {e}")))
}

fn out_dir(cfg: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(cfg.output.dir.as_deref().unwrap_or("runs")),
    }
}

fn run_command(args: &[String], out_flag: Option<&Path>, seed: Option<u64>, quiet: bool) -> i32 {
    let mut experiments: Vec<(String, ExperimentConfig)> = Vec::new();
    for arg in args {
        match load_config(arg) {
            Ok(mut cfg) => {
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                experiments.push((arg.clone(), cfg));
            }
            Err((code, msg)) => {
                eprintln!("error: {msg}");
                return code;
            }
        }
    }
    {
        let mut names: Vec<&str> = experiments.iter().map(|(_, c)| c.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            eprintln!("error: duplicate experiment names in one batch");
            return 2;
        }
    }

    // Worker pool over experiments; every experiment writes only into its
    // own directory.
    let results: Vec<Result<String, (i32, String)>> = experiments
        .par_iter()
        .map(|(arg, cfg)| {
            let started = now_unix_ms();
            let clock = std::time::Instant::now();
            let artifacts = scenarios::execute(cfg)
                .map_err(|e| (exit_code(&e), format!("{arg}: {e}")))?;
            let meta = RunMeta {
                started_unix_ms: started,
                elapsed_ms: clock.elapsed().as_millis(),
                threads: rayon::current_num_threads(),
            };
            write_artifacts(&out_dir(cfg, out_flag), &artifacts, &meta)
                .map_err(|e| (2, format!("{arg}: cannot write results: {e}")))?;
            Ok(render_results(&artifacts.doc))
        })
        .collect();

    let mut code = 0;
    for res in &results {
        match res {
            Ok(payload) => {
                if !quiet {
                    print!("{payload}");
                }
            }
            Err((c, msg)) => {
                eprintln!("error: {msg}");
                code = code.max(*c);
            }
        }
    }
    code
}
