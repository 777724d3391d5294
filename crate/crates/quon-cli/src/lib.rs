//! Library surface behind the `quon` command line tool: the diagram DSL,
//! document execution and report serialization.

pub mod dsl;
pub mod engine;
pub mod report;

use quon_core::exec::Exec;
use quon_core::suite::{run_all, SuiteConfig};
use std::collections::HashMap;
use std::path::Path;

/// "key = value" config file: keys dims, tol, seed. Command line flags win.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub dims: Option<Vec<usize>>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

pub fn load_config(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut map: HashMap<String, String> = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut cfg = FileConfig::default();
    if let Some(dims) = map.get("dims") {
        cfg.dims = Some(parse_dims(dims)?);
    }
    if let Some(tol) = map.get("tol") {
        cfg.tol = Some(tol.parse().map_err(|_| "tol must be a number".to_string())?);
    }
    if let Some(seed) = map.get("seed") {
        cfg.seed = Some(seed.parse().map_err(|_| "seed must be an integer".to_string())?);
    }
    Ok(cfg)
}

pub fn parse_dims(text: &str) -> Result<Vec<usize>, String> {
    let mut dims = Vec::new();
    for part in text.split(',') {
        let d: usize = part
            .trim()
            .parse()
            .map_err(|_| format!("bad dimension '{part}'"))?;
        if d == 0 {
            return Err("dimensions must be at least 1".into());
        }
        dims.push(d);
    }
    if dims.is_empty() {
        return Err("at least one dimension is required".into());
    }
    Ok(dims)
}

pub struct CheckArgs {
    pub dims: Vec<usize>,
    pub tol: f64,
    pub seed: u64,
    pub trials: usize,
    pub contexts: usize,
    pub sequential: bool,
}

pub fn run_check_suite(args: &CheckArgs) -> (quon_core::suite::SuiteReport, String) {
    let config = SuiteConfig {
        dims: args.dims.clone(),
        tol: args.tol,
        seed: args.seed,
        teleport_trials: args.trials,
        soundness_contexts: args.contexts,
        exec: if args.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        },
    };
    let report = run_all(&config);
    let mut text = String::new();
    for r in &report.records {
        text.push_str(&format!(
            "{:<52} {:>5}  max_error={:.3e}\n",
            r.name,
            r.status.as_str(),
            r.max_error
        ));
    }
    text.push_str(&format!(
        "{} checks, {}\n",
        report.records.len(),
        if report.pass { "all passed" } else { "FAILURES" }
    ));
    (report, text)
}
