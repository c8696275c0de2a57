//! Artifact writing. Every file goes to a temporary name in the target
//! directory first and is renamed into place once complete.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::cli::config::RunConfig;
use crate::cli::suites::SuiteOutcome;
use crate::error::Result;

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut file = fs::File::create(&tmp)?;
    file.write_all(contents)?;
    file.sync_all()?;
    drop(file);
    fs::rename(&tmp, path)?;
    Ok(())
}

/// JSON summary of a run: resolved config, seed, every check, and the
/// suite-specific data. Wall-clock times appear only here.
pub fn summary_json(subcommand: &str, cfg: &RunConfig, outcomes: &[SuiteOutcome]) -> serde_json::Value {
    let suites: Vec<_> = outcomes
        .iter()
        .map(|o| {
            json!({
                "suite": o.suite,
                "passed": o.passed(),
                "seconds": o.seconds,
                "checks": o.checks,
                "artifacts": o.artifacts.iter().map(|a| &a.name).collect::<Vec<_>>(),
                "data": o.data,
            })
        })
        .collect();
    let failures: Vec<String> = outcomes
        .iter()
        .flat_map(|o| o.failures().into_iter().map(move |c| format!("{}: {}", o.suite, c.name)))
        .collect();
    json!({
        "subcommand": subcommand,
        "passed": failures.is_empty(),
        "failures": failures,
        "seed": cfg.estimate.seed,
        "config": cfg,
        "suites": suites,
    })
}

/// Writes the CSV artifacts and the JSON summary that `cfg.output.formats`
/// asks for, returning the paths written.
pub fn write_outputs(dir: &Path, subcommand: &str, cfg: &RunConfig, outcomes: &[SuiteOutcome]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if cfg.wants("csv") {
        for a in outcomes.iter().flat_map(|o| &o.artifacts) {
            let path = dir.join(&a.name);
            write_atomic(&path, &a.contents)?;
            written.push(path);
        }
    }
    if cfg.wants("json") {
        let path = dir.join(format!("{subcommand}_summary.json"));
        let text = serde_json::to_string_pretty(&summary_json(subcommand, cfg, outcomes)).expect("summary serializes");
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
