//! Report emission: a JSON document with a header of every constant in play,
//! or the command's CSV table, plus artifact files under `--out`.

use std::io::Write;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use crate::commands::{Outcome, Verdict};
use crate::config::{Format, RunConfig};

pub fn header(command: &str, cfg: &RunConfig, constants: &Value) -> Value {
    json!({
        "tool": "halfmap",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg,
        "constants": constants,
    })
}

pub fn report(command: &str, cfg: &RunConfig, outcome: &Outcome) -> Value {
    let failure = match &outcome.verdict {
        Verdict::Pass => None,
        Verdict::Fail(msg) => Some(msg.as_str()),
    };
    json!({
        "header": header(command, cfg, &outcome.constants),
        "passed": failure.is_none(),
        "failure": failure,
        "result": outcome.result,
    })
}

/// Writes the report to `stdout` in the configured format and, with `--out`,
/// `report.json` and the command's artifacts into that directory.
pub fn emit(command: &str, cfg: &RunConfig, outcome: &Outcome, stdout: &mut impl Write) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&report(command, cfg, outcome))?;
    text.push('\n');
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut files = vec![("report.json", text.as_bytes())];
        files.extend(
            outcome
                .files
                .iter()
                .map(|(name, bytes)| (name.as_str(), bytes.as_slice())),
        );
        for (name, bytes) in files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    match cfg.format {
        Format::Json => stdout.write_all(text.as_bytes())?,
        Format::Csv => stdout.write_all(&outcome.table)?,
    }
    stdout.flush()?;
    Ok(())
}
