//! Report envelope and output routing. Every JSON report is wrapped with a
//! schema version and the run configuration so that identical configurations
//! produce byte-identical files.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use serde::Serialize;

use crate::Failure;

pub const SCHEMA_VERSION: u32 = 1;

/// When set, relative `--output` paths are resolved against this directory.
pub const OUT_DIR_ENV: &str = "QUANTUMNESS_OUT_DIR";

#[derive(Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub samples: usize,
    pub cutoff: usize,
    pub tol: f64,
    pub report: T,
}

pub fn render_json<T: Serialize>(envelope: &Envelope<T>) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(envelope)
        .map_err(|e| Failure::validation(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Write to `--output` (resolved against [`OUT_DIR_ENV`] when relative) or
/// stdout.
pub fn write_output(output: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    let Some(path) = output else {
        // A closed pipe (e.g. piping into head) is not an error.
        return match io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::validation(
                format!("cannot write to stdout: {e}"),
            )),
            _ => Ok(()),
        };
    };
    let resolved = match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.clone(),
    };
    if let Some(parent) = resolved.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                Failure::validation(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(&resolved, text)
        .map_err(|e| Failure::validation(format!("cannot write {}: {e}", resolved.display())))
}
