//! Run manifests: ordered `key=value` records sufficient to reproduce a
//! command invocation exactly.
//!
//! Every CLI command writes one. The `argv.N` keys hold the original
//! arguments, so `arm rerun --manifest <file>` can replay the run; the
//! remaining keys echo configuration, seeds, input/output paths, per-stage
//! wall-clock times, and a trace summary for human inspection.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered key=value store with unique keys.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new() -> Self {
        RunManifest::default()
    }

    /// Inserts or overwrites `key`. Values must be single-line.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        debug_assert!(!key.contains('=') && !key.contains('\n'));
        debug_assert!(!value.contains('\n'));
        if let Some(slot) = self.entries.iter_mut().find(|(k, _)| k == key) {
            slot.1 = value;
        } else {
            self.entries.push((key.to_string(), value));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Stores the argument vector under `argv.0`, `argv.1`, ...
    pub fn set_argv(&mut self, argv: &[String]) {
        for (i, arg) in argv.iter().enumerate() {
            self.set(&format!("argv.{i}"), arg);
        }
    }

    /// Reassembles the argument vector recorded by [`set_argv`].
    pub fn argv(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        loop {
            match self.get(&format!("argv.{}", out.len())) {
                Some(v) => out.push(v.to_string()),
                None => break,
            }
        }
        if out.is_empty() {
            return Err(Error::Config("manifest has no argv entries".into()));
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(text, "{k}={v}");
        }
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut manifest = RunManifest::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("expected key=value, got {line:?}"),
            })?;
            manifest.set(k, v);
        }
        Ok(manifest)
    }
}
