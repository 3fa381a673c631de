use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Value};

use crate::{CliError, TOOL_NAME};

/// Provenance written at the top of every output.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn new(command: &str, config_sha256: String) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256,
            notes: Vec::new(),
        }
    }

    fn csv_header(&self) -> String {
        let mut s = format!(
            "# tool: {} {}\n# command: {}\n# config_sha256: {}\n",
            self.tool, self.version, self.command, self.config_sha256
        );
        for n in &self.notes {
            s.push_str(&format!("# note: {n}\n"));
        }
        s
    }

    fn json(&self) -> Value {
        json!({
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "config_sha256": self.config_sha256,
            "notes": self.notes,
        })
    }
}

/// Writes outputs into `--out` or, for primary outputs only, stdout.
pub struct Emitter {
    dir: Option<PathBuf>,
    meta: Metadata,
}

impl Emitter {
    pub fn new(dir: Option<PathBuf>, meta: Metadata) -> Self {
        Self { dir, meta }
    }

    pub fn dir(&self) -> Option<&PathBuf> {
        self.dir.as_ref()
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.meta.notes.push(n.into());
    }

    fn write(&self, name: &str, bytes: &[u8], primary: bool) -> Result<(), CliError> {
        match &self.dir {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                std::fs::write(d.join(name), bytes)?;
            }
            None if primary => {
                let mut out = std::io::stdout().lock();
                match out.write_all(bytes).and_then(|_| out.flush()) {
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                    r => r?,
                }
            }
            None => {}
        }
        Ok(())
    }

    /// CSV with the `#` metadata header followed by the body.
    pub fn csv<F>(&self, name: &str, primary: bool, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> heliocover::Result<()>,
    {
        let mut buf = self.meta.csv_header().into_bytes();
        body(&mut buf)?;
        self.write(name, &buf, primary)
    }

    /// JSON object with a `metadata` member added.
    pub fn json(&self, name: &str, primary: bool, body: Value) -> Result<(), CliError> {
        let mut obj = match body {
            Value::Object(m) => m,
            other => {
                let mut m = serde_json::Map::new();
                m.insert("data".into(), other);
                m
            }
        };
        obj.insert("metadata".into(), self.meta.json());
        let mut buf = serde_json::to_vec_pretty(&Value::Object(obj)).map_err(heliocover::Error::from)?;
        buf.push(b'\n');
        self.write(name, &buf, primary)
    }
}
