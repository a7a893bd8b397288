//! Report envelope, config hashing and exit-status errors.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs: exit 2.
    Input(String),
    /// A computation failed outright (not a failed check): exit 1.
    Verification(Diagnostic),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn failed(module: &'static str, invariant: &'static str, detail: impl fmt::Display) -> Self {
        CliError::Verification(Diagnostic::new(module, invariant, detail))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Verification(d) => write!(f, "verification failure: {d}"),
        }
    }
}

/// A failed check, named by module and invariant.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub module: &'static str,
    pub invariant: &'static str,
    pub detail: String,
}

impl Diagnostic {
    pub fn new(module: &'static str, invariant: &'static str, detail: impl fmt::Display) -> Self {
        Diagnostic { module, invariant, detail: detail.to_string() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}: {}", self.module, self.invariant, self.detail)
    }
}

/// SHA-256 over the canonical config JSON followed by the bytes of every
/// input file, in argument order.
pub fn config_hash(config: &serde_json::Value, inputs: &[Option<&[u8]>]) -> String {
    let mut h = Sha256::new();
    h.update(config.to_string().as_bytes());
    for bytes in inputs.iter().flatten() {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub pass: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub warnings: Vec<String>,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &'static str, config: serde_json::Value, inputs: &[Option<&[u8]>], result: T) -> Self {
        let config_hash = config_hash(&config, inputs);
        Report {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config,
            config_hash,
            tolerances: BTreeMap::new(),
            pass: true,
            diagnostics: Vec::new(),
            warnings: Vec::new(),
            result,
        }
    }

    pub fn tolerance(mut self, name: &'static str, value: f64) -> Self {
        self.tolerances.insert(name, value);
        self
    }

    /// Records a failed check unless `ok`.
    pub fn check(&mut self, ok: bool, module: &'static str, invariant: &'static str, detail: impl fmt::Display) {
        if !ok {
            self.pass = false;
            self.diagnostics.push(Diagnostic::new(module, invariant, detail));
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}
