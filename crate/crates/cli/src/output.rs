//! Output directory, CSV tables and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub const MANIFEST: &str = "manifest.json";

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Step {
    pub name: String,
    pub status: String,
    pub seconds: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub status: String,
    pub error: Option<String>,
    pub steps: Vec<Step>,
    pub checks: Vec<Check>,
    pub outputs: Vec<OutputFile>,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

pub fn sha256_file(path: &Path) -> std::io::Result<(u64, String)> {
    let bytes = fs::read(path)?;
    Ok((bytes.len() as u64, hex::encode(Sha256::digest(&bytes))))
}

/// One invocation: owns the output directory and collects what goes into
/// the manifest.
pub struct Run {
    root: PathBuf,
    command: String,
    config: serde_json::Value,
    started: f64,
    files: Vec<String>,
    steps: Vec<Step>,
    checks: Vec<Check>,
}

impl Run {
    pub fn new(root: &Path, command: &str) -> Result<Self, Failure> {
        fs::create_dir_all(root).map_err(|e| Failure::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            command: command.into(),
            config: serde_json::Value::Null,
            started: unix_now(),
            files: Vec::new(),
            steps: Vec::new(),
            checks: Vec::new(),
        })
    }

    pub fn set_config<C: Serialize>(&mut self, config: &C) {
        self.config = serde_json::to_value(config).unwrap_or(serde_json::Value::Null);
    }

    /// Runs `f` as a named step, timing it and recording its status.
    pub fn step<R>(&mut self, name: &str, f: impl FnOnce() -> Result<R, Failure>) -> Result<R, Failure> {
        log::info!("{name}");
        let t = Instant::now();
        let out = f();
        let (status, detail) = match &out {
            Ok(_) => ("ok".to_string(), String::new()),
            Err(e) => ("failed".to_string(), e.to_string()),
        };
        self.steps.push(Step { name: name.into(), status, seconds: t.elapsed().as_secs_f64(), detail });
        out
    }

    pub fn note(&mut self, name: &str, detail: String) {
        self.steps.push(Step { name: name.into(), status: "ok".into(), seconds: 0.0, detail });
    }

    pub fn check(&mut self, name: &str, value: f64, threshold: String, passed: bool) {
        if passed {
            log::info!("check {name}: {value} ({threshold}) passed");
        } else {
            log::warn!("check {name}: {value} ({threshold}) FAILED");
        }
        self.checks.push(Check { name: name.into(), value, threshold, passed });
    }

    pub fn checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.into());
        }
        self.root.join(name)
    }

    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), Failure>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let io = |e: csv::Error| Failure::Io(format!("{}: {e}", path.display()));
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Failure::io(&path, e))
    }

    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), Failure> {
        let path = self.path(name);
        write_json_file(&path, value)
    }

    /// Writes the manifest with the final status and digests of every
    /// file written so far.
    pub fn finish(self, error: Option<&Failure>) -> Result<(), Failure> {
        let mut outputs = Vec::with_capacity(self.files.len());
        for f in &self.files {
            let p = self.root.join(f);
            if let Ok((bytes, sha256)) = sha256_file(&p) {
                outputs.push(OutputFile { path: f.clone(), bytes, sha256 });
            }
        }
        let status = match error {
            Some(_) => "error",
            None if !self.checks_passed() => "checks-failed",
            None => "ok",
        };
        let manifest = RunManifest {
            tool: "lel",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: self.config,
            started_unix: self.started,
            finished_unix: unix_now(),
            status: status.into(),
            error: error.map(|e| e.to_string()),
            steps: self.steps,
            checks: self.checks,
            outputs,
        };
        write_json_file(&self.root.join(MANIFEST), &manifest)
    }
}

fn write_json_file<S: Serialize>(path: &Path, value: &S) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    let mut f = fs::File::create(path).map_err(|e| Failure::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Failure::io(path, e))
}
