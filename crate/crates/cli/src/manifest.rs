use std::io::Write;
use std::path::Path;
use std::time::Instant;

use lightcone_core::verify::{Check, Status};
use serde::Serialize;
use serde_json::Value;

use crate::Failure;

/// Machine-readable record of one run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    pub config: Value,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<Value>,
}

impl RunManifest {
    pub fn new(command: &str, config: impl Serialize, seed: u64, started: Instant) -> Self {
        Self {
            tool: "lightcone",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            argv: std::env::args().collect(),
            config: serde_json::to_value(config).expect("config serializes"),
            seed,
            threads: rayon::current_num_threads(),
            wall_time_s: started.elapsed().as_secs_f64(),
            checks: Vec::new(),
            passed: true,
            exit_code: 0,
            report: None,
        }
    }

    pub fn with_checks(mut self, checks: Vec<Check>) -> Self {
        self.passed = checks.iter().all(|c| c.status != Status::Fail);
        self.exit_code = if self.passed { 0 } else { 2 };
        self.checks = checks;
        self
    }

    pub fn outcome(&self) -> Result<(), Failure> {
        if self.passed {
            Ok(())
        } else {
            Err(Failure::Checks)
        }
    }

    pub fn print_summary(&self) {
        if self.checks.is_empty() {
            return;
        }
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        println!("{:<width$}  {:<6}  {:>12}  {:>12}", "check", "status", "residual", "tolerance");
        let num = |x: Option<f64>| x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        for c in &self.checks {
            let status = serde_json::to_value(c.status).unwrap();
            println!(
                "{:<width$}  {:<6}  {:>12}  {:>12}{}",
                c.name,
                status.as_str().unwrap_or("?"),
                num(c.residual),
                num(c.tolerance),
                c.detail.as_ref().map(|d| format!("  {d}")).unwrap_or_default()
            );
        }
        println!("{}", if self.passed { "all checks passed" } else { "FAILED" });
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Input(format!("{}: {e}", path.display()));
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    serde_json::to_writer_pretty(&mut file, value).map_err(|e| Failure::Input(e.to_string()))?;
    writeln!(file).and_then(|()| file.flush()).map_err(io)
}
