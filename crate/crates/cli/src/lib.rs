// Copyright 2026 The fenchelkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Batch front end: reads problem files, dispatches to the solvers and
//! writes result envelopes with certificates and plot-ready series.

pub mod envelope;
mod kinds;
pub mod problem;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use envelope::{ResultEnvelope, Status};
use kinds::Failure;
use problem::ProblemFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub input: PathBuf,
    pub exit_code: i32,
    /// Result file, absent for malformed input.
    pub output: Option<PathBuf>,
    pub message: String,
}

/// `dir/name.json` becomes `dir/name.result.json`.
pub fn default_output(input: &Path) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    input.with_file_name(format!("{stem}.result.json"))
}

pub fn run_file(input: &Path, out: Option<&Path>, seed: Option<u64>) -> RunReport {
    let malformed = |message: String| RunReport { input: input.to_path_buf(), exit_code: EXIT_MALFORMED, output: None, message };
    let text = match fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => return malformed(format!("cannot read {}: {e}", input.display())),
    };
    let file: ProblemFile = match serde_json::from_str(&text) {
        Ok(f) => f,
        Err(e) => return malformed(format!("{}: {e}", input.display())),
    };
    let seed = seed.or(file.options.seed).unwrap_or(0);
    let start = Instant::now();
    let solved = kinds::solve(file.kind, file.payload, &file.options.tolerances, seed);
    let mut envelope = ResultEnvelope {
        kind: file.kind.name().to_string(),
        version: fenchelkit::VERSION.to_string(),
        status: Status::Failed,
        values: Default::default(),
        certificates: Default::default(),
        diagnostics: Default::default(),
        series: Default::default(),
        seed,
        wall_time_s: 0.0,
    };
    match solved {
        Ok(o) => {
            envelope.status = o.status;
            envelope.values = o.values;
            envelope.certificates = o.certificates;
            envelope.diagnostics = o.diagnostics;
            envelope.series = o.series;
        }
        Err(Failure::Malformed(msg)) => return malformed(format!("{}: {msg}", input.display())),
        Err(Failure::Solver(e)) => {
            envelope.diagnostics.insert("error".into(), serde_json::Value::String(e.to_string()));
        }
    }
    envelope.wall_time_s = start.elapsed().as_secs_f64();

    let path = out.map(Path::to_path_buf).unwrap_or_else(|| default_output(input));
    let written = envelope::to_json(&envelope).and_then(|json| envelope::write_atomic(&path, &json));
    if let Err(e) = written {
        return RunReport {
            input: input.to_path_buf(),
            exit_code: EXIT_FAILED,
            output: None,
            message: format!("cannot write {}: {e}", path.display()),
        };
    }
    let message = match envelope.diagnostics.get("error") {
        Some(serde_json::Value::String(e)) => e.clone(),
        _ => format!("{:?}", envelope.status).to_lowercase(),
    };
    RunReport { input: input.to_path_buf(), exit_code: envelope.status.exit_code(), output: Some(path), message }
}

/// Runs every file on up to `jobs` worker threads; reports come back in
/// input order.
pub fn run_all(inputs: &[PathBuf], out: Option<&Path>, jobs: usize, seed: Option<u64>) -> Vec<RunReport> {
    let next = AtomicUsize::new(0);
    let reports = Mutex::new(vec![None; inputs.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, inputs.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(input) = inputs.get(k) else { break };
                let r = run_file(input, out, seed);
                reports.lock().expect("no worker panics while holding the lock")[k] = Some(r);
            });
        }
    });
    reports.into_inner().expect("workers have finished").into_iter().map(|r| r.expect("every input was run")).collect()
}

/// CSV text of a series stored in a result file; the error carries the
/// exit code.
pub fn emit_series(result: &Path, name: &str) -> Result<String, (i32, String)> {
    let text = fs::read_to_string(result).map_err(|e| (EXIT_MALFORMED, format!("cannot read {}: {e}", result.display())))?;
    let envelope: ResultEnvelope =
        serde_json::from_str(&text).map_err(|e| (EXIT_MALFORMED, format!("{}: {e}", result.display())))?;
    match envelope.series.get(name) {
        Some(s) => Ok(s.to_csv()),
        None => {
            let known: Vec<&str> = envelope.series.keys().map(String::as_str).collect();
            Err((EXIT_MALFORMED, format!("unknown series {name:?}; this result has {known:?}")))
        }
    }
}
