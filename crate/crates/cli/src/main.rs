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

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fenchelkit_cli::{emit_series, envelope::write_atomic, run_all, EXIT_MALFORMED};

#[derive(Parser)]
#[command(name = "fenchelkit", version, about = "Conjugates, duality certificates, transport and minimal flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve problem files and write result files next to them.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Result path (single input only).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overrides the seed in the problem files.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print a series of a result file as CSV.
    Emit {
        result: PathBuf,
        #[arg(long)]
        series: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { files, out, jobs, seed } => {
            if out.is_some() && files.len() > 1 {
                eprintln!("--out needs a single input file");
                EXIT_MALFORMED
            } else {
                let reports = run_all(&files, out.as_deref(), jobs, seed);
                for r in &reports {
                    match &r.output {
                        Some(o) => println!("{} -> {} ({})", r.input.display(), o.display(), r.message),
                        None => eprintln!("error: {}", r.message),
                    }
                }
                reports.iter().map(|r| r.exit_code).max().unwrap_or(0)
            }
        }
        Command::Emit { result, series, out } => match emit_series(&result, &series) {
            Ok(csv) => match out {
                Some(path) => match write_atomic(&path, &csv) {
                    Ok(()) => 0,
                    Err(e) => {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        1
                    }
                },
                None => {
                    print!("{csv}");
                    0
                }
            },
            Err((code, msg)) => {
                eprintln!("error: {msg}");
                code
            }
        },
    };
    ExitCode::from(code as u8)
}
