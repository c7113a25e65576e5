//! Command-line front end for wallkit.
//!
//! [`run`] parses arguments, executes one subcommand and returns the exit
//! status together with the one-line JSON summary printed on stdout:
//! 0 on success, 1 on usage or validation errors, 2 when the run completed but
//! found a property violation (a failed wall check, a broken area law, …).

pub mod commands;
pub mod config;
pub mod io;

use std::ffi::OsString;

use clap::Parser;
use serde_json::{json, Map, Value};

use wallkit::WallError;

use config::{parse_config, Cli, Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Name of the environment variable supplying a fallback seed.
pub const SEED_ENV: &str = "WALLKIT_SEED";

#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub summary: Value,
    /// Help or version text requested on the command line.
    pub message: Option<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn summary_line(&self) -> String {
        serde_json::to_string(&self.summary).expect("summary serializes")
    }
}

fn error_outcome(command: Option<&str>, err: &anyhow::Error, warnings: Vec<String>) -> Outcome {
    let code = match err.downcast_ref::<WallError>() {
        Some(WallError::WallViolated(_)) => EXIT_VIOLATION,
        _ => EXIT_INVALID,
    };
    let status = if code == EXIT_VIOLATION { "violation" } else { "error" };
    Outcome {
        code,
        summary: json!({
            "command": command,
            "status": status,
            "error": format!("{err:#}"),
            "warnings": warnings,
        }),
        message: None,
        warnings,
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env_seed = std::env::var(SEED_ENV).ok();
    run_with_env(argv, env_seed.as_deref())
}

/// [`run`] with the seed environment variable passed explicitly.
pub fn run_with_env<I, T>(argv: I, env_seed: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome {
                    code: EXIT_OK,
                    summary: json!({"command": null, "status": "ok", "warnings": []}),
                    message: Some(e.to_string()),
                    warnings: Vec::new(),
                };
            }
            let text = e.to_string();
            let err = anyhow::anyhow!("{}", text.trim_start_matches("error: ").trim_end());
            return error_outcome(None, &err, Vec::new());
        }
    };
    let name = cli.command.name();
    let cfg = match parse_config(cli, env_seed) {
        Ok(c) => c,
        Err(e) => return error_outcome(Some(name), &e, Vec::new()),
    };
    match execute(&cfg) {
        Ok(o) => o,
        Err(e) => error_outcome(Some(name), &e, cfg.warnings.clone()),
    }
}

fn execute(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let rep = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| commands::execute(cfg))?,
        None => commands::execute(cfg)?,
    };
    if let Some(path) = &cfg.out {
        let text = match cfg.format {
            Format::Csv => rep.artifact.csv.clone().expect("csv availability checked at parse time"),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&rep.artifact.json)?;
                s.push('\n');
                s
            }
        };
        io::write_output(path, &text)?;
    }
    let mut summary = Map::new();
    summary.insert("command".into(), json!(cfg.command.name()));
    summary.insert("status".into(), json!(if rep.violation { "violation" } else { "ok" }));
    summary.insert("seed".into(), json!(cfg.seed));
    summary.insert("out".into(), json!(cfg.out.as_ref().map(|p| p.display().to_string())));
    summary.insert("warnings".into(), json!(cfg.warnings));
    summary.extend(rep.summary);
    Ok(Outcome {
        code: if rep.violation { EXIT_VIOLATION } else { EXIT_OK },
        summary: Value::Object(summary),
        message: None,
        warnings: cfg.warnings.clone(),
    })
}
