//! `smellml` command-line entry point.
//!
//! Exit codes: 0 success, 1 usage, 2 input corpus, 3 schema, 4 pipeline.
//! Every run that gets past argument parsing writes a manifest.

mod args;
mod commands;
mod manifest;

use std::path::PathBuf;

use chrono::{SecondsFormat, Utc};
use clap::error::ErrorKind;
use clap::Parser;

use args::{config_path, inject_config, manifest_next_to, parse_config, Cli};
use commands::{primary_output, run, CliError, RunRecord, EXIT_PIPELINE, EXIT_USAGE};
use manifest::{config_hash, write_atomic, RunManifest};

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn parse_args(argv: Vec<String>) -> Result<Cli, i32> {
    let argv = match config_path(&argv) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                eprintln!("error: config file {}: {e}", path.display());
                EXIT_USAGE
            })?;
            let entries = parse_config(&text).map_err(|e| {
                eprintln!("error: {}: {e}", path.display());
                EXIT_USAGE
            })?;
            inject_config(&argv, &entries)
        }
        None => argv,
    };
    Cli::try_parse_from(&argv).map_err(|e| {
        let _ = e.print();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
            _ => EXIT_USAGE,
        }
    })
}

fn real_main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match parse_args(argv.clone()) {
        Ok(cli) => cli,
        Err(code) => return code,
    };

    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return EXIT_USAGE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_PIPELINE;
        }
    }

    let started_at = now();
    let mut record = RunRecord::default();
    let outcome = run(&cli.command, &mut record);
    let (exit_code, error) = match &outcome {
        Ok(()) => (0, None),
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            (*code, Some(message.clone()))
        }
    };
    for w in &record.warnings {
        log::warn!("{w}");
    }

    let config = serde_json::to_value(&cli.command).unwrap_or_default();
    let subcommand = config
        .as_object()
        .and_then(|o| o.keys().next().cloned())
        .unwrap_or_default();
    let manifest_path = cli
        .manifest
        .clone()
        .or_else(|| primary_output(&cli.command).map(manifest_next_to))
        .unwrap_or_else(|| PathBuf::from(format!("smellml-{subcommand}.manifest.json")));
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command_line: argv,
        subcommand,
        config_hash: config_hash(&config),
        config,
        corpus_hash: record.corpus_hash,
        master_seed: record.seed,
        jobs: cli.jobs,
        outputs: record.outputs,
        started_at,
        finished_at: now(),
        exit_code,
        error,
        failing_config: record.failing_config,
        results: record.results,
        warnings: record.warnings,
    };
    let written = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| e.to_string())
        .and_then(|bytes| write_atomic(&manifest_path, &bytes).map_err(|e| e.to_string()));
    if let Err(e) = written {
        eprintln!("error: writing manifest {}: {e}", manifest_path.display());
        if exit_code == 0 {
            return EXIT_PIPELINE;
        }
    }
    exit_code
}

fn main() {
    std::process::exit(real_main());
}
