#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use args::{Cli, OUT_DIR_ENV};
use output::{Manifest, OutputDir, Timings};

const EXIT_USAGE: i32 = 2;

fn resolved_config(cli: &Cli) -> Value {
    let mut map = serde_json::Map::new();
    if let Ok(Value::Object(fields)) = serde_json::to_value(&cli.command) {
        for (k, v) in fields {
            map.insert(k.replace('_', "-"), v);
        }
    }
    map.insert("seed".into(), Value::from(cli.seed));
    Value::Object(map)
}

fn run(argv: Vec<OsString>) -> i32 {
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    let root = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut out = match OutputDir::create(root) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create output directory: {e}");
            return commands::EXIT_IO;
        }
    };
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let clock = Instant::now();
    let result = commands::dispatch(&cli.command, cli.seed, &mut out);
    let (code, status) = match &result {
        Ok(()) => (0, "ok".to_string()),
        Err(e) => (e.code, e.message.clone()),
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name().to_string(),
        config: resolved_config(&cli),
        outputs: out.written().to_vec(),
        status: status.clone(),
        exit_code: code,
        timings: Timings {
            started_unix_ms: started,
            wall_seconds: clock.elapsed().as_secs_f64(),
        },
    };
    if let Err(e) = out.write_json("manifest.json", &manifest) {
        eprintln!("error: cannot write manifest: {e}");
        return commands::EXIT_IO;
    }
    if code != 0 {
        eprintln!("error: {status}");
    } else {
        println!(
            "{}: wrote {} to {}",
            manifest.subcommand,
            manifest.outputs.join(", "),
            out.root().display()
        );
    }
    code
}

fn main() {
    std::process::exit(run(std::env::args_os().collect()));
}
