use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cnslab::config::{parse_config, run};
use cnslab::harness::registry;

/// Runs the cnslab numerical experiments and writes CSV/JSON reports.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Run manifest in `key = value` form.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the manifest.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated experiments to run; overrides the manifest.
    #[arg(long)]
    experiment: Option<String>,
    /// Print the registered experiments and exit.
    #[arg(long)]
    list_experiments: bool,
    /// Worker threads (0 for all cores); overrides the manifest.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_experiments {
        for e in registry() {
            println!("{:<22} {}", e.name, e.description);
        }
        return ExitCode::SUCCESS;
    }
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(args: &Args) -> cnslab::Result<bool> {
    let mut text = match &args.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    if let Some(list) = &args.experiment {
        text.push_str(&format!("\nexperiments = {list}\n"));
    }
    if let Some(t) = args.threads {
        text.push_str(&format!("\nthreads = {t}\n"));
    }
    let mut manifest = parse_config(&text)?;
    if let Some(dir) = &args.output {
        manifest.output = dir.clone();
    }
    run(&manifest, &mut std::io::stdout())
}
