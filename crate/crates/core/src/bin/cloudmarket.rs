use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cloudmarket::cli::{dispatch, parse_config, write_atomic, Command, RunConfig};

/// Options-based sequential auction scenarios, chain analytics and stage-two
/// bid curves.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    command: Command,
    /// Flat `key = value` config; must name the same scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// table1-uniform, table1-laplace or table2; applied before the config keys.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also write a JSON mirror of each result table.
    #[arg(long)]
    json: bool,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn resolve(args: &Args) -> cloudmarket::Result<RunConfig> {
    let mut run = match &args.config {
        Some(path) => {
            let run = parse_config(path)?;
            if run.command != args.command {
                return Err(cloudmarket::Error::Config(format!(
                    "{} names scenario {}, but the command is {}",
                    path.display(),
                    run.command,
                    args.command
                )));
            }
            run
        }
        None => RunConfig::new(args.command, 1),
    };
    if let Some(p) = &args.preset {
        run.settings.apply_preset(p)?;
        run.preset = Some(p.clone());
    }
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| cloudmarket::Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        run.settings.set(k.trim(), v.trim())?;
    }
    if let Some(r) = args.reps {
        run.settings.set("reps", &r.to_string())?;
    }
    if let Some(s) = args.seed {
        run.seed = s;
    }
    run.out = args.out.clone();
    run.json = args.json;
    Ok(run)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let run = match resolve(&args) {
        Ok(run) => run,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match dispatch(&run) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let diag = format!("command: {}\nseed: {}\nerror: {e}\n", run.command, run.seed);
            if std::fs::create_dir_all(&run.out).is_ok() {
                let _ = write_atomic(&run.out.join("error.txt"), diag.as_bytes());
            }
            ExitCode::FAILURE
        }
    }
}
