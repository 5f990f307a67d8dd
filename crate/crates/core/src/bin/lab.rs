use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode as ProcessExit;

use clap::{Parser, Subcommand};
use serde_json::Value;

use interp_lab::scenario::{exit_code, run_config, with_jobs, write_outputs, Config, ExitCode, Kind, Scenario};

#[derive(Parser)]
#[command(name = "lab", version, about = "Scenario runner for the weighted Sobolev interpolation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List scenario kinds usable as single-scenario subcommands.
    Kinds,
    /// `lab <kind> --key value ...` runs one scenario and prints its report.
    #[command(external_subcommand)]
    Single(Vec<String>),
}

fn code(c: ExitCode) -> ProcessExit {
    ProcessExit::from(c as u8)
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

struct SingleArgs {
    kind: Kind,
    params: BTreeMap<String, Value>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    jobs: Option<usize>,
}

fn parse_single(args: &[String]) -> Result<SingleArgs, String> {
    let (name, rest) = args.split_first().ok_or("missing subcommand")?;
    let kind = Kind::parse(name).ok_or_else(|| format!("unknown subcommand `{name}`; see `lab kinds`"))?;
    let mut parsed = SingleArgs { kind, params: BTreeMap::new(), out: None, seed: None, jobs: None };
    let mut it = rest.iter();
    while let Some(flag) = it.next() {
        let key = flag.strip_prefix("--").ok_or_else(|| format!("expected `--key value`, got `{flag}`"))?;
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => (key.to_string(), it.next().ok_or_else(|| format!("`--{key}` needs a value"))?.clone()),
        };
        match key.as_str() {
            "out" => parsed.out = Some(PathBuf::from(value)),
            "seed" => parsed.seed = Some(value.parse().map_err(|e| format!("--seed: {e}"))?),
            "jobs" => parsed.jobs = Some(value.parse().map_err(|e| format!("--jobs: {e}"))?),
            _ => {
                parsed.params.insert(key.replace('-', "_"), parse_value(&value));
            }
        }
    }
    Ok(parsed)
}

fn finish(config: &Config, seed: Option<u64>, jobs: Option<usize>, out: Option<&PathBuf>, print: bool) -> ProcessExit {
    let reports = match with_jobs(jobs, || run_config(config, seed)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("lab: {e}");
            return code(ExitCode::ParseError);
        }
    };
    if let Some(dir) = out {
        if let Err(e) = write_outputs(&reports, dir) {
            eprintln!("lab: {e}");
            return code(ExitCode::EvaluationError);
        }
    }
    for r in &reports {
        if print {
            print!("{}", r.to_json());
        }
        if let Some(err) = &r.error {
            eprintln!("{}: error: {err}", r.id);
        }
        for f in &r.failures {
            eprintln!("{}: {f}", r.id);
        }
    }
    let c = exit_code(&reports);
    if !print {
        let passed = reports.iter().filter(|r| r.passed).count();
        println!("{passed}/{} scenarios passed", reports.len());
    }
    code(c)
}

fn main() -> ProcessExit {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, jobs, seed } => {
            let cfg = match Config::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("lab: {e}");
                    return code(ExitCode::ParseError);
                }
            };
            finish(&cfg, seed, jobs, Some(&out), false)
        }
        Command::Kinds => {
            for k in Kind::ALL {
                println!("{}", k.as_str());
            }
            code(ExitCode::Ok)
        }
        Command::Single(args) => {
            let s = match parse_single(&args) {
                Ok(s) => s,
                Err(msg) => {
                    eprintln!("lab: {msg}");
                    return code(ExitCode::ParseError);
                }
            };
            let scenario = Scenario {
                id: s.kind.as_str().to_string(),
                kind: s.kind,
                params: s.params,
                seed: None,
                expect: Default::default(),
            };
            let cfg = Config { seed: s.seed, scenarios: vec![scenario] };
            finish(&cfg, None, s.jobs, s.out.as_ref(), true)
        }
    }
}
