use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use tropcap_cli::canonical::to_canonical_string;
use tropcap_cli::config::{Command, ExperimentConfig, Format, SpecSource};
use tropcap_cli::generate::{generate, Dims, GenerateKind};
use tropcap_cli::{run, CliError, Result};

#[derive(Parser)]
#[command(name = "tropcap", version, about = "Linear-region capacity of dense and mixture-of-experts ReLU layers")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report path; a manifest is written beside it. Prints to stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "TROPCAP_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true)]
    budget_nmax: Option<usize>,
    #[arg(long, global = true)]
    budget_coalitions: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[command(subcommand)]
    action: Option<Action>,
}

#[derive(Args, Default)]
struct Inputs {
    /// Spec file, or `fixture:<name>`.
    #[arg(long)]
    spec: Option<String>,
    /// Manifold file, or `fixture:<name>`.
    #[arg(long)]
    manifold: Option<String>,
    /// Command parameter `key=value`; values parse as JSON, else as strings.
    #[arg(long = "param", short = 'p')]
    params: Vec<String>,
}

#[derive(Subcommand)]
enum Action {
    /// Run the config given by --config.
    Run,
    CountRegions(Inputs),
    EnumerateCells(Inputs),
    Bounds(Inputs),
    VerifyRedundancy(Inputs),
    Zonotope(Inputs),
    Scaling(Inputs),
    EffectiveCapacity(Inputs),
    Resilience(Inputs),
    VerifyAll(Inputs),
    /// Write a random or constructed spec.
    Generate {
        #[arg(value_enum)]
        kind: GenerateKind,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        h: usize,
        #[arg(long)]
        d: Option<usize>,
    },
}

fn split(action: Action) -> (Option<Command>, Inputs) {
    use Action::*;
    match action {
        CountRegions(i) => (Some(Command::CountRegions), i),
        EnumerateCells(i) => (Some(Command::EnumerateCells), i),
        Bounds(i) => (Some(Command::Bounds), i),
        VerifyRedundancy(i) => (Some(Command::VerifyRedundancy), i),
        Zonotope(i) => (Some(Command::Zonotope), i),
        Scaling(i) => (Some(Command::Scaling), i),
        EffectiveCapacity(i) => (Some(Command::EffectiveCapacity), i),
        Resilience(i) => (Some(Command::Resilience), i),
        VerifyAll(i) => (Some(Command::VerifyAll), i),
        Run | Generate { .. } => (None, Inputs::default()),
    }
}

fn build_config(cli: &Cli, command: Option<Command>, inputs: Inputs) -> Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, command) {
        (Some(path), cmd) => {
            let mut c = ExperimentConfig::load(path)?;
            if let Some(cmd) = cmd {
                c.command = cmd;
            }
            c
        }
        (None, Some(cmd)) => ExperimentConfig::new(cmd),
        (None, None) => return Err(CliError::Config("`run` needs --config".into())),
    };
    if let Some(s) = &inputs.spec {
        cfg.spec = Some(SpecSource::parse_arg(s));
    }
    if let Some(m) = &inputs.manifold {
        cfg.manifold = Some(SpecSource::parse_arg(m));
    }
    for p in &inputs.params {
        let (k, v) = p.split_once('=').ok_or_else(|| CliError::Config(format!("param {p:?} is not key=value")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        cfg.params.insert(k.to_string(), value);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.budget_nmax {
        cfg.budgets.n_max = n;
    }
    if let Some(c) = cli.budget_coalitions {
        cfg.budgets.coalitions = c;
    }
    if let Some(s) = cli.samples {
        cfg.budgets.samples = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.path = Some(o.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    Ok(cfg)
}

fn main_with(cli: Cli, action: Option<Action>) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let Some(action) = action else {
        return run(&build_config(&cli, None, Inputs::default())?);
    };
    if let Action::Generate { kind, n, k, h, d } = action {
        let spec = generate(kind, Dims { n, k, h, d }, cli.seed.unwrap_or(0))?;
        let text = to_canonical_string(&spec);
        return match &cli.out {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
            None => {
                print!("{text}");
                Ok(())
            }
        };
    }
    let (command, inputs) = split(action);
    run(&build_config(&cli, command, inputs)?)
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    let action = cli.action.take();
    let result = main_with(cli, action);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
