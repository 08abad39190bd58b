use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fvlab::experiments::{self, apply_config_file, ExperimentConfig};

/// Simulation lab for exchangeable coalescents and measure-valued
/// resampling processes with jump-diffusion mutation.
#[derive(Parser)]
#[command(name = "fvlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Resampling measure spec, e.g. `kingman:1`, `beta:1.5`,
    /// `atoms:0.5@0.3`, `uniform:1`, or sums joined with `+`.
    #[arg(long, global = true)]
    lambda: Option<String>,

    /// Mutation spec, e.g. `brownian:sigma=1`, `drift:0.5`,
    /// `cpois:rate=1,jump=point:1;-1`, `stable:alpha=1.5,scale=0.2`,
    /// sums joined with `+`, or `0` for frozen types.
    #[arg(long, global = true)]
    levy: Option<String>,

    /// Number of particles / sample size.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Time horizon.
    #[arg(long, global = true)]
    t: Option<f64>,

    /// Time grid, `geo:<lo>,<hi>,<count>` or `lin:<lo>,<hi>,<count>`.
    #[arg(long, global = true, conflicts_with = "t")]
    tgrid: Option<String>,

    /// Number of Monte Carlo replicas.
    #[arg(long, global = true)]
    replicas: Option<usize>,

    /// RNG seed; identical configs and seeds give byte-identical output.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format: csv or json.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Abort with an error if a single trajectory exceeds this many events.
    #[arg(long, global = true)]
    event_cap: Option<usize>,

    /// Config file with `key=value` lines and optional `[experiment]`
    /// sections; command-line flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Extra experiment-specific setting, repeatable: `--set eps=0.25`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Merger-rate table for all 2 <= k <= b <= bmax.
    Rates,
    /// Block counts along a time grid against the speed envelope.
    Speed,
    /// First- and second-moment identity checks.
    Moments,
    /// Support propagation probe (needs point-mass jumps).
    Support,
    /// Dust-regime probe (needs a dust measure).
    Dust,
    /// Cluster mass and hit lower bounds.
    Bounds,
    /// First-event comparison of lookdown and coalescent genealogies.
    Genealogy,
    /// Raw event-log dump of a genealogy run.
    Coalescent,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Speed => "speed",
            Command::Moments => "moments",
            Command::Support => "support",
            Command::Dust => "dust",
            Command::Bounds => "bounds",
            Command::Genealogy => "genealogy",
            Command::Coalescent => "coalescent",
        }
    }
}

fn build_config(cli: &Cli) -> fvlab::Result<ExperimentConfig> {
    let mut config = ExperimentConfig::new(cli.command.name());
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)?;
        apply_config_file(&mut config, &text)?;
    }
    if let Some(v) = &cli.lambda {
        config.apply("lambda", v)?;
    }
    if let Some(v) = &cli.levy {
        config.apply("levy", v)?;
    }
    if let Some(v) = cli.n {
        config.n = v;
    }
    if let Some(v) = cli.t {
        config.t = v;
        config.tgrid = None;
    }
    if let Some(v) = &cli.tgrid {
        experiments::parse_tgrid(v)?;
        config.tgrid = Some(v.clone());
    }
    if let Some(v) = cli.replicas {
        config.replicas = v;
    }
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = &cli.format {
        config.apply("format", v)?;
    }
    if let Some(v) = cli.event_cap {
        config.event_cap = Some(v);
    }
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| fvlab::FvError::Parse {
            input: kv.clone(),
            reason: "--set expects KEY=VALUE".into(),
        })?;
        config.apply(k.trim(), v.trim())?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|config| experiments::run(&config));
    match result {
        Ok(artifact) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &artifact) {
                    eprintln!("fvlab: cannot write {}: {e}", path.display());
                    return ExitCode::FAILURE;
                }
            } else {
                print!("{artifact}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fvlab: {e}");
            ExitCode::FAILURE
        }
    }
}
