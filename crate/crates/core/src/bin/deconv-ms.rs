use clap::{Parser, Subcommand};
use deconv_multiscale::cli::{cmd_analyze, cmd_quantiles, cmd_reproduce, cmd_synthesize, Figure, Scenario};
use deconv_multiscale::synth::DensitySpec;
use deconv_multiscale::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "deconv-ms", version, about = "Multiscale shape inference under measurement error")]
struct Cli {
    /// Worker threads for simulation and evaluation.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the quantile table of a scenario.
    Quantiles {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Confidence rectangles and sign calls for a dataset.
    Analyze {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        quantiles: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a synthetic dataset; error law and size come from the scenario.
    Synthesize {
        #[arg(long)]
        density: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate a simulation table: fig2, quantile10k or coverage.
    Reproduce {
        figure: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    if cli.workers == 0 {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))?;
    match cli.command {
        Command::Quantiles { scenario, out } => {
            Ok(vec![cmd_quantiles(&Scenario::load(&scenario)?, &out, cli.workers, cli.seed)?])
        }
        Command::Analyze { scenario, data, quantiles, out } => {
            cmd_analyze(&data, &Scenario::load(&scenario)?, &quantiles, &out)
        }
        Command::Synthesize { density, scenario, out } => {
            let sc = Scenario::load(&scenario)?;
            let text = std::fs::read_to_string(&density)?;
            let spec: DensitySpec =
                serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
            cmd_synthesize(&spec, sc.error, sc.n, cli.seed.unwrap_or(sc.seed), &out)
        }
        Command::Reproduce { figure, out, reps } => {
            cmd_reproduce(figure.parse::<Figure>()?, &out, reps, cli.seed.unwrap_or(1), cli.workers)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("deconv-ms: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
