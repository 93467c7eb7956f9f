use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netinfluence_cli::config::{FileConfig, Overrides, RunConfig};
use netinfluence_cli::error::{CliError, CliResult};
use netinfluence_cli::pipeline;

#[derive(Parser)]
#[command(name = "netinfluence", version, about = "Two-step latent space estimation of social influence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit both steps to a network file and a response file.
    Fit(Common),
    /// Generate a simulated dataset and write it in the input formats.
    Simulate(Common),
    /// Generate and fit several replicates of a scenario.
    Replicate(Common),
    /// Scenario 3 over a grid of lambda values.
    Sweep(Common),
    /// Network autocorrelation baseline only.
    Lnam(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long)]
    responses: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burn: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    emit_plots: bool,
    /// 1.1, 1.2, 1.3, 2 or 3.
    #[arg(long)]
    scenario: Option<String>,
    /// Shrinkage for scenario 3; repeat or comma-separate for sweep.
    #[arg(long, value_delimiter = ',')]
    lambda: Vec<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Row-normalize the weight matrix of the baseline.
    #[arg(long)]
    row_normalize: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            chains: self.chains,
            iters: self.iters,
            burn: self.burn,
            thin: self.thin,
            out: self.out.clone(),
            emit_plots: self.emit_plots,
            scenario: self.scenario.clone(),
            lambda: self.lambda.clone(),
            replicates: self.replicates,
            network: self.network.clone(),
            responses: self.responses.clone(),
            row_normalize: self.row_normalize,
        }
    }

    fn file(&self) -> CliResult<FileConfig> {
        match &self.config {
            Some(p) => FileConfig::load(p),
            None => Ok(FileConfig::default()),
        }
    }

    fn resolve(&self, simulated: bool) -> CliResult<RunConfig> {
        RunConfig::resolve(&self.file()?, &self.overrides(), simulated)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(c) => {
            let cfg = c.resolve(false)?;
            let s = pipeline::run_fit(&cfg)?;
            for key in ["delta.mean", "delta.hpd_low", "delta.hpd_high", "gamma.mean", "lnam.rho"] {
                if let Some(v) = s.get(key) {
                    println!("{key}={v}");
                }
            }
        }
        Command::Simulate(c) => {
            for dir in pipeline::run_simulate(&c.resolve(true)?)? {
                println!("wrote {}", dir.display());
            }
        }
        Command::Replicate(c) => {
            let cfg = c.resolve(true)?;
            let all = pipeline::run_replicate(&cfg)?;
            println!("fitted {} replicates into {}", all.len(), cfg.out.display());
        }
        Command::Sweep(mut c) => {
            if c.scenario.is_none() {
                c.scenario = Some("3".into());
            }
            let cfg = c.resolve(true)?;
            for (lambda, deltas) in pipeline::run_sweep(&cfg)? {
                let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
                println!("lambda={lambda} delta.mean={mean}");
            }
        }
        Command::Lnam(c) => {
            // scenario data when one is named and no files are given
            let simulated = c.network.is_none() && (c.scenario.is_some() || c.file()?.scenario.is_some());
            let s = pipeline::run_lnam(&c.resolve(simulated)?)?;
            print!("{}", s.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Fit(c) | Command::Simulate(c) | Command::Replicate(c) | Command::Sweep(c) | Command::Lnam(c) => {
            c.out.clone()
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_error(&e, out),
    }
}

fn report_error(e: &CliError, out: Option<PathBuf>) -> ExitCode {
    let record = e.record();
    eprintln!("{record}");
    if let Some(dir) = out.filter(|d| d.is_dir()) {
        let _ = std::fs::write(dir.join("error.txt"), format!("{record}\n"));
    }
    ExitCode::from(e.exit_code() as u8)
}
