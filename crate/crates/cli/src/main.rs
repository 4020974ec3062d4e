use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavetomo::config::{self, ExperimentConfig, Mode};
use wavetomo::{compare, run, CliError};

#[derive(Parser)]
#[command(name = "wavetomo", version, about = "Potential reconstruction from nonlinear wave boundary data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One forward solve; writes the DN trace.
    Forward(RunArgs),
    /// Sinogram from boundary data, then filtered backprojection.
    Radon(RunArgs),
    /// Pointwise reconstruction on a grid of focus points.
    Pointwise(RunArgs),
    /// Filtered backprojection of a sinogram CSV or of the phantom's line integrals.
    Fbp(RunArgs),
    /// Noisy differentiation demo comparing the two spectral filters.
    SpecdiffDemo(RunArgs),
    /// Metrics between two finished runs.
    Compare {
        run_a: PathBuf,
        /// Reference run.
        run_b: PathBuf,
        /// Direction, in degrees, treated as detectable for the gradient energy ratio.
        #[arg(long, default_value_t = 45.0)]
        detectable_deg: f64,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; defaults are used for anything it leaves out.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set radon.alpha=0.02`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the effective config and exit.
    #[arg(long)]
    print_config: bool,
}

impl RunArgs {
    fn load(&self, mode: Mode) -> Result<ExperimentConfig, CliError> {
        let mut overrides = self.overrides.clone();
        if let Some(s) = self.seed {
            overrides.push(format!("seed={s}"));
        }
        if let Some(w) = self.workers {
            overrides.push(format!("workers={w}"));
        }
        if let Some(o) = &self.out {
            overrides.push(format!("output={}", toml::Value::String(o.display().to_string())));
        }
        config::load(self.config.as_deref(), mode, &overrides)
    }
}

fn report(err: &CliError, mode: Option<Mode>, cfg: Option<&ExperimentConfig>, config_path: Option<&PathBuf>) {
    eprintln!("error: {err}");
    eprintln!("  stage: {}", err.stage());
    if let Some(m) = mode {
        eprintln!("  mode: {}", m.name());
    }
    if let Some(p) = config_path {
        eprintln!("  config: {}", p.display());
    }
    if let Some(c) = cfg {
        let g = &c.grid;
        eprintln!("  grid: {}x{} nodes, nt = {}, T = {}", g.n1, g.n2, g.nt, g.t_final);
        eprintln!("  seed: {}, workers: {}, output: {}", c.seed, c.workers, c.output.display());
    }
    // the top-level message already includes the direct source
    let mut source = std::error::Error::source(err).and_then(|s| s.source());
    while let Some(s) = source {
        eprintln!("  cause: {s}");
        source = s.source();
    }
}

fn execute(mode: Mode, args: &RunArgs) -> Result<(), (CliError, Option<ExperimentConfig>)> {
    let cfg = args.load(mode).map_err(|e| (e, None))?;
    if args.print_config {
        print!("{}", toml::to_string(&cfg).expect("config serializes"));
        return Ok(());
    }
    let manifest = run(&cfg).map_err(|e| (e, Some(cfg.clone())))?;
    println!("wrote {} outputs to {}", manifest.outputs.len(), cfg.output.display());
    for (name, value) in &manifest.metrics {
        println!("  {name} = {value}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Forward(a) => (Mode::Forward, a),
        Command::Radon(a) => (Mode::Radon, a),
        Command::Pointwise(a) => (Mode::Pointwise, a),
        Command::Fbp(a) => (Mode::Fbp, a),
        Command::SpecdiffDemo(a) => (Mode::SpecdiffDemo, a),
        Command::Compare { run_a, run_b, detectable_deg, out } => {
            let result = compare(run_a, run_b, *detectable_deg).and_then(|r| {
                let text = r.to_toml();
                if let Some(path) = out {
                    std::fs::write(path, &text).map_err(CliError::io(path))?;
                }
                print!("{text}");
                Ok(())
            });
            return match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    report(&e, None, None, None);
                    ExitCode::from(e.exit_code())
                }
            };
        }
    };
    match execute(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err((e, cfg)) => {
            report(&e, Some(mode), cfg.as_ref(), args.config.as_ref());
            ExitCode::from(e.exit_code())
        }
    }
}
