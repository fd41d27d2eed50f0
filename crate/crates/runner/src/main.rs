use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dyadic_lab::extrapolation::default_rh_constant;
use dyadic_lab::{Exponent, Lattice};
use dyadic_lab_runner::{args, output, run, Experiment, ExperimentConfig, Format, FunctionSource, GridParams, SpaceConfig, WeightSource};

#[derive(Parser)]
#[command(name = "dyadic-lab", version, about = "Dyadic harmonic analysis experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    dim: u32,
    #[arg(long, global = true, default_value_t = 8)]
    levels: u32,
    /// dyadic or shifted.
    #[arg(long, global = true, default_value = "dyadic")]
    lattice: Lattice,
    /// Write the record here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    /// Also save the resolved config, for reproduction with `run`.
    #[arg(long, global = true)]
    save_config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Muckenhoupt, A-infinity and limited-range constants.
    Weights {
        /// ones, lognormal:σ, power:α[@x;y] or a file.
        #[arg(long, default_value = "ones", value_parser = args::weight)]
        weight: WeightSource,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, requires = "s")]
        r: Option<f64>,
        #[arg(long, requires = "r")]
        s: Option<f64>,
    },
    /// Maximal function, with an operator norm estimate when --space is given.
    Maximal {
        #[arg(long, default_value = "nonnegative", value_parser = args::function)]
        f: FunctionSource,
        #[arg(long, value_parser = args::space)]
        space: Option<SpaceConfig>,
    },
    /// Calderón–Zygmund sparse family and its domination check.
    Sparse {
        #[arg(long, default_value = "nonnegative", value_parser = args::function)]
        f: FunctionSource,
        #[arg(long, default_value_t = 2.0)]
        a: f64,
    },
    /// Norm of a function in a weighted or variable Lebesgue space.
    Norm {
        /// weighted:p=2,w=<weight> or variable:p=<file>,w=<weight>.
        #[arg(long, value_parser = args::space)]
        space: SpaceConfig,
        #[arg(long, default_value = "signed", value_parser = args::function)]
        f: FunctionSource,
    },
    /// The (r, s)-rescaled space and its construction trace.
    Rescale {
        #[arg(long, value_parser = args::space)]
        space: SpaceConfig,
        #[arg(long)]
        r: Exponent,
        #[arg(long)]
        s: Exponent,
        #[arg(long, value_parser = args::function)]
        f: Option<FunctionSource>,
    },
    /// Rubio de Francia weight and its properties.
    Rdf {
        #[arg(long, default_value = "signed", value_parser = args::function)]
        f: FunctionSource,
        #[arg(long, default_value = "weighted:p=2", value_parser = args::space)]
        space: SpaceConfig,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        /// Iteration depth K.
        #[arg(long, default_value_t = 40)]
        depth: usize,
        /// Bound on the maximal operator; Buckley's bound by default.
        #[arg(long)]
        bound: Option<f64>,
        #[arg(long)]
        c_d: Option<f64>,
    },
    /// Self-improvement exponent r0 and the (r, s) choice giving p = 2.
    Selfimprove {
        /// Bound on the maximal operator, as a rational.
        #[arg(long)]
        bound: String,
        #[arg(long)]
        r_star: Exponent,
        /// Reverse Hölder constant, as a rational; 4 in one dimension, 16 in two by default.
        #[arg(long)]
        c_d: Option<String>,
        #[arg(long)]
        s0: Option<Exponent>,
    },
    /// Exponent plan for limited-range off-diagonal extrapolation.
    Lrplan {
        #[arg(long)]
        r1: Exponent,
        #[arg(long)]
        r2: Exponent,
        #[arg(long)]
        s1: Exponent,
        #[arg(long)]
        s2: Exponent,
        #[arg(long)]
        p1: Exponent,
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Singular value tails of commutators across refinement depths.
    ProbeCompactness {
        #[arg(long, default_value = "hilbert")]
        kernel: String,
        #[arg(long, default_value_t = 1)]
        truncation: usize,
        /// bump[:width], jump, log or a file.
        #[arg(long, default_value = "bump")]
        symbol: String,
        #[arg(long, value_parser = args::weight)]
        weight: Option<WeightSource>,
        #[arg(long, default_value = "6..10", value_parser = args::depths)]
        depths: std::vec::Vec<u32>,
        #[arg(long, default_value = "8,16,32", value_parser = args::tails)]
        tails: std::vec::Vec<usize>,
    },
    /// The full acceptance suite.
    Acceptance,
    /// Runs a saved config file.
    Run {
        config: PathBuf,
    },
}

fn experiment(command: Command, dim: u32) -> Result<Experiment> {
    Ok(match command {
        Command::Weights { weight, p, r, s } => Experiment::Weights { weight, p, r, s },
        Command::Maximal { f, space } => Experiment::Maximal { f, space },
        Command::Sparse { f, a } => Experiment::Sparse { f, a },
        Command::Norm { space, f } => Experiment::Norm { space, f },
        Command::Rescale { space, r, s, f } => Experiment::Rescale { space, r, s, f },
        Command::Rdf { f, space, r, depth, bound, c_d } => Experiment::Rdf { f, space, r, depth, bound, c_d },
        Command::Selfimprove { bound, r_star, c_d, s0 } => {
            let c_d = c_d.unwrap_or_else(|| default_rh_constant(dim).to_string());
            Experiment::Selfimprove { bound, r_star, c_d, s0 }
        }
        Command::Lrplan { r1, r2, s1, s2, p1, epsilon } => Experiment::Lrplan { r: [r1, r2], s: [s1, s2], p1, epsilon },
        Command::ProbeCompactness { kernel, truncation, symbol, weight, depths, tails } => Experiment::ProbeCompactness {
            kernel: args::kernel(&kernel, dim, truncation).map_err(anyhow::Error::msg)?,
            symbol: args::symbol(&symbol, dim).map_err(anyhow::Error::msg)?,
            weight,
            depths,
            tails,
        },
        Command::Acceptance => Experiment::Acceptance,
        Command::Run { .. } => unreachable!("handled by the caller"),
    })
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    let g = cli.global;
    let config = match cli.command {
        Command::Run { config } => ExperimentConfig::load(&config)?,
        command => {
            let grid = GridParams { dim: g.dim, levels: g.levels };
            ExperimentConfig::new(g.seed, grid, g.lattice, experiment(command, g.dim)?)
        }
    };
    if let Some(path) = &g.save_config {
        std::fs::write(path, config.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    let record = run(&config)?;
    output::write_outputs(&record, &config.output)?;
    let text = output::render(&record, g.format)?;
    match &g.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    for c in record.invariants.iter().filter(|c| !c.pass) {
        eprintln!("invariant failed: {} ({})", c.name, c.detail);
    }
    Ok(record.passed)
}
