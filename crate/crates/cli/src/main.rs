//! Command-line driver. Subcommands map onto the standard experiments:
//! `sweep` runs the full pipeline over a tau grid, `learn` prints one
//! reconstruction against the Floquet-Magnus prediction, `diagnose` computes
//! spectral statistics only, and `rmt` evaluates the random-matrix
//! references.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use floquet_core::kicked_top::{floquet_operator, FloquetVariant};
use floquet_core::learning::{
    aligned_distance, constraint_matrix, phase_align, reconstruct, sample_initial_states,
};
use floquet_core::magnus::{ansatz_set, project_fm_coefficients_variant};
use floquet_core::rmt::{analytic_q_a0, ise_average_q, lambda_rmt, monte_carlo_lambda};
use floquet_core::spin::SpinSize;
use floquet_learn::{run_sweep, ConfigError, OutputFormat, Preset, SweepConfig, TauGrid};

#[derive(Parser)]
#[command(
    name = "floquet-learn",
    about = "Trotterized kicked-top simulation, Floquet-Hamiltonian learning, and chaos diagnostics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full diagnostic sweep over a tau grid.
    Sweep(SweepArgs),
    /// Reconstruct the generator at a single tau and print the coefficient
    /// table against the Floquet-Magnus prediction.
    Learn(LearnArgs),
    /// Spectral statistics (spacing ratio, participation ratio) only.
    Diagnose(SweepArgs),
    /// Random-matrix reference values and the Monte-Carlo cross-check.
    Rmt(RmtArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Collective spin S (integer; use a config file for half-integer spins).
    #[arg(long)]
    spin: Option<u32>,
    /// Master seed for all sampled randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Gate split: two_step or three_step.
    #[arg(long)]
    variant: Option<FloquetVariant>,
    /// Worker threads for the tau grid (default: FLOQUET_LEARN_WORKERS or
    /// all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Named setup: paper-default, fig2, or fig3.
    #[arg(long)]
    preset: Option<Preset>,
    /// TOML config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tau_min: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    tau_points: Option<usize>,
    /// Ansatz truncation orders, e.g. `--ansatz-orders 0,1,2`.
    #[arg(long, value_delimiter = ',')]
    ansatz_orders: Option<Vec<u8>>,
    /// Number of constraint states (default 2S + 1).
    #[arg(long)]
    n_con: Option<usize>,
    /// Stroboscopic evolution time in units of 1/J_z.
    #[arg(long)]
    total_time: Option<f64>,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Trotter step size in units of 1/J_z.
    #[arg(long)]
    tau: f64,
    /// Ansatz truncation order.
    #[arg(long, default_value_t = 2)]
    order: u8,
    #[arg(long)]
    n_con: Option<usize>,
    #[arg(long, default_value_t = 100.0)]
    total_time: f64,
}

#[derive(Args)]
struct RmtArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Ansatz truncation order.
    #[arg(long, default_value_t = 0)]
    order: u8,
    /// Monte-Carlo samples (0 skips the Monte-Carlo check).
    #[arg(long, default_value_t = 50)]
    mc_samples: usize,
    #[arg(long)]
    n_con: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };

    let outcome = match cli.command {
        Command::Sweep(args) => cmd_sweep(args, false),
        Command::Diagnose(args) => cmd_sweep(args, true),
        Command::Learn(args) => cmd_learn(args),
        Command::Rmt(args) => cmd_rmt(args),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

enum CliError {
    Config(String),
    Numerical(String),
    Io(std::io::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<floquet_core::Error> for CliError {
    fn from(e: floquet_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<floquet_learn::SweepError> for CliError {
    fn from(e: floquet_learn::SweepError) -> Self {
        match e {
            floquet_learn::SweepError::Config(c) => CliError::Config(c.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn worker_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| {
            std::env::var("FLOQUET_LEARN_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0)
}

fn build_config(args: &SweepArgs, diagnose_only: bool) -> Result<SweepConfig, CliError> {
    let mut config = match args.preset {
        Some(preset) => SweepConfig::preset(preset),
        None => SweepConfig::default(),
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        config = SweepConfig::from_toml(&text)?;
    }
    if let Some(s) = args.common.spin {
        config.two_s = 2 * s;
    }
    if let Some(seed) = args.common.seed {
        config.seed = seed;
    }
    if let Some(variant) = args.common.variant {
        config.variant = variant;
    }
    if args.tau_min.is_some() || args.tau_max.is_some() || args.tau_points.is_some() {
        let (mut min, mut max, mut points) = match &config.tau {
            TauGrid::Range { min, max, points } => (*min, *max, *points),
            TauGrid::Explicit { grid } => {
                let lo = grid.first().copied().unwrap_or(0.01);
                let hi = grid.last().copied().unwrap_or(10.0);
                (lo, hi, grid.len().max(2))
            }
        };
        if let Some(v) = args.tau_min {
            min = v;
        }
        if let Some(v) = args.tau_max {
            max = v;
        }
        if let Some(v) = args.tau_points {
            points = v;
        }
        config.tau = TauGrid::Range { min, max, points };
    }
    if let Some(orders) = &args.ansatz_orders {
        config.ansatz_orders = orders.clone();
    }
    if let Some(n) = args.n_con {
        config.n_con = n;
    }
    if let Some(t) = args.total_time {
        config.total_time = t;
    }
    if diagnose_only {
        config.diagnostics.learning = false;
        config.diagnostics.rmt = false;
        config.diagnostics.accuracy = false;
        config.diagnostics.spacing = true;
        config.diagnostics.pr = true;
    }
    Ok(config)
}

fn cmd_sweep(args: SweepArgs, diagnose_only: bool) -> Result<(), CliError> {
    let config = build_config(&args, diagnose_only)?;
    let workers = worker_count(args.common.workers);
    eprintln!(
        "sweep: S = {}, {} tau points, seed {}",
        config.two_s as f64 / 2.0,
        config.tau.points().len(),
        config.seed
    );
    let result = run_sweep(&config, workers)?;
    let failed = result.records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("warning: {failed} tau points failed (see `error` column)");
    }
    let rendered = floquet_learn::emit::render(&result, args.format);
    match &args.out {
        Some(path) => {
            std::fs::write(path, rendered)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn cmd_learn(args: LearnArgs) -> Result<(), CliError> {
    let two_s = 2 * args.common.spin.unwrap_or(128);
    let size = SpinSize::new(two_s)?;
    let variant = args.common.variant.unwrap_or(FloquetVariant::ThreeStep);
    let seed = args.common.seed.unwrap_or(2024);
    let params = floquet_core::kicked_top::ModelParams::paper_default();
    let n_con = args.n_con.unwrap_or(size.dim());

    let set = ansatz_set(size, args.order, variant)?;
    if n_con <= set.len() {
        return Err(CliError::Config(format!(
            "n_con = {n_con} must exceed the ansatz size {}",
            set.len()
        )));
    }
    let step = floquet_operator(&params, size, args.tau, variant)?;
    let states = sample_initial_states(size, n_con, seed)?;
    let m = constraint_matrix(&step, &states, &set, args.total_time)?;
    let rec = reconstruct(&m)?;
    let fm = project_fm_coefficients_variant(&params, size, args.order, args.tau, variant)?
        .into_normalized();
    let distance = aligned_distance(&fm.values, &rec.c_rec)?;
    let aligned = phase_align(&fm.values, &rec.c_rec);

    println!(
        "# S = {}, tau = {}, order = {}, n_con = {n_con}, {} steps",
        size.s(),
        args.tau,
        args.order,
        m.n_steps
    );
    println!("# lambda1/sqrt(N_con) = {:.6e}", rec.lambda1);
    println!("# parameter distance  = {:.6e}", distance);
    println!(
        "{:<12} {:>12} {:>12} {:>12} {:>12}",
        "operator", "re(c_rec)", "im(c_rec)", "re(c_fm)", "im(c_fm)"
    );
    for (i, label) in fm.labels.iter().enumerate() {
        println!(
            "{:<12} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            label.to_string(),
            aligned[i].re,
            aligned[i].im,
            fm.values[i].re,
            fm.values[i].im
        );
    }
    Ok(())
}

fn cmd_rmt(args: RmtArgs) -> Result<(), CliError> {
    let two_s = 2 * args.common.spin.unwrap_or(128);
    let size = SpinSize::new(two_s)?;
    let variant = args.common.variant.unwrap_or(FloquetVariant::ThreeStep);
    let seed = args.common.seed.unwrap_or(2024);
    let set = ansatz_set(size, args.order, variant)?;
    let n_con = args.n_con.unwrap_or(size.dim());

    println!("# S = {}, ansatz order {} ({} operators)", size.s(), args.order, set.len());
    let quad = ise_average_q(&set, size)?;
    println!("lambda_rmt (quadrature Q) = {:.8e}", lambda_rmt(&quad)?);
    if args.order == 0 && variant == FloquetVariant::ThreeStep {
        let analytic = analytic_q_a0(size);
        println!("lambda_rmt (closed form)  = {:.8e}", lambda_rmt(&analytic)?);
    }
    if args.mc_samples > 0 {
        let (mean, se) = monte_carlo_lambda(&set, size, n_con, args.mc_samples, seed)?;
        println!(
            "monte carlo ({} samples, n_con = {n_con}) = {mean:.6e} +- {se:.2e}",
            args.mc_samples
        );
    }
    Ok(())
}
