//! `beyond-rwa` binary: subcommands over the library's three computation
//! routes (moment dynamics, closed forms, Fock-space oracle) plus the bundled
//! validation suite. Exit codes: 0 success, 1 computation failure, 2 usage
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beyond_rwa::cli::{
    self, cmd_evolve, cmd_mcwf, cmd_oracle_evolve, cmd_oracle_ground, cmd_steady, cmd_sweep,
    cmd_validate, CliError, EvolveArgs, McwfArgs, OracleEvolveArgs, OracleGroundArgs,
    ParamOverrides, SteadyArgs, SweepArgs, SweepParam, ValidateArgs,
};

#[derive(Parser)]
#[command(
    name = "beyond-rwa",
    version,
    about = "Dissipative atom-cavity dynamics beyond the rotating-wave approximation",
    long_about = "Stationary photon emission of a collective atom-cavity system with \
counter-rotating interaction terms: moment rate equations, closed-form rates, and a \
truncated-Fock master-equation / quantum-jump oracle.\n\nAll frequencies and rates are \
angular, in s^-1 (optical \"frequency\" often means omega/2pi; multiply by 2pi first). \
Defaults correspond to a fiber chip microcavity on the Rb D2 line with N = 1e4 atoms."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Physical parameters; flags override config-file keys, which override the
/// built-in reference set.
#[derive(Args)]
struct ParamFlags {
    /// Cavity angular frequency, s^-1
    #[arg(long)]
    omega_c: Option<f64>,
    /// Atomic angular frequency, s^-1
    #[arg(long)]
    omega_a: Option<f64>,
    /// Single-atom coupling, s^-1
    #[arg(long)]
    g_c: Option<f64>,
    /// Cavity decay rate, s^-1
    #[arg(long)]
    kappa: Option<f64>,
    /// Single-atom spontaneous decay rate, s^-1
    #[arg(long)]
    gamma: Option<f64>,
    /// Atom number N
    #[arg(long)]
    n_atoms: Option<f64>,
    /// Use the rotating-wave (Jaynes-Cummings) interaction
    #[arg(long)]
    rwa: bool,
    /// Flat key=value config file; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ParamFlags {
    fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            omega_c: self.omega_c,
            omega_a: self.omega_a,
            g_c: self.g_c,
            kappa: self.kappa,
            gamma: self.gamma,
            n_atoms: self.n_atoms,
            rwa: self.rwa,
            config: self.config.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Stationary emission rates: exact linear solve plus closed form
    Steady {
        #[command(flatten)]
        params: ParamFlags,
        /// Also write the report as a one-row CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the moment rate equations from vacuum (CSV trajectory)
    Evolve {
        #[command(flatten)]
        params: ParamFlags,
        /// End time, seconds
        #[arg(long)]
        t_end: Option<f64>,
        /// Number of uniform sample intervals
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        abs_tol: Option<f64>,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter; CSV of (value, exact rate, closed-form rate)
    Sweep {
        #[command(flatten)]
        params: ParamFlags,
        /// One of: n-atoms, detuning, g-c, kappa, gamma
        #[arg(long)]
        param: Option<String>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        /// Number of grid points
        #[arg(long)]
        steps: Option<usize>,
        /// Logarithmic grid (endpoints must be positive)
        #[arg(long)]
        log: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the truncated-Fock master equation from vacuum (CSV of the
    /// same ten moment columns as `evolve`)
    OracleEvolve {
        #[command(flatten)]
        params: ParamFlags,
        /// Cavity truncation dimension
        #[arg(long)]
        dim_c: Option<usize>,
        /// Atomic-mode truncation dimension
        #[arg(long)]
        dim_a: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        abs_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ground-state diagnostics of the closed Hamiltonian
    OracleGround {
        #[command(flatten)]
        params: ParamFlags,
        #[arg(long)]
        dim_c: Option<usize>,
        #[arg(long)]
        dim_a: Option<usize>,
        /// Also write the report as a one-row CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantum-jump Monte-Carlo ensemble (click statistics + averaged moments)
    Mcwf {
        #[command(flatten)]
        params: ParamFlags,
        #[arg(long)]
        dim_c: Option<usize>,
        #[arg(long)]
        dim_a: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Sampling grid resolution (jump detection is exact regardless)
        #[arg(long)]
        sample_dt: Option<f64>,
        #[arg(long)]
        n_traj: Option<usize>,
        /// RNG seed (mandatory: runs must be reproducible)
        #[arg(long)]
        seed: Option<u64>,
        /// Start of the stationary click-rate window
        #[arg(long)]
        window_start: Option<f64>,
        /// Ensemble-averaged moments CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-trajectory click records CSV
        #[arg(long)]
        clicks_out: Option<PathBuf>,
    },
    /// Run the validation suite (criteria A1-A6)
    Validate {
        /// RNG seed feeding the stochastic criteria (A1, A5)
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset, e.g. "a2,a4" (default: all)
        #[arg(long)]
        criteria: Option<String>,
        /// Quantum-jump ensemble size for A5
        #[arg(long, default_value_t = 10_000)]
        n_traj: usize,
    },
}

fn run(command: Command) -> Result<bool, CliError> {
    match command {
        Command::Steady { params, out } => {
            let (params, file) = params.overrides().resolve()?;
            file.finish()?;
            cmd_steady(&SteadyArgs { params, out }, std::io::stdout().lock())?;
            Ok(true)
        }
        Command::Evolve { params, t_end, samples, rel_tol, abs_tol, out } => {
            let (params, mut file) = params.overrides().resolve()?;
            let t_end = t_end
                .or(file.take_f64("t_end")?)
                .ok_or_else(|| CliError::Usage("t_end is required (--t-end or config)".into()))?;
            let samples = samples.or(file.take_usize("samples")?).unwrap_or(1000);
            let rel_tol = rel_tol.or(file.take_f64("rel_tol")?).unwrap_or(1e-10);
            let abs_tol = abs_tol.or(file.take_f64("abs_tol")?).unwrap_or(1e-14);
            file.finish()?;
            cmd_evolve(&EvolveArgs { params, t_end, samples, rel_tol, abs_tol, out })?;
            Ok(true)
        }
        Command::Sweep { params, param, from, to, steps, log, out } => {
            let (params, mut file) = params.overrides().resolve()?;
            let param_name = param
                .or(file.take_string("param"))
                .ok_or_else(|| CliError::Usage("sweep parameter is required (--param)".into()))?;
            let param = SweepParam::parse(&param_name)?;
            let from = from
                .or(file.take_f64("from")?)
                .ok_or_else(|| CliError::Usage("sweep start is required (--from)".into()))?;
            let to = to
                .or(file.take_f64("to")?)
                .ok_or_else(|| CliError::Usage("sweep end is required (--to)".into()))?;
            let steps = steps.or(file.take_usize("steps")?).unwrap_or(50);
            let log = log || file.take_bool("log")?.unwrap_or(false);
            file.finish()?;
            cmd_sweep(&SweepArgs { params, param, from, to, steps, log, out })?;
            Ok(true)
        }
        Command::OracleEvolve { params, dim_c, dim_a, t_end, samples, rel_tol, abs_tol, out } => {
            let (params, mut file) = params.overrides().resolve()?;
            let dim_c = dim_c.or(file.take_usize("dim_c")?).unwrap_or(8);
            let dim_a = dim_a.or(file.take_usize("dim_a")?).unwrap_or(8);
            let t_end = t_end
                .or(file.take_f64("t_end")?)
                .ok_or_else(|| CliError::Usage("t_end is required (--t-end or config)".into()))?;
            let samples = samples.or(file.take_usize("samples")?).unwrap_or(200);
            let rel_tol = rel_tol.or(file.take_f64("rel_tol")?).unwrap_or(1e-9);
            let abs_tol = abs_tol.or(file.take_f64("abs_tol")?).unwrap_or(1e-13);
            file.finish()?;
            cmd_oracle_evolve(&OracleEvolveArgs {
                params,
                dim_c,
                dim_a,
                t_end,
                samples,
                rel_tol,
                abs_tol,
                out,
            })?;
            Ok(true)
        }
        Command::OracleGround { params, dim_c, dim_a, out } => {
            let (params, mut file) = params.overrides().resolve()?;
            let dim_c = dim_c.or(file.take_usize("dim_c")?).unwrap_or(8);
            let dim_a = dim_a.or(file.take_usize("dim_a")?).unwrap_or(8);
            file.finish()?;
            cmd_oracle_ground(
                &OracleGroundArgs { params, dim_c, dim_a, out },
                std::io::stdout().lock(),
            )?;
            Ok(true)
        }
        Command::Mcwf {
            params,
            dim_c,
            dim_a,
            t_end,
            sample_dt,
            n_traj,
            seed,
            window_start,
            out,
            clicks_out,
        } => {
            let (params, mut file) = params.overrides().resolve()?;
            let dim_c = dim_c.or(file.take_usize("dim_c")?).unwrap_or(8);
            let dim_a = dim_a.or(file.take_usize("dim_a")?).unwrap_or(8);
            let t_end = t_end
                .or(file.take_f64("t_end")?)
                .ok_or_else(|| CliError::Usage("t_end is required (--t-end or config)".into()))?;
            let sample_dt =
                sample_dt.or(file.take_f64("sample_dt")?).unwrap_or(t_end / 400.0);
            let n_traj = n_traj.or(file.take_usize("n_traj")?).unwrap_or(1000);
            let seed = seed.or(file.take_u64("seed")?).ok_or_else(|| {
                CliError::Usage(
                    "a seed is required for reproducible trajectories; pass --seed <u64>".into(),
                )
            })?;
            let window_start =
                window_start.or(file.take_f64("window_start")?).unwrap_or(0.0);
            file.finish()?;
            cmd_mcwf(
                &McwfArgs {
                    params,
                    dim_c,
                    dim_a,
                    t_end,
                    sample_dt,
                    n_traj,
                    seed,
                    window_start,
                    out,
                    clicks_out,
                },
                std::io::stdout().lock(),
            )?;
            Ok(true)
        }
        Command::Validate { seed, criteria, n_traj } => {
            let criteria = cli::parse_criteria(criteria.as_deref())?;
            cmd_validate(&ValidateArgs { criteria, seed, n_traj }, std::io::stdout().lock())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        // validate ran cleanly but a criterion failed
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
