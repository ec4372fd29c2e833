//! Command-line front end: parameter resolution, reproducible CSV output and
//! the subcommand implementations behind the `beyond-rwa` binary.
//!
//! Conventions shared by every subcommand:
//!
//! * Physical parameters come from flags, from a flat `key = value` config
//!   file (`#` comments, one key per line), or from the built-in reference
//!   set, in that priority order. Frequencies are *angular*, in s⁻¹.
//! * Every output starts with `#`-prefixed header lines echoing the resolved
//!   run configuration and the crate version, so a run is reproducible from
//!   its own output. Numbers are printed with 17 significant digits
//!   (round-trip exact for doubles); identical configurations produce
//!   byte-identical output.
//! * Exit codes: 0 success, 1 computation failure, 2 usage error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analytic;
use crate::dynamics::{self, steady_state, Tolerances};
use crate::fock::{
    extract_moments, ground_state, lindblad_evolve_at, mcwf_trajectories, build_operators,
    DensityMatrix, FockConfig, FockError, JumpChannel, LindbladOptions, McwfOptions,
    WaveFunction,
};
use crate::generator::MomentGenerator;
use crate::moments::{MomentVector, MOMENT_NAMES};
use crate::params::SystemParams;
use crate::validation::{self, CriterionId, SuiteOptions};

/// Crate version stamped into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    /// Malformed request (exit 2).
    Usage(String),
    /// A computation failed (exit 1).
    Compute(String),
    /// Output could not be written (exit 1).
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<crate::params::ParamError> for CliError {
    fn from(e: crate::params::ParamError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<dynamics::DynamicsError> for CliError {
    fn from(e: dynamics::DynamicsError) -> Self {
        match e {
            dynamics::DynamicsError::BadRequest(m) => CliError::Usage(m),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        match e {
            FockError::BadRequest(m) => CliError::Usage(m),
            FockError::DimensionTooSmall { .. } | FockError::DimensionOverflow { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<analytic::AnalyticError> for CliError {
    fn from(e: analytic::AnalyticError) -> Self {
        CliError::Compute(e.to_string())
    }
}

/// 17-significant-digit scientific form; parses back to the same double.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// config files

/// Flat `key = value` file with `#` comment lines. Keys must be consumed by
/// the subcommand; leftovers are usage errors (typo protection).
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    path: PathBuf,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if values.insert(key.clone(), value).is_some() {
                return Err(CliError::Usage(format!(
                    "{}:{}: duplicate key `{key}`",
                    path.display(),
                    lineno + 1
                )));
            }
        }
        Ok(Self { values, path: path.to_path_buf() })
    }

    fn empty() -> Self {
        Self { values: BTreeMap::new(), path: PathBuf::new() }
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v.parse::<f64>().map(Some).map_err(|_| {
                CliError::Usage(format!(
                    "{}: key `{key}` has non-numeric value `{v}`",
                    self.path.display()
                ))
            }),
        }
    }

    pub fn take_usize(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v.parse::<usize>().map(Some).map_err(|_| {
                CliError::Usage(format!(
                    "{}: key `{key}` has non-integer value `{v}`",
                    self.path.display()
                ))
            }),
        }
    }

    pub fn take_u64(&mut self, key: &str) -> Result<Option<u64>, CliError> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v.parse::<u64>().map(Some).map_err(|_| {
                CliError::Usage(format!(
                    "{}: key `{key}` has non-integer value `{v}`",
                    self.path.display()
                ))
            }),
        }
    }

    pub fn take_string(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    pub fn take_bool(&mut self, key: &str) -> Result<Option<bool>, CliError> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => match v.as_str() {
                "true" | "1" | "yes" => Ok(Some(true)),
                "false" | "0" | "no" => Ok(Some(false)),
                _ => Err(CliError::Usage(format!(
                    "{}: key `{key}` has non-boolean value `{v}`",
                    self.path.display()
                ))),
            },
        }
    }

    /// Reject unconsumed keys.
    pub fn finish(self) -> Result<(), CliError> {
        if self.values.is_empty() {
            Ok(())
        } else {
            let keys: Vec<_> = self.values.keys().cloned().collect();
            Err(CliError::Usage(format!(
                "{}: unknown keys: {}",
                self.path.display(),
                keys.join(", ")
            )))
        }
    }
}

// ---------------------------------------------------------------------------
// parameter resolution

/// Physical-parameter flags (None = fall back to config file, then to the
/// reference set).
#[derive(Debug, Clone, Default)]
pub struct ParamOverrides {
    pub omega_c: Option<f64>,
    pub omega_a: Option<f64>,
    pub g_c: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
    pub n_atoms: Option<f64>,
    pub rwa: bool,
    pub config: Option<PathBuf>,
}

impl ParamOverrides {
    /// Open the config file (if any) and resolve the physical parameters.
    /// The returned [`ConfigFile`] still carries any subcommand-specific keys
    /// for the caller to consume.
    pub fn resolve(&self) -> Result<(SystemParams, ConfigFile), CliError> {
        let mut file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::empty(),
        };
        let defaults = validation::reference_params();
        let omega_c = self.omega_c.or(file.take_f64("omega_c")?).unwrap_or(defaults.omega_c());
        let omega_a = self.omega_a.or(file.take_f64("omega_a")?).unwrap_or(defaults.omega_a());
        let g_c = self.g_c.or(file.take_f64("g_c")?).unwrap_or(defaults.g_c());
        let kappa = self.kappa.or(file.take_f64("kappa")?).unwrap_or(defaults.kappa());
        let gamma = self.gamma.or(file.take_f64("gamma")?).unwrap_or(defaults.gamma());
        let n_atoms = self.n_atoms.or(file.take_f64("n_atoms")?).unwrap_or(defaults.n_atoms());
        let rwa = self.rwa || file.take_bool("rwa")?.unwrap_or(false);
        let params = SystemParams::new(omega_c, omega_a, g_c, kappa, gamma, n_atoms)?
            .with_rotating_wave(rwa);
        Ok((params, file))
    }
}

fn param_echo(params: &SystemParams) -> Vec<(String, String)> {
    vec![
        ("omega_c".into(), format_f64(params.omega_c())),
        ("omega_a".into(), format_f64(params.omega_a())),
        ("g_c".into(), format_f64(params.g_c())),
        ("kappa".into(), format_f64(params.kappa())),
        ("gamma".into(), format_f64(params.gamma())),
        ("n_atoms".into(), format_f64(params.n_atoms())),
        ("rotating_wave".into(), params.rotating_wave().to_string()),
        ("params_fingerprint".into(), format!("{:016x}", params.fingerprint())),
    ]
}

fn echo_header(subcommand: &str, entries: &[(String, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# beyond-rwa {VERSION} {subcommand}");
    for (k, v) in entries {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

/// Write a CSV document: header comments, column names, then rows.
fn write_csv<W: Write>(
    mut w: W,
    header: &str,
    columns: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<(), CliError> {
    w.write_all(header.as_bytes())?;
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

fn csv_sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => Ok(Box::new(fs::File::create(path)?)),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn moment_row(t: f64, m: &MomentVector) -> Vec<f64> {
    let mut row = Vec::with_capacity(11);
    row.push(t);
    row.extend_from_slice(&m.to_array());
    row
}

const TRAJECTORY_COLUMNS: [&str; 11] =
    ["t", "mu1", "mu2", "eta1", "eta2", "eta3", "eta4", "xi1", "xi2", "xi3", "xi4"];

// ---------------------------------------------------------------------------
// steady

#[derive(Debug, Clone)]
pub struct SteadyArgs {
    pub params: SystemParams,
    pub out: Option<PathBuf>,
}

/// Stationary report: exact solve, closed form, their relative difference
/// and the validity diagnostic.
pub fn cmd_steady<W: Write>(args: &SteadyArgs, mut stdout: W) -> Result<(), CliError> {
    let gen = MomentGenerator::from_params(&args.params);
    let report = steady_state(&gen)?;
    let formula = analytic::analytic_emission_rate(&args.params)?;
    let rel_diff = if report.i_kappa != 0.0 {
        (report.i_kappa - formula.value).abs() / report.i_kappa.abs()
    } else {
        (report.i_kappa - formula.value).abs()
    };

    let echo = param_echo(&args.params);
    let header = echo_header("steady", &echo);
    write!(stdout, "{header}")?;
    writeln!(stdout, "i_kappa_exact   = {} s^-1", format_f64(report.i_kappa))?;
    writeln!(stdout, "i_gamma         = {} s^-1", format_f64(report.i_gamma))?;
    writeln!(stdout, "i_kappa_formula = {} s^-1", format_f64(formula.value))?;
    writeln!(stdout, "rel_difference  = {}", format_f64(rel_diff))?;
    writeln!(
        stdout,
        "validity_ratio  = {} ({})",
        format_f64(formula.validity_ratio),
        if formula.in_validity_regime() {
            "weak-damping expansion applicable"
        } else {
            "WARNING: outside the weak-damping regime, closed form extrapolates"
        }
    )?;
    writeln!(stdout, "residual        = {} s^-1", format_f64(report.residual))?;
    writeln!(stdout, "condition_1norm = {}", format_f64(report.condition))?;
    let max_re = gen.eigenvalue_real_parts().into_iter().fold(f64::MIN, f64::max);
    if max_re >= 0.0 {
        writeln!(
            stdout,
            "WARNING: fixed point is dynamically unstable (max Re eig = {}); the coupling exceeds the harmonic model's stability threshold ~ sqrt(omega_a*omega_c)/2",
            format_f64(max_re)
        )?;
    }
    for (name, value) in MOMENT_NAMES.iter().zip(report.steady.to_array()) {
        writeln!(stdout, "steady_{name:<4}     = {}", format_f64(value))?;
    }

    if args.out.is_some() {
        let mut columns = vec![
            "i_kappa_exact",
            "i_gamma",
            "i_kappa_formula",
            "rel_difference",
            "validity_ratio",
            "residual",
            "condition_1norm",
        ];
        columns.extend_from_slice(&MOMENT_NAMES);
        let mut row = vec![
            report.i_kappa,
            report.i_gamma,
            formula.value,
            rel_diff,
            formula.validity_ratio,
            report.residual,
            report.condition,
        ];
        row.extend_from_slice(&report.steady.to_array());
        write_csv(csv_sink(&args.out)?, &header, &columns, std::iter::once(row))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evolve

#[derive(Debug, Clone)]
pub struct EvolveArgs {
    pub params: SystemParams,
    pub t_end: f64,
    pub samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub out: Option<PathBuf>,
}

/// Moment trajectory from vacuum as CSV (columns t, mu1..xi4).
pub fn cmd_evolve(args: &EvolveArgs) -> Result<(), CliError> {
    if args.samples == 0 {
        return Err(CliError::Usage("sample count must be at least 1".into()));
    }
    let gen = MomentGenerator::from_params(&args.params);
    let tol = Tolerances { rel: args.rel_tol, abs: args.abs_tol };
    let traj = dynamics::evolve(&gen, &MomentVector::zero(), args.t_end, args.samples, tol)?;

    let mut echo = param_echo(&args.params);
    echo.push(("t_end".into(), format_f64(args.t_end)));
    echo.push(("samples".into(), args.samples.to_string()));
    echo.push(("rel_tol".into(), format_f64(args.rel_tol)));
    echo.push(("abs_tol".into(), format_f64(args.abs_tol)));
    echo.push(("initial_state".into(), "vacuum".into()));
    let header = echo_header("evolve", &echo);

    write_csv(
        csv_sink(&args.out)?,
        &header,
        &TRAJECTORY_COLUMNS,
        traj.times.iter().zip(&traj.states).map(|(&t, m)| moment_row(t, m)),
    )
}

// ---------------------------------------------------------------------------
// sweep

/// Parameter axes the sweep can walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    NAtoms,
    /// ω̃_a − ω̃_c at fixed ω̃_c.
    Detuning,
    Coupling,
    Kappa,
    Gamma,
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n-atoms" | "n_atoms" => Ok(Self::NAtoms),
            "detuning" => Ok(Self::Detuning),
            "g-c" | "g_c" => Ok(Self::Coupling),
            "kappa" => Ok(Self::Kappa),
            "gamma" => Ok(Self::Gamma),
            other => Err(CliError::Usage(format!(
                "unknown sweep parameter `{other}` (expected n-atoms, detuning, g-c, kappa or gamma)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::NAtoms => "n_atoms",
            Self::Detuning => "detuning",
            Self::Coupling => "g_c",
            Self::Kappa => "kappa",
            Self::Gamma => "gamma",
        }
    }

    fn apply(&self, base: &SystemParams, value: f64) -> Result<SystemParams, CliError> {
        let p = match self {
            Self::NAtoms => SystemParams::new(
                base.omega_c(),
                base.omega_a(),
                base.g_c(),
                base.kappa(),
                base.gamma(),
                value,
            ),
            Self::Detuning => SystemParams::new(
                base.omega_c(),
                base.omega_c() + value,
                base.g_c(),
                base.kappa(),
                base.gamma(),
                base.n_atoms(),
            ),
            Self::Coupling => SystemParams::new(
                base.omega_c(),
                base.omega_a(),
                value,
                base.kappa(),
                base.gamma(),
                base.n_atoms(),
            ),
            Self::Kappa => SystemParams::new(
                base.omega_c(),
                base.omega_a(),
                base.g_c(),
                value,
                base.gamma(),
                base.n_atoms(),
            ),
            Self::Gamma => SystemParams::new(
                base.omega_c(),
                base.omega_a(),
                base.g_c(),
                base.kappa(),
                value,
                base.n_atoms(),
            ),
        };
        Ok(p.map_err(|e| {
            CliError::Usage(format!("sweep value {value} rejected: {e}"))
        })?
        .with_rotating_wave(base.rotating_wave()))
    }
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub params: SystemParams,
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub log: bool,
    pub out: Option<PathBuf>,
}

/// Build the grid values for a sweep.
fn sweep_grid(args: &SweepArgs) -> Result<Vec<f64>, CliError> {
    if args.steps == 0 {
        return Err(CliError::Usage("sweep grid is empty (steps must be at least 1)".into()));
    }
    if args.steps == 1 {
        return Ok(vec![args.from]);
    }
    if args.log {
        if args.from <= 0.0 || args.to <= 0.0 {
            return Err(CliError::Usage("logarithmic grids need positive endpoints".into()));
        }
        let ratio = args.to / args.from;
        Ok((0..args.steps)
            .map(|k| args.from * ratio.powf(k as f64 / (args.steps - 1) as f64))
            .collect())
    } else {
        Ok((0..args.steps)
            .map(|k| {
                args.from + (args.to - args.from) * k as f64 / (args.steps - 1) as f64
            })
            .collect())
    }
}

/// Sweep one parameter; CSV rows (value, i_kappa_exact, i_kappa_formula),
/// ordered by grid position. Points are evaluated concurrently.
pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    use rayon::prelude::*;
    let grid = sweep_grid(args)?;
    let rows: Result<Vec<Vec<f64>>, CliError> = grid
        .par_iter()
        .map(|&value| {
            let p = args.param.apply(&args.params, value)?;
            let exact = steady_state(&MomentGenerator::from_params(&p))?;
            let formula = analytic::analytic_emission_rate(&p)?;
            Ok(vec![value, exact.i_kappa, formula.value])
        })
        .collect();
    let rows = rows?;

    let mut echo = param_echo(&args.params);
    echo.push(("sweep_param".into(), args.param.name().into()));
    echo.push(("from".into(), format_f64(args.from)));
    echo.push(("to".into(), format_f64(args.to)));
    echo.push(("steps".into(), args.steps.to_string()));
    echo.push(("grid".into(), if args.log { "log".into() } else { "linear".into() }));
    let header = echo_header("sweep", &echo);

    write_csv(
        csv_sink(&args.out)?,
        &header,
        &[args.param.name(), "i_kappa_exact", "i_kappa_formula"],
        rows.into_iter(),
    )
}

// ---------------------------------------------------------------------------
// oracle-evolve

#[derive(Debug, Clone)]
pub struct OracleEvolveArgs {
    pub params: SystemParams,
    pub dim_c: usize,
    pub dim_a: usize,
    pub t_end: f64,
    pub samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub out: Option<PathBuf>,
}

/// Master-equation trajectory from vacuum, reported as the same ten moment
/// columns as `evolve` for direct diffing.
pub fn cmd_oracle_evolve(args: &OracleEvolveArgs) -> Result<(), CliError> {
    if args.samples == 0 {
        return Err(CliError::Usage("sample count must be at least 1".into()));
    }
    let cfg = FockConfig::new(args.dim_c, args.dim_a)?;
    let ops = build_operators(&args.params, &cfg)?;
    let times: Vec<f64> =
        (0..=args.samples).map(|k| args.t_end * k as f64 / args.samples as f64).collect();
    let opts = LindbladOptions {
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
        ..LindbladOptions::default()
    };
    let evolution =
        lindblad_evolve_at(&args.params, &cfg, &DensityMatrix::vacuum(&cfg), &times, &opts)?;
    let rows: Result<Vec<Vec<f64>>, FockError> = evolution
        .iter()
        .map(|(t, rho)| extract_moments(rho, &ops).map(|m| moment_row(*t, &m)))
        .collect();
    let rows = rows.map_err(CliError::from)?;

    let mut echo = param_echo(&args.params);
    echo.push(("dim_c".into(), args.dim_c.to_string()));
    echo.push(("dim_a".into(), args.dim_a.to_string()));
    echo.push(("t_end".into(), format_f64(args.t_end)));
    echo.push(("samples".into(), args.samples.to_string()));
    echo.push(("rel_tol".into(), format_f64(args.rel_tol)));
    echo.push(("abs_tol".into(), format_f64(args.abs_tol)));
    echo.push(("initial_state".into(), "vacuum".into()));
    let header = echo_header("oracle-evolve", &echo);
    write_csv(csv_sink(&args.out)?, &header, &TRAJECTORY_COLUMNS, rows.into_iter())
}

// ---------------------------------------------------------------------------
// oracle-ground

#[derive(Debug, Clone)]
pub struct OracleGroundArgs {
    pub params: SystemParams,
    pub dim_c: usize,
    pub dim_a: usize,
    pub out: Option<PathBuf>,
}

/// Ground-state diagnostics of the closed Hamiltonian.
pub fn cmd_oracle_ground<W: Write>(args: &OracleGroundArgs, mut stdout: W) -> Result<(), CliError> {
    let cfg = FockConfig::new(args.dim_c, args.dim_a)?;
    let gs = ground_state(&args.params, &cfg)?;
    let deficit = 1.0 - gs.vacuum_overlap * gs.vacuum_overlap;
    let small_parameter = analytic::ground_state_parameter(&args.params);

    let mut echo = param_echo(&args.params);
    echo.push(("dim_c".into(), args.dim_c.to_string()));
    echo.push(("dim_a".into(), args.dim_a.to_string()));
    let header = echo_header("oracle-ground", &echo);
    write!(stdout, "{header}")?;
    writeln!(stdout, "energy               = {} s^-1", format_f64(gs.energy))?;
    writeln!(stdout, "vacuum_overlap       = {}", format_f64(gs.vacuum_overlap))?;
    writeln!(stdout, "overlap_deficit      = {}", format_f64(deficit))?;
    writeln!(stdout, "entanglement_entropy = {} nats", format_f64(gs.entanglement_entropy))?;
    writeln!(stdout, "ground_state_param   = {}", format_f64(small_parameter))?;
    writeln!(stdout, "degenerate           = {}", gs.degenerate)?;

    if args.out.is_some() {
        let columns = [
            "energy",
            "vacuum_overlap",
            "overlap_deficit",
            "entanglement_entropy",
            "ground_state_param",
        ];
        let row = vec![gs.energy, gs.vacuum_overlap, deficit, gs.entanglement_entropy, small_parameter];
        write_csv(csv_sink(&args.out)?, &header, &columns, std::iter::once(row))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// mcwf

#[derive(Debug, Clone)]
pub struct McwfArgs {
    pub params: SystemParams,
    pub dim_c: usize,
    pub dim_a: usize,
    pub t_end: f64,
    pub sample_dt: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub window_start: f64,
    pub out: Option<PathBuf>,
    pub clicks_out: Option<PathBuf>,
}

/// Quantum-jump ensemble: click statistics on stdout, optional CSVs with the
/// ensemble-averaged moments and the per-trajectory click records.
pub fn cmd_mcwf<W: Write>(args: &McwfArgs, mut stdout: W) -> Result<(), CliError> {
    let cfg = FockConfig::new(args.dim_c, args.dim_a)?;
    let opts = McwfOptions {
        t_end: args.t_end,
        sample_dt: args.sample_dt,
        n_traj: args.n_traj,
        seed: args.seed,
        window_start: args.window_start,
    };
    let run = mcwf_trajectories(&args.params, &cfg, &WaveFunction::vacuum(&cfg), &opts)?;
    let expected = steady_state(&MomentGenerator::from_params(&args.params))?;
    let expected_total = expected.i_kappa + expected.i_gamma;

    let mut echo = param_echo(&args.params);
    echo.push(("dim_c".into(), args.dim_c.to_string()));
    echo.push(("dim_a".into(), args.dim_a.to_string()));
    echo.push(("t_end".into(), format_f64(args.t_end)));
    echo.push(("sample_dt".into(), format_f64(args.sample_dt)));
    echo.push(("n_traj".into(), args.n_traj.to_string()));
    echo.push(("seed".into(), args.seed.to_string()));
    echo.push(("window_start".into(), format_f64(args.window_start)));
    echo.push(("initial_state".into(), "vacuum".into()));
    let header = echo_header("mcwf", &echo);

    let s = &run.stats;
    write!(stdout, "{header}")?;
    writeln!(
        stdout,
        "cavity_click_rate = {} +/- {} s^-1 ({} clicks)",
        format_f64(s.cavity_rate),
        format_f64(s.cavity_se),
        s.cavity_clicks
    )?;
    writeln!(
        stdout,
        "atomic_click_rate = {} +/- {} s^-1 ({} clicks)",
        format_f64(s.atomic_rate),
        format_f64(s.atomic_se),
        s.atomic_clicks
    )?;
    writeln!(
        stdout,
        "total_click_rate  = {} +/- {} s^-1",
        format_f64(s.total_rate),
        format_f64(s.total_se)
    )?;
    writeln!(stdout, "kappa_mu1_steady  = {} s^-1", format_f64(expected.i_kappa))?;
    writeln!(stdout, "total_steady      = {} s^-1", format_f64(expected_total))?;
    if s.cavity_se > 0.0 {
        writeln!(
            stdout,
            "cavity_deviation  = {} standard errors",
            format_f64((s.cavity_rate - expected.i_kappa).abs() / s.cavity_se)
        )?;
    }

    if args.out.is_some() {
        write_csv(
            csv_sink(&args.out)?,
            &header,
            &TRAJECTORY_COLUMNS,
            run.times.iter().zip(&run.mean_moments).map(|(&t, m)| moment_row(t, m)),
        )?;
    }
    if let Some(path) = &args.clicks_out {
        let mut w = fs::File::create(path)?;
        w.write_all(header.as_bytes())?;
        writeln!(w, "trajectory,time,channel")?;
        for (idx, traj) in run.clicks.iter().enumerate() {
            for click in traj {
                let channel = match click.channel {
                    JumpChannel::Cavity => "cavity",
                    JumpChannel::Atomic => "atomic",
                };
                writeln!(w, "{idx},{},{channel}", format_f64(click.time))?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// validate

#[derive(Debug, Clone)]
pub struct ValidateArgs {
    pub criteria: Vec<CriterionId>,
    pub seed: Option<u64>,
    pub n_traj: usize,
}

/// Run the validation suite; returns whether every criterion passed.
pub fn cmd_validate<W: Write>(args: &ValidateArgs, mut stdout: W) -> Result<bool, CliError> {
    if args.criteria.is_empty() {
        return Err(CliError::Usage("no criteria selected".into()));
    }
    let needs_seed = args.criteria.iter().any(CriterionId::stochastic);
    let seed = match (needs_seed, args.seed) {
        (true, None) => {
            return Err(CliError::Usage(
                "a seed is required for the stochastic criteria (A1, A5); pass --seed <u64>"
                    .into(),
            ))
        }
        (_, seed) => seed.unwrap_or(0),
    };
    let opts = SuiteOptions { seed, n_traj: args.n_traj, corrupt: None };
    let results = validation::run_suite(&args.criteria, &opts);
    let mut all_pass = true;
    for r in &results {
        writeln!(stdout, "{}", r.line())?;
        all_pass &= r.pass;
    }
    Ok(all_pass)
}

/// Parse a `--criteria` list such as "a1,a3,a6".
pub fn parse_criteria(spec: Option<&str>) -> Result<Vec<CriterionId>, CliError> {
    match spec {
        None => Ok(CriterionId::ALL.to_vec()),
        Some(s) => s
            .split(',')
            .map(|tok| {
                CriterionId::parse(tok).ok_or_else(|| {
                    CliError::Usage(format!("unknown criterion `{tok}` (expected a1..a6)"))
                })
            })
            .collect(),
    }
}
