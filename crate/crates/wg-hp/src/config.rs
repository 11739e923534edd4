//! Command-line flags, the optional `key=value` config file, and the merged,
//! validated run configuration.
//!
//! Config file format: one `key = value` per line, keys are the long flag
//! names without the leading dashes, `#` starts a comment, blank lines are
//! ignored. Boolean keys take `true` or `false`. Flags given on the command
//! line override values from the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use wghp_core::verify::checks::DEFAULT_SEED;
use wghp_core::verify::RefMesh;

use crate::error::CliError;

pub const DEFAULT_B: &str = "cos(x)";
pub const DEFAULT_R: &str = "1+x";
pub const DEFAULT_F: &str = "exp(x)";
pub const DEFAULT_P_RANGE: (usize, usize) = (1, 10);

#[derive(Debug, Parser)]
#[command(name = "wg-hp", version, about = "hp weak Galerkin solver for -eps1 u'' + eps2 b u' + r u = f on (0,1)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
}

#[derive(Debug, Subcommand)]
pub enum CommandKind {
    /// Solve one problem on its spectral boundary layer mesh.
    Solve(Flags),
    /// Sweep degrees and (eps1, eps2) pairs, measuring energy-norm errors.
    Convergence(Flags),
    /// Run the seeded property suites.
    Check(Flags),
}

impl CommandKind {
    pub fn flags(&self) -> &Flags {
        match self {
            CommandKind::Solve(f) | CommandKind::Convergence(f) | CommandKind::Check(f) => f,
        }
    }

    pub fn command(&self) -> Command {
        match self {
            CommandKind::Solve(_) => Command::Solve,
            CommandKind::Convergence(_) => Command::Convergence,
            CommandKind::Check(_) => Command::Check,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RefMeshArg {
    Same,
    Rebuilt,
}

#[derive(Clone, Debug, Default, Args)]
pub struct Flags {
    /// key=value config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub eps2: Option<f64>,
    /// Comma-separated eps1:eps2 pairs, e.g. "1e-5:1e-2,1e-8:1e-4".
    #[arg(long)]
    pub eps_grid: Option<String>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Inclusive degree range "a..b".
    #[arg(long)]
    pub p_range: Option<String>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Convection coefficient b(x).
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Reaction coefficient r(x).
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    /// Load f(x).
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    /// Exact solution u(x); replaces f by the matching load.
    #[arg(long, allow_hyphen_values = true)]
    pub manufactured_u: Option<String>,
    /// Output CSV path (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output SVG path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub ref_mesh: Option<RefMeshArg>,
    /// Double the number of quadrature points everywhere.
    #[arg(long)]
    pub quad_double: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Record measured wall time in the CSV instead of 0.
    #[arg(long)]
    pub timing: bool,
    /// Multiply every interior penalty by this factor (check only).
    #[arg(long)]
    pub penalty_scale: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Convergence,
    Check,
}

/// Fully resolved configuration for one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub eps_grid: Vec<(f64, f64)>,
    pub p_values: Vec<usize>,
    pub kappa: f64,
    pub b: String,
    pub r: String,
    pub f: String,
    pub manufactured_u: Option<String>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub ref_mesh: RefMesh,
    pub quad_double: bool,
    pub seed: u64,
    pub timing: bool,
    pub penalty_scale: f64,
}

impl RunConfig {
    /// `(ε₁, ε₂)` for single-problem commands.
    pub fn eps(&self) -> (f64, f64) {
        self.eps_grid[0]
    }

    pub fn p(&self) -> usize {
        self.p_values[0]
    }
}

const KEYS: [&str; 17] = [
    "eps1",
    "eps2",
    "eps-grid",
    "p",
    "p-range",
    "kappa",
    "b",
    "r",
    "f",
    "manufactured-u",
    "out",
    "svg",
    "ref-mesh",
    "quad-double",
    "seed",
    "timing",
    "penalty-scale",
];

/// Parses config file text into `key -> (line, value)`.
pub fn parse_config_text(path: &Path, text: &str) -> Result<BTreeMap<String, (usize, String)>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| CliError::ConfigFile { path: path.to_path_buf(), line: line_no, message };
        let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
        let key = key.trim().trim_start_matches("--").to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(err(format!("unknown key '{key}'")));
        }
        if out.insert(key.clone(), (line_no, value.trim().to_string())).is_some() {
            return Err(err(format!("duplicate key '{key}'")));
        }
    }
    Ok(out)
}

/// Applies file values for every flag not given on the command line.
/// A flag also overrides file keys it is exclusive with (`eps-grid` against
/// `eps1`/`eps2`, `p` against `p-range`).
pub fn merge_file(flags: &mut Flags, path: &Path, entries: &BTreeMap<String, (usize, String)>) -> Result<(), CliError> {
    let grid_flag = flags.eps_grid.is_some();
    let pair_flag = flags.eps1.is_some() || flags.eps2.is_some();
    let p_flag = flags.p.is_some();
    let range_flag = flags.p_range.is_some();
    for (key, (line, value)) in entries {
        let shadowed = match key.as_str() {
            "eps1" | "eps2" => grid_flag,
            "eps-grid" => pair_flag,
            "p" => range_flag,
            "p-range" => p_flag,
            _ => false,
        };
        if shadowed {
            continue;
        }
        let err = |message: String| CliError::ConfigFile { path: path.to_path_buf(), line: *line, message };
        let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("'{v}' is not a number")));
        let int = |v: &str| v.parse::<u64>().map_err(|_| err(format!("'{v}' is not a non-negative integer")));
        let boolean = |v: &str| match v {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(err(format!("'{v}' is not true or false"))),
        };
        match key.as_str() {
            "eps1" if flags.eps1.is_none() => flags.eps1 = Some(num(value)?),
            "eps2" if flags.eps2.is_none() => flags.eps2 = Some(num(value)?),
            "eps-grid" if flags.eps_grid.is_none() => flags.eps_grid = Some(value.clone()),
            "p" if flags.p.is_none() => flags.p = Some(int(value)? as usize),
            "p-range" if flags.p_range.is_none() => flags.p_range = Some(value.clone()),
            "kappa" if flags.kappa.is_none() => flags.kappa = Some(num(value)?),
            "b" if flags.b.is_none() => flags.b = Some(value.clone()),
            "r" if flags.r.is_none() => flags.r = Some(value.clone()),
            "f" if flags.f.is_none() => flags.f = Some(value.clone()),
            "manufactured-u" if flags.manufactured_u.is_none() => flags.manufactured_u = Some(value.clone()),
            "out" if flags.out.is_none() => flags.out = Some(PathBuf::from(value)),
            "svg" if flags.svg.is_none() => flags.svg = Some(PathBuf::from(value)),
            "ref-mesh" if flags.ref_mesh.is_none() => {
                flags.ref_mesh = Some(match value.as_str() {
                    "same" => RefMeshArg::Same,
                    "rebuilt" => RefMeshArg::Rebuilt,
                    v => return Err(err(format!("ref-mesh must be same or rebuilt, got '{v}'"))),
                })
            }
            // boolean flags can only be switched on from the command line, so
            // the file decides unless the flag was given
            "quad-double" if !flags.quad_double => flags.quad_double = boolean(value)?,
            "timing" if !flags.timing => flags.timing = boolean(value)?,
            "seed" if flags.seed.is_none() => flags.seed = Some(int(value)?),
            "penalty-scale" if flags.penalty_scale.is_none() => flags.penalty_scale = Some(num(value)?),
            _ => {}
        }
    }
    Ok(())
}

/// `"1e-5:1e-2,1e-8:1e-4"`.
pub fn parse_eps_grid(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let bad = |item: &str| CliError::Usage(format!("eps-grid entry '{item}' is not eps1:eps2"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item.split_once(':').ok_or_else(|| bad(item))?;
        let e1 = a.trim().parse::<f64>().map_err(|_| bad(item))?;
        let e2 = b.trim().parse::<f64>().map_err(|_| bad(item))?;
        out.push((e1, e2));
    }
    if out.is_empty() {
        return Err(CliError::Usage("eps-grid is empty".into()));
    }
    Ok(out)
}

/// Inclusive `"a..b"`.
pub fn parse_p_range(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("p-range '{text}' is not a..b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(CliError::Usage(format!("p-range '{text}' is empty")));
    }
    Ok((a..=b).collect())
}

fn check_eps(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} = {v} must lie in (0, 1]")))
    }
}

/// Loads the config file (if any), merges it under the flags and validates.
pub fn resolve(kind: &CommandKind) -> Result<RunConfig, CliError> {
    let mut flags = kind.flags().clone();
    if let Some(path) = flags.config.clone() {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let entries = parse_config_text(&path, &text)?;
        merge_file(&mut flags, &path, &entries)?;
    }
    build(kind.command(), &flags)
}

/// Validates merged flags for `command`.
pub fn build(command: Command, flags: &Flags) -> Result<RunConfig, CliError> {
    let eps_grid = match (&flags.eps_grid, flags.eps1, flags.eps2) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(CliError::Usage("give either eps-grid or eps1/eps2, not both".into()))
        }
        (Some(g), None, None) => parse_eps_grid(g)?,
        (None, Some(a), Some(b)) => vec![(a, b)],
        (None, None, None) if command == Command::Check => vec![(1e-5, 1e-2)],
        (None, _, _) => return Err(CliError::Usage("eps1 and eps2 are required".into())),
    };
    for &(a, b) in &eps_grid {
        check_eps("eps1", a)?;
        check_eps("eps2", b)?;
    }
    if command == Command::Solve && eps_grid.len() != 1 {
        return Err(CliError::Usage("solve takes a single eps1/eps2 pair".into()));
    }
    let p_values = match (flags.p, &flags.p_range) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either p or p-range, not both".into())),
        (Some(p), None) => vec![p],
        (None, Some(r)) => parse_p_range(r)?,
        (None, None) => match command {
            Command::Convergence | Command::Check => (DEFAULT_P_RANGE.0..=DEFAULT_P_RANGE.1).collect(),
            Command::Solve => return Err(CliError::Usage("p is required".into())),
        },
    };
    if p_values.contains(&0) {
        return Err(CliError::Usage("p must be at least 1".into()));
    }
    if command == Command::Solve && p_values.len() != 1 {
        return Err(CliError::Usage("solve takes a single p".into()));
    }
    let kappa = flags.kappa.unwrap_or(1.0);
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(CliError::Usage(format!("kappa = {kappa} must be positive")));
    }
    let penalty_scale = flags.penalty_scale.unwrap_or(1.0);
    if !(penalty_scale >= 0.0 && penalty_scale.is_finite()) {
        return Err(CliError::Usage(format!("penalty-scale = {penalty_scale} must be non-negative")));
    }
    if flags.penalty_scale.is_some() && command != Command::Check {
        return Err(CliError::Usage("penalty-scale applies to check only".into()));
    }
    if flags.f.is_some() && flags.manufactured_u.is_some() {
        return Err(CliError::Usage("give either f or manufactured-u, not both".into()));
    }
    Ok(RunConfig {
        command,
        eps_grid,
        p_values,
        kappa,
        b: flags.b.clone().unwrap_or_else(|| DEFAULT_B.into()),
        r: flags.r.clone().unwrap_or_else(|| DEFAULT_R.into()),
        f: flags.f.clone().unwrap_or_else(|| DEFAULT_F.into()),
        manufactured_u: flags.manufactured_u.clone(),
        out: flags.out.clone(),
        svg: flags.svg.clone(),
        ref_mesh: match flags.ref_mesh {
            Some(RefMeshArg::Rebuilt) => RefMesh::Rebuilt,
            _ => RefMesh::Same,
        },
        quad_double: flags.quad_double,
        seed: flags.seed.unwrap_or(DEFAULT_SEED),
        timing: flags.timing,
        penalty_scale,
    })
}
