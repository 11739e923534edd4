//! The three commands. Each returns the process exit code on completion or a
//! `CliError` when it could not run at all.

use std::time::Instant;

use rayon::prelude::*;
use wghp_core::assembly::{self, AssemblyOptions, DofMap, Penalties};
use wghp_core::expr;
use wghp_core::polybasis::QuadPolicy;
use wghp_core::problem::{classify_regime, ProblemSpec, DEFAULT_SAMPLES};
use wghp_core::verify::checks::{run_checks, CheckConfig};
use wghp_core::verify::{
    log10_slope, run_case, sbl_mesh_for, sort_records, ConvergenceRecord, ProblemFamily, StudyConfig,
};

use crate::config::{Command, RunConfig};
use crate::error::{exit, CliError};
use crate::output::{self, CurveSlope};
use crate::svg::{self, Curve};

pub fn run(config: &RunConfig) -> Result<i32, CliError> {
    match config.command {
        Command::Solve => run_solve(config),
        Command::Convergence => run_convergence(config),
        Command::Check => run_check(config),
    }
}

fn quad(config: &RunConfig) -> QuadPolicy {
    QuadPolicy { doubled: config.quad_double }
}

/// Parses the coefficients and the optional manufactured solution.
pub fn family(config: &RunConfig) -> Result<ProblemFamily, CliError> {
    let (eps1, eps2) = config.eps();
    let base = ProblemSpec::parse(eps1, eps2, &config.b, &config.r, &config.f)?;
    match &config.manufactured_u {
        Some(text) => {
            let u = expr::parse(text)
                .map_err(|e| CliError::Syntax { field: "manufactured-u", message: e.to_string() })?;
            Ok(ProblemFamily::manufactured(base, u))
        }
        None => Ok(ProblemFamily::new(base)),
    }
}

fn eps_label(eps1: f64, eps2: f64) -> String {
    format!("eps1={eps1:e}, eps2={eps2:e}")
}

pub fn run_solve(config: &RunConfig) -> Result<i32, CliError> {
    let (eps1, eps2) = config.eps();
    let p = config.p();
    let problem = family(config)?.instance(eps1, eps2)?;
    let validation = problem.validate(DEFAULT_SAMPLES)?;
    if validation.near_degenerate {
        eprintln!("warning: r - eps2 b'/2 has sampled minimum {:e}", validation.gamma_hat);
    }
    let mesh = sbl_mesh_for(&problem, p, config.kappa, DEFAULT_SAMPLES)?;
    let options = AssemblyOptions { penalties: Penalties::Standard, quad: quad(config) };
    let u = assembly::solve_problem(&problem, &mesh, p, &options)?;

    let mut csv = Vec::new();
    output::write_solution(&mut csv, &u).map_err(|e| CliError::io("<buffer>", e))?;
    output::emit(config.out.as_deref(), &csv)?;
    if let Some(path) = &config.svg {
        let samples = output::sample_interior(&u);
        let nodes: Vec<(f64, f64)> = mesh.nodes().iter().copied().zip(u.vb().iter().copied()).collect();
        let title = format!("u_p, p={p}, {}", eps_label(eps1, eps2));
        output::emit(Some(path), svg::solution_plot(&title, &samples, &nodes).as_bytes())?;
    }
    eprintln!(
        "regime={} N={} dof={}",
        classify_regime(eps1, eps2),
        mesh.num_elements(),
        DofMap::for_mesh(&mesh, p).total()
    );
    Ok(exit::SUCCESS)
}

/// Per-curve slopes in grid order.
pub fn curve_slopes(eps_grid: &[(f64, f64)], records: &[ConvergenceRecord]) -> Vec<CurveSlope> {
    eps_grid
        .iter()
        .map(|&(eps1, eps2)| {
            let rows: Vec<ConvergenceRecord> =
                records.iter().filter(|r| r.eps1 == eps1 && r.eps2 == eps2).cloned().collect();
            CurveSlope { eps1, eps2, regime: classify_regime(eps1, eps2).tag(), slope: log10_slope(&rows) }
        })
        .collect()
}

pub fn run_convergence(config: &RunConfig) -> Result<i32, CliError> {
    let family = family(config)?;
    let study = StudyConfig { kappa: config.kappa, quad: quad(config), ref_mesh: config.ref_mesh, ..StudyConfig::default() };
    let cases: Vec<(f64, f64, usize)> = config
        .eps_grid
        .iter()
        .flat_map(|&(e1, e2)| config.p_values.iter().map(move |&p| (e1, e2, p)))
        .collect();
    let mut records: Vec<ConvergenceRecord> = cases
        .par_iter()
        .map(|&(eps1, eps2, p)| {
            let start = Instant::now();
            let mut rec = run_case(&family, eps1, eps2, p, &study);
            if config.timing {
                rec.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            }
            rec
        })
        .collect();
    sort_records(&mut records);

    let mut csv = Vec::new();
    output::write_records(&mut csv, &records).map_err(|e| CliError::io("<buffer>", e))?;
    output::emit(config.out.as_deref(), &csv)?;

    let slopes = curve_slopes(&config.eps_grid, &records);
    for s in &slopes {
        match s.slope {
            Some(v) => eprintln!("slope {} [{}]: {v:.4}", eps_label(s.eps1, s.eps2), s.regime),
            None => eprintln!("slope {} [{}]: undetermined", eps_label(s.eps1, s.eps2), s.regime),
        }
    }
    if let Some(out) = &config.out {
        let mut buf = Vec::new();
        output::write_slopes(&mut buf, &slopes).map_err(|e| CliError::io("<buffer>", e))?;
        output::emit(Some(&output::slopes_path(out)), &buf)?;
    }
    if let Some(path) = &config.svg {
        let curves: Vec<Curve> = slopes
            .iter()
            .map(|s| {
                let slope = s.slope.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
                Curve {
                    label: format!("{} (slope {slope})", eps_label(s.eps1, s.eps2)),
                    points: records
                        .iter()
                        .filter(|r| r.eps1 == s.eps1 && r.eps2 == s.eps2)
                        .map(|r| (r.p as f64, r.err_rel_percent()))
                        .collect(),
                }
            })
            .collect();
        output::emit(Some(path), svg::convergence_plot("Convergence in p", &curves).as_bytes())?;
    }

    let failed: Vec<&ConvergenceRecord> = records.iter().filter(|r| !r.is_ok()).collect();
    for r in &failed {
        eprintln!(
            "failed: {} p={}: {}",
            eps_label(r.eps1, r.eps2),
            r.p,
            r.failure.as_deref().unwrap_or_default()
        );
    }
    Ok(if failed.is_empty() { exit::SUCCESS } else { exit::PARTIAL })
}

pub fn run_check(config: &RunConfig) -> Result<i32, CliError> {
    let cfg = CheckConfig { seed: config.seed, quad: quad(config), penalty_scale: config.penalty_scale };
    println!(
        "seed={} quad-double={} penalty-scale={}",
        cfg.seed, config.quad_double, cfg.penalty_scale
    );
    let reports = run_checks(&cfg);
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        let mut line = format!("{status} {}: cases={} failures={} worst={:e}", r.name, r.cases, r.failures, r.worst);
        if !r.detail.is_empty() {
            line.push_str(&format!(" ({})", r.detail));
        }
        println!("{line}");
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} of {} suites passed", reports.len() - failed, reports.len());
    Ok(if failed == 0 { exit::SUCCESS } else { exit::CHECK_FAILED })
}
