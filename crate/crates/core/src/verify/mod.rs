//! Manufactured solutions, reference solutions at doubled degree, energy-norm
//! error measurement and the p-convergence study.

pub mod bounds;
pub mod checks;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::assembly::{self, AssemblyError, AssemblyOptions, Penalties};
use crate::expr::{self, DiffError, EvalError, Expr, ParseError};
use crate::mesh::{build_sbl_mesh, Mesh};
use crate::polybasis::{gauss_rule, Interval, QuadPolicy};
use crate::problem::{ProblemError, ProblemSpec, Regime, DEFAULT_SAMPLES};
use crate::weak::{
    default_penalties, norm_broken, norm_p, WeakError, WeakFunction,
};

/// `|u(0)|, |u(1)|` above this reject a manufactured solution.
pub const BOUNDARY_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub enum VerifyError {
    Parse(ParseError),
    Derivative(DiffError),
    Eval(EvalError),
    BoundaryValue { x: f64, value: f64 },
    Problem(ProblemError),
    Assembly(AssemblyError),
    Weak(WeakError),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Parse(e) => write!(f, "{e}"),
            VerifyError::Derivative(e) => write!(f, "{e}"),
            VerifyError::Eval(e) => write!(f, "{e}"),
            VerifyError::BoundaryValue { x, value } => {
                write!(f, "manufactured solution is {value} at x = {x}, must vanish")
            }
            VerifyError::Problem(e) => write!(f, "{e}"),
            VerifyError::Assembly(e) => write!(f, "{e}"),
            VerifyError::Weak(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for VerifyError {}

impl From<EvalError> for VerifyError {
    fn from(e: EvalError) -> Self {
        VerifyError::Eval(e)
    }
}

impl From<ProblemError> for VerifyError {
    fn from(e: ProblemError) -> Self {
        VerifyError::Problem(e)
    }
}

impl From<AssemblyError> for VerifyError {
    fn from(e: AssemblyError) -> Self {
        VerifyError::Assembly(e)
    }
}

impl From<WeakError> for VerifyError {
    fn from(e: WeakError) -> Self {
        VerifyError::Weak(e)
    }
}

/// An exact solution together with the problem whose load reproduces it.
#[derive(Clone, Debug)]
pub struct ManufacturedCase {
    pub u: Expr,
    pub du: Expr,
    pub d2u: Expr,
    pub problem: ProblemSpec,
}

/// `f = -ε₁u'' + ε₂bu' + ru`, built symbolically; `problem`'s own `f` is
/// replaced.
pub fn manufacture(u_text: &str, problem: &ProblemSpec) -> Result<ManufacturedCase, VerifyError> {
    let u = expr::parse(u_text).map_err(VerifyError::Parse)?;
    manufacture_expr(u, problem)
}

pub fn manufacture_expr(u: Expr, problem: &ProblemSpec) -> Result<ManufacturedCase, VerifyError> {
    for x in [0.0, 1.0] {
        let value = u.eval(x)?;
        if !(libm::fabs(value) <= BOUNDARY_TOL) {
            return Err(VerifyError::BoundaryValue { x, value });
        }
    }
    let du = u.differentiate().map_err(VerifyError::Derivative)?;
    let d2u = du.differentiate().map_err(VerifyError::Derivative)?;
    let f = Expr::num(-problem.eps1()) * d2u.clone()
        + Expr::num(problem.eps2()) * problem.b().clone() * du.clone()
        + problem.r().clone() * u.clone();
    Ok(ManufacturedCase { u, du, d2u, problem: problem.with_rhs(f) })
}

impl ManufacturedCase {
    /// `|-ε₁u'' + ε₂bu' + ru - f|` at `x`.
    pub fn residual(&self, x: f64) -> Result<f64, EvalError> {
        let p = &self.problem;
        let lhs = -p.eps1() * self.d2u.eval(x)?
            + p.eps2() * p.b().eval(x)? * self.du.eval(x)?
            + p.r().eval(x)? * self.u.eval(x)?;
        Ok(libm::fabs(lhs - p.f().eval(x)?))
    }

    /// `ℐu` on `mesh` at degree `p`.
    pub fn interpolant(&self, mesh: &Mesh, p: usize, quad: QuadPolicy) -> Result<WeakFunction, VerifyError> {
        let rule = quad.rule(2 * p);
        let u = &self.u;
        // the closure cannot propagate errors; surface them up front
        for iv in mesh.elements() {
            for (t, _) in rule.iter() {
                u.eval(iv.map(t))?;
            }
        }
        Ok(WeakFunction::interpolant(mesh.clone(), p, |x| u.eval(x).unwrap_or(f64::NAN), &rule)?)
    }
}

/// `E(u, v) = E₁ + E₂ + E₃`, the right-hand side of the error equation
/// `A_p(ℐu - u_p, v) = E(u, v)`:
///
/// * `E₁ = ε₁ Σ [(u - ℐu)'(x_j⁻)(v₀ - v_b)(x_j⁻) - (u - ℐu)'(x_{j-1}⁺)(v₀ - v_b)(x_{j-1}⁺)]`
/// * `E₂ = ε₂ (u - ℐu, (b v₀)')`
/// * `E₃ = (r(ℐu - u), v₀)`
pub fn error_functional(
    case: &ManufacturedCase,
    interp: &WeakFunction,
    v: &WeakFunction,
    quad: QuadPolicy,
) -> Result<ErrorTerms, VerifyError> {
    let problem = &case.problem;
    let mesh = v.mesh();
    let rule = gauss_rule(2 * quad.points(v.degree()));
    let (mut e1, mut e2, mut e3) = (0.0, 0.0, 0.0);
    for (e, iv) in mesh.elements().enumerate() {
        let ip = interp.element(e);
        let dip = ip.derivative();
        let ve = v.element(e);
        let dve = ve.derivative();
        let right = case.du.eval(iv.b)? - dip.right_trace();
        let left = case.du.eval(iv.a)? - dip.left_trace();
        e1 += right * v.gap_right(e) - left * v.gap_left(e);
        let jac = iv.jacobian();
        for (t, w) in rule.iter() {
            let x = iv.map(t);
            let diff = case.u.eval(x)? - ip.eval_reference(t);
            let v0 = ve.eval_reference(t);
            let dbv = problem.b_prime().eval(x)? * v0 + problem.b().eval(x)? * dve.eval_reference(t);
            e2 += w * jac * diff * dbv;
            e3 -= w * jac * problem.r().eval(x)? * diff * v0;
        }
    }
    Ok(ErrorTerms { e1: problem.eps1() * e1, e2: problem.eps2() * e2, e3 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorTerms {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

impl ErrorTerms {
    pub fn total(&self) -> f64 {
        self.e1 + self.e2 + self.e3
    }

    /// Sum of magnitudes, the natural scale for comparing against the total.
    pub fn scale(&self) -> f64 {
        libm::fabs(self.e1) + libm::fabs(self.e2) + libm::fabs(self.e3)
    }
}

/// Which mesh the degree-`2p` reference solution is computed on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RefMesh {
    /// The degree-`p` mesh, so the difference lives in one discrete space.
    #[default]
    Same,
    /// The spectral boundary layer mesh for degree `2p`, transferred back by
    /// elementwise L² projection.
    Rebuilt,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub kappa: f64,
    pub quad: QuadPolicy,
    pub ref_mesh: RefMesh,
    /// Reference degree is `ref_factor · p`.
    pub ref_factor: usize,
    pub mu_samples: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            kappa: 1.0,
            quad: QuadPolicy::default(),
            ref_mesh: RefMesh::Same,
            ref_factor: 2,
            mu_samples: DEFAULT_SAMPLES,
        }
    }
}

/// The spectral boundary layer mesh for `problem` at degree `p`.
pub fn sbl_mesh_for(problem: &ProblemSpec, p: usize, kappa: f64, mu_samples: usize) -> Result<Mesh, VerifyError> {
    let mu = problem.compute_mu(mu_samples)?;
    Ok(build_sbl_mesh(problem.regime(), kappa, p, mu, problem.eps1(), problem.eps2()))
}

/// Weak Galerkin solve at degree `ref_degree` on `mesh` with penalties for that
/// degree.
pub fn reference_solution(
    problem: &ProblemSpec,
    mesh: &Mesh,
    ref_degree: usize,
    quad: QuadPolicy,
) -> Result<WeakFunction, VerifyError> {
    let options = AssemblyOptions { penalties: Penalties::Standard, quad };
    Ok(assembly::solve_problem(problem, mesh, ref_degree, &options)?)
}

/// Reference for the study according to `config.ref_mesh`, always returned on
/// `mesh` at degree `config.ref_factor · p`.
pub fn study_reference(
    problem: &ProblemSpec,
    mesh: &Mesh,
    p: usize,
    config: &StudyConfig,
) -> Result<WeakFunction, VerifyError> {
    let q = config.ref_factor * p;
    match config.ref_mesh {
        RefMesh::Same => reference_solution(problem, mesh, q, config.quad),
        RefMesh::Rebuilt => {
            let fine_mesh = sbl_mesh_for(problem, q, config.kappa, config.mu_samples)?;
            let fine = reference_solution(problem, &fine_mesh, q, config.quad)?;
            Ok(transfer(&fine, mesh)?)
        }
    }
}

/// Elementwise L² projection of `src` onto `target` at the same degree. Node
/// values come from `src`'s node values where nodes coincide, otherwise from
/// its interior polynomial.
pub fn transfer(src: &WeakFunction, target: &Mesh) -> Result<WeakFunction, WeakError> {
    let q = src.degree();
    let rule = gauss_rule(q + 2);
    let src_nodes = src.mesh().nodes();
    let locate = |x: f64| -> usize {
        let n = src.mesh().num_elements();
        src_nodes[1..n].iter().take_while(|&&xn| xn <= x).count()
    };
    let mut v0 = Vec::with_capacity(target.num_elements() * (q + 1));
    for iv in target.elements() {
        let mut cuts: Vec<f64> = core::iter::once(iv.a)
            .chain(src_nodes.iter().copied().filter(|&x| x > iv.a && x < iv.b))
            .chain(core::iter::once(iv.b))
            .collect();
        cuts.dedup();
        let mut coeffs = alloc::vec![0.0; q + 1];
        let mut vals = alloc::vec![0.0; q + 1];
        let mut ders = alloc::vec![0.0; q + 1];
        for w in cuts.windows(2) {
            let piece = Interval { a: w[0], b: w[1] };
            let e = locate(0.5 * (w[0] + w[1]));
            let poly = src.element(e);
            for (t, wt) in rule.iter() {
                let x = piece.map(t);
                let y = poly.eval(x);
                crate::polybasis::legendre_table(iv.to_reference(x), &mut vals, &mut ders);
                for k in 0..=q {
                    coeffs[k] += wt * piece.jacobian() * y * vals[k];
                }
            }
        }
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= (2 * k + 1) as f64 / iv.width();
        }
        v0.extend(coeffs);
    }
    let vb = target
        .nodes()
        .iter()
        .map(|&x| match src_nodes.iter().position(|&s| libm::fabs(s - x) <= 1e-14) {
            Some(i) => src.vb()[i],
            None => src.element(locate(x)).eval(x),
        })
        .collect();
    WeakFunction::new(target.clone(), q, v0, vb)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyError {
    /// `⫴u_hi - u_lo⫴` (broken norm).
    pub absolute: f64,
    /// `absolute / ⫴u_hi⫴`.
    pub relative: f64,
    /// `⫴u_hi - u_lo⫴_p` evaluated at the reference degree.
    pub absolute_p: f64,
    pub relative_p: f64,
}

/// Error of `u_lo` measured against `u_hi` on the same mesh; `u_lo` is
/// zero-padded to the reference degree first.
pub fn energy_error(
    u_hi: &WeakFunction,
    u_lo: &WeakFunction,
    problem: &ProblemSpec,
    sigmas: &[f64],
) -> Result<EnergyError, WeakError> {
    if u_hi.mesh() != u_lo.mesh() {
        return Err(WeakError::MeshMismatch);
    }
    let diff = u_hi.difference(u_lo)?;
    let absolute = norm_broken(&diff, problem, sigmas)?;
    let reference = norm_broken(u_hi, problem, sigmas)?;
    let absolute_p = norm_p(&diff, problem, sigmas)?;
    let reference_p = norm_p(u_hi, problem, sigmas)?;
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else if a == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(EnergyError {
        absolute,
        relative: ratio(absolute, reference),
        absolute_p,
        relative_p: ratio(absolute_p, reference_p),
    })
}

/// One row of the convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub regime: Regime,
    pub eps1: f64,
    pub eps2: f64,
    pub p: usize,
    pub elements: usize,
    pub dof: usize,
    pub err_rel: f64,
    pub err_abs: f64,
    pub err_rel_p: f64,
    pub ref_degree: usize,
    pub wall_ms: f64,
    pub failure: Option<String>,
}

impl ConvergenceRecord {
    pub fn err_rel_percent(&self) -> f64 {
        100.0 * self.err_rel
    }

    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    fn sort_key(&self, other: &Self) -> Ordering {
        self.eps1
            .total_cmp(&other.eps1)
            .then(self.eps2.total_cmp(&other.eps2))
            .then(self.p.cmp(&other.p))
    }
}

/// A problem whose `ε₁, ε₂` vary across a sweep. With a manufactured solution
/// the load is rebuilt for every `(ε₁, ε₂)`.
#[derive(Clone, Debug)]
pub struct ProblemFamily {
    pub base: ProblemSpec,
    pub manufactured_u: Option<Expr>,
}

impl ProblemFamily {
    pub fn new(base: ProblemSpec) -> Self {
        ProblemFamily { base, manufactured_u: None }
    }

    pub fn manufactured(base: ProblemSpec, u: Expr) -> Self {
        ProblemFamily { base, manufactured_u: Some(u) }
    }

    pub fn instance(&self, eps1: f64, eps2: f64) -> Result<ProblemSpec, VerifyError> {
        let problem = self.base.with_eps(eps1, eps2)?;
        match &self.manufactured_u {
            Some(u) => Ok(manufacture_expr(u.clone(), &problem)?.problem),
            None => Ok(problem),
        }
    }
}

/// Sort records by `(ε₁, ε₂, p)`.
pub fn sort_records(records: &mut [ConvergenceRecord]) {
    records.sort_by(|a, b| a.sort_key(b));
}

/// Solves one `(ε₁, ε₂, p)` case and measures its error. Failures are recorded
/// in the returned row instead of aborting.
pub fn run_case(family: &ProblemFamily, eps1: f64, eps2: f64, p: usize, config: &StudyConfig) -> ConvergenceRecord {
    let regime = crate::problem::classify_regime(eps1, eps2);
    let ref_degree = config.ref_factor * p;
    let mut record = ConvergenceRecord {
        regime,
        eps1,
        eps2,
        p,
        elements: 0,
        dof: 0,
        err_rel: f64::NAN,
        err_abs: f64::NAN,
        err_rel_p: f64::NAN,
        ref_degree,
        wall_ms: 0.0,
        failure: None,
    };
    let outcome = (|| -> Result<(usize, EnergyError), VerifyError> {
        let problem = family.instance(eps1, eps2)?;
        problem.validate(config.mu_samples)?;
        let mesh = sbl_mesh_for(&problem, p, config.kappa, config.mu_samples)?;
        let options = AssemblyOptions { penalties: Penalties::Standard, quad: config.quad };
        let u_p = assembly::solve_problem(&problem, &mesh, p, &options)?;
        let u_ref = study_reference(&problem, &mesh, p, config)?;
        let sigmas = default_penalties(&mesh, p, eps1);
        Ok((mesh.num_elements(), energy_error(&u_ref, &u_p, &problem, &sigmas)?))
    })();
    match outcome {
        Ok((n, err)) => {
            record.elements = n;
            record.dof = assembly::DofMap::new(n, p).total();
            record.err_rel = err.relative;
            record.err_abs = err.absolute;
            record.err_rel_p = err.relative_p;
        }
        Err(e) => record.failure = Some(e.to_string()),
    }
    record
}

/// Sequential sweep over `eps_grid × p_values`, sorted by `(ε₁, ε₂, p)`.
/// `clock` returns milliseconds and is sampled around each case.
pub fn convergence_study(
    family: &ProblemFamily,
    p_values: &[usize],
    eps_grid: &[(f64, f64)],
    config: &StudyConfig,
    mut clock: Option<&mut dyn FnMut() -> f64>,
) -> Vec<ConvergenceRecord> {
    let mut out = Vec::with_capacity(p_values.len() * eps_grid.len());
    for &(eps1, eps2) in eps_grid {
        for &p in p_values {
            let start = clock.as_mut().map(|c| c());
            let mut rec = run_case(family, eps1, eps2, p, config);
            if let (Some(c), Some(s)) = (clock.as_mut(), start) {
                rec.wall_ms = c() - s;
            }
            out.push(rec);
        }
    }
    sort_records(&mut out);
    out
}

/// Least-squares slope of `log₁₀(err_rel)` against `p` over successful rows
/// with a positive error. `None` with fewer than two usable rows.
pub fn log10_slope(records: &[ConvergenceRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.is_ok() && r.err_rel > 0.0 && r.err_rel.is_finite())
        .map(|r| (r.p as f64, libm::log10(r.err_rel)))
        .collect();
    least_squares_slope(&pts)
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
