//! Seeded property suites over the weak-space operators, the bilinear form
//! and the solver.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{manufacture, sbl_mesh_for, ManufacturedCase, VerifyError};
use crate::assembly::{self, bilinear_apply, load_apply, AssemblyOptions, Penalties};
use crate::mesh::Mesh;
use crate::polybasis::{
    derivative_coeffs, gauss_rule, l2_project, legendre_eval, ElementPoly, Interval, QuadPolicy,
};
use crate::problem::{ProblemSpec, DEFAULT_SAMPLES};
use crate::weak::{default_penalties, norm_broken, norm_broken_sq, norm_p, weak_derivative, WeakFunction};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// One `(ε₁, ε₂)` sample per mesh regime, reaction-convection-diffusion twice.
pub const REGIME_SAMPLES: [(f64, f64); 5] = [(1e-8, 1.0), (1e-8, 1e-3), (1e-6, 1e-2), (1e-6, 1e-6), (1e-4, 1e-5)];

/// `(ε₁, ε₂)` of the model problem used by the coercivity and error-equation
/// suites.
pub const MODEL_EPS: (f64, f64) = (1e-5, 1e-2);

/// Uniform on `[-1, 1)`.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// iid uniform Legendre and node coefficients; node values at `0` and `1`
/// are zero when `zero_boundary`.
pub fn random_weak_function(rng: &mut impl RngCore, mesh: &Mesh, p: usize, zero_boundary: bool) -> WeakFunction {
    let v0 = (0..mesh.num_elements() * (p + 1)).map(|_| uniform(rng)).collect();
    let vb = (0..mesh.num_nodes()).map(|_| uniform(rng)).collect();
    let v = WeakFunction::new(mesh.clone(), p, v0, vb).expect("shapes match by construction");
    if zero_boundary {
        v.with_zero_boundary()
    } else {
        v
    }
}

/// A single random `q ∈ ℙ_p` on `(0, 1)` restricted to every element.
pub fn random_conforming(rng: &mut impl RngCore, mesh: &Mesh, p: usize) -> WeakFunction {
    let global = ElementPoly::new(Interval { a: 0.0, b: 1.0 }, (0..=p).map(|_| uniform(rng)).collect());
    let rule = gauss_rule(p + 2);
    let polys: Vec<ElementPoly> = mesh.elements().map(|iv| l2_project(|x| global.eval(x), p, iv, &rule)).collect();
    WeakFunction::conforming(mesh.clone(), p, &polys).expect("shapes match by construction")
}

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest normalized violation observed; the suite's tolerance is 1 on
    /// this scale unless `detail` says otherwise.
    pub worst: f64,
    pub detail: String,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport { name, cases: 0, failures: 0, worst: 0.0, detail: String::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    fn record(&mut self, measure: f64, limit: f64) {
        self.cases += 1;
        let m = if measure.is_nan() { f64::INFINITY } else { measure };
        if m > self.worst {
            self.worst = m;
        }
        if !(m <= limit) {
            self.failures += 1;
        }
    }

    fn error(&mut self, e: VerifyError) {
        self.cases += 1;
        self.failures += 1;
        self.worst = f64::INFINITY;
        if self.detail.is_empty() {
            self.detail = format!("{e}");
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    pub quad: QuadPolicy,
    /// Multiplies every penalty `σ_j`; `0` disables the interior penalty.
    pub penalty_scale: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { seed: DEFAULT_SEED, quad: QuadPolicy::default(), penalty_scale: 1.0 }
    }
}

impl CheckConfig {
    fn sigmas(&self, mesh: &Mesh, p: usize, eps1: f64) -> Vec<f64> {
        default_penalties(mesh, p, eps1).into_iter().map(|s| s * self.penalty_scale).collect()
    }

    fn options(&self, mesh: &Mesh, p: usize, eps1: f64) -> AssemblyOptions {
        AssemblyOptions { penalties: Penalties::Custom(self.sigmas(mesh, p, eps1)), quad: self.quad }
    }
}

fn model_problem() -> ProblemSpec {
    ProblemSpec::model(MODEL_EPS.0, MODEL_EPS.1).expect("model problem is valid")
}

/// SBL meshes of the model coefficients for every regime sample at degree `p`
/// and `κ ∈ kappas`.
pub fn regime_meshes(p: usize, kappas: &[f64]) -> Vec<Mesh> {
    let base = model_problem();
    let mut out = Vec::new();
    for &(e1, e2) in &REGIME_SAMPLES {
        let problem = base.with_eps(e1, e2).expect("regime samples are in range");
        for &kappa in kappas {
            if let Ok(m) = sbl_mesh_for(&problem, p, kappa, DEFAULT_SAMPLES) {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// `∫ D_{p-1}v · q = -∫ v₀ q' + v_b q |` for every Legendre test `q` of degree
/// `≤ p-1`, with the integrals taken by quadrature. Measure: residual over the
/// sum of term magnitudes, limit `1e-10`.
pub fn definition_residual_suite(config: &CheckConfig, p_max: usize, per_mesh: usize) -> SuiteReport {
    let mut report = SuiteReport::new("definition-1 residual");
    let mut rng = seeded_rng(config.seed);
    for p in 1..=p_max {
        let rule = config.quad.rule(2 * p);
        for mesh in regime_meshes(p, &[1.0]) {
            for _ in 0..per_mesh {
                let v = random_weak_function(&mut rng, &mesh, p, false);
                let d = weak_derivative(&v);
                for (e, iv) in mesh.elements().enumerate() {
                    let (de, ve) = (d.element(e), v.element(e));
                    for k in 0..p {
                        let mut lhs = 0.0;
                        let mut vol = 0.0;
                        for (t, w) in rule.iter() {
                            let (pk, dpk) = legendre_eval(k, t);
                            lhs += w * iv.jacobian() * de.eval_reference(t) * pk;
                            vol += w * ve.eval_reference(t) * dpk;
                        }
                        let right = v.vb()[e + 1];
                        let left = v.vb()[e] * legendre_eval(k, -1.0).0;
                        let res = lhs + vol - right + left;
                        let scale = libm::fabs(lhs) + libm::fabs(vol) + libm::fabs(right) + libm::fabs(left);
                        report.record(libm::fabs(res) / scale.max(f64::MIN_POSITIVE), 1e-10);
                    }
                }
            }
        }
    }
    report.detail = format!("limit 1e-10 relative, p <= {p_max}");
    report
}

/// `D_{p-1}q = q'` for random conforming `q`. Measure: largest coefficient
/// difference over `max(1, |q'| coefficients, (2/h)·|DOFs|)`, limit `1e-11`.
pub fn conforming_derivative_suite(config: &CheckConfig, count: usize, p_max: usize) -> SuiteReport {
    let mut report = SuiteReport::new("weak derivative of conforming functions");
    let mut rng = seeded_rng(config.seed ^ 0x5eed_0002);
    for i in 0..count {
        let p = 1 + i % p_max;
        let meshes = regime_meshes(p, &[1.0]);
        let mesh = &meshes[i % meshes.len()];
        let v = random_conforming(&mut rng, mesh, p);
        let d = weak_derivative(&v);
        let mut worst = 0.0f64;
        for e in 0..mesh.num_elements() {
            let exact = derivative_coeffs(v.block(e));
            let exact = &exact[..p];
            let h_scale = 2.0 / mesh.element(e).width();
            // D maps values of size |v| to size |v|·2/h, so roundoff in the
            // traces is amplified by 2/h on thin elements
            let dof_max = v.block(e).iter().chain(&v.vb()[e..e + 2]).fold(0.0f64, |m, c| m.max(libm::fabs(*c)));
            let scale = exact.iter().fold(1.0f64.max(dof_max * h_scale), |m, c| m.max(libm::fabs(c * h_scale)));
            for (a, b) in d.block(e).iter().zip(exact) {
                worst = worst.max(libm::fabs(a - b * h_scale) / scale);
            }
        }
        report.record(worst, 1e-11);
    }
    report.detail = format!("limit 1e-11 relative to max(1, |q'| coefficients, (2/h)|dofs|), p <= {p_max}");
    report
}

/// Random `v` with zero boundary values on the model problem's SBL mesh for
/// each `p`.
fn model_samples(config: &CheckConfig, stream: u64, p_values: &[usize], count: usize) -> Vec<(ProblemSpec, Mesh, usize, Vec<WeakFunction>)> {
    let problem = model_problem();
    let mut rng = seeded_rng(config.seed ^ stream);
    p_values
        .iter()
        .filter_map(|&p| {
            let mesh = sbl_mesh_for(&problem, p, 1.0, DEFAULT_SAMPLES).ok()?;
            let vs = (0..count).map(|_| random_weak_function(&mut rng, &mesh, p, true)).collect();
            Some((problem.clone(), mesh, p, vs))
        })
        .collect()
}

/// Lower bound `A_p(v,v) ≥ c⫴v⫴²` that holds for every `v` when
/// `σ_j = ε₁p²/h_j`, `b > 0` and `r - ε₂b'/2 ≥ 1`.
pub const COERCIVITY_CONSTANT: f64 = 0.25;

/// Weak functions with `v₀ = P_p - P_{p-1}` on a single element and `v_b = 0`:
/// the only gap is at the element's inflow end, which the convection terms
/// do not charge. Without the penalty their ratio `A_p(v,v)/⫴v⫴²` collapses.
pub fn inflow_gap_bubbles(mesh: &Mesh, p: usize) -> Vec<WeakFunction> {
    (0..mesh.num_elements())
        .map(|e| {
            let mut v0 = vec![0.0; mesh.num_elements() * (p + 1)];
            v0[e * (p + 1) + p] = 1.0;
            v0[e * (p + 1) + p - 1] = -1.0;
            WeakFunction::new(mesh.clone(), p, v0, vec![0.0; mesh.num_nodes()]).expect("shapes match by construction")
        })
        .collect()
}

/// `A_p(v,v) / ⫴v⫴²` for each `v`.
pub fn coercivity_ratios(config: &CheckConfig, problem: &ProblemSpec, mesh: &Mesh, p: usize, vs: &[WeakFunction]) -> Result<Vec<f64>, VerifyError> {
    let sigmas = config.sigmas(mesh, p, problem.eps1());
    vs.iter()
        .map(|v| {
            let a = bilinear_apply(v, v, problem, &sigmas, config.quad)?;
            Ok(a / norm_broken_sq(v, problem, &sigmas)?)
        })
        .collect()
}

/// `A_p(v,v) ≥ constant·⫴v⫴²` on the model problem for `count` random `v` per
/// degree, plus [`inflow_gap_bubbles`] when `structured`. Measure:
/// `constant - A_p(v,v)/⫴v⫴²`, limit `1e-10`.
pub fn coercivity_suite(config: &CheckConfig, p_values: &[usize], count: usize, constant: f64, structured: bool) -> SuiteReport {
    let mut report = SuiteReport::new("coercivity");
    let mut min_ratio = f64::INFINITY;
    for (problem, mesh, p, mut vs) in model_samples(config, 0x5eed_0003, p_values, count) {
        if structured {
            vs.extend(inflow_gap_bubbles(&mesh, p));
        }
        match coercivity_ratios(config, &problem, &mesh, p, &vs) {
            Ok(ratios) => {
                for r in ratios {
                    min_ratio = min_ratio.min(r);
                    report.record(constant - r, 1e-10);
                }
            }
            Err(e) => report.error(e),
        }
    }
    if report.detail.is_empty() {
        report.detail = format!("A(v,v) >= {constant}*|||v|||^2, observed min ratio {min_ratio:.6}");
    }
    report
}

/// Envelope of `⫴v⫴_p / ⫴v⫴` over random `v`; limit `[1/50, 50]`.
pub fn norm_equivalence_suite(config: &CheckConfig, p_values: &[usize], count: usize) -> (SuiteReport, f64, f64) {
    let mut report = SuiteReport::new("norm equivalence envelope");
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (problem, mesh, p, vs) in model_samples(config, 0x5eed_0004, p_values, count) {
        let sigmas = config.sigmas(&mesh, p, problem.eps1());
        for v in &vs {
            let outcome = (|| -> Result<f64, VerifyError> {
                Ok(norm_p(v, &problem, &sigmas)? / norm_broken(v, &problem, &sigmas)?)
            })();
            match outcome {
                Ok(ratio) => {
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                    // measure is how far outside [1/50, 50] on a log scale
                    report.record(libm::fabs(libm::log(ratio)) / libm::log(50.0), 1.0);
                }
                Err(e) => report.error(e),
            }
        }
    }
    report.detail = format!("observed ratio in [{lo:.6}, {hi:.6}], allowed [0.02, 50]");
    (report, lo, hi)
}

/// `|A_p(ℐu - u_p, v) - E(u, v)|` over
/// `|A_p(ℐu, v)| + |(f, v₀)| + Σ|Eᵢ|`, limit `1e-8`, for `u = sin(πx)`.
pub fn error_equation_suite(config: &CheckConfig, p_values: &[usize], count: usize) -> SuiteReport {
    let mut report = SuiteReport::new("error equation identity");
    let case = match manufacture("sin(pi*x)", &model_problem()) {
        Ok(c) => c,
        Err(e) => {
            report.error(e);
            return report;
        }
    };
    for (problem, mesh, p, vs) in model_samples(config, 0x5eed_0005, p_values, count) {
        let _ = problem;
        let setup = (|| -> Result<(WeakFunction, WeakFunction, Vec<f64>), VerifyError> {
            let options = config.options(&mesh, p, case.problem.eps1());
            let u_p = assembly::solve_problem(&case.problem, &mesh, p, &options)?;
            let iu = case.interpolant(&mesh, p, config.quad)?.with_zero_boundary();
            Ok((u_p, iu, config.sigmas(&mesh, p, case.problem.eps1())))
        })();
        let (u_p, iu, sigmas) = match setup {
            Ok(s) => s,
            Err(e) => {
                report.error(e);
                continue;
            }
        };
        for v in &vs {
            match error_equation_residual(&case, &iu, &u_p, v, &sigmas, config.quad) {
                Ok((res, scale)) => report.record(res / scale.max(f64::MIN_POSITIVE), 1e-8),
                Err(e) => report.error(e),
            }
        }
    }
    report.detail = String::from("limit 1e-8 relative, u = sin(pi*x)");
    report
}

/// `(|A_p(ℐu - u_p, v) - E(u, v)|, scale)`.
pub fn error_equation_residual(
    case: &ManufacturedCase,
    iu: &WeakFunction,
    u_p: &WeakFunction,
    v: &WeakFunction,
    sigmas: &[f64],
    quad: QuadPolicy,
) -> Result<(f64, f64), VerifyError> {
    let a_iu = bilinear_apply(iu, v, &case.problem, sigmas, quad)?;
    let a_up = bilinear_apply(u_p, v, &case.problem, sigmas, quad)?;
    let terms = super::error_functional(case, iu, v, quad)?;
    let res = libm::fabs(a_iu - a_up - terms.total());
    Ok((res, libm::fabs(a_iu) + libm::fabs(a_up) + terms.scale()))
}

/// `u = x(1-x)` is reproduced for `p ≥ 2` on every regime's SBL mesh and
/// `κ ∈ {1/2, 1, 2}`. Measure: relative broken-norm error, limit `1e-9`.
pub fn reproduction_suite(config: &CheckConfig, p_values: &[usize]) -> SuiteReport {
    let mut report = SuiteReport::new("polynomial reproduction");
    let base = model_problem();
    for &(e1, e2) in &REGIME_SAMPLES {
        let outcome = base
            .with_eps(e1, e2)
            .map_err(VerifyError::from)
            .and_then(|pr| manufacture("x*(1-x)", &pr));
        let case = match outcome {
            Ok(c) => c,
            Err(e) => {
                report.error(e);
                continue;
            }
        };
        for &p in p_values {
            for kappa in [0.5, 1.0, 2.0] {
                match reproduction_error(config, &case, p, kappa) {
                    Ok(err) => report.record(err, 1e-9),
                    Err(e) => report.error(e),
                }
            }
        }
    }
    report.detail = String::from("limit 1e-9 relative energy error, u = x(1-x)");
    report
}

/// Relative broken-norm distance between `u_p` and `ℐu`, which equals `u` for
/// polynomial `u` of degree `≤ p`.
pub fn reproduction_error(config: &CheckConfig, case: &ManufacturedCase, p: usize, kappa: f64) -> Result<f64, VerifyError> {
    let mesh = sbl_mesh_for(&case.problem, p, kappa, DEFAULT_SAMPLES)?;
    let options = config.options(&mesh, p, case.problem.eps1());
    let u_p = assembly::solve_problem(&case.problem, &mesh, p, &options)?;
    let iu = case.interpolant(&mesh, p, config.quad)?.with_zero_boundary();
    let sigmas = config.sigmas(&mesh, p, case.problem.eps1());
    let err = norm_broken(&iu.difference(&u_p)?, &case.problem, &sigmas)?;
    Ok(err / norm_broken(&iu, &case.problem, &sigmas)?)
}

/// The discrete solution satisfies `A_p(u_p, φ) = (f, φ)` for every basis
/// function `φ`, recomputed term by term. Measure: residual over
/// `max(|A_p(u_p, φ)|, |(f, φ)|)` summed scale, limit `1e-9`.
pub fn galerkin_suite(config: &CheckConfig, p_values: &[usize]) -> SuiteReport {
    let mut report = SuiteReport::new("galerkin orthogonality");
    let base = model_problem();
    for &(e1, e2) in &REGIME_SAMPLES {
        for &p in p_values {
            let outcome = (|| -> Result<f64, VerifyError> {
                let problem = base.with_eps(e1, e2)?;
                let mesh = sbl_mesh_for(&problem, p, 1.0, DEFAULT_SAMPLES)?;
                let options = config.options(&mesh, p, e1);
                let sys = assembly::assemble_with(&problem, &mesh, p, &options)?;
                let u_p = assembly::solve(&sys)?;
                let sigmas = config.sigmas(&mesh, p, e1);
                let norm_u = norm_broken(&u_p, &problem, &sigmas)?;
                let mut worst = 0.0f64;
                for i in 0..sys.dofs.total() {
                    let phi = sys.dofs.basis(&mesh, i)?;
                    let a = bilinear_apply(&u_p, &phi, &problem, &sigmas, config.quad)?;
                    let l = load_apply(&phi, &problem, config.quad)?;
                    let scale = norm_u * norm_broken(&phi, &problem, &sigmas)?;
                    worst = worst.max(libm::fabs(a - l) / scale.max(f64::MIN_POSITIVE));
                }
                Ok(worst)
            })();
            match outcome {
                Ok(w) => report.record(w, 1e-9),
                Err(e) => report.error(e),
            }
        }
    }
    report.detail = String::from("limit 1e-9 relative to |||u_p||| |||phi|||");
    report
}

/// Assembled matrix and load agree between the default and the doubled
/// quadrature rule. Measure: largest entry difference over the largest
/// entry, limit `1e-10`.
pub fn quadrature_stability_suite(config: &CheckConfig, p_values: &[usize]) -> SuiteReport {
    let mut report = SuiteReport::new("quadrature stability");
    let base = model_problem();
    for &(e1, e2) in &REGIME_SAMPLES {
        for &p in p_values {
            let outcome = (|| -> Result<f64, VerifyError> {
                let problem = base.with_eps(e1, e2)?;
                let mesh = sbl_mesh_for(&problem, p, 1.0, DEFAULT_SAMPLES)?;
                let sigmas = config.sigmas(&mesh, p, e1);
                let single = AssemblyOptions { penalties: Penalties::Custom(sigmas.clone()), quad: QuadPolicy::default() };
                let double = AssemblyOptions { penalties: Penalties::Custom(sigmas), quad: QuadPolicy::doubled() };
                let a = assembly::assemble_with(&problem, &mesh, p, &single)?;
                let b = assembly::assemble_with(&problem, &mesh, p, &double)?;
                let n = a.dofs.total();
                let (mut diff, mut scale) = (0.0f64, 0.0f64);
                for i in 0..n {
                    for j in 0..n {
                        diff = diff.max(libm::fabs(a.matrix.get(i, j) - b.matrix.get(i, j)));
                        scale = scale.max(libm::fabs(a.matrix.get(i, j)));
                    }
                }
                let mut rdiff = 0.0f64;
                let mut rscale = 0.0f64;
                for (x, y) in a.rhs.iter().zip(&b.rhs) {
                    rdiff = rdiff.max(libm::fabs(x - y));
                    rscale = rscale.max(libm::fabs(*x));
                }
                Ok((diff / scale.max(f64::MIN_POSITIVE)).max(rdiff / rscale.max(f64::MIN_POSITIVE)))
            })();
            match outcome {
                Ok(w) => report.record(w, 1e-10),
                Err(e) => report.error(e),
            }
        }
    }
    report.detail = String::from("limit 1e-10 relative, default vs doubled rule");
    report
}

/// Every suite with its default sample sizes.
pub fn run_checks(config: &CheckConfig) -> Vec<SuiteReport> {
    let p18: Vec<usize> = (1..=8).collect();
    let p28: Vec<usize> = (2..=8).collect();
    vec![
        definition_residual_suite(config, 10, 4),
        conforming_derivative_suite(config, 100, 10),
        coercivity_suite(config, &p18, 500, COERCIVITY_CONSTANT, true),
        norm_equivalence_suite(config, &p18, 500).0,
        error_equation_suite(config, &[2, 4, 6], 50),
        reproduction_suite(config, &p28),
        galerkin_suite(config, &[1, 2, 4, 6]),
        quadrature_stability_suite(config, &[1, 4, 8]),
    ]
}
