//! Degree-of-freedom numbering, assembly of the weak Galerkin form
//!
//! ```text
//! A_p(u, v) = ε₁(D_{p-1}u, D_{p-1}v) + ε₂(D^c_p u, v₀) + (r u₀, v₀) + S(u, v) + S_c(u, v)
//! ```
//!
//! against the load `(f, v₀)`, and the direct solve on `V_{p,0}`. The two
//! boundary node values are fixed at zero and eliminated from the system.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::expr::EvalError;
use crate::linalg::{self, DenseMatrix, LinalgError};
use crate::mesh::Mesh;
use crate::polybasis::{legendre_at_minus_one, legendre_table, QuadPolicy};
use crate::problem::ProblemSpec;
use crate::weak::{
    self, default_penalties, stabilizer_s, stabilizer_sc, weak_convection_derivative,
    weak_derivative, WeakError, WeakFunction,
};

/// Backward error above which a solve is reported as failed.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum AssemblyError {
    Eval(EvalError),
    Weak(WeakError),
    Linalg(LinalgError),
    /// The factorization finished but the backward error is too large.
    Inaccurate { backward_error: f64 },
}

impl fmt::Display for AssemblyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssemblyError::Eval(e) => write!(f, "{e}"),
            AssemblyError::Weak(e) => write!(f, "{e}"),
            AssemblyError::Linalg(e) => write!(f, "{e}"),
            AssemblyError::Inaccurate { backward_error } => {
                write!(f, "solve inaccurate: backward error {backward_error:e}")
            }
        }
    }
}

impl core::error::Error for AssemblyError {}

impl From<EvalError> for AssemblyError {
    fn from(e: EvalError) -> Self {
        AssemblyError::Eval(e)
    }
}

impl From<WeakError> for AssemblyError {
    fn from(e: WeakError) -> Self {
        match e {
            WeakError::Eval(e) => AssemblyError::Eval(e),
            other => AssemblyError::Weak(other),
        }
    }
}

impl From<LinalgError> for AssemblyError {
    fn from(e: LinalgError) -> Self {
        AssemblyError::Linalg(e)
    }
}

/// Element interior blocks first (`p + 1` Legendre coefficients each), then
/// the `N - 1` interior node values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofMap {
    elements: usize,
    degree: usize,
}

impl DofMap {
    pub fn new(elements: usize, degree: usize) -> Self {
        DofMap { elements, degree }
    }

    pub fn for_mesh(mesh: &Mesh, degree: usize) -> Self {
        Self::new(mesh.num_elements(), degree)
    }

    pub fn total(&self) -> usize {
        self.elements * (self.degree + 1) + self.elements - 1
    }

    pub fn interior(&self, e: usize) -> Range<usize> {
        let n = self.degree + 1;
        e * n..(e + 1) * n
    }

    /// Global index of node `i`'s value, `None` for the two boundary nodes.
    pub fn node(&self, i: usize) -> Option<usize> {
        if i == 0 || i >= self.elements {
            None
        } else {
            Some(self.elements * (self.degree + 1) + i - 1)
        }
    }

    /// Local element vector `[c_0..c_p, v_L, v_R]` to global indices.
    fn local_to_global(&self, e: usize) -> Vec<Option<usize>> {
        let mut out: Vec<Option<usize>> = self.interior(e).map(Some).collect();
        out.push(self.node(e));
        out.push(self.node(e + 1));
        out
    }

    /// Packs a weak function's free values into a global vector.
    pub fn gather(&self, v: &WeakFunction) -> Vec<f64> {
        let mut x = vec![0.0; self.total()];
        x[..v.v0().len()].copy_from_slice(v.v0());
        for i in 1..self.elements {
            x[self.node(i).unwrap()] = v.vb()[i];
        }
        x
    }

    /// Inverse of [`DofMap::gather`]; boundary node values are zero.
    pub fn scatter(&self, mesh: &Mesh, x: &[f64]) -> Result<WeakFunction, WeakError> {
        let n0 = self.elements * (self.degree + 1);
        let mut vb = vec![0.0; self.elements + 1];
        for (i, slot) in vb.iter_mut().enumerate() {
            if let Some(k) = self.node(i) {
                *slot = x[k];
            }
        }
        WeakFunction::new(mesh.clone(), self.degree, x[..n0].to_vec(), vb)
    }

    /// The weak function with a single unit degree of freedom.
    pub fn basis(&self, mesh: &Mesh, index: usize) -> Result<WeakFunction, WeakError> {
        let mut x = vec![0.0; self.total()];
        x[index] = 1.0;
        self.scatter(mesh, &x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Penalties {
    /// `σ_j = ε₁p²/h_j`.
    Standard,
    Custom(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyOptions {
    pub penalties: Penalties,
    pub quad: QuadPolicy,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { penalties: Penalties::Standard, quad: QuadPolicy::default() }
    }
}

impl AssemblyOptions {
    pub fn sigmas(&self, mesh: &Mesh, p: usize, eps1: f64) -> Vec<f64> {
        match &self.penalties {
            Penalties::Standard => default_penalties(mesh, p, eps1),
            Penalties::Custom(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
    pub mesh: Mesh,
    pub degree: usize,
    pub sigmas: Vec<f64>,
}

pub fn assemble(problem: &ProblemSpec, mesh: &Mesh, p: usize) -> Result<AssembledSystem, AssemblyError> {
    assemble_with(problem, mesh, p, &AssemblyOptions::default())
}

pub fn assemble_with(
    problem: &ProblemSpec,
    mesh: &Mesh,
    p: usize,
    options: &AssemblyOptions,
) -> Result<AssembledSystem, AssemblyError> {
    if p == 0 {
        return Err(WeakError::DegreeZero.into());
    }
    let sigmas = options.sigmas(mesh, p, problem.eps1());
    if sigmas.len() != mesh.num_elements() {
        return Err(WeakError::PenaltyCount { expected: mesh.num_elements(), got: sigmas.len() }.into());
    }
    let dofs = DofMap::for_mesh(mesh, p);
    let mut matrix = DenseMatrix::zeros(dofs.total());
    let mut rhs = vec![0.0; dofs.total()];
    let rule = options.quad.rule(p);
    let (eps1, eps2) = (problem.eps1(), problem.eps2());
    let m = p + 3;
    let (il, ir) = (p + 1, p + 2);
    let mut vals = vec![0.0; p + 1];
    let mut ders = vec![0.0; p + 1];

    for (e, iv) in mesh.elements().enumerate() {
        let h = iv.width();
        let jac = iv.jacobian();
        let mut local = vec![0.0; m * m]; // row = test, column = trial
        let mut load = vec![0.0; m];

        // ε₁(D u, D v): D = diag((2k+1)/h) B with B the weak-derivative moments
        for k in 0..p {
            let mut row = vec![0.0; m];
            for (i, slot) in row.iter_mut().enumerate().take(k) {
                if (i + k) % 2 == 1 {
                    *slot = -2.0;
                }
            }
            row[il] = -legendre_at_minus_one(k);
            row[ir] = 1.0;
            let w = eps1 * (2 * k + 1) as f64 / h;
            for a in 0..m {
                if row[a] == 0.0 {
                    continue;
                }
                for c in 0..m {
                    local[a * m + c] += w * row[a] * row[c];
                }
            }
        }

        // volume terms at quadrature nodes
        for (t, wq) in rule.iter() {
            let x = iv.map(t);
            let (b, db, r, f) = (
                problem.b().eval(x)?,
                problem.b_prime().eval(x)?,
                problem.r().eval(x)?,
                problem.f().eval(x)?,
            );
            legendre_table(t, &mut vals, &mut ders);
            let w = wq * jac;
            for k in 0..=p {
                // convection, test k: -∫ u₀ (b P_k)'
                let dbq = db * vals[k] + b * ders[k] / jac;
                for i in 0..=p {
                    local[k * m + i] += w * (r * vals[k] * vals[i] - eps2 * vals[i] * dbq);
                }
                load[k] += w * f * vals[k];
            }
        }
        // convection boundary pairing
        let (bl, br) = (problem.b().eval(iv.a)?, problem.b().eval(iv.b)?);
        for k in 0..=p {
            local[k * m + ir] += eps2 * br;
            local[k * m + il] -= eps2 * bl * legendre_at_minus_one(k);
        }

        // stabilizers via trace-gap vectors
        let mut gap_r = vec![1.0; m];
        gap_r[il] = 0.0;
        gap_r[ir] = -1.0;
        let mut gap_l: Vec<f64> = (0..m).map(legendre_at_minus_one).collect();
        gap_l[il] = -1.0;
        gap_l[ir] = 0.0;
        let wr = sigmas[e] + eps2 * br;
        let wl = sigmas[e];
        for a in 0..m {
            for c in 0..m {
                local[a * m + c] += wr * gap_r[a] * gap_r[c] + wl * gap_l[a] * gap_l[c];
            }
        }

        let map = dofs.local_to_global(e);
        for a in 0..m {
            let Some(ga) = map[a] else { continue };
            rhs[ga] += load[a];
            for c in 0..m {
                if let Some(gc) = map[c] {
                    matrix.add(ga, gc, local[a * m + c]);
                }
            }
        }
    }

    Ok(AssembledSystem { matrix, rhs, dofs, mesh: mesh.clone(), degree: p, sigmas })
}

pub fn solve(system: &AssembledSystem) -> Result<WeakFunction, AssemblyError> {
    let x = linalg::solve_dense(&system.matrix, &system.rhs)?;
    let be = linalg::backward_error(&system.matrix, &x, &system.rhs);
    if !(be <= SOLVE_TOLERANCE) {
        return Err(AssemblyError::Inaccurate { backward_error: be });
    }
    Ok(system.dofs.scatter(&system.mesh, &x)?)
}

/// Assemble and solve in one go.
pub fn solve_problem(
    problem: &ProblemSpec,
    mesh: &Mesh,
    p: usize,
    options: &AssemblyOptions,
) -> Result<WeakFunction, AssemblyError> {
    solve(&assemble_with(problem, mesh, p, options)?)
}

/// `A_p(u, v)` evaluated term by term from the weak-space operators, without
/// forming the matrix.
pub fn bilinear_apply(
    u: &WeakFunction,
    v: &WeakFunction,
    problem: &ProblemSpec,
    sigmas: &[f64],
    quad: QuadPolicy,
) -> Result<f64, AssemblyError> {
    if u.mesh() != v.mesh() {
        return Err(WeakError::MeshMismatch.into());
    }
    if u.degree() != v.degree() {
        return Err(WeakError::DegreeMismatch { left: u.degree(), right: v.degree() }.into());
    }
    let diffusion = weak_derivative(u).inner(&weak_derivative(v))?;
    let dc = weak_convection_derivative(u, problem.b(), problem.b_prime(), quad)?;
    let v0 = weak::BrokenPoly::new(v.mesh().clone(), v.degree(), v.v0().to_vec())?;
    let convection = dc.inner(&v0)?;
    let rule = quad.rule(u.degree());
    let mut reaction = 0.0;
    for e in 0..u.mesh().num_elements() {
        let (ue, ve) = (u.element(e), v.element(e));
        let iv = u.mesh().element(e);
        for (t, w) in rule.iter() {
            let x = iv.map(t);
            reaction += w * iv.jacobian() * problem.r().eval(x)? * ue.eval_reference(t) * ve.eval_reference(t);
        }
    }
    Ok(problem.eps1() * diffusion
        + problem.eps2() * convection
        + reaction
        + stabilizer_s(u, v, sigmas)?
        + stabilizer_sc(u, v, problem.b(), problem.eps2())?)
}

/// `(f, v₀)` by quadrature.
pub fn load_apply(v: &WeakFunction, problem: &ProblemSpec, quad: QuadPolicy) -> Result<f64, AssemblyError> {
    let rule = quad.rule(v.degree());
    let mut acc = 0.0;
    for e in 0..v.mesh().num_elements() {
        let ve = v.element(e);
        let iv = v.mesh().element(e);
        for (t, w) in rule.iter() {
            acc += w * iv.jacobian() * problem.f().eval(iv.map(t))? * ve.eval_reference(t);
        }
    }
    Ok(acc)
}
