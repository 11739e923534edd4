//! Weak functions `v = (v₀, v_b)`: a polynomial of degree `p` on every element
//! plus one value per mesh node, together with the discrete weak derivative,
//! the weak convection derivative, the stabilizers and the energy norms.
//!
//! Element `e` (0-based) spans nodes `e` and `e + 1`; its outflow endpoint is
//! the right one.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{EvalError, Expr};
use crate::mesh::Mesh;
use crate::polybasis::{
    legendre_at_minus_one, legendre_table, ElementPoly, QuadPolicy, QuadRule,
};
use crate::problem::ProblemSpec;

#[derive(Clone, Debug, PartialEq)]
pub enum WeakError {
    DegreeZero,
    /// Coefficient or node vector has the wrong length for the mesh/degree.
    Shape { expected: usize, got: usize },
    MeshMismatch,
    DegreeMismatch { left: usize, right: usize },
    PenaltyCount { expected: usize, got: usize },
    Eval(EvalError),
}

impl fmt::Display for WeakError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeakError::DegreeZero => f.write_str("weak functions need degree p >= 1"),
            WeakError::Shape { expected, got } => {
                write!(f, "expected {expected} values, got {got}")
            }
            WeakError::MeshMismatch => f.write_str("weak functions live on different meshes"),
            WeakError::DegreeMismatch { left, right } => {
                write!(f, "degree mismatch: {left} vs {right}")
            }
            WeakError::PenaltyCount { expected, got } => {
                write!(f, "expected {expected} penalty parameters, got {got}")
            }
            WeakError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for WeakError {}

impl From<EvalError> for WeakError {
    fn from(e: EvalError) -> Self {
        WeakError::Eval(e)
    }
}

/// `σ_j = ε₁p²/h_j`.
pub fn default_penalties(mesh: &Mesh, p: usize, eps1: f64) -> Vec<f64> {
    let p2 = (p * p) as f64;
    mesh.widths().into_iter().map(|h| eps1 * p2 / h).collect()
}

/// Piecewise polynomial of one degree on every element of a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct BrokenPoly {
    mesh: Mesh,
    degree: usize,
    coeffs: Vec<f64>,
}

impl BrokenPoly {
    pub fn new(mesh: Mesh, degree: usize, coeffs: Vec<f64>) -> Result<Self, WeakError> {
        let expected = mesh.num_elements() * (degree + 1);
        if coeffs.len() != expected {
            return Err(WeakError::Shape { expected, got: coeffs.len() });
        }
        Ok(BrokenPoly { mesh, degree, coeffs })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn block(&self, e: usize) -> &[f64] {
        let n = self.degree + 1;
        &self.coeffs[e * n..(e + 1) * n]
    }

    pub fn element(&self, e: usize) -> ElementPoly {
        ElementPoly::new(self.mesh.element(e), self.block(e).to_vec())
    }

    pub fn eval(&self, e: usize, x: f64) -> f64 {
        self.element(e).eval(x)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        (0..self.mesh.num_elements()).map(|e| self.element(e).l2_norm_sq()).sum()
    }

    /// `(self, other)_{L²(0,1)}`, exact through the diagonal mass matrix.
    pub fn inner(&self, other: &BrokenPoly) -> Result<f64, WeakError> {
        if self.mesh != other.mesh {
            return Err(WeakError::MeshMismatch);
        }
        let mut acc = 0.0;
        for (e, iv) in self.mesh.elements().enumerate() {
            let h = iv.width();
            for (k, (a, b)) in self.block(e).iter().zip(other.block(e)).enumerate() {
                acc += a * b * h / (2 * k + 1) as f64;
            }
        }
        Ok(acc)
    }
}

/// A discrete weak function of degree `p ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakFunction {
    mesh: Mesh,
    degree: usize,
    v0: Vec<f64>,
    vb: Vec<f64>,
}

impl WeakFunction {
    pub fn new(mesh: Mesh, degree: usize, v0: Vec<f64>, vb: Vec<f64>) -> Result<Self, WeakError> {
        if degree == 0 {
            return Err(WeakError::DegreeZero);
        }
        let expected = mesh.num_elements() * (degree + 1);
        if v0.len() != expected {
            return Err(WeakError::Shape { expected, got: v0.len() });
        }
        if vb.len() != mesh.num_nodes() {
            return Err(WeakError::Shape { expected: mesh.num_nodes(), got: vb.len() });
        }
        Ok(WeakFunction { mesh, degree, v0, vb })
    }

    pub fn zero(mesh: Mesh, degree: usize) -> Result<Self, WeakError> {
        let n = mesh.num_elements() * (degree + 1);
        let nb = mesh.num_nodes();
        Self::new(mesh, degree, vec![0.0; n], vec![0.0; nb])
    }

    /// Interior part from element polynomials (raised to `degree`), node values
    /// taken from the traces so that the result is conforming. Interior nodes
    /// use the trace of the element on their left.
    pub fn conforming(mesh: Mesh, degree: usize, polys: &[ElementPoly]) -> Result<Self, WeakError> {
        if polys.len() != mesh.num_elements() {
            return Err(WeakError::Shape { expected: mesh.num_elements(), got: polys.len() });
        }
        let mut v0 = Vec::with_capacity(polys.len() * (degree + 1));
        for poly in polys {
            if poly.degree() > degree {
                return Err(WeakError::DegreeMismatch { left: poly.degree(), right: degree });
            }
            v0.extend_from_slice(poly.raised(degree).coeffs());
        }
        let mut vb = Vec::with_capacity(mesh.num_nodes());
        vb.push(polys[0].left_trace());
        vb.extend(polys.iter().map(ElementPoly::right_trace));
        Self::new(mesh, degree, v0, vb)
    }

    /// `ℐy`: elementwise interpolant of `y` with node values `y(x_j)`.
    pub fn interpolant(
        mesh: Mesh,
        degree: usize,
        y: impl Fn(f64) -> f64,
        rule: &QuadRule,
    ) -> Result<Self, WeakError> {
        if degree == 0 {
            return Err(WeakError::DegreeZero);
        }
        let mut v0 = Vec::with_capacity(mesh.num_elements() * (degree + 1));
        for iv in mesh.elements() {
            let poly = crate::polybasis::interpolate(&y, degree, iv, rule)
                .map_err(|_| WeakError::DegreeZero)?;
            v0.extend_from_slice(poly.coeffs());
        }
        let vb = mesh.nodes().iter().map(|&x| y(x)).collect();
        Self::new(mesh, degree, v0, vb)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn v0(&self) -> &[f64] {
        &self.v0
    }

    pub fn vb(&self) -> &[f64] {
        &self.vb
    }

    pub fn block(&self, e: usize) -> &[f64] {
        let n = self.degree + 1;
        &self.v0[e * n..(e + 1) * n]
    }

    pub fn element(&self, e: usize) -> ElementPoly {
        ElementPoly::new(self.mesh.element(e), self.block(e).to_vec())
    }

    /// `v₀` evaluated at a physical point inside element `e`.
    pub fn eval_interior(&self, e: usize, x: f64) -> f64 {
        self.element(e).eval(x)
    }

    /// `(v₀ - v_b)(x_e⁺)` at the left endpoint of element `e`.
    pub fn gap_left(&self, e: usize) -> f64 {
        let t: f64 = self
            .block(e)
            .iter()
            .enumerate()
            .map(|(k, c)| c * legendre_at_minus_one(k))
            .sum();
        t - self.vb[e]
    }

    /// `(v₀ - v_b)(x_{e+1}⁻)` at the right endpoint of element `e`.
    pub fn gap_right(&self, e: usize) -> f64 {
        let t: f64 = self.block(e).iter().sum();
        t - self.vb[e + 1]
    }

    /// Same function with `v_{b,0} = v_{b,N} = 0`.
    pub fn with_zero_boundary(mut self) -> Self {
        self.vb[0] = 0.0;
        let last = self.vb.len() - 1;
        self.vb[last] = 0.0;
        self
    }

    /// Zero-padded embedding into degree `degree ≥ self.degree()`.
    pub fn raised(&self, degree: usize) -> Result<Self, WeakError> {
        if degree < self.degree {
            return Err(WeakError::DegreeMismatch { left: self.degree, right: degree });
        }
        let mut v0 = Vec::with_capacity(self.mesh.num_elements() * (degree + 1));
        for e in 0..self.mesh.num_elements() {
            v0.extend_from_slice(self.block(e));
            v0.extend(core::iter::repeat_n(0.0, degree - self.degree));
        }
        Self::new(self.mesh.clone(), degree, v0, self.vb.clone())
    }

    fn check_compatible(&self, other: &WeakFunction) -> Result<(), WeakError> {
        if self.mesh != other.mesh {
            return Err(WeakError::MeshMismatch);
        }
        if self.degree != other.degree {
            return Err(WeakError::DegreeMismatch { left: self.degree, right: other.degree });
        }
        Ok(())
    }

    /// `a·self + c·other`.
    pub fn combine(&self, a: f64, other: &WeakFunction, c: f64) -> Result<Self, WeakError> {
        self.check_compatible(other)?;
        let v0 = self.v0.iter().zip(&other.v0).map(|(x, y)| a * x + c * y).collect();
        let vb = self.vb.iter().zip(&other.vb).map(|(x, y)| a * x + c * y).collect();
        Ok(WeakFunction { mesh: self.mesh.clone(), degree: self.degree, v0, vb })
    }

    pub fn scaled(&self, a: f64) -> Self {
        WeakFunction {
            mesh: self.mesh.clone(),
            degree: self.degree,
            v0: self.v0.iter().map(|x| a * x).collect(),
            vb: self.vb.iter().map(|x| a * x).collect(),
        }
    }

    /// `self - other`, raising the lower-degree operand first.
    pub fn difference(&self, other: &WeakFunction) -> Result<Self, WeakError> {
        let q = self.degree.max(other.degree);
        self.raised(q)?.combine(1.0, &other.raised(q)?, -1.0)
    }

    /// Largest absolute coefficient or node value.
    pub fn max_abs(&self) -> f64 {
        self.v0.iter().chain(&self.vb).fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }
}

/// `D_q v ∈ W_q`: on each element the `q`-degree polynomial with
/// `∫ D q' = -∫ v₀ q' + v_{b,R} q'(x_R) - v_{b,L} q'(x_L)` for all tests of
/// degree `≤ q`. Exact (no quadrature).
pub fn weak_derivative_of_degree(v: &WeakFunction, q: usize) -> BrokenPoly {
    let mesh = v.mesh();
    let mut coeffs = Vec::with_capacity(mesh.num_elements() * (q + 1));
    for (e, iv) in mesh.elements().enumerate() {
        let c = v.block(e);
        let (vl, vr) = (v.vb[e], v.vb[e + 1]);
        let h = iv.width();
        // running sums of c_i over even / odd i below k
        let (mut even, mut odd) = (0.0, 0.0);
        for k in 0..=q {
            // ∫ P_i P_k' dt = 2 for i < k with i + k odd
            let interior = if k % 2 == 0 { odd } else { even };
            let rhs = -2.0 * interior + vr - legendre_at_minus_one(k) * vl;
            coeffs.push(rhs * (2 * k + 1) as f64 / h);
            if let Some(&ck) = c.get(k) {
                if k % 2 == 0 {
                    even += ck;
                } else {
                    odd += ck;
                }
            }
        }
    }
    BrokenPoly { mesh: mesh.clone(), degree: q, coeffs }
}

/// `D_{p-1} v`.
pub fn weak_derivative(v: &WeakFunction) -> BrokenPoly {
    weak_derivative_of_degree(v, v.degree() - 1)
}

/// `D^c_p v ∈ W_p`: on each element the degree-`p` polynomial with
/// `∫ D^c q = -∫ v₀ (bq)' + v_{b,R}(bq)(x_R) - v_{b,L}(bq)(x_L)` for all
/// `q ∈ ℙ_p`. The volume term uses `(bq)' = b'q + bq'` at quadrature nodes.
pub fn weak_convection_derivative(
    v: &WeakFunction,
    b: &Expr,
    b_prime: &Expr,
    quad: QuadPolicy,
) -> Result<BrokenPoly, EvalError> {
    let p = v.degree();
    let mesh = v.mesh();
    let rule = quad.rule(p);
    let mut vals = vec![0.0; p + 1];
    let mut ders = vec![0.0; p + 1];
    let mut coeffs = Vec::with_capacity(mesh.num_elements() * (p + 1));
    for (e, iv) in mesh.elements().enumerate() {
        let c = v.block(e);
        let jac = iv.jacobian();
        let mut rhs = vec![0.0; p + 1];
        for (t, w) in rule.iter() {
            let x = iv.map(t);
            let (bx, dbx) = (b.eval(x)?, b_prime.eval(x)?);
            legendre_table(t, &mut vals, &mut ders);
            let v0x: f64 = c.iter().zip(&vals).map(|(ci, pi)| ci * pi).sum();
            for k in 0..=p {
                let dbq = dbx * vals[k] + bx * ders[k] / jac;
                rhs[k] -= w * jac * v0x * dbq;
            }
        }
        let (bl, br) = (b.eval(iv.a)?, b.eval(iv.b)?);
        let h = iv.width();
        for (k, r) in rhs.iter_mut().enumerate() {
            *r += v.vb[e + 1] * br - v.vb[e] * bl * legendre_at_minus_one(k);
            coeffs.push(*r * (2 * k + 1) as f64 / h);
        }
    }
    Ok(BrokenPoly { mesh: mesh.clone(), degree: p, coeffs })
}

fn check_penalties(mesh: &Mesh, sigmas: &[f64]) -> Result<(), WeakError> {
    if sigmas.len() != mesh.num_elements() {
        return Err(WeakError::PenaltyCount { expected: mesh.num_elements(), got: sigmas.len() });
    }
    Ok(())
}

/// `S(u, v) = Σ σ_j [(u₀-u_b)(v₀-v_b)](x_j⁻) + [(u₀-u_b)(v₀-v_b)](x_{j-1}⁺)`.
pub fn stabilizer_s(u: &WeakFunction, v: &WeakFunction, sigmas: &[f64]) -> Result<f64, WeakError> {
    if u.mesh != v.mesh {
        return Err(WeakError::MeshMismatch);
    }
    check_penalties(&u.mesh, sigmas)?;
    Ok(sigmas
        .iter()
        .enumerate()
        .map(|(e, s)| s * (u.gap_right(e) * v.gap_right(e) + u.gap_left(e) * v.gap_left(e)))
        .sum())
}

/// `S_c(u, v) = Σ ε₂ b(x_j) [(u₀-u_b)(v₀-v_b)](x_j⁻)`, outflow endpoints only.
pub fn stabilizer_sc(u: &WeakFunction, v: &WeakFunction, b: &Expr, eps2: f64) -> Result<f64, WeakError> {
    if u.mesh != v.mesh {
        return Err(WeakError::MeshMismatch);
    }
    let mut acc = 0.0;
    for (e, iv) in u.mesh.elements().enumerate() {
        acc += eps2 * b.eval(iv.b)? * u.gap_right(e) * v.gap_right(e);
    }
    Ok(acc)
}

/// `|v|_J² = Σ w_j ε₂ b(x_j) (v₀-v_b)(x_j⁻)²` with `w_N = 1/2`, else 1.
pub fn jump_seminorm_sq(v: &WeakFunction, b: &Expr, eps2: f64) -> Result<f64, EvalError> {
    let n = v.mesh.num_elements();
    let mut acc = 0.0;
    for (e, iv) in v.mesh.elements().enumerate() {
        let w = if e + 1 == n { 0.5 } else { 1.0 };
        let g = v.gap_right(e);
        acc += w * eps2 * b.eval(iv.b)? * g * g;
    }
    Ok(acc)
}

pub fn jump_seminorm(v: &WeakFunction, b: &Expr, eps2: f64) -> Result<f64, EvalError> {
    Ok(libm::sqrt(jump_seminorm_sq(v, b, eps2)?))
}

/// `S(v,v) + S_c(v,v) + |v|_J²`, shared by both norms.
fn trace_terms(v: &WeakFunction, problem: &ProblemSpec, sigmas: &[f64]) -> Result<f64, WeakError> {
    Ok(stabilizer_s(v, v, sigmas)?
        + stabilizer_sc(v, v, problem.b(), problem.eps2())?
        + jump_seminorm_sq(v, problem.b(), problem.eps2())?)
}

fn l2_sq(v: &WeakFunction) -> f64 {
    (0..v.mesh.num_elements()).map(|e| v.element(e).l2_norm_sq()).sum()
}

/// `⫴v⫴_p² = ε₁‖D_{p-1}v‖² + ‖v₀‖² + S(v,v) + S_c(v,v) + |v|_J²`.
pub fn norm_p_sq(v: &WeakFunction, problem: &ProblemSpec, sigmas: &[f64]) -> Result<f64, WeakError> {
    let d = weak_derivative(v);
    Ok(problem.eps1() * d.l2_norm_sq() + l2_sq(v) + trace_terms(v, problem, sigmas)?)
}

pub fn norm_p(v: &WeakFunction, problem: &ProblemSpec, sigmas: &[f64]) -> Result<f64, WeakError> {
    Ok(libm::sqrt(norm_p_sq(v, problem, sigmas)?))
}

/// `⫴v⫴² = ε₁Σ‖v₀ⱼ'‖² + ‖v₀‖² + S(v,v) + S_c(v,v) + |v|_J²`.
pub fn norm_broken_sq(v: &WeakFunction, problem: &ProblemSpec, sigmas: &[f64]) -> Result<f64, WeakError> {
    let grad: f64 = (0..v.mesh.num_elements())
        .map(|e| v.element(e).derivative().l2_norm_sq())
        .sum();
    Ok(problem.eps1() * grad + l2_sq(v) + trace_terms(v, problem, sigmas)?)
}

pub fn norm_broken(v: &WeakFunction, problem: &ProblemSpec, sigmas: &[f64]) -> Result<f64, WeakError> {
    Ok(libm::sqrt(norm_broken_sq(v, problem, sigmas)?))
}
