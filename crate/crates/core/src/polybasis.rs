//! Legendre polynomials, Gauss–Legendre quadrature and the two element-level
//! approximation operators used throughout the solver: the L² projection and
//! the derivative-orthogonal interpolant.
//!
//! Element polynomials are stored as coefficients against the (unnormalized)
//! Legendre basis `P_k(t)`, where `t ∈ [-1, 1]` is the affine reference
//! coordinate of the element. With this choice the element mass matrix is
//! diagonal with entries `h / (2k + 1)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Returns `(P_k(t), P_k'(t))`.
pub fn legendre_eval(k: usize, t: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut d_prev = 0.0;
    if k == 0 {
        return (p_prev, d_prev);
    }
    let mut p = t;
    let mut d = 1.0;
    for n in 1..k {
        let nf = n as f64;
        let p_next = ((2.0 * nf + 1.0) * t * p - nf * p_prev) / (nf + 1.0);
        // P'_{n+1} = P'_{n-1} + (2n+1) P_n, valid at t = ±1 as well.
        let d_next = d_prev + (2.0 * nf + 1.0) * p;
        p_prev = p;
        d_prev = d;
        p = p_next;
        d = d_next;
    }
    (p, d)
}

/// Fills `vals[k] = P_k(t)` and `ders[k] = P_k'(t)` for `k < vals.len()`.
pub fn legendre_table(t: f64, vals: &mut [f64], ders: &mut [f64]) {
    let n = vals.len();
    debug_assert_eq!(n, ders.len());
    if n == 0 {
        return;
    }
    vals[0] = 1.0;
    ders[0] = 0.0;
    if n == 1 {
        return;
    }
    vals[1] = t;
    ders[1] = 1.0;
    for k in 1..n - 1 {
        let kf = k as f64;
        vals[k + 1] = ((2.0 * kf + 1.0) * t * vals[k] - kf * vals[k - 1]) / (kf + 1.0);
        ders[k + 1] = ders[k - 1] + (2.0 * kf + 1.0) * vals[k];
    }
}

/// `P_k(-1)`.
#[inline]
pub fn legendre_at_minus_one(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Integral over `[-1, 1]`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.iter().map(|(t, w)| w * f(t)).sum()
    }

    /// Integral over `interval`, with `f` taking physical coordinates.
    pub fn integrate_on(&self, interval: Interval, mut f: impl FnMut(f64) -> f64) -> f64 {
        let jac = interval.jacobian();
        self.iter().map(|(t, w)| w * jac * f(interval.map(t))).sum()
    }
}

/// `n`-point Gauss–Legendre rule.
///
/// Nodes are the roots of `P_n`, located by safeguarded Newton iteration
/// inside the brackets `θ_ν ∈ ((ν - 1/2)π/(n + 1/2), νπ/(n + 1/2))`, starting
/// from the Chebyshev-like guess in the middle of each bracket. A Newton step
/// that leaves its bracket is replaced by bisection.
///
/// # Panics
///
/// Panics if `n == 0`.
pub fn gauss_rule(n: usize) -> QuadRule {
    assert!(n >= 1, "a Gauss rule needs at least one point");
    let nf = n as f64;
    let half = n / 2;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let denom = nf + 0.5;
    for nu in 1..=half {
        let nuf = nu as f64;
        // cos is decreasing on (0, π), so the bracket in t is [lo, hi].
        let mut lo = libm::cos(nuf * core::f64::consts::PI / denom);
        let mut hi = libm::cos((nuf - 0.5) * core::f64::consts::PI / denom);
        let mut t = libm::cos((nuf - 0.25) * core::f64::consts::PI / denom);
        let sign_lo = legendre_eval(n, lo).0.signum();
        for _ in 0..100 {
            let (p, dp) = legendre_eval(n, t);
            if p == 0.0 {
                break;
            }
            if p.signum() == sign_lo {
                lo = t;
            } else {
                hi = t;
            }
            let mut next = t - p / dp;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = libm::fabs(next - t) <= 4.0 * f64::EPSILON * libm::fabs(t).max(1e-300);
            t = next;
            if done {
                break;
            }
        }
        let dp = legendre_eval(n, t).1;
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        // ascending order: negative mirror first
        nodes[nu - 1] = -t;
        weights[nu - 1] = w;
        nodes[n - nu] = t;
        weights[n - nu] = w;
    }
    if n % 2 == 1 {
        let dp = legendre_eval(n, 0.0).1;
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    QuadRule { nodes, weights }
}

/// How many quadrature points to spend on a degree-`p` element integral.
///
/// The default is `p + 6`; `doubled` multiplies that by two so results can be
/// compared for quadrature independence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QuadPolicy {
    pub doubled: bool,
}

impl QuadPolicy {
    pub const EXTRA_POINTS: usize = 6;

    pub fn doubled() -> Self {
        QuadPolicy { doubled: true }
    }

    pub fn points(&self, p: usize) -> usize {
        let n = p + Self::EXTRA_POINTS;
        if self.doubled {
            2 * n
        } else {
            n
        }
    }

    pub fn rule(&self, p: usize) -> QuadRule {
        gauss_rule(self.points(p))
    }
}

/// An open interval `(a, b)` with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self, BasisError> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(BasisError::EmptyInterval { a, b });
        }
        Ok(Interval { a, b })
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// `dx/dt`.
    pub fn jacobian(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    /// Reference coordinate `t ∈ [-1, 1]` to physical `x`.
    pub fn map(&self, t: f64) -> f64 {
        0.5 * (self.a + self.b) + 0.5 * (self.b - self.a) * t
    }

    pub fn to_reference(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisError {
    EmptyInterval { a: f64, b: f64 },
    /// The interpolant needs two endpoint conditions, impossible in ℙ₀.
    InterpolantDegreeZero,
}

impl fmt::Display for BasisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisError::EmptyInterval { a, b } => write!(f, "interval ({a}, {b}) is empty"),
            BasisError::InterpolantDegreeZero => {
                f.write_str("interpolant requires degree p >= 1")
            }
        }
    }
}

impl core::error::Error for BasisError {}

/// Polynomial on one element, in the Legendre basis of the mapped interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementPoly {
    interval: Interval,
    coeffs: Vec<f64>,
}

impl ElementPoly {
    /// `coeffs.len() - 1` is the degree; an empty slice is treated as the zero
    /// constant.
    pub fn new(interval: Interval, coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        ElementPoly { interval, coeffs }
    }

    pub fn zero(interval: Interval, degree: usize) -> Self {
        ElementPoly { interval, coeffs: vec![0.0; degree + 1] }
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn eval_reference(&self, t: f64) -> f64 {
        eval_series(&self.coeffs, t)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_reference(self.interval.to_reference(x))
    }

    /// Value at `a⁺`, exact.
    pub fn left_trace(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * legendre_at_minus_one(k))
            .sum()
    }

    /// Value at `b⁻`, exact.
    pub fn right_trace(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// d/dx, one degree lower (degree 0 stays at degree 0 with a zero value).
    pub fn derivative(&self) -> ElementPoly {
        let mut d = derivative_coeffs(&self.coeffs);
        let scale = 1.0 / self.interval.jacobian();
        d.iter_mut().for_each(|c| *c *= scale);
        ElementPoly::new(self.interval, d)
    }

    /// `‖·‖²_{0,(a,b)}` from the diagonal mass matrix.
    pub fn l2_norm_sq(&self) -> f64 {
        let h = self.interval.width();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * c * h / (2 * k + 1) as f64)
            .sum()
    }

    /// Zero-padded copy at a higher degree.
    pub fn raised(&self, degree: usize) -> ElementPoly {
        let mut c = self.coeffs.clone();
        if c.len() < degree + 1 {
            c.resize(degree + 1, 0.0);
        }
        ElementPoly::new(self.interval, c)
    }
}

/// Clenshaw-free evaluation; degrees stay small enough that the plain
/// recurrence is accurate.
pub fn eval_series(coeffs: &[f64], t: f64) -> f64 {
    let mut p_prev = 1.0;
    let mut acc = coeffs.first().copied().unwrap_or(0.0);
    if coeffs.len() < 2 {
        return acc;
    }
    let mut p = t;
    acc += coeffs[1] * t;
    for (n, c) in coeffs.iter().enumerate().skip(2) {
        let nf = (n - 1) as f64;
        let next = ((2.0 * nf + 1.0) * t * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
        acc += c * p;
    }
    acc
}

/// Legendre coefficients of d/dt of the series with coefficients `c`.
pub fn derivative_coeffs(c: &[f64]) -> Vec<f64> {
    let p = c.len().saturating_sub(1);
    if p == 0 {
        return vec![0.0];
    }
    let mut d = vec![0.0; p];
    // d_k = (2k+1) Σ_{j>k, j-k odd} c_j, accumulated from the top.
    let mut odd_tail = 0.0; // Σ c_j over j ≡ k+1 (mod 2), j > k
    let mut even_tail = 0.0;
    for k in (0..p).rev() {
        // j = k + 1 joins the tail with parity opposite to k.
        if (k + 1) % 2 == 0 {
            even_tail += c[k + 1];
        } else {
            odd_tail += c[k + 1];
        }
        let tail = if k % 2 == 0 { odd_tail } else { even_tail };
        d[k] = (2 * k + 1) as f64 * tail;
    }
    d
}

/// Legendre coefficients of `t ↦ ∫_{-1}^t Σ d_k P_k`.
fn antiderivative_coeffs(d: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d.len() + 1];
    for (k, &dk) in d.iter().enumerate() {
        if k == 0 {
            out[0] += dk;
            out[1] += dk;
        } else {
            let s = dk / (2 * k + 1) as f64;
            out[k + 1] += s;
            out[k - 1] -= s;
        }
    }
    out
}

/// L² projection of `y` onto ℙ_p on `interval`, integrated with `rule`.
pub fn l2_project(
    y: impl Fn(f64) -> f64,
    p: usize,
    interval: Interval,
    rule: &QuadRule,
) -> ElementPoly {
    let mut vals = vec![0.0; p + 1];
    let mut ders = vec![0.0; p + 1];
    let mut coeffs = vec![0.0; p + 1];
    for (t, w) in rule.iter() {
        let yv = y(interval.map(t));
        legendre_table(t, &mut vals, &mut ders);
        for k in 0..=p {
            coeffs[k] += w * yv * vals[k];
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= (2 * k + 1) as f64 / 2.0;
    }
    ElementPoly::new(interval, coeffs)
}

/// The interpolant `ℐy ∈ ℙ_p` matching `y` at both endpoints with
/// `∫ (ℐy - y)' q' = 0` for all `q ∈ ℙ_p`.
///
/// Built as `y(a)` plus the antiderivative of the degree-`(p-1)` Legendre
/// truncation of `y'`. The truncation coefficients are obtained after one
/// integration by parts, so only values of `y` are needed.
pub fn interpolate(
    y: impl Fn(f64) -> f64,
    p: usize,
    interval: Interval,
    rule: &QuadRule,
) -> Result<ElementPoly, BasisError> {
    if p == 0 {
        return Err(BasisError::InterpolantDegreeZero);
    }
    let ya = y(interval.a);
    let yb = y(interval.b);
    let mut vals = vec![0.0; p];
    let mut ders = vec![0.0; p];
    // ∫_{-1}^{1} ŷ P_k' dt
    let mut moments = vec![0.0; p];
    for (t, w) in rule.iter() {
        let yv = y(interval.map(t));
        legendre_table(t, &mut vals, &mut ders);
        for k in 0..p {
            moments[k] += w * yv * ders[k];
        }
    }
    let d: Vec<f64> = (0..p)
        .map(|k| {
            let boundary = yb - ya * legendre_at_minus_one(k);
            (2 * k + 1) as f64 / 2.0 * (boundary - moments[k])
        })
        .collect();
    let mut coeffs = antiderivative_coeffs(&d);
    coeffs[0] += ya;
    Ok(ElementPoly::new(interval, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::new(-1.0, 1.0).unwrap()
    }

    #[test]
    fn legendre_endpoint_values() {
        assert_eq!(legendre_eval(2, 1.0), (1.0, 3.0));
        assert_eq!(legendre_eval(0, 0.3), (1.0, 0.0));
        for k in 0..20 {
            let (v, d) = legendre_eval(k, -1.0);
            assert_eq!(v, legendre_at_minus_one(k));
            let kk = (k * (k + 1)) as f64 / 2.0;
            assert!((d - legendre_at_minus_one(k + 1) * kk).abs() < 1e-9);
        }
    }

    #[test]
    fn legendre_p5_matches_closed_form() {
        // P5(1/2) = (63/32 - 70/8 + 15/2)/8 = 23/256
        let (v, d) = legendre_eval(5, 0.5);
        assert!((v - 23.0 / 256.0).abs() < 1e-15);
        // P5'(t) = (315 t^4 - 210 t^2 + 15)/8 -> (315/16 - 210/4 + 15)/8 = -285/128
        assert!((d + 285.0 / 128.0).abs() < 1e-14);
    }

    #[test]
    fn table_matches_pointwise() {
        let mut v = [0.0; 12];
        let mut d = [0.0; 12];
        legendre_table(0.37, &mut v, &mut d);
        for k in 0..12 {
            let (a, b) = legendre_eval(k, 0.37);
            assert!((a - v[k]).abs() < 1e-15 && (b - d[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn small_gauss_rules() {
        let r1 = gauss_rule(1);
        assert_eq!(r1.nodes(), &[0.0]);
        assert_eq!(r1.weights(), &[2.0]);
        let r2 = gauss_rule(2);
        let s = 1.0 / 3f64.sqrt();
        assert!((r2.nodes()[0] + s).abs() < 1e-15 && (r2.nodes()[1] - s).abs() < 1e-15);
        assert!((r2.weights()[0] - 1.0).abs() < 1e-15 && (r2.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss6_integrates_t10() {
        let q = gauss_rule(6).integrate(|t| t.powi(10));
        assert!((q - 2.0 / 11.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_nodes_are_roots_up_to_64() {
        for n in 1..=64 {
            let r = gauss_rule(n);
            let wsum: f64 = r.weights().iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n} wsum={wsum}");
            for w in r.nodes().windows(2) {
                assert!(w[0] < w[1]);
            }
            for &t in r.nodes() {
                let (p, dp) = legendre_eval(n, t);
                assert!(p.abs() <= 8.0 * f64::EPSILON * dp.abs().max(1.0), "n={n} t={t} p={p}");
            }
        }
    }

    #[test]
    fn gauss_exactness_up_to_20() {
        for n in 1..=20 {
            let r = gauss_rule(n);
            for k in 0..2 * n {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k + 1) as f64 };
                let q = r.integrate(|t| t.powi(k as i32));
                assert!((q - exact).abs() <= 1e-12 * exact.abs().max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn derivative_and_antiderivative_invert() {
        let c = [0.3, -1.2, 0.7, 2.0, -0.1, 0.05];
        let d = derivative_coeffs(&c);
        let back = antiderivative_coeffs(&d);
        // antiderivative fixes value at -1 to zero
        let shift = eval_series(&c, -1.0);
        for t in [-0.9, -0.2, 0.4, 1.0] {
            assert!((eval_series(&back, t) - (eval_series(&c, t) - shift)).abs() < 1e-13);
        }
        // derivative vs finite difference
        let h = 1e-6;
        for t in [-0.5, 0.1, 0.8] {
            let fd = (eval_series(&c, t + h) - eval_series(&c, t - h)) / (2.0 * h);
            assert!((eval_series(&d, t) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn round_trip_through_nodal_values() {
        let iv = Interval::new(0.2, 0.7).unwrap();
        let p = 7;
        let poly = ElementPoly::new(iv, (0..=p).map(|k| 1.0 / (k + 1) as f64).collect());
        // sample at mapped Legendre roots and project back
        let rule = gauss_rule(p + 1);
        let back = l2_project(|x| poly.eval(x), p, iv, &rule);
        for (a, b) in poly.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_reproduces_and_truncates() {
        let rule = gauss_rule(10);
        let p3 = l2_project(|x| x * x * x, 3, unit(), &rule);
        // t^3 = (2/5) P3 + (3/5) P1
        let expect = [0.0, 0.6, 0.0, 0.4];
        for (a, b) in p3.coeffs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let p1 = l2_project(|x| x * x * x, 1, unit(), &rule);
        assert!(p1.coeffs()[0].abs() < 1e-15);
        assert!((p1.coeffs()[1] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn interpolant_rejects_degree_zero() {
        let rule = gauss_rule(4);
        assert_eq!(
            interpolate(|x| x, 0, unit(), &rule),
            Err(BasisError::InterpolantDegreeZero)
        );
    }

    #[test]
    fn interpolant_endpoint_conditions() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let y = |x: f64| libm::sin(core::f64::consts::PI * x);
        let i3 = interpolate(y, 3, iv, &gauss_rule(9)).unwrap();
        assert!(i3.left_trace().abs() < 1e-12);
        assert!(i3.right_trace().abs() < 1e-12);
    }

    #[test]
    fn interpolant_reproduces_polynomials() {
        let iv = Interval::new(0.3, 0.9).unwrap();
        let y = |x: f64| 2.0 - x + 3.0 * x * x * x;
        let i = interpolate(y, 4, iv, &gauss_rule(10)).unwrap();
        for k in 0..=10 {
            let x = 0.3 + 0.06 * k as f64;
            assert!((i.eval(x) - y(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn interval_rejects_degenerate() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(1.0, 0.0).is_err());
    }
}
