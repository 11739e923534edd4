//! Numerical evaluation of the hp interpolation and L² projection error
//! bounds for smooth test functions.

use alloc::vec::Vec;

use crate::polybasis::{gauss_rule, interpolate, l2_project, Interval};

/// Number of Gauss points used for the error and seminorm integrals.
const NORM_POINTS: usize = 48;

/// Smooth test functions with closed-form derivatives of every order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestFunction {
    SinPi,
    Exp,
}

impl TestFunction {
    pub const ALL: [TestFunction; 2] = [TestFunction::SinPi, TestFunction::Exp];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::SinPi => "sin(pi*x)",
            TestFunction::Exp => "exp(x)",
        }
    }

    /// `y⁽ᵐ⁾(x)`.
    pub fn derivative(self, m: usize, x: f64) -> f64 {
        match self {
            TestFunction::SinPi => {
                let pi = core::f64::consts::PI;
                libm::pow(pi, m as f64) * libm::sin(pi * x + m as f64 * 0.5 * pi)
            }
            TestFunction::Exp => libm::exp(x),
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `|y|_{m,I}² = ∫ (y⁽ᵐ⁾)²`.
    pub fn seminorm_sq(self, m: usize, iv: Interval) -> f64 {
        gauss_rule(NORM_POINTS).integrate_on(iv, |x| {
            let d = self.derivative(m, x);
            d * d
        })
    }
}

/// `n!` as a float; exact for `n ≤ 22`.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// `|y - ℐy|₁ ≤ (h/2)^s [(p-s)!/(p+s)!]^{1/2} |y|_{s+1}`, `0 ≤ s ≤ p`.
    InterpolantSeminorm,
    /// The same right-hand side against `|y - ℐy|₁ + p‖y - ℐy‖₀`.
    InterpolantSum,
    /// `‖y - Π_p y‖₀² ≤ (h/2)^{2s} (p+1-s)!/(p+1+s)! |y|_s²`, `0 ≤ s ≤ p+1`.
    ProjectionL2,
    /// `|(y - Π_p y)(a|b)|² ≤ (h/2)^{2s}/(2p+1) (p+1-s)!/(p+1+s)! |y|_s²`,
    /// `0 ≤ s ≤ p+1`.
    ProjectionEndpoint,
    /// `|(y - Π_p y)(a|b)|² ≤ (h/2)^{2s+1}/(2p+1) (p-s)!/(p+s)! |y|_{s+1}²`,
    /// `0 ≤ s ≤ p`.
    ProjectionEndpointShifted,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::InterpolantSeminorm => "interpolant H1 seminorm",
            BoundKind::InterpolantSum => "interpolant H1 + p*L2",
            BoundKind::ProjectionL2 => "projection L2",
            BoundKind::ProjectionEndpoint => "projection endpoint",
            BoundKind::ProjectionEndpointShifted => "projection endpoint (shifted index)",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundSample {
    pub kind: BoundKind,
    pub function: TestFunction,
    pub interval: Interval,
    pub p: usize,
    pub s: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundSample {
    pub fn ratio(&self) -> f64 {
        if self.rhs > 0.0 {
            self.lhs / self.rhs
        } else if self.lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// `lhs ≤ rhs · (1 + rel_tol)`.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel_tol)
    }
}

/// Evaluates `kind` for every `p` in `p_values` and every admissible `s`.
pub fn bound_samples(kind: BoundKind, y: TestFunction, iv: Interval, p_values: &[usize]) -> Vec<BoundSample> {
    let rule = gauss_rule(NORM_POINTS);
    let half = 0.5 * iv.width();
    let mut out = Vec::new();
    for &p in p_values {
        let (lhs, s_max) = match kind {
            BoundKind::InterpolantSeminorm | BoundKind::InterpolantSum => {
                let Ok(ip) = interpolate(|x| y.eval(x), p, iv, &rule) else {
                    continue;
                };
                let dip = ip.derivative();
                let semi = rule.integrate_on(iv, |x| {
                    let d = y.derivative(1, x) - dip.eval(x);
                    d * d
                });
                let l2 = rule.integrate_on(iv, |x| {
                    let d = y.eval(x) - ip.eval(x);
                    d * d
                });
                let lhs = if kind == BoundKind::InterpolantSum {
                    libm::sqrt(semi) + p as f64 * libm::sqrt(l2)
                } else {
                    libm::sqrt(semi)
                };
                (lhs, p)
            }
            BoundKind::ProjectionL2 => {
                let proj = l2_project(|x| y.eval(x), p, iv, &rule);
                let l2 = rule.integrate_on(iv, |x| {
                    let d = y.eval(x) - proj.eval(x);
                    d * d
                });
                (l2, p + 1)
            }
            BoundKind::ProjectionEndpoint | BoundKind::ProjectionEndpointShifted => {
                let proj = l2_project(|x| y.eval(x), p, iv, &rule);
                let left = y.eval(iv.a) - proj.left_trace();
                let right = y.eval(iv.b) - proj.right_trace();
                let s_max = if kind == BoundKind::ProjectionEndpoint { p + 1 } else { p };
                ((left * left).max(right * right), s_max)
            }
        };
        for s in 0..=s_max {
            let rhs = match kind {
                BoundKind::InterpolantSeminorm | BoundKind::InterpolantSum => {
                    libm::pow(half, s as f64)
                        * libm::sqrt(factorial(p - s) / factorial(p + s))
                        * libm::sqrt(y.seminorm_sq(s + 1, iv))
                }
                BoundKind::ProjectionL2 => {
                    libm::pow(half, 2.0 * s as f64) * factorial(p + 1 - s) / factorial(p + 1 + s)
                        * y.seminorm_sq(s, iv)
                }
                BoundKind::ProjectionEndpoint => {
                    libm::pow(half, 2.0 * s as f64) / (2 * p + 1) as f64 * factorial(p + 1 - s)
                        / factorial(p + 1 + s)
                        * y.seminorm_sq(s, iv)
                }
                BoundKind::ProjectionEndpointShifted => {
                    libm::pow(half, 2.0 * s as f64 + 1.0) / (2 * p + 1) as f64 * factorial(p - s)
                        / factorial(p + s)
                        * y.seminorm_sq(s + 1, iv)
                }
            };
            out.push(BoundSample { kind, function: y, interval: iv, p, s, lhs, rhs });
        }
    }
    out
}

/// The intervals the bounds are exercised on: the unit interval and the
/// reference interval. On shorter intervals the high-`p` errors drop below
/// double-precision roundoff and the comparison is not resolvable.
pub fn standard_intervals() -> [Interval; 2] {
    [Interval { a: 0.0, b: 1.0 }, Interval { a: -1.0, b: 1.0 }]
}

/// Every sample of `kind` over both test functions, the standard intervals and
/// `p ≤ 10` (`p ≥ 1` for the interpolant).
pub fn all_samples(kind: BoundKind) -> Vec<BoundSample> {
    let p_min = match kind {
        BoundKind::InterpolantSeminorm | BoundKind::InterpolantSum => 1,
        _ => 0,
    };
    let ps: Vec<usize> = (p_min..=10).collect();
    let mut out = Vec::new();
    for y in TestFunction::ALL {
        for iv in standard_intervals() {
            out.extend(bound_samples(kind, y, iv, &ps));
        }
    }
    out
}

/// The sample with the largest `lhs / rhs`.
pub fn worst(samples: &[BoundSample]) -> Option<BoundSample> {
    samples.iter().copied().max_by(|a, b| a.ratio().total_cmp(&b.ratio()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seminorms_closed_form() {
        let iv = Interval { a: 0.0, b: 1.0 };
        let e = TestFunction::Exp.seminorm_sq(3, iv);
        let expect = 0.5 * (libm::exp(2.0) - 1.0);
        assert!((e - expect).abs() < 1e-13);
        let s = TestFunction::SinPi.seminorm_sq(2, iv);
        let pi = core::f64::consts::PI;
        assert!((s - 0.5 * pi.powi(4)).abs() < 1e-10);
    }

    #[test]
    fn interpolant_seminorm_holds() {
        let samples = all_samples(BoundKind::InterpolantSeminorm);
        assert!(!samples.is_empty());
        for s in &samples {
            assert!(s.holds(1e-8), "{s:?} ratio {}", s.ratio());
        }
    }

    #[test]
    fn projection_l2_holds() {
        for s in &all_samples(BoundKind::ProjectionL2) {
            assert!(s.holds(1e-8), "{s:?} ratio {}", s.ratio());
        }
    }

    #[test]
    fn projection_endpoint_shifted_holds() {
        for s in &all_samples(BoundKind::ProjectionEndpointShifted) {
            assert!(s.holds(1e-8), "{s:?} ratio {}", s.ratio());
        }
    }

    #[test]
    fn projection_endpoint_literal_has_counterexample() {
        let iv = Interval { a: -1.0, b: 1.0 };
        let samples = bound_samples(BoundKind::ProjectionEndpoint, TestFunction::Exp, iv, &[10]);
        let w = worst(&samples).unwrap();
        assert_eq!(w.s, 11);
        assert!(w.ratio() > 10.0);
    }

    #[test]
    fn interpolant_sum_has_counterexample() {
        let iv = Interval { a: 0.0, b: 1.0 };
        let samples = bound_samples(BoundKind::InterpolantSum, TestFunction::SinPi, iv, &[1]);
        assert!(samples.iter().any(|s| !s.holds(1e-8)));
    }
}
