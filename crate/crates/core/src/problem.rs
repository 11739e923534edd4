//! The continuous two-parameter problem
//! `-ε₁u'' + ε₂ b u' + r u = f` on `(0, 1)`, `u(0) = u(1) = 0`.

use alloc::string::String;
use core::fmt;

use crate::expr::{self, DiffError, EvalError, Expr, ParseError};

/// Below this the coercivity margin `r - ε₂b'/2` is accepted but flagged.
pub const GAMMA_WARN: f64 = 1e-8;
/// Default sampling resolution for assumption checks and μ minimization.
pub const DEFAULT_SAMPLES: usize = 2049;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regime {
    ConvectionDiffusion,
    ReactionConvectionDiffusion,
    ReactionDiffusion,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::ConvectionDiffusion => "CD",
            Regime::ReactionConvectionDiffusion => "RCD",
            Regime::ReactionDiffusion => "RD",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Regime dispatch for the mesh builder.
///
/// Convection-diffusion iff `ε₂ > 0.9`; otherwise reaction-convection-diffusion
/// iff `ε₁ ≤ ε₂²/10`; otherwise reaction-diffusion.
pub fn classify_regime(eps1: f64, eps2: f64) -> Regime {
    if eps2 > 0.9 {
        Regime::ConvectionDiffusion
    } else if eps1 <= eps2 * eps2 / 10.0 {
        Regime::ReactionConvectionDiffusion
    } else {
        Regime::ReactionDiffusion
    }
}

/// Layer scales `μ₀ ≤ μ₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuPair {
    pub mu0: f64,
    pub mu1: f64,
}

/// Pointwise characteristic-root magnitudes at one `x`.
///
/// `μ₀` uses the rationalized form `2r / (ε₂b + √(ε₂²b² + 4ε₁r))`, which avoids
/// cancellation when `ε₂²b² ≫ ε₁r`.
pub fn mu_at(eps1: f64, eps2: f64, b: f64, r: f64) -> (f64, f64) {
    let cb = eps2 * b;
    let root = libm::sqrt(cb * cb + 4.0 * eps1 * r);
    let mu0 = if cb + root > 0.0 { 2.0 * r / (cb + root) } else { 0.0 };
    let mu1 = (cb + root) / (2.0 * eps1);
    (mu0, mu1)
}

/// `μ₀, μ₁` as minima over `[0, 1]` of the pointwise roots, by sampling on a
/// uniform grid of `samples` points with one refinement pass around each
/// argmin.
pub fn mu_pair(
    eps1: f64,
    eps2: f64,
    samples: usize,
    mut coeffs: impl FnMut(f64) -> Result<(f64, f64), EvalError>,
) -> Result<MuPair, EvalError> {
    let samples = samples.max(2);
    let step = 1.0 / (samples - 1) as f64;
    let mut best0 = (f64::INFINITY, 0.0);
    let mut best1 = (f64::INFINITY, 0.0);
    let mut eval = |x: f64, best0: &mut (f64, f64), best1: &mut (f64, f64)| {
        let (b, r) = coeffs(x)?;
        let (m0, m1) = mu_at(eps1, eps2, b, r);
        if m0 < best0.0 {
            *best0 = (m0, x);
        }
        if m1 < best1.0 {
            *best1 = (m1, x);
        }
        Ok::<(), EvalError>(())
    };
    for i in 0..samples {
        eval(i as f64 * step, &mut best0, &mut best1)?;
    }
    const REFINE: usize = 64;
    for center in [best0.1, best1.1] {
        let lo = (center - step).max(0.0);
        let hi = (center + step).min(1.0);
        for i in 0..=REFINE {
            let x = lo + (hi - lo) * i as f64 / REFINE as f64;
            eval(x, &mut best0, &mut best1)?;
        }
    }
    Ok(MuPair { mu0: best0.0, mu1: best1.0 })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemError {
    EpsilonOutOfRange { name: &'static str, value: f64 },
    Parse { field: &'static str, source: ParseError },
    Derivative(DiffError),
    Eval(EvalError),
    /// A sampled assumption failed: `condition` names it, `x` is the point.
    Assumption { condition: &'static str, x: f64, value: f64 },
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::EpsilonOutOfRange { name, value } => {
                write!(f, "{name} = {value} is outside (0, 1]")
            }
            ProblemError::Parse { field, source } => write!(f, "in coefficient {field}: {source}"),
            ProblemError::Derivative(e) => write!(f, "{e}"),
            ProblemError::Eval(e) => write!(f, "{e}"),
            ProblemError::Assumption { condition, x, value } => {
                write!(f, "assumption {condition} violated at x = {x} (value {value})")
            }
        }
    }
}

impl core::error::Error for ProblemError {}

impl From<EvalError> for ProblemError {
    fn from(e: EvalError) -> Self {
        ProblemError::Eval(e)
    }
}

/// Outcome of a successful assumption check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Validation {
    /// Sampled minimum of `r - ε₂b'/2`.
    pub gamma_hat: f64,
    /// `gamma_hat` is positive but below [`GAMMA_WARN`].
    pub near_degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    eps1: f64,
    eps2: f64,
    b: Expr,
    b_prime: Expr,
    r: Expr,
    f: Expr,
}

fn check_eps(name: &'static str, value: f64) -> Result<(), ProblemError> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(ProblemError::EpsilonOutOfRange { name, value })
    }
}

impl ProblemSpec {
    pub fn new(eps1: f64, eps2: f64, b: Expr, r: Expr, f: Expr) -> Result<Self, ProblemError> {
        check_eps("eps1", eps1)?;
        check_eps("eps2", eps2)?;
        let b_prime = b.differentiate().map_err(ProblemError::Derivative)?;
        Ok(ProblemSpec { eps1, eps2, b, b_prime, r, f })
    }

    pub fn parse(eps1: f64, eps2: f64, b: &str, r: &str, f: &str) -> Result<Self, ProblemError> {
        let field = |field: &'static str, text: &str| {
            expr::parse(text).map_err(|source| ProblemError::Parse { field, source })
        };
        Self::new(eps1, eps2, field("b", b)?, field("r", r)?, field("f", f)?)
    }

    /// `-ε₁u'' + ε₂cos(x)u' + (1+x)u = eˣ`.
    pub fn model(eps1: f64, eps2: f64) -> Result<Self, ProblemError> {
        Self::parse(eps1, eps2, "cos(x)", "1+x", "exp(x)")
    }

    pub fn with_rhs(&self, f: Expr) -> Self {
        ProblemSpec { f, ..self.clone() }
    }

    pub fn with_eps(&self, eps1: f64, eps2: f64) -> Result<Self, ProblemError> {
        check_eps("eps1", eps1)?;
        check_eps("eps2", eps2)?;
        Ok(ProblemSpec { eps1, eps2, ..self.clone() })
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    pub fn b(&self) -> &Expr {
        &self.b
    }

    pub fn b_prime(&self) -> &Expr {
        &self.b_prime
    }

    pub fn r(&self) -> &Expr {
        &self.r
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self.eps1, self.eps2)
    }

    /// Samples `b > 0`, `r ≥ 0` and `r - ε₂b'/2 > 0` on a uniform grid of
    /// `samples` points including both endpoints.
    pub fn validate(&self, samples: usize) -> Result<Validation, ProblemError> {
        let samples = samples.max(2);
        let mut gamma_hat = f64::INFINITY;
        for i in 0..samples {
            let x = i as f64 / (samples - 1) as f64;
            let b = self.b.eval(x)?;
            if !(b > 0.0) {
                return Err(ProblemError::Assumption { condition: "b > 0", x, value: b });
            }
            let r = self.r.eval(x)?;
            if !(r >= 0.0) {
                return Err(ProblemError::Assumption { condition: "r >= 0", x, value: r });
            }
            let margin = r - 0.5 * self.eps2 * self.b_prime.eval(x)?;
            if !(margin > 0.0) {
                return Err(ProblemError::Assumption {
                    condition: "r - eps2*b'/2 > 0",
                    x,
                    value: margin,
                });
            }
            gamma_hat = gamma_hat.min(margin);
        }
        Ok(Validation { gamma_hat, near_degenerate: gamma_hat < GAMMA_WARN })
    }

    pub fn compute_mu(&self, samples: usize) -> Result<MuPair, ProblemError> {
        Ok(mu_pair(self.eps1, self.eps2, samples, |x| Ok((self.b.eval(x)?, self.r.eval(x)?)))?)
    }

    /// Short human-readable description, e.g. for CSV metadata.
    pub fn describe(&self) -> String {
        alloc::format!(
            "eps1={:?} eps2={:?} b={} r={} f={}",
            self.eps1, self.eps2, self.b, self.r, self.f
        )
    }
}
