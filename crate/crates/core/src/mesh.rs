//! Meshes on `(0, 1)` and the spectral boundary layer construction.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::polybasis::Interval;
use crate::problem::{MuPair, Regime};

/// Interior nodes closer than this to an endpoint collapse the mesh to `{0, 1}`.
const DEGENERATE_GAP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum MeshError {
    TooFewNodes(usize),
    BadEndpoints { first: f64, last: f64 },
    NotIncreasing { index: usize },
}

impl fmt::Display for MeshError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshError::TooFewNodes(n) => write!(f, "a mesh needs at least 2 nodes, got {n}"),
            MeshError::BadEndpoints { first, last } => {
                write!(f, "mesh must start at 0 and end at 1, got {first} .. {last}")
            }
            MeshError::NotIncreasing { index } => {
                write!(f, "mesh nodes not strictly increasing at index {index}")
            }
        }
    }
}

impl core::error::Error for MeshError {}

/// Strictly increasing nodes `0 = x₀ < … < x_N = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
}

impl Mesh {
    pub fn new(nodes: Vec<f64>) -> Result<Self, MeshError> {
        if nodes.len() < 2 {
            return Err(MeshError::TooFewNodes(nodes.len()));
        }
        let (first, last) = (nodes[0], nodes[nodes.len() - 1]);
        if first != 0.0 || last != 1.0 {
            return Err(MeshError::BadEndpoints { first, last });
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(MeshError::NotIncreasing { index: i + 1 });
        }
        Ok(Mesh { nodes })
    }

    pub fn single() -> Self {
        Mesh { nodes: vec![0.0, 1.0] }
    }

    pub fn uniform(n: usize) -> Self {
        let n = n.max(1);
        let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        nodes[n] = 1.0;
        Mesh { nodes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn num_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Element `j` (0-based) spans `(x_j, x_{j+1})`.
    pub fn element(&self, j: usize) -> Interval {
        Interval { a: self.nodes[j], b: self.nodes[j + 1] }
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = Interval> + '_ {
        self.nodes.windows(2).map(|w| Interval { a: w[0], b: w[1] })
    }

    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// An arbitrary user mesh; same validation as [`Mesh::new`].
pub fn user_mesh(nodes: &[f64]) -> Result<Mesh, MeshError> {
    Mesh::new(nodes.to_vec())
}

fn layered(interior: &[f64]) -> Mesh {
    let ok = interior.iter().all(|&x| x > DEGENERATE_GAP && x < 1.0 - DEGENERATE_GAP)
        && interior.windows(2).all(|w| w[0] < w[1]);
    if !ok {
        return Mesh::single();
    }
    let mut nodes = Vec::with_capacity(interior.len() + 2);
    nodes.push(0.0);
    nodes.extend_from_slice(interior);
    nodes.push(1.0);
    Mesh { nodes }
}

/// Spectral boundary layer mesh for degree `p`.
///
/// Layer elements have width `κp` times the layer scale of the regime:
/// `1/μ₀` and `1/μ₁` for reaction-convection-diffusion, `√ε₁` on both sides for
/// reaction-diffusion, and `ε₁` at the outflow for convection-diffusion. The
/// layered mesh is used when every layer width is at most `1/4` (three
/// elements) or `1/2` (the two-element convection-diffusion mesh); otherwise
/// the mesh is the single element `{0, 1}`.
pub fn build_sbl_mesh(regime: Regime, kappa: f64, p: usize, mu: MuPair, eps1: f64, eps2: f64) -> Mesh {
    let _ = eps2; // the layer widths are fully determined by μ and ε₁
    let kp = kappa * p as f64;
    match regime {
        Regime::ReactionConvectionDiffusion => {
            let left = kp / mu.mu0;
            let right = kp / mu.mu1;
            if left <= 0.25 && right <= 0.25 {
                layered(&[left, 1.0 - right])
            } else {
                Mesh::single()
            }
        }
        Regime::ReactionDiffusion => {
            let w = kp * libm::sqrt(eps1);
            if w <= 0.25 {
                layered(&[w, 1.0 - w])
            } else {
                Mesh::single()
            }
        }
        Regime::ConvectionDiffusion => {
            let w = kp * eps1;
            if w <= 0.5 {
                layered(&[1.0 - w])
            } else {
                Mesh::single()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rcd_example() {
        let m = build_sbl_mesh(
            Regime::ReactionConvectionDiffusion,
            1.0,
            4,
            MuPair { mu0: 100.0, mu1: 1e4 },
            1e-6,
            1e-2,
        );
        assert_eq!(m.nodes(), &[0.0, 0.04, 0.9996, 1.0]);
    }

    #[test]
    fn cd_falls_back_to_single_element() {
        let mu = MuPair { mu0: 1.0, mu1: 5.0 };
        let m = build_sbl_mesh(Regime::ConvectionDiffusion, 1.0, 4, mu, 0.2, 1.0);
        assert_eq!(m.nodes(), &[0.0, 1.0]);
        let m = build_sbl_mesh(Regime::ConvectionDiffusion, 1.0, 4, mu, 0.01, 1.0);
        assert_eq!(m.nodes(), &[0.0, 0.96, 1.0]);
    }

    #[test]
    fn rd_example() {
        let mu = MuPair { mu0: 100.0, mu1: 100.0 };
        let m = build_sbl_mesh(Regime::ReactionDiffusion, 1.0, 2, mu, 1e-4, 1e-5);
        assert_eq!(m.nodes(), &[0.0, 0.02, 0.98, 1.0]);
    }

    #[test]
    fn degenerate_interior_nodes_collapse() {
        let mu = MuPair { mu0: 1e20, mu1: 1e20 };
        let m = build_sbl_mesh(Regime::ReactionConvectionDiffusion, 1.0, 1, mu, 1e-12, 1e-3);
        assert_eq!(m.num_elements(), 1);
    }

    #[test]
    fn user_meshes() {
        assert_eq!(user_mesh(&[0.0, 0.5, 1.0]).unwrap().num_elements(), 2);
        assert_eq!(user_mesh(&[0.0, 1.0]).unwrap().num_elements(), 1);
        assert_eq!(user_mesh(&[0.0, 0.5, 0.5, 1.0]), Err(MeshError::NotIncreasing { index: 2 }));
        assert!(matches!(user_mesh(&[0.1, 1.0]), Err(MeshError::BadEndpoints { .. })));
        assert_eq!(user_mesh(&[0.0]), Err(MeshError::TooFewNodes(1)));
    }

    #[test]
    fn widths_sum_to_one() {
        let m = user_mesh(&[0.0, 0.013, 0.5, 0.9996, 1.0]).unwrap();
        let s: f64 = m.widths().iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }
}
