//! hp weak Galerkin finite elements for singularly perturbed
//! reaction-convection-diffusion problems
//! `-ε₁u'' + ε₂bu' + ru = f` on `(0, 1)`, `u(0) = u(1) = 0`.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// Negated comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::redundant_guards)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assembly;
pub mod expr;
pub mod linalg;
pub mod mesh;
pub mod polybasis;
pub mod problem;
pub mod verify;
pub mod weak;
