//! Exact computer algebra for affine vertex Lie algebras.
//!
//! The crate builds classical R-matrices from Lie algebra decompositions,
//! computes twisted λ-brackets through the Master formula, assembles Poisson
//! structure matrices, generates commuting Hamiltonian hierarchies from the
//! λ-bracket center, and numerically verifies closed-form solutions of the
//! resulting evolution equations.
//!
//! Modules:
//!
//! * [`diffpoly`] — the exact differential polynomial ring (jet variables,
//!   total/partial/variational derivatives, canonical text grammar);
//! * [`lambda`] — λ-polynomials, bracket tables, the Master formula, and
//!   skew/Jacobi defect computation;
//! * [`liealg`] — structure constants, bilinear forms, decompositions, and
//!   invariant-polynomial search;
//! * [`vla`] — affine vertex Lie algebras, R-matrices, twisted tables,
//!   Yang-Baxter defects, factorization data, local Lie algebra brackets;
//! * [`pva`] — Poisson structure matrices, axiom reports, center search;
//! * [`aks`] — Hamiltonian families, flows, functional brackets, involution;
//! * [`verify`] — residual checks of closed-form solutions and RK4
//!   integration with first-integral drift monitoring;
//! * [`export`] — deterministic text/LaTeX/JSON rendering and reference
//!   diffing.

// index-based loops over exact rational matrices read better than iterator
// chains for the linear algebra in this crate
#![allow(clippy::needless_range_loop)]

pub mod aks;
pub mod diffpoly;
pub mod export;
pub mod lambda;
pub mod liealg;
pub mod linalg;
pub mod pva;
pub mod verify;
pub mod vla;
