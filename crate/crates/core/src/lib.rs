//! Optimal transport between symmetric probability measures on the boundary
//! of a simplex and the boundary of its polar dual.
//!
//! The two spaces are `A = ∂Δ` and `B = ∂Δ∨`, where `Δ` is the `(d+1)`-dimensional
//! simplex with vertices `m_i = (d+2)e_i − (1,…,1)` in the hyperplane `Σx = 0`,
//! and `Δ∨` is its polar. Both carry an action of the permutation group
//! `S_{d+2}`, and the transport cost is the canonical pairing `⟨m, n⟩`.
//!
//! The crate is organised around that problem:
//!
//! | module        | contents |
//! |---------------|----------|
//! | [`geometry`]  | barycentric coordinates, strata labels, affine charts, grids |
//! | [`symmetry`]  | the `S_{d+2}` action, orbits, stabilizers, symmetrization |
//! | [`ctransform`]| c-transforms, c-convex projection, chart potentials and gradients |
//! | [`solver`]    | discrete measures, an exact transportation solver, dual descent, entropic scaling |
//! | [`diagnostics`] | stratum census and the regularity checks for solved instances |
//! | [`metric`]    | Hessian metrics in charts, geodesic graphs, distance bounds, completion probes |
//! | [`appendix`]  | the piecewise-constant convex family with short Riemannian length |
//!
//! The core is `no_std` (with `alloc`); everything here is pure computation.
//! File formats, configuration and the command line live in the companion
//! `otlab-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod appendix;
pub mod ctransform;
pub mod diagnostics;
pub mod geometry;
pub mod metric;
pub mod numeric;
pub mod solver;
pub mod symmetry;
pub mod tol;

pub use geometry::{AmbientVector, CellLabel, Chart, ChartKind, Grid, Side, SimplexPoint};
pub use symmetry::Permutation;
