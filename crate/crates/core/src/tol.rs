//! Central tolerance constants.
//!
//! Thresholds used across the crate are named here rather than scattered as
//! magic numbers. Anything tied to a grid resolution (tie tolerances for
//! stratum labels of solver images, argmax cluster diameters, collar widths)
//! is *not* a constant; those are derived from the grid spacing at the call
//! site and live in the relevant config structs.

/// Invariant checks that should hold to machine precision after a handful of
/// exact-in-spirit operations: barycentric sums, weight normalization,
/// symmetry residuals of orbit-averaged data.
pub const EXACT: f64 = 1e-12;

/// Round trips through an affine chart and back (one solve, one matrix-vector
/// product). Slightly looser than [`EXACT`] to absorb the extra rounding.
pub const ROUND_TRIP: f64 = 1e-10;

/// Relative duality-gap bound certifying an exact transportation solve.
pub const DUALITY_GAP: f64 = 1e-9;

/// Marginal mismatch allowed in a coupling, relative to total mass one.
pub const MARGINAL: f64 = 1e-9;

/// Two potentials that should differ by an additive constant only:
/// max − min of their difference.
pub const GAUGE: f64 = 1e-8;

/// Target accuracy of the dual-descent solver relative to the exact optimum.
pub const DUAL_DESCENT: f64 = 1e-6;

/// Margin below the running maximum within which a target point is counted
/// as attaining a c-transform maximum. Pairings are O(d), so this is an
/// absolute threshold on values of order one.
pub const ARGMAX_TIE: f64 = 1e-9;

/// Guard band for comparisons that had to leave rational arithmetic
/// (irrational powers in the interval-bound verification).
pub const FLOAT_GUARD: f64 = 1e-12;
