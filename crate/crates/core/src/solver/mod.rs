//! The transport system for discrete symmetric measures: an exact
//! transportation-simplex oracle on the orbit-reduced problem, a monotone
//! dual-descent solver for the functional `F(φ) = Σ μ φ + Σ ν φ^c`, and an
//! entropic-regularized solver with ε-scaling.
//!
//! Symmetry reduction: since the cost is invariant under the diagonal
//! group action and both marginals are symmetric, an optimal coupling can
//! be chosen G-invariant. Parallel pair-orbit arcs between a fixed source
//! orbit and target orbit share constraint rows, so only the best-gain arc
//! is ever used; the reduced problem is therefore a plain transportation
//! problem between orbits with gain `Ĉ(O, P) = max {⟨x, y⟩ : x ∈ O, y ∈ P}`
//! (equivalently `max_y ⟨x₀, y⟩` for any fixed `x₀ ∈ O`, by transitivity).
//! Lifting the reduced duals orbit-constantly gives feasible optimal duals
//! of the full problem, exactly G-invariant by construction; spreading each
//! reduced flow uniformly over the pair-orbit of its argmax pair gives a
//! feasible optimal coupling.

pub mod descent;
pub mod entropic;
pub mod quadrature;
pub mod simplex;
pub mod verify;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::ctransform::{c_transform, CtransformError, SampledPotential};
use crate::geometry::{pairing_bary, BaryExact, Grid, SimplexPoint};
use crate::symmetry::{self, Orbits, SymmetryError};
use crate::tol;

#[derive(Clone, Debug, PartialEq)]
pub enum SolverError {
    /// Total masses differ beyond tolerance.
    MarginalMismatch { mu: f64, nu: f64 },
    /// Problem size after reduction exceeds the cap; use the scaled solver.
    TooLarge { size: usize, cap: usize },
    /// A density value was zero or negative on the support.
    InvalidDensity { point: usize, value: f64 },
    /// Measure weights are not constant on orbits.
    NonSymmetricMeasure { residual: f64 },
    /// The objective increased along an iteration (a bug, not an instance).
    Internal(String),
    Symmetry(SymmetryError),
    Ctransform(CtransformError),
    Simplex(simplex::SimplexError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::MarginalMismatch { mu, nu } => {
                write!(f, "total masses differ: {mu} vs {nu}")
            }
            SolverError::TooLarge { size, cap } => {
                write!(f, "problem size {size} exceeds cap {cap}; use the scaled solver")
            }
            SolverError::InvalidDensity { point, value } => {
                write!(f, "density {value} is not positive at support point {point}")
            }
            SolverError::NonSymmetricMeasure { residual } => {
                write!(f, "measure weights are not orbit-constant (residual {residual})")
            }
            SolverError::Internal(s) => write!(f, "internal solver error: {s}"),
            SolverError::Symmetry(e) => write!(f, "{e}"),
            SolverError::Ctransform(e) => write!(f, "{e}"),
            SolverError::Simplex(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SolverError {}

impl From<SymmetryError> for SolverError {
    fn from(e: SymmetryError) -> Self {
        SolverError::Symmetry(e)
    }
}

impl From<CtransformError> for SolverError {
    fn from(e: CtransformError) -> Self {
        SolverError::Ctransform(e)
    }
}

impl From<simplex::SimplexError> for SolverError {
    fn from(e: simplex::SimplexError) -> Self {
        SolverError::Simplex(e)
    }
}

/// Where a measure's weights came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Uniform,
    UserDensity,
    DoublingTestFamily,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Uniform => write!(f, "uniform"),
            Provenance::UserDensity => write!(f, "user-density"),
            Provenance::DoublingTestFamily => write!(f, "doubling-test-family"),
        }
    }
}

/// Built-in density families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensitySpec {
    Uniform,
    /// `exp(strength · Σ_k c_k²)`: symmetric, smooth, bounded away from
    /// 0 and ∞ for any finite strength.
    DoublingTest { strength: f64 },
}

impl DensitySpec {
    pub fn evaluate(&self, p: &SimplexPoint) -> f64 {
        match self {
            DensitySpec::Uniform => 1.0,
            DensitySpec::DoublingTest { strength } => {
                let s: f64 = p.bary.iter().map(|&b| b * b).sum();
                (strength * s).exp()
            }
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self {
            DensitySpec::Uniform => Provenance::Uniform,
            DensitySpec::DoublingTest { .. } => Provenance::DoublingTestFamily,
        }
    }
}

/// A symmetric weighted point cloud approximating μ or ν.
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    pub grid: Arc<Grid>,
    /// Positive weights summing to one, constant on orbits.
    pub weights: Vec<f64>,
    /// Exact rational weights, available when the density is uniform
    /// (weights are then exactly the lumped cell volumes).
    pub exact_weights: Option<Vec<num_rational::Ratio<i64>>>,
    pub provenance: Provenance,
}

impl DiscreteMeasure {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Mass per orbit.
    pub fn orbit_masses(&self, orbits: &Orbits) -> Vec<f64> {
        orbits
            .members
            .iter()
            .map(|ids| ids.iter().map(|&i| self.weights[i]).sum())
            .collect()
    }
}

/// Quadrature measure: weights ∝ density × lumped cell volume, normalized
/// and orbit-averaged.
pub fn make_measure(
    spec: &DensitySpec,
    grid: &Arc<Grid>,
    orbits: &Orbits,
) -> Result<DiscreteMeasure, SolverError> {
    let spec = *spec;
    let provenance = spec.provenance();
    let mut m = make_measure_with(|p| spec.evaluate(p), grid, orbits, provenance)?;
    if matches!(spec, DensitySpec::Uniform) {
        // Uniform weights are exactly the cell volumes (the triangulation
        // is equivariant, so no symmetrization error arises).
        m.exact_weights = quadrature::cell_volumes(grid);
    }
    Ok(m)
}

/// Quadrature measure for an arbitrary density. Rejects nonpositive
/// density values on the support.
pub fn make_measure_with(
    density: impl Fn(&SimplexPoint) -> f64,
    grid: &Arc<Grid>,
    orbits: &Orbits,
    provenance: Provenance,
) -> Result<DiscreteMeasure, SolverError> {
    let volumes = quadrature::cell_volumes(grid)
        .ok_or_else(|| SolverError::Internal(String::from("grid is not a full-side grid")))?;
    let mut weights = Vec::with_capacity(grid.len());
    for (id, vol) in volumes.iter().enumerate() {
        let p = grid.point(id);
        let dens = density(&p);
        if !(dens > 0.0) {
            return Err(SolverError::InvalidDensity { point: id, value: dens });
        }
        weights.push(dens * (*vol.numer() as f64) / (*vol.denom() as f64));
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let weights = symmetry::symmetrize_values(orbits, &weights)?;
    let total: f64 = weights.iter().sum();
    let weights = weights.iter().map(|w| w / total).collect();
    Ok(DiscreteMeasure { grid: grid.clone(), weights, exact_weights: None, provenance })
}

/// Doubling-constant estimate of a measure on one chart: the largest ratio
/// `m(Q) / m(Q½)` over chart-plane cubes `Q` centered at support nodes,
/// where `Q½` is the dilation of `Q` by 1/2 about its center. For Lebesgue
/// measure on convex sets the constant is `2^d`; the discrete estimate
/// carries an `O(spacing / width)` counting error.
#[derive(Clone, Debug)]
pub struct DoublingReport {
    pub constant: f64,
    pub windows: usize,
    pub half_width: f64,
}

pub fn doubling_estimate(
    measure: &DiscreteMeasure,
    chart: &crate::geometry::Chart,
    half_width: f64,
) -> Result<DoublingReport, SolverError> {
    let grid = &measure.grid;
    let mut nodes: Vec<(usize, Vec<f64>)> = Vec::new();
    for (id, p) in grid.points.iter().enumerate() {
        if chart.in_named_region_exact(p) {
            let bary = p.to_floats();
            nodes.push((id, crate::geometry::chart_to_plane_unchecked(chart, &bary)));
        }
    }
    if nodes.is_empty() {
        return Err(SolverError::Internal(String::from("chart region holds no support")));
    }
    let cube_mass = |center: &[f64], w: f64| -> f64 {
        nodes
            .iter()
            .filter(|(_, x)| x.iter().zip(center).all(|(a, c)| (a - c).abs() <= w))
            .map(|(id, _)| measure.weights[*id])
            .sum()
    };
    let mut worst: f64 = 0.0;
    let mut windows = 0;
    for (_, center) in &nodes {
        let full = cube_mass(center, half_width);
        let half = cube_mass(center, half_width / 2.0);
        if half > 0.0 {
            windows += 1;
            worst = worst.max(full / half);
        }
    }
    Ok(DoublingReport { constant: worst, windows, half_width })
}

/// Gauge fixing for the dual potentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `φ = 0` at the lexicographically least representative of the vertex
    /// orbit (the vertex `e_{d+1}`).
    VertexZero,
    /// μ-mean of φ is zero.
    MeanZero,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Solve the orbit-reduced problem and lift (default); `false` runs the
    /// simplex on the full support.
    pub reduce: bool,
    pub normalization: Normalization,
    /// Cap on the per-side size of the problem actually pivoted on.
    pub size_cap: usize,
    pub pivot_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            reduce: true,
            normalization: Normalization::VertexZero,
            size_cap: 3000,
            pivot_cap: 2_000_000,
        }
    }
}

/// Optimality and consistency diagnostics of a solve.
#[derive(Clone, Debug)]
pub struct SolveDiagnostics {
    pub primal_value: f64,
    pub dual_value: f64,
    /// `dual − primal`; at most [`tol::DUALITY_GAP`] × scale for the exact
    /// solver.
    pub duality_gap: f64,
    /// Worst marginal violation of the coupling (max norm).
    pub marginal_error: f64,
    /// Worst violation of `φ(x) + ψ(y) ≥ ⟨x, y⟩` over all support pairs.
    pub feasibility_violation: f64,
    /// Max deviation of the potentials from orbit-constancy.
    pub symmetry_residual: f64,
    /// Index of the sample where the gauge was fixed.
    pub normalization_point: usize,
    pub method: &'static str,
    pub pivots: usize,
}

/// Dual potentials, a sparse coupling, and diagnostics.
#[derive(Clone, Debug)]
pub struct TransportSolution {
    pub phi: SampledPotential,
    pub psi: SampledPotential,
    /// `(source id, target id, mass)`, lexicographically ordered.
    pub coupling: Vec<(u32, u32, f64)>,
    pub diagnostics: SolveDiagnostics,
}

impl TransportSolution {
    /// Cost scale used to normalize gap tolerances: `max(1, |primal|)`.
    pub fn scale(&self) -> f64 {
        self.diagnostics.primal_value.abs().max(1.0)
    }
}

fn check_symmetric(measure: &DiscreteMeasure, orbits: &Orbits) -> Result<(), SolverError> {
    let mut worst: f64 = 0.0;
    for ids in &orbits.members {
        let w0 = measure.weights[ids[0]];
        for &i in ids {
            worst = worst.max((measure.weights[i] - w0).abs());
        }
    }
    if worst > tol::EXACT {
        return Err(SolverError::NonSymmetricMeasure { residual: worst });
    }
    Ok(())
}

fn float_points(grid: &Grid) -> Vec<Vec<f64>> {
    grid.points.iter().map(|p| p.to_floats()).collect()
}

/// The exact solver.
///
/// Maximizes `Σ π(x,y)·⟨x,y⟩` subject to the marginals, via the
/// transportation simplex on the orbit-reduced problem (or the full one
/// when `reduce` is off). The recovered duals are tightened to a
/// c-conjugate pair on the supports and gauge-fixed; exactness is
/// certified by the reported duality gap.
pub fn solve_exact(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    opts: &SolveOptions,
) -> Result<TransportSolution, SolverError> {
    let total_mu: f64 = mu.weights.iter().sum();
    let total_nu: f64 = nu.weights.iter().sum();
    if (total_mu - total_nu).abs() > tol::MARGINAL {
        return Err(SolverError::MarginalMismatch { mu: total_mu, nu: total_nu });
    }

    // Canonical orientation: pivot with the A-side measure as source. The
    // cost is symmetric, so the transposed solution solves the swapped
    // problem; without this, the two orientations can land on different
    // vertices of a degenerate optimal dual face and the exchange symmetry
    // ψ ↔ φ would only hold up to that degeneracy.
    if mu.grid.side == crate::geometry::Side::B {
        let forward = solve_exact(nu, mu, opts)?;
        return transpose_solution(forward, mu, nu, opts);
    }

    let pts_a = float_points(&mu.grid);
    let pts_b = float_points(&nu.grid);

    if opts.reduce {
        let orb_a = symmetry::grid_orbits(&mu.grid)?;
        let orb_b = symmetry::grid_orbits(&nu.grid)?;
        check_symmetric(mu, &orb_a)?;
        check_symmetric(nu, &orb_b)?;
        let (ma, nb) = (orb_a.count(), orb_b.count());
        if ma.max(nb) > opts.size_cap {
            return Err(SolverError::TooLarge { size: ma.max(nb), cap: opts.size_cap });
        }

        let sup = mu.orbit_masses(&orb_a);
        let mut dem = nu.orbit_masses(&orb_b);
        rebalance(&sup, &mut dem);

        // Reduced gains and, per pair of orbits, the lexicographically
        // least argmax target for the lifted coupling.
        let mut gain = vec![0.0_f64; ma * nb];
        let mut arg: Vec<usize> = vec![0; ma * nb];
        for (oi, &rep) in orb_a.rep.iter().enumerate() {
            let x = &pts_a[rep];
            for (oj, members) in orb_b.members.iter().enumerate() {
                let mut best = f64::NEG_INFINITY;
                let mut best_id = usize::MAX;
                for &y_id in members {
                    let v = pairing_bary(x, &pts_b[y_id]);
                    if v > best {
                        best = v;
                        best_id = y_id;
                    }
                }
                gain[oi * nb + oj] = best;
                arg[oi * nb + oj] = best_id;
            }
        }

        let basis = simplex::solve_transport(
            &sup,
            &dem,
            |i, j| gain[i * nb + j],
            1e-13,
            1e-15,
            opts.pivot_cap,
        )?;

        // Lift the potentials orbit-constantly.
        let mut phi = vec![0.0; mu.grid.len()];
        for (id, &o) in orb_a.orbit_of.iter().enumerate() {
            phi[id] = basis.u[o];
        }

        // Lift the coupling: each reduced flow spreads uniformly over the
        // pair-orbit of (orbit representative, lex-least argmax target).
        let perms = symmetry::all_permutations(mu.grid.dim + 2);
        let maps_a: Result<Vec<_>, _> =
            perms.iter().map(|g| symmetry::point_map(&mu.grid, g)).collect();
        let maps_b: Result<Vec<_>, _> =
            perms.iter().map(|g| symmetry::point_map(&nu.grid, g)).collect();
        let (maps_a, maps_b) = (maps_a?, maps_b?);
        let mut coupling: Vec<(u32, u32, f64)> = Vec::new();
        for &(oi, oj, ref flow) in &basis.arcs {
            if *flow <= 1e-15 {
                continue;
            }
            let x0 = orb_a.rep[oi];
            let y0 = arg[oi * nb + oj];
            let mut pair_orbit: BTreeSet<(usize, usize)> = BTreeSet::new();
            for (ga, gb) in maps_a.iter().zip(&maps_b) {
                pair_orbit.insert((ga[x0], gb[y0]));
            }
            let mass = flow / pair_orbit.len() as f64;
            for (x, y) in pair_orbit {
                coupling.push((x as u32, y as u32, mass));
            }
        }
        coupling.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        merge_duplicate_arcs(&mut coupling);

        finish_solution(mu, nu, phi, coupling, "exact-orbit-reduced", basis.pivots, opts)
    } else {
        let (m, n) = (mu.grid.len(), nu.grid.len());
        if m.max(n) > opts.size_cap {
            return Err(SolverError::TooLarge { size: m.max(n), cap: opts.size_cap });
        }
        let mut dem = nu.weights.clone();
        rebalance(&mu.weights, &mut dem);
        let basis = simplex::solve_transport(
            &mu.weights,
            &dem,
            |i, j| pairing_bary(&pts_a[i], &pts_b[j]),
            1e-13,
            1e-15,
            opts.pivot_cap,
        )?;
        let phi = basis.u.clone();
        let mut coupling: Vec<(u32, u32, f64)> = basis
            .arcs
            .iter()
            .filter(|&&(_, _, f)| f > 1e-15)
            .map(|&(i, j, f)| (i as u32, j as u32, f))
            .collect();
        coupling.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        finish_solution(mu, nu, phi, coupling, "exact-full", basis.pivots, opts)
    }
}

/// Swap the two sides of a solved instance: the transposed coupling with
/// exchanged potentials solves the swapped problem. Only the gauge is
/// re-fixed (on what is now the source side).
fn transpose_solution(
    forward: TransportSolution,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    opts: &SolveOptions,
) -> Result<TransportSolution, SolverError> {
    let mut coupling: Vec<(u32, u32, f64)> =
        forward.coupling.iter().map(|&(i, j, f)| (j, i, f)).collect();
    coupling.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let phi = forward.psi.values.clone();
    finish_solution(mu, nu, phi, coupling, forward.diagnostics.method, forward.diagnostics.pivots, opts)
}

fn rebalance(sup: &[f64], dem: &mut [f64]) {
    let ts: f64 = sup.iter().sum();
    let td: f64 = dem.iter().sum();
    if td != 0.0 && ts != td {
        let s = ts / td;
        for d in dem.iter_mut() {
            *d *= s;
        }
    }
}

fn merge_duplicate_arcs(coupling: &mut Vec<(u32, u32, f64)>) {
    let mut out: Vec<(u32, u32, f64)> = Vec::with_capacity(coupling.len());
    for &(i, j, f) in coupling.iter() {
        match out.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += f,
            _ => out.push((i, j, f)),
        }
    }
    *coupling = out;
}

/// Shared tail of all solvers: tighten ψ to the c-transform of φ, apply the
/// gauge, and compute diagnostics.
pub(crate) fn finish_solution(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    mut phi: Vec<f64>,
    coupling: Vec<(u32, u32, f64)>,
    method: &'static str,
    pivots: usize,
    opts: &SolveOptions,
) -> Result<TransportSolution, SolverError> {
    let phi_pot = SampledPotential::new(mu.grid.clone(), phi.clone())?;
    let psi_pot = c_transform(&phi_pot, &nu.grid)?;
    let mut psi = psi_pot.values;

    // Gauge.
    let x0 = normalization_point(&mu.grid, opts.normalization, &phi, &mu.weights);
    let shift = match opts.normalization {
        Normalization::VertexZero => phi[x0],
        Normalization::MeanZero => {
            phi.iter().zip(&mu.weights).map(|(p, w)| p * w).sum::<f64>()
        }
    };
    for p in phi.iter_mut() {
        *p -= shift;
    }
    for p in psi.iter_mut() {
        *p += shift;
    }

    let pts_a = float_points(&mu.grid);
    let pts_b = float_points(&nu.grid);
    let primal: f64 = coupling
        .iter()
        .map(|&(i, j, f)| f * pairing_bary(&pts_a[i as usize], &pts_b[j as usize]))
        .sum();
    let dual: f64 = phi.iter().zip(&mu.weights).map(|(p, w)| p * w).sum::<f64>()
        + psi.iter().zip(&nu.weights).map(|(p, w)| p * w).sum::<f64>();

    let mut row = vec![0.0; mu.grid.len()];
    let mut col = vec![0.0; nu.grid.len()];
    for &(i, j, f) in &coupling {
        row[i as usize] += f;
        col[j as usize] += f;
    }
    let mut marginal_error: f64 = 0.0;
    for (r, w) in row.iter().zip(&mu.weights) {
        marginal_error = marginal_error.max((r - w).abs());
    }
    for (c, w) in col.iter().zip(&nu.weights) {
        marginal_error = marginal_error.max((c - w).abs());
    }

    let mut feasibility_violation: f64 = 0.0;
    for (i, x) in pts_a.iter().enumerate() {
        for (j, y) in pts_b.iter().enumerate() {
            let v = pairing_bary(x, y) - phi[i] - psi[j];
            if v > feasibility_violation {
                feasibility_violation = v;
            }
        }
    }

    let symmetry_residual = symmetry::symmetry_residual(&mu.grid, &phi)?
        .max(symmetry::symmetry_residual(&nu.grid, &psi)?);

    Ok(TransportSolution {
        phi: SampledPotential::new(mu.grid.clone(), phi)?,
        psi: SampledPotential::new(nu.grid.clone(), psi)?,
        coupling,
        diagnostics: SolveDiagnostics {
            primal_value: primal,
            dual_value: dual,
            duality_gap: dual - primal,
            marginal_error,
            feasibility_violation,
            symmetry_residual,
            normalization_point: x0,
            method,
            pivots,
        },
    })
}

fn normalization_point(
    grid: &Grid,
    norm: Normalization,
    _phi: &[f64],
    _weights: &[f64],
) -> usize {
    let _ = norm;
    // The lexicographically least vertex-orbit representative: e_{d+1}.
    let n = grid.dim + 2;
    let mut num = vec![0i64; n];
    num[n - 1] = 1;
    grid.position(&BaryExact::new(num, 1)).unwrap_or(0)
}

/// Exact optimal value in rational arithmetic (uniform measures only, where
/// exact weights exist). The independent oracle for the float solver.
pub fn optimal_value_rational(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Option<num_rational::BigRational> {
    use num_rational::BigRational;
    let wa = mu.exact_weights.as_ref()?;
    let wb = nu.exact_weights.as_ref()?;
    let to_big = |r: &num_rational::Ratio<i64>| -> BigRational {
        BigRational::new((*r.numer()).into(), (*r.denom()).into())
    };
    let sup: Vec<BigRational> = wa.iter().map(to_big).collect();
    let dem: Vec<BigRational> = wb.iter().map(to_big).collect();
    let gain = |i: usize, j: usize| -> BigRational {
        let r = crate::geometry::pairing_exact(&mu.grid.points[i], &nu.grid.points[j]);
        BigRational::new((*r.numer()).into(), (*r.denom()).into())
    };
    let basis = simplex::solve_transport(
        &sup,
        &dem,
        gain,
        num_traits::Zero::zero(),
        num_traits::Zero::zero(),
        1_000_000,
    )
    .ok()?;
    let mut value: BigRational = num_traits::Zero::zero();
    for (i, j, f) in &basis.arcs {
        value += f * gain(*i, *j);
    }
    Some(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_grid, Side};

    fn uniform_pair(
        d: usize,
        r: u32,
    ) -> (DiscreteMeasure, DiscreteMeasure, Orbits, Orbits) {
        let ga = Arc::new(sample_grid(Side::A, d, r, None).unwrap());
        let gb = Arc::new(sample_grid(Side::B, d, r, None).unwrap());
        let oa = symmetry::grid_orbits(&ga).unwrap();
        let ob = symmetry::grid_orbits(&gb).unwrap();
        let mu = make_measure(&DensitySpec::Uniform, &ga, &oa).unwrap();
        let nu = make_measure(&DensitySpec::Uniform, &gb, &ob).unwrap();
        (mu, nu, oa, ob)
    }

    #[test]
    fn uniform_measure_weights() {
        let (mu, _, oa, _) = uniform_pair(2, 2);
        assert!((mu.weights.iter().sum::<f64>() - 1.0).abs() < tol::EXACT);
        assert!(mu.weights.iter().all(|&w| w > 0.0));
        // Orbit-constant exactly.
        for ids in &oa.members {
            for &i in ids {
                assert_eq!(mu.weights[i], mu.weights[ids[0]]);
            }
        }
        assert!(mu.exact_weights.is_some());
    }

    #[test]
    fn asymmetric_density_symmetrizes_to_symmetric_one() {
        // Density 2 on one orbit member before symmetrization gives the
        // same measure as the orbit-constant density, by construction.
        let ga = Arc::new(sample_grid(Side::A, 1, 2, None).unwrap());
        let oa = symmetry::grid_orbits(&ga).unwrap();
        let target = ga.point(3);
        let lopsided = make_measure_with(
            |p| if p.bary == target.bary { 2.0 } else { 1.0 },
            &ga,
            &oa,
            Provenance::UserDensity,
        )
        .unwrap();
        // Weights are orbit-constant after symmetrization.
        for ids in &oa.members {
            for &i in ids {
                assert!((lopsided.weights[i] - lopsided.weights[ids[0]]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn nonpositive_density_is_rejected() {
        let ga = Arc::new(sample_grid(Side::A, 1, 1, None).unwrap());
        let oa = symmetry::grid_orbits(&ga).unwrap();
        let r = make_measure_with(|p| p.bary[0] - 0.5, &ga, &oa, Provenance::UserDensity);
        assert!(matches!(r, Err(SolverError::InvalidDensity { .. })));
    }

    #[test]
    fn exact_solver_certifies_zero_gap_d1() {
        for r in [2u32, 4] {
            let (mu, nu, _, _) = uniform_pair(1, r);
            let sol = solve_exact(&mu, &nu, &SolveOptions::default()).unwrap();
            let d = &sol.diagnostics;
            assert!(d.duality_gap.abs() <= tol::DUALITY_GAP * sol.scale(), "gap {}", d.duality_gap);
            assert!(d.marginal_error <= tol::MARGINAL);
            assert!(d.feasibility_violation <= 1e-12);
            assert!(d.symmetry_residual <= 1e-12);
        }
    }

    #[test]
    fn float_optimum_matches_rational_oracle() {
        let (mu, nu, _, _) = uniform_pair(1, 3);
        let sol = solve_exact(&mu, &nu, &SolveOptions::default()).unwrap();
        let exact = optimal_value_rational(&mu, &nu).unwrap();
        let exact_f = {
            let n: f64 = num_traits::ToPrimitive::to_f64(exact.numer()).unwrap();
            let d: f64 = num_traits::ToPrimitive::to_f64(exact.denom()).unwrap();
            n / d
        };
        assert!(
            (sol.diagnostics.primal_value - exact_f).abs() < 1e-10,
            "float {} vs rational {}",
            sol.diagnostics.primal_value,
            exact_f
        );
    }

    #[test]
    fn full_and_reduced_solves_agree() {
        let (mu, nu, _, _) = uniform_pair(2, 2);
        let reduced = solve_exact(&mu, &nu, &SolveOptions::default()).unwrap();
        let full = solve_exact(
            &mu,
            &nu,
            &SolveOptions { reduce: false, ..SolveOptions::default() },
        )
        .unwrap();
        assert!(
            (reduced.diagnostics.primal_value - full.diagnostics.primal_value).abs() < 1e-9,
            "values {} vs {}",
            reduced.diagnostics.primal_value,
            full.diagnostics.primal_value
        );
        assert!(full.diagnostics.duality_gap.abs() <= tol::DUALITY_GAP);
        // Reduced potentials are exactly symmetric; the full ones only after
        // symmetrization, up to a constant.
        assert!(reduced.diagnostics.symmetry_residual <= 1e-12);
    }

    #[test]
    fn swapping_measures_exchanges_potentials() {
        let (mu, nu, _, _) = uniform_pair(1, 2);
        let fwd = solve_exact(&mu, &nu, &SolveOptions::default()).unwrap();
        let bwd = solve_exact(&nu, &mu, &SolveOptions::default()).unwrap();
        // ψ and φ exchange roles up to the additive normalization.
        let diff: Vec<f64> = fwd
            .psi
            .values
            .iter()
            .zip(&bwd.phi.values)
            .map(|(a, b)| a - b)
            .collect();
        let dmin = diff.iter().cloned().fold(f64::INFINITY, f64::min);
        let dmax = diff.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(dmax - dmin <= tol::GAUGE, "not constant: spread {}", dmax - dmin);
    }

    #[test]
    fn independent_normalizations_differ_by_a_constant() {
        let (mu, nu, _, _) = uniform_pair(2, 2);
        let a = solve_exact(&mu, &nu, &SolveOptions::default()).unwrap();
        let b = solve_exact(
            &mu,
            &nu,
            &SolveOptions { normalization: Normalization::MeanZero, ..SolveOptions::default() },
        )
        .unwrap();
        let diff: Vec<f64> =
            a.phi.values.iter().zip(&b.phi.values).map(|(x, y)| x - y).collect();
        let spread = diff.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - diff.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread <= tol::GAUGE);
        // And the vertex-zero normalization really has φ(x₀) = 0.
        assert_eq!(a.phi.values[a.diagnostics.normalization_point], 0.0);
    }

    #[test]
    fn doubling_constant_of_uniform_measure() {
        let ga = Arc::new(sample_grid(Side::A, 2, 6, None).unwrap());
        let oa = symmetry::grid_orbits(&ga).unwrap();
        let mu = make_measure(&DensitySpec::Uniform, &ga, &oa).unwrap();
        let chart = crate::geometry::Chart::face(Side::A, 0, 1);
        let report = doubling_estimate(&mu, &chart, 6.0 * ga.spacing).unwrap();
        assert!(report.windows > 0);
        // Lebesgue doubling of convex sets: 2^d, up to grid error.
        let bound = 4.0 * (1.0 + 6.0 * ga.spacing / report.half_width);
        assert!(
            report.constant <= bound,
            "doubling {} exceeds {}",
            report.constant,
            bound
        );
    }

    #[test]
    fn mismatched_masses_rejected() {
        let (mu, mut nu, _, _) = uniform_pair(1, 1);
        for w in nu.weights.iter_mut() {
            *w *= 1.5;
        }
        assert!(matches!(
            solve_exact(&mu, &nu, &SolveOptions::default()),
            Err(SolverError::MarginalMismatch { .. })
        ));
    }
}
