//! c-transforms, c-convex projection, c-subgradients, and the chart-wise
//! Legendre correspondence.
//!
//! For a potential `f` sampled on one side, the c-transform on the other
//! side is
//!
//! ```text
//! f^c(y) = max_x ⟨x, y⟩ − f(x),
//! ```
//!
//! the maximum running over `f`'s sample points. A potential is c-convex
//! when `f^{cc} = f`; on fixed sample sets the triple transform always
//! equals the single one. The c-subgradient at `x` is the set of targets
//! attaining `f(x) + f^c(y) = ⟨x, y⟩`.
//!
//! In the affine charts the picture linearizes: for a target `n ∈ τ_i`, the
//! supporting functional `x ↦ ⟨p_{i,j}(x), n − n_j⟩` is affine in star-chart
//! coordinates with gradient `(−β_k(n))_{k∉{i,j}}`, and for `n ∈ T_i` the
//! face-chart supporting functional has gradient `(β_j(n) − β_k(n))_k`. For
//! arbitrary targets these functionals are still convex (piecewise affine)
//! in the chart, so sampled c-convex potentials are exactly midpoint-convex
//! on collinear chart triples. [`chart_c_gradient`] inverts those gradient
//! formulas to read the transport map off a local affine fit of the chart
//! potential, the chart expression of `∂^c f`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{
    chart_to_plane_unchecked, pairing_bary, Chart, ChartKind, Grid, GeometryError, Side,
    SimplexPoint,
};


#[derive(Clone, Debug, PartialEq)]
pub enum CtransformError {
    /// The transform of an empty sample set is undefined.
    NoSamples,
    /// Source and target grids must live on opposite sides.
    SideMismatch,
    /// Chart and potential live on different sides.
    ChartMismatch,
    /// Value/sample length mismatch.
    LengthMismatch { values: usize, samples: usize },
    /// The chart potential has no stable gradient at this point at the
    /// available resolution (the c-subgradient is not a singleton there).
    NonsmoothPoint { detail: String },
    Geometry(GeometryError),
}

impl fmt::Display for CtransformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CtransformError::NoSamples => write!(f, "empty sample set"),
            CtransformError::SideMismatch => write!(f, "grids are not on opposite sides"),
            CtransformError::ChartMismatch => write!(f, "chart side does not match the potential"),
            CtransformError::LengthMismatch { values, samples } => {
                write!(f, "{values} values for {samples} samples")
            }
            CtransformError::NonsmoothPoint { detail } => {
                write!(f, "gradient unstable at resolution: {detail}")
            }
            CtransformError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CtransformError {}

impl From<GeometryError> for CtransformError {
    fn from(e: GeometryError) -> Self {
        CtransformError::Geometry(e)
    }
}

/// Values of a candidate potential on a symmetric point cloud.
///
/// Interpolation between samples is piecewise linear on the chart
/// triangulations; all gradient and Hessian extraction goes through local
/// affine/quadratic fits in chart coordinates.
#[derive(Clone, Debug)]
pub struct SampledPotential {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl SampledPotential {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, CtransformError> {
        if values.len() != grid.len() {
            return Err(CtransformError::LengthMismatch {
                values: values.len(),
                samples: grid.len(),
            });
        }
        Ok(SampledPotential { grid, values })
    }

    pub fn zero(grid: Arc<Grid>) -> Self {
        let values = vec![0.0; grid.len()];
        SampledPotential { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(&SimplexPoint) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        SampledPotential { grid, values }
    }

    pub fn side(&self) -> Side {
        self.grid.side
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// c-transform of `f` onto a target grid on the opposite side.
pub fn c_transform(
    f: &SampledPotential,
    targets: &Arc<Grid>,
) -> Result<SampledPotential, CtransformError> {
    if f.is_empty() || targets.is_empty() {
        return Err(CtransformError::NoSamples);
    }
    if f.side() == targets.side {
        return Err(CtransformError::SideMismatch);
    }
    let sources: Vec<Vec<f64>> = f.grid.points.iter().map(|p| p.to_floats()).collect();
    let mut values = Vec::with_capacity(targets.len());
    for y in &targets.points {
        let yb = y.to_floats();
        let mut best = f64::NEG_INFINITY;
        for (x, &fx) in sources.iter().zip(&f.values) {
            let v = pairing_bary(x, &yb) - fx;
            if v > best {
                best = v;
            }
        }
        values.push(best);
    }
    Ok(SampledPotential { grid: targets.clone(), values })
}

/// c-convex projection: `f ↦ f^{cc}` evaluated on `f`'s own sample set,
/// with the conjugate taken through `targets`. Output is pointwise ≤ `f`
/// and the projection is idempotent.
pub fn project_c_convex(
    f: &SampledPotential,
    targets: &Arc<Grid>,
) -> Result<SampledPotential, CtransformError> {
    let fc = c_transform(f, targets)?;
    c_transform(&fc, &f.grid)
}

/// c-transform in exact rational arithmetic.
///
/// Floating-point evaluation satisfies the transform identities
/// (`f^{ccc} = f^c`, the shift rule) only up to an ulp; on rational values
/// they hold with exact equality, which is what the identity tests assert.
pub fn c_transform_rational(
    values: &[num_rational::BigRational],
    source: &Grid,
    targets: &Grid,
) -> Result<Vec<num_rational::BigRational>, CtransformError> {
    use num_rational::BigRational;
    if values.is_empty() || targets.is_empty() {
        return Err(CtransformError::NoSamples);
    }
    if source.side == targets.side {
        return Err(CtransformError::SideMismatch);
    }
    if values.len() != source.len() {
        return Err(CtransformError::LengthMismatch {
            values: values.len(),
            samples: source.len(),
        });
    }
    let big = |r: num_rational::Ratio<i128>| -> BigRational {
        BigRational::new((*r.numer()).into(), (*r.denom()).into())
    };
    let mut out = Vec::with_capacity(targets.len());
    for y in &targets.points {
        let mut best: Option<BigRational> = None;
        for (x, fx) in source.points.iter().zip(values) {
            let v = big(crate::geometry::pairing_exact(x, y)) - fx;
            if best.as_ref().map_or(true, |b| &v > b) {
                best = Some(v);
            }
        }
        out.push(best.expect("nonempty source"));
    }
    Ok(out)
}

/// Index set of targets within `margin` of attaining the c-transform
/// maximum at `x`, together with the attained maximum `f^{cc}(x)`.
pub fn argmax_targets(
    f_c: &SampledPotential,
    x: &SimplexPoint,
    margin: f64,
) -> (Vec<usize>, f64) {
    let xb = &x.bary;
    let mut vals = Vec::with_capacity(f_c.len());
    let mut best = f64::NEG_INFINITY;
    for (y, &fy) in f_c.grid.points.iter().zip(&f_c.values) {
        let v = pairing_bary(xb, &y.to_floats()) - fy;
        if v > best {
            best = v;
        }
        vals.push(v);
    }
    let ids = vals
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v >= best - margin)
        .map(|(i, _)| i)
        .collect();
    (ids, best)
}

/// The c-subgradient at resolution: all targets `y` with
/// `⟨x, y⟩ − f^c(y) ≥ f(x) − margin`.
///
/// `f_at_x` is the potential value at `x` (the sampled value when `x` is a
/// sample point). For c-convex `f` with `f_c = c_transform(f)` and `x` a
/// sample point the set is nonempty for every `margin ≥ 0`; for
/// non-c-convex values it may be empty.
pub fn c_subgradient(
    f_at_x: f64,
    f_c: &SampledPotential,
    x: &SimplexPoint,
    margin: f64,
) -> Vec<usize> {
    let xb = &x.bary;
    let mut out = Vec::new();
    for (i, (y, &fy)) in f_c.grid.points.iter().zip(&f_c.values).enumerate() {
        let v = pairing_bary(xb, &y.to_floats()) - fy;
        if v >= f_at_x - margin {
            out.push(i);
        }
    }
    out
}

/// A potential expressed in one chart: sample ids, their plane coordinates
/// and the chart potential values (with the star-chart linear term already
/// subtracted).
#[derive(Clone, Debug)]
pub struct ChartPotential {
    pub chart: Chart,
    pub node_ids: Vec<usize>,
    pub plane: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl ChartPotential {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }
}

/// Chart expression of a potential.
///
/// Star chart `(i, j)`: `(f − ⟨·, v_j⟩) ∘ p_{i,j}` on the closed star of
/// vertex `i` (`v_j` is the opposite-side vertex `n_j` for A-side
/// potentials, `m_j` for B-side ones). Face chart `(i, j)`: `f ∘ p_{j,i}`
/// on the closed facet `σ_i`. Both are convex functions of the chart
/// coordinates when `f` is c-convex.
pub fn chart_potential(
    f: &SampledPotential,
    chart: &Chart,
) -> Result<ChartPotential, CtransformError> {
    if chart.side != f.side() {
        return Err(CtransformError::ChartMismatch);
    }
    let n = f.grid.dim + 2;
    let mut node_ids = Vec::new();
    let mut plane = Vec::new();
    let mut values = Vec::new();
    for (id, p) in f.grid.points.iter().enumerate() {
        if !chart.contains_exact(p) {
            continue;
        }
        let bary = p.to_floats();
        let x = chart_to_plane_unchecked(chart, &bary);
        let value = match chart.kind {
            ChartKind::Star => {
                // Subtract the supporting vertex functional ⟨·, v_aux⟩,
                // which in barycentric coordinates is 1 − (d+2)·c_aux.
                f.values[id] - (1.0 - n as f64 * bary[chart.aux])
            }
            ChartKind::Face => f.values[id],
        };
        node_ids.push(id);
        plane.push(x);
        values.push(value);
    }
    Ok(ChartPotential { chart: *chart, node_ids, plane, values })
}

/// Parameters for gradient extraction from sampled chart potentials.
#[derive(Clone, Copy, Debug)]
pub struct GradientParams {
    /// Fit radius as a multiple of the grid spacing.
    pub radius_factor: f64,
    /// Stability threshold factor: fits at shifted centers may disagree by
    /// at most `max(stability_floor, stability_factor × spacing)`. A kink of
    /// the sampled potential (distinct argmax targets) produces an O(1)
    /// disagreement independent of resolution, while smooth curvature
    /// produces an O(spacing) one, so the spacing-scaled threshold
    /// separates the two as the grid refines.
    pub stability_factor: f64,
    pub stability_floor: f64,
    /// Negative barycentric slack clamped to zero when the gradient is
    /// mapped back to a boundary point.
    pub image_slack: f64,
}

impl Default for GradientParams {
    fn default() -> Self {
        GradientParams {
            radius_factor: 2.6,
            stability_factor: 0.25,
            stability_floor: 0.04,
            image_slack: 1e-6,
        }
    }
}

/// Least-squares affine fit `v ≈ c + g·(x − x0)` over the chart nodes within
/// `radius` of `x0`; returns the gradient and the maximum fit residual.
fn affine_fit(
    cp: &ChartPotential,
    x0: &[f64],
    radius: f64,
) -> Option<(Vec<f64>, f64, usize)> {
    let d = x0.len();
    let mut rows: Vec<(usize, f64)> = Vec::new();
    for (k, x) in cp.plane.iter().enumerate() {
        let dist2: f64 = x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
        if dist2 <= radius * radius {
            rows.push((k, dist2));
        }
    }
    if rows.len() < d + 1 {
        return None;
    }
    // Normal equations for [1, dx_1, …, dx_d].
    let cols = d + 1;
    let mut ata = vec![0.0; cols * cols];
    let mut atb = vec![0.0; cols];
    for &(k, _) in &rows {
        let mut row = Vec::with_capacity(cols);
        row.push(1.0);
        for (a, b) in cp.plane[k].iter().zip(x0) {
            row.push(a - b);
        }
        for r in 0..cols {
            for c in 0..cols {
                ata[r * cols + c] += row[r] * row[c];
            }
            atb[r] += row[r] * cp.values[k];
        }
    }
    let sol = crate::numeric::solve_dense(&mut ata, &mut atb, cols)?;
    let mut residual: f64 = 0.0;
    for &(k, _) in &rows {
        let mut pred = sol[0];
        for (i, (a, b)) in cp.plane[k].iter().zip(x0).enumerate() {
            pred += sol[i + 1] * (a - b);
        }
        residual = residual.max((pred - cp.values[k]).abs());
    }
    Some((sol[1..].to_vec(), residual, rows.len()))
}

/// Gradient of the chart potential at `x0`, with a stability check:
/// affine fits at the full radius and at centers shifted by ±spacing/2
/// along each chart axis must all agree within the spacing-scaled
/// tolerance. A symmetric kink fools a purely concentric check (both
/// radii average the two branches to the same slope), but any shifted
/// center sees unequal shares of the branches, so kinks are caught.
pub fn chart_gradient(
    cp: &ChartPotential,
    x0: &[f64],
    spacing: f64,
    params: &GradientParams,
) -> Result<Vec<f64>, CtransformError> {
    let radius = params.radius_factor * spacing;
    let (g_full, _res_full, _) = affine_fit(cp, x0, radius).ok_or_else(|| {
        CtransformError::NonsmoothPoint { detail: String::from("too few nodes in fit radius") }
    })?;
    let tolerance = (params.stability_factor * spacing).max(params.stability_floor);
    let mut worst_dev: f64 = 0.0;
    for axis in 0..x0.len() {
        for sign in [-1.0, 1.0] {
            let mut shifted = x0.to_vec();
            shifted[axis] += sign * 0.5 * spacing;
            if let Some((g_shift, _, n)) = affine_fit(cp, &shifted, radius) {
                if n < x0.len() + 1 {
                    continue;
                }
                let dev = g_full
                    .iter()
                    .zip(&g_shift)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0_f64, f64::max);
                worst_dev = worst_dev.max(dev);
            }
        }
    }
    if worst_dev > tolerance {
        return Err(CtransformError::NonsmoothPoint {
            detail: String::from("shifted affine fits disagree beyond the stability tolerance"),
        });
    }
    Ok(g_full)
}

/// Map a chart-potential gradient to the opposite-side target point.
///
/// Star chart `(i, j)` on side S: the target lies on the facet `τ_i` of the
/// other side with coordinates `c_i = 0`, `c_k = −g_k`, `c_j` from the sum.
/// Face chart `(i, j)`: the target lies in the star `T_i` with coordinate
/// differences `c_j − c_k = g_k`, normalized so the minimum over `k ≠ i`
/// vanishes. Entries within `slack` below zero are clamped.
pub fn gradient_to_target(
    chart: &Chart,
    gradient: &[f64],
    slack: f64,
) -> Result<SimplexPoint, CtransformError> {
    let d = gradient.len();
    let n = d + 2;
    let side = chart.side.opposite();
    let plane = chart.plane_indices(d);
    let mut bary = vec![0.0; n];
    match chart.kind {
        ChartKind::Star => {
            bary[chart.center] = 0.0;
            let mut rest = 0.0;
            for (&k, &g) in plane.iter().zip(gradient) {
                bary[k] = -g;
                rest += bary[k];
            }
            bary[chart.aux] = 1.0 - rest;
        }
        ChartKind::Face => {
            let t = gradient.iter().cloned().fold(0.0_f64, f64::max);
            bary[chart.aux] = t;
            let mut rest = t;
            for (&k, &g) in plane.iter().zip(gradient) {
                bary[k] = t - g;
                rest += bary[k];
            }
            bary[chart.center] = 1.0 - rest;
        }
    }
    clamp_to_boundary(side, bary, slack)
}

fn clamp_to_boundary(
    side: Side,
    mut bary: Vec<f64>,
    slack: f64,
) -> Result<SimplexPoint, CtransformError> {
    let mut min = f64::INFINITY;
    for b in bary.iter_mut() {
        if *b < 0.0 {
            if *b < -slack {
                return Err(CtransformError::NonsmoothPoint {
                    detail: String::from("gradient maps outside the simplex"),
                });
            }
            *b = 0.0;
        }
        min = min.min(*b);
    }
    // Re-pin the minimum to exactly zero and renormalize the sum.
    for b in bary.iter_mut() {
        *b -= min;
    }
    let sum: f64 = bary.iter().sum();
    if sum <= 0.0 {
        return Err(CtransformError::NonsmoothPoint {
            detail: String::from("degenerate gradient image"),
        });
    }
    for b in bary.iter_mut() {
        *b /= sum;
    }
    Ok(SimplexPoint { side, bary })
}

/// The chart route to the c-gradient: `∂^c f = q ∘ (∂ f_chart) ∘ p^{-1}`.
///
/// Extracts the gradient of the chart potential at `x0` by local affine
/// fit and maps it to the opposite side. The returned point satisfies the
/// extremality identity `f(p(x0)) + f^c(y) = ⟨p(x0), y⟩` up to resolution.
pub fn chart_c_gradient(
    f: &SampledPotential,
    chart: &Chart,
    x0: &[f64],
    params: &GradientParams,
) -> Result<SimplexPoint, CtransformError> {
    let cp = chart_potential(f, chart)?;
    if cp.is_empty() {
        return Err(CtransformError::NoSamples);
    }
    let g = chart_gradient(&cp, x0, f.grid.spacing, params)?;
    gradient_to_target(chart, &g, params.image_slack)
}
