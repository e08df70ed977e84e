//! Lattices, simplices, barycentric coordinates, strata and affine charts.
//!
//! Fixing `d ≥ 1`, the ambient spaces are the hyperplane `M_ℝ = {Σx = 0}` in
//! `ℝ^{d+2}` and its dual `N_ℝ = ℝ^{d+2}/ℝ(1,…,1)`. The simplex `Δ` has
//! vertices `m_i = (d+2)e_i − (1,…,1)`, the polar simplex `Δ∨` has vertices
//! `n_i = [−e_i]`, and the two transport spaces are `A = ∂Δ` and `B = ∂Δ∨`.
//!
//! Every point of `A` is `Σ α_k m_k` for a unique tuple `α` with `Σα = 1` and
//! `min α = 0`; dually on `B` with coefficients `β` over the `n_i`. In these
//! coordinates the canonical pairing is
//!
//! ```text
//! ⟨m, n⟩ = 1 − (d+2) · Σ_k α_k(m) β_k(n),
//! ```
//!
//! which is the single formula the rest of the crate leans on: it gives
//! `⟨m, n_i⟩ = 1 − (d+2)α_i(m)`, makes the cost symmetric in `(α, β)`, and is
//! manifestly equivariant under simultaneous coordinate permutation.
//!
//! Grid points carry exact rational barycentric coordinates alongside their
//! float form, so that stratum labels, orbit structure and point identity are
//! decided exactly; floats enter only in solver arithmetic.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_integer::Integer;
use num_rational::Ratio;
#[allow(unused_imports)]
use num_traits::Float;

use crate::numeric::sorted_sum;
use crate::tol;

/// Which of the two transport spaces a point lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// `A = ∂Δ`, coefficients α over the vertices `m_i`.
    A,
    /// `B = ∂Δ∨`, coefficients β over the vertices `n_i`.
    B,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::A => write!(f, "A"),
            Side::B => write!(f, "B"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryError {
    /// Dimension must be at least 1.
    InvalidDimension(usize),
    /// Resolution must be at least 1.
    InvalidResolution,
    /// Coordinate tuples of different lengths were combined.
    ShapeMismatch { left: usize, right: usize },
    /// Operands live on the wrong side(s).
    SideMismatch,
    /// The vector does not normalize to a boundary point.
    NotOnBoundary(String),
    /// The point is outside the chart's closed domain.
    OutOfChart,
    /// The plane point is not in the image of the chart.
    NotInImage,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::InvalidDimension(d) => write!(f, "invalid dimension {d}, need d >= 1"),
            GeometryError::InvalidResolution => write!(f, "resolution must be >= 1"),
            GeometryError::ShapeMismatch { left, right } => {
                write!(f, "shape mismatch: {left} vs {right} coordinates")
            }
            GeometryError::SideMismatch => write!(f, "operands on incompatible sides"),
            GeometryError::NotOnBoundary(why) => write!(f, "not on the boundary: {why}"),
            GeometryError::OutOfChart => write!(f, "point outside the chart domain"),
            GeometryError::NotInImage => write!(f, "plane point not in the chart image"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// A vector of `M_ℝ` (side A, coordinates summing to zero) or a canonical
/// representative of a class in `N_ℝ = ℝ^{d+2}/ℝ(1,…,1)` (side B, stored with
/// last coordinate zero so that equality and hashing are well defined).
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientVector {
    pub side: Side,
    pub coords: Vec<f64>,
}

impl AmbientVector {
    /// Side-A constructor; requires the coordinates to sum to zero.
    pub fn new_a(coords: Vec<f64>) -> Result<Self, GeometryError> {
        let s: f64 = coords.iter().sum();
        if s.abs() > tol::EXACT {
            return Err(GeometryError::NotOnBoundary(String::from(
                "A-side coordinates must sum to 0",
            )));
        }
        Ok(AmbientVector { side: Side::A, coords })
    }

    /// Side-B constructor; any representative is accepted and reduced to the
    /// canonical one with last coordinate zero.
    pub fn new_b(mut coords: Vec<f64>) -> Self {
        let last = *coords.last().expect("nonempty coordinates");
        for c in coords.iter_mut() {
            *c -= last;
        }
        AmbientVector { side: Side::B, coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 2
    }
}

/// Canonical pairing `Σ_k m_k n_k` between an A-side and a B-side vector.
/// Well defined on classes because the A-side coordinates sum to zero.
pub fn pairing_ambient(m: &AmbientVector, n: &AmbientVector) -> Result<f64, GeometryError> {
    if m.side != Side::A || n.side != Side::B {
        return Err(GeometryError::SideMismatch);
    }
    if m.coords.len() != n.coords.len() {
        return Err(GeometryError::ShapeMismatch { left: m.coords.len(), right: n.coords.len() });
    }
    let mut terms: Vec<f64> =
        m.coords.iter().zip(&n.coords).map(|(a, b)| a * b).collect();
    Ok(sorted_sum(&mut terms))
}

/// The vertex pairs `(m_i, n_i)` for `i = 0, …, d+1`.
pub fn vertices(d: usize) -> Result<Vec<(AmbientVector, AmbientVector)>, GeometryError> {
    if d < 1 {
        return Err(GeometryError::InvalidDimension(d));
    }
    let n = d + 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = vec![-1.0; n];
        m[i] = (d + 1) as f64;
        let mut w = vec![0.0; n];
        w[i] = -1.0;
        out.push((AmbientVector { side: Side::A, coords: m }, AmbientVector::new_b(w)));
    }
    Ok(out)
}

/// A point of `A` or `B` in normalized barycentric coordinates:
/// entries sum to 1, the minimum entry is 0, all entries are nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    pub side: Side,
    pub bary: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(side: Side, bary: Vec<f64>) -> Result<Self, GeometryError> {
        let sum: f64 = bary.iter().sum();
        if (sum - 1.0).abs() > tol::EXACT {
            return Err(GeometryError::NotOnBoundary(String::from("coordinates must sum to 1")));
        }
        let min = bary.iter().cloned().fold(f64::INFINITY, f64::min);
        if min.abs() > tol::EXACT {
            return Err(GeometryError::NotOnBoundary(String::from("minimum coordinate must be 0")));
        }
        Ok(SimplexPoint { side, bary })
    }

    pub fn dim(&self) -> usize {
        self.bary.len() - 2
    }

    /// The `i`-th vertex as a barycentric point (`m_i` on A, `n_i` on B).
    pub fn vertex(side: Side, d: usize, i: usize) -> Self {
        let mut bary = vec![0.0; d + 2];
        bary[i] = 1.0;
        SimplexPoint { side, bary }
    }

    /// Barycenter of the facet opposite vertex `i` (`σ_i` on A, `τ_i` on B).
    pub fn facet_barycenter(side: Side, d: usize, i: usize) -> Self {
        let mut bary = vec![1.0 / (d + 1) as f64; d + 2];
        bary[i] = 0.0;
        SimplexPoint { side, bary }
    }

    pub fn permuted(&self, image: &[usize]) -> SimplexPoint {
        let mut bary = vec![0.0; self.bary.len()];
        for (k, &gk) in image.iter().enumerate() {
            bary[gk] = self.bary[k];
        }
        SimplexPoint { side: self.side, bary }
    }
}

/// Transport cost in barycentric coordinates:
/// `⟨m, n⟩ = 1 − (d+2) Σ_k α_k β_k`.
///
/// The formula is symmetric in the two tuples, so it accepts its arguments
/// in either side order; the two points must be on opposite sides. Terms are
/// summed in value order, making the result invariant under simultaneous
/// permutation of both tuples (bitwise, not just up to rounding).
pub fn pairing(p: &SimplexPoint, q: &SimplexPoint) -> Result<f64, GeometryError> {
    if p.side == q.side {
        return Err(GeometryError::SideMismatch);
    }
    if p.bary.len() != q.bary.len() {
        return Err(GeometryError::ShapeMismatch { left: p.bary.len(), right: q.bary.len() });
    }
    Ok(pairing_bary(&p.bary, &q.bary))
}

/// The pairing on raw barycentric tuples; callers guarantee the side and
/// shape conventions.
pub fn pairing_bary(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let mut terms: Vec<f64> = alpha.iter().zip(beta).map(|(a, b)| a * b).collect();
    1.0 - (n as f64) * sorted_sum(&mut terms)
}

/// Exact pairing for rational barycentric tuples.
pub fn pairing_exact(a: &BaryExact, b: &BaryExact) -> Ratio<i128> {
    debug_assert_eq!(a.num.len(), b.num.len());
    let n = a.num.len() as i128;
    let mut dot: i128 = 0;
    for (&x, &y) in a.num.iter().zip(&b.num) {
        dot += (x as i128) * (y as i128);
    }
    let den = (a.den as i128) * (b.den as i128);
    Ratio::new(den - n * dot, den)
}

/// Barycentric coordinates of an ambient boundary vector.
///
/// On A this inverts `v = (d+2)α − (1,…,1)`; on B it solves
/// `−β ≡ w (mod (1,…,1))` with `min β = 0`. Fails when the normalized tuple
/// does not sum to 1 or has negative entries beyond tolerance, i.e. when the
/// vector is not on the boundary.
pub fn to_barycentric(v: &AmbientVector) -> Result<SimplexPoint, GeometryError> {
    let n = v.coords.len();
    let bary: Vec<f64> = match v.side {
        Side::A => v.coords.iter().map(|&c| (c + 1.0) / n as f64).collect(),
        Side::B => {
            let t = v.coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            v.coords.iter().map(|&c| t - c).collect()
        }
    };
    let sum: f64 = bary.iter().sum();
    if (sum - 1.0).abs() > tol::ROUND_TRIP {
        return Err(GeometryError::NotOnBoundary(String::from("no normalization sums to 1")));
    }
    let min = bary.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -tol::ROUND_TRIP || min > tol::ROUND_TRIP {
        return Err(GeometryError::NotOnBoundary(String::from("minimum coordinate is not 0")));
    }
    Ok(SimplexPoint { side: v.side, bary })
}

/// Ambient vector of a barycentric point (canonical representative on B).
pub fn from_barycentric(p: &SimplexPoint) -> AmbientVector {
    let n = p.bary.len() as f64;
    match p.side {
        Side::A => AmbientVector {
            side: Side::A,
            coords: p.bary.iter().map(|&a| n * a - 1.0).collect(),
        },
        Side::B => AmbientVector::new_b(p.bary.iter().map(|&b| -b).collect()),
    }
}

/// Euclidean distance between two points on the same side.
///
/// Computed as `(d+2) · ‖c − c′ − mean(c − c′)‖₂` on barycentric tuples: on A
/// the mean term vanishes and this is the ambient Euclidean distance; on B
/// it is the quotient metric of `ℝ^{d+2}/ℝ(1,…,1)`.
pub fn euclidean_distance(p: &SimplexPoint, q: &SimplexPoint) -> f64 {
    debug_assert_eq!(p.side, q.side);
    euclidean_distance_bary(&p.bary, &q.bary)
}

pub fn euclidean_distance_bary(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut mean = 0.0;
    for k in 0..n {
        mean += a[k] - b[k];
    }
    mean /= n as f64;
    let mut sq = 0.0;
    for k in 0..n {
        let d = a[k] - b[k] - mean;
        sq += d * d;
    }
    (n as f64) * sq.sqrt()
}

/// A pair of disjoint index sets `(I, J)` naming a stratum `A_IJ°` (maximal
/// coefficients exactly on `I`, zero coefficients exactly on `J`) or its
/// mirror `B_JI°`. Sets are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellLabel {
    pub max_set: Vec<usize>,
    pub zero_set: Vec<usize>,
}

impl CellLabel {
    pub fn new(mut max_set: Vec<usize>, mut zero_set: Vec<usize>) -> Self {
        max_set.sort_unstable();
        zero_set.sort_unstable();
        debug_assert!(max_set.iter().all(|i| !zero_set.contains(i)));
        CellLabel { max_set, zero_set }
    }

    /// A stratum is singular when both sets have at least two elements.
    pub fn is_singular(&self) -> bool {
        self.max_set.len() >= 2 && self.zero_set.len() >= 2
    }

    /// The label of the image stratum under the c-gradient: `(I,J) ↦ (J,I)`.
    pub fn transposed(&self) -> CellLabel {
        CellLabel { max_set: self.zero_set.clone(), zero_set: self.max_set.clone() }
    }

    /// Dimension of the stratum: `d + 2 − |I| − |J|`.
    pub fn stratum_dim(&self, d: usize) -> usize {
        d + 2 - self.max_set.len() - self.zero_set.len()
    }

    pub fn permuted(&self, image: &[usize]) -> CellLabel {
        CellLabel::new(
            self.max_set.iter().map(|&i| image[i]).collect(),
            self.zero_set.iter().map(|&j| image[j]).collect(),
        )
    }
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.max_set.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "|")?;
        for (k, j) in self.zero_set.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        Ok(())
    }
}

/// Stratum label of a point: indices attaining the maximum (within
/// `tie_tol`, measured relative to the maximum) and indices equal to zero
/// (within the same tolerance). A total function on valid points.
pub fn classify(p: &SimplexPoint, tie_tol: f64) -> CellLabel {
    let max = p.bary.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let band = tie_tol * max.max(1e-300);
    let mut max_set = Vec::new();
    let mut zero_set = Vec::new();
    for (k, &a) in p.bary.iter().enumerate() {
        if a >= max - band {
            max_set.push(k);
        } else if a <= band {
            zero_set.push(k);
        }
    }
    CellLabel { max_set, zero_set }
}

/// Exact barycentric coordinates: nonnegative integer numerators over a
/// positive denominator, with `Σ num = den` and `min num = 0`, reduced so
/// the gcd of all numerators and the denominator is 1. Used as the identity
/// key of grid points and for exact stratum labels and orbits.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaryExact {
    pub num: Vec<i64>,
    pub den: i64,
}

impl BaryExact {
    pub fn new(num: Vec<i64>, den: i64) -> Self {
        debug_assert!(den > 0);
        debug_assert_eq!(num.iter().sum::<i64>(), den);
        debug_assert!(num.iter().all(|&x| x >= 0));
        debug_assert_eq!(num.iter().min(), Some(&0));
        let mut g = den;
        for &x in &num {
            g = g.gcd(&x);
        }
        if g > 1 {
            BaryExact { num: num.iter().map(|&x| x / g).collect(), den: den / g }
        } else {
            BaryExact { num, den }
        }
    }

    pub fn to_floats(&self) -> Vec<f64> {
        self.num.iter().map(|&x| x as f64 / self.den as f64).collect()
    }

    pub fn to_point(&self, side: Side) -> SimplexPoint {
        SimplexPoint { side, bary: self.to_floats() }
    }

    pub fn permuted(&self, image: &[usize]) -> BaryExact {
        let mut num = vec![0i64; self.num.len()];
        for (k, &gk) in image.iter().enumerate() {
            num[gk] = self.num[k];
        }
        BaryExact { num, den: self.den }
    }

    /// Exact stratum label.
    pub fn classify(&self) -> CellLabel {
        let max = *self.num.iter().max().expect("nonempty");
        let mut max_set = Vec::new();
        let mut zero_set = Vec::new();
        for (k, &x) in self.num.iter().enumerate() {
            if x == max {
                max_set.push(k);
            } else if x == 0 {
                zero_set.push(k);
            }
        }
        CellLabel { max_set, zero_set }
    }

    /// Is the point in the closed set described by `label`
    /// (all of `max_set` maximal, all of `zero_set` zero)?
    pub fn in_closed_cell(&self, label: &CellLabel) -> bool {
        let max = *self.num.iter().max().expect("nonempty");
        label.max_set.iter().all(|&i| self.num[i] == max)
            && label.zero_set.iter().all(|&j| self.num[j] == 0)
    }
}

/// One chart of the special affine atlas.
///
/// Star charts cover the small star `S_i` on A (`T_i` on B) and are bijective
/// on the full closed star of the vertex; face charts cover the facet `σ_i`
/// (`τ_i`). The auxiliary index `j ≠ i` selects which linear functional is
/// dropped; transition maps between different `j` are affine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Chart {
    pub side: Side,
    pub kind: ChartKind,
    /// The distinguished index `i`: vertex index for star charts,
    /// facet index for face charts.
    pub center: usize,
    /// Auxiliary index `j ≠ i`.
    pub aux: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartKind {
    Star,
    Face,
}

impl Chart {
    pub fn star(side: Side, center: usize, aux: usize) -> Self {
        assert_ne!(center, aux);
        Chart { side, kind: ChartKind::Star, center, aux }
    }

    pub fn face(side: Side, center: usize, aux: usize) -> Self {
        assert_ne!(center, aux);
        Chart { side, kind: ChartKind::Face, center, aux }
    }

    /// The plane coordinate indices, i.e. all `k ∉ {center, aux}` in order.
    pub fn plane_indices(&self, d: usize) -> Vec<usize> {
        (0..d + 2).filter(|&k| k != self.center && k != self.aux).collect()
    }

    /// Is `p` in the closed chart domain? Star charts use the full closed
    /// star (some coordinate other than `center` vanishes); face charts the
    /// closed facet.
    pub fn contains(&self, p: &SimplexPoint, tolerance: f64) -> bool {
        if p.side != self.side {
            return false;
        }
        match self.kind {
            ChartKind::Star => {
                let min = p
                    .bary
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != self.center)
                    .map(|(_, &a)| a)
                    .fold(f64::INFINITY, f64::min);
                min.abs() <= tolerance
            }
            ChartKind::Face => p.bary[self.center].abs() <= tolerance,
        }
    }

    /// Exact domain test for grid points.
    pub fn contains_exact(&self, p: &BaryExact) -> bool {
        match self.kind {
            ChartKind::Star => p
                .num
                .iter()
                .enumerate()
                .any(|(k, &x)| k != self.center && x == 0),
            ChartKind::Face => p.num[self.center] == 0,
        }
    }

    /// Is `p` in the *small* region the chart is named after
    /// (`S_i`: coordinate `center` maximal; `σ_i`: coordinate `center` zero)?
    pub fn in_named_region_exact(&self, p: &BaryExact) -> bool {
        match self.kind {
            ChartKind::Star => {
                let max = *p.num.iter().max().expect("nonempty");
                p.num[self.center] == max
            }
            ChartKind::Face => p.num[self.center] == 0,
        }
    }
}

/// Chart coordinates of a boundary point.
///
/// Star chart `(i, j)`: `x_k = (d+2)(c_k − c_j)` for `k ∉ {i, j}`, the map
/// `m ↦ (⟨m, n_j − n_k⟩)_k` written in barycentric coordinates. Face chart
/// `(i, j)`: `x_k = (d+2)(c_k − c_i)`, which reduces to `(d+2)c_k` on the
/// facet itself.
pub fn chart_to_plane(chart: &Chart, p: &SimplexPoint) -> Result<Vec<f64>, GeometryError> {
    if p.side != chart.side {
        return Err(GeometryError::SideMismatch);
    }
    if !chart.contains(p, tol::ROUND_TRIP) {
        return Err(GeometryError::OutOfChart);
    }
    Ok(chart_to_plane_unchecked(chart, &p.bary))
}

/// As [`chart_to_plane`] but without the domain check; used on supporting
/// functionals where the formula is evaluated off-domain by design.
pub fn chart_to_plane_unchecked(chart: &Chart, bary: &[f64]) -> Vec<f64> {
    let n = bary.len();
    let base = match chart.kind {
        ChartKind::Star => bary[chart.aux],
        ChartKind::Face => bary[chart.center],
    };
    let mut out = Vec::with_capacity(n - 2);
    for k in 0..n {
        if k == chart.center || k == chart.aux {
            continue;
        }
        out.push(n as f64 * (bary[k] - base));
    }
    out
}

/// Inverse chart map.
///
/// For a star chart the plane point determines the differences
/// `c_k − c_aux`; the remaining freedom is fixed by requiring the minimum
/// over `k ≠ center` to vanish, which recovers the unique preimage on the
/// closed star. For a face chart the facet coordinate is zero and the
/// auxiliary coordinate is determined by the sum. Fails when the
/// reconstructed tuple leaves the simplex.
pub fn chart_from_plane(chart: &Chart, x: &[f64]) -> Result<SimplexPoint, GeometryError> {
    let d = x.len();
    let n = d + 2;
    let nf = n as f64;
    let mut bary = vec![0.0; n];
    let plane = chart.plane_indices(d);
    match chart.kind {
        ChartKind::Star => {
            let min_x = x.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
            let s = -min_x / nf;
            bary[chart.aux] = s;
            let mut rest = s;
            for (&k, &xk) in plane.iter().zip(x) {
                bary[k] = s + xk / nf;
                rest += bary[k];
            }
            bary[chart.center] = 1.0 - rest;
            if bary[chart.center] < -tol::ROUND_TRIP {
                return Err(GeometryError::NotInImage);
            }
            bary[chart.center] = bary[chart.center].max(0.0);
        }
        ChartKind::Face => {
            bary[chart.center] = 0.0;
            let mut rest = 0.0;
            for (&k, &xk) in plane.iter().zip(x) {
                bary[k] = xk / nf;
                if bary[k] < -tol::ROUND_TRIP {
                    return Err(GeometryError::NotInImage);
                }
                bary[k] = bary[k].max(0.0);
                rest += bary[k];
            }
            bary[chart.aux] = 1.0 - rest;
            if bary[chart.aux] < -tol::ROUND_TRIP {
                return Err(GeometryError::NotInImage);
            }
            bary[chart.aux] = bary[chart.aux].max(0.0);
        }
    }
    Ok(SimplexPoint { side: chart.side, bary })
}

/// All charts of one side's atlas: star charts `(S_i°, i, j)` and face
/// charts `(σ_i°, i, j)` for all ordered pairs `i ≠ j`.
pub fn atlas(side: Side, d: usize) -> Vec<Chart> {
    let n = d + 2;
    let mut charts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                charts.push(Chart::face(side, i, j));
                charts.push(Chart::star(side, i, j));
            }
        }
    }
    charts
}

/// Region filter for grid generation.
pub enum Region<'a> {
    /// The closed cell `A_IJ` (all of `I` maximal, all of `J` zero).
    Cell(&'a CellLabel),
    /// A chart's named region (`S_i` or `σ_i`).
    Chart(&'a Chart),
}

/// A deterministic symmetric point cloud on one side.
///
/// The points are the order-`resolution` lattice of the barycentric
/// subdivision of each facet: every point is `Σ_k (c_k/r)·b_{T_k}` for a
/// chain of faces `T_1 ⊂ … ⊂ T_{d+1}` of a facet and nonnegative integers
/// `c_k` summing to `r`. This refines the stratification (every stratum is a
/// union of subdivision cells), is stable under the full permutation group,
/// and contains all vertices and facet barycenters at every resolution.
#[derive(Clone, Debug)]
pub struct Grid {
    pub side: Side,
    pub dim: usize,
    pub resolution: u32,
    pub points: Vec<BaryExact>,
    index: BTreeMap<BaryExact, usize>,
    /// Largest nearest-neighbour Euclidean distance over the grid; the
    /// resolution certificate all "at resolution" tolerances scale with.
    pub spacing: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: usize) -> SimplexPoint {
        self.points[id].to_point(self.side)
    }

    pub fn float_points(&self) -> Vec<SimplexPoint> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn position(&self, p: &BaryExact) -> Option<usize> {
        self.index.get(p).copied()
    }
}

fn lcm_up_to(k: i64) -> i64 {
    let mut l = 1i64;
    for x in 1..=k {
        l = l.lcm(&x);
    }
    l
}

/// Build the symmetric grid, optionally filtered to a region.
/// An empty region yields an empty grid (not an error).
pub fn sample_grid(
    side: Side,
    d: usize,
    resolution: u32,
    region: Option<&Region<'_>>,
) -> Result<Grid, GeometryError> {
    if d < 1 {
        return Err(GeometryError::InvalidDimension(d));
    }
    if resolution < 1 {
        return Err(GeometryError::InvalidResolution);
    }
    let n = d + 2;
    let r = resolution as i64;
    let den = r * lcm_up_to((d + 1) as i64);

    let mut index: BTreeMap<BaryExact, usize> = BTreeMap::new();
    let mut points: Vec<BaryExact> = Vec::new();

    let mut facet_vertices: Vec<usize> = Vec::with_capacity(n - 1);
    for facet in 0..n {
        facet_vertices.clear();
        facet_vertices.extend((0..n).filter(|&k| k != facet));
        for chain in permutations(&facet_vertices) {
            for comp in Compositions::new(r, d + 1) {
                let mut num = vec![0i64; n];
                for (level, &c) in comp.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    // b_{T} with T = first (level+1) chain entries.
                    let t = (level + 1) as i64;
                    let share = c * (den / (r * t));
                    for &v in &chain[..=level] {
                        num[v] += share;
                    }
                }
                let p = BaryExact::new(num, den);
                let keep = match region {
                    None => true,
                    Some(Region::Cell(label)) => p.in_closed_cell(label),
                    Some(Region::Chart(chart)) => chart.in_named_region_exact(&p),
                };
                if keep && !index.contains_key(&p) {
                    index.insert(p.clone(), points.len());
                    points.push(p);
                }
            }
        }
    }

    let spacing = max_nearest_neighbour_distance(&points);
    Ok(Grid { side, dim: d, resolution, points, index, spacing })
}

fn max_nearest_neighbour_distance(points: &[BaryExact]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let floats: Vec<Vec<f64>> = points.iter().map(|p| p.to_floats()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..floats.len() {
        let mut nearest = f64::INFINITY;
        for j in 0..floats.len() {
            if i == j {
                continue;
            }
            let dist = euclidean_distance_bary(&floats[i], &floats[j]);
            if dist < nearest {
                nearest = dist;
            }
        }
        worst = worst.max(nearest);
    }
    worst
}

/// All permutations of a slice, in lexicographic order of positions.
fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut work = items.to_vec();
    heap_permute(&mut work, 0, &mut out);
    out.sort_unstable();
    out
}

fn heap_permute(work: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == work.len() {
        out.push(work.clone());
        return;
    }
    for i in k..work.len() {
        work.swap(k, i);
        heap_permute(work, k + 1, out);
        work.swap(k, i);
    }
}

/// Iterator over compositions of `total` into `parts` nonnegative integers.
struct Compositions {
    total: i64,
    current: Option<Vec<i64>>,
}

impl Compositions {
    fn new(total: i64, parts: usize) -> Self {
        let mut first = vec![0i64; parts];
        first[0] = total;
        Compositions { total, current: Some(first) }
    }
}

impl Iterator for Compositions {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let current = self.current.take()?;
        let out = current.clone();
        // Standard successor: move one unit from the rightmost positive
        // non-final slot rightward, pulling everything after it back.
        let parts = current.len();
        let mut next = current;
        let mut idx = None;
        for k in (0..parts - 1).rev() {
            if next[k] > 0 {
                idx = Some(k);
                break;
            }
        }
        if let Some(k) = idx {
            let tail: i64 = next[k + 1..].iter().sum();
            next[k] -= 1;
            for slot in next[k + 1..].iter_mut() {
                *slot = 0;
            }
            next[k + 1] = tail + 1;
            self.current = Some(next);
        } else {
            let _ = self.total;
            self.current = None;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_coordinates_match_definition() {
        // d=1: m_0 = (2,−1,−1), direct expansion of the defining formula.
        let verts = vertices(1).unwrap();
        assert_eq!(verts[0].0.coords, vec![2.0, -1.0, -1.0]);
        // n_1 is the class of −e_1 = (0,−1,0), already canonical.
        assert_eq!(verts[1].1.coords, vec![0.0, -1.0, 0.0]);
        // d=3: m_2 = (−1,−1,4,−1,−1).
        let verts3 = vertices(3).unwrap();
        assert_eq!(verts3[2].0.coords, vec![-1.0, -1.0, 4.0, -1.0, -1.0]);
        for (m, _) in &verts3 {
            assert!(m.coords.iter().sum::<f64>().abs() < 1e-15);
        }
        assert!(vertices(0).is_err());
    }

    #[test]
    fn pairing_on_vertices() {
        // Evaluated as raw coordinate sums, independently of pairing_bary.
        let verts = vertices(3).unwrap();
        let direct = |m: &AmbientVector, w: &AmbientVector| -> f64 {
            m.coords.iter().zip(&w.coords).map(|(a, b)| a * b).sum()
        };
        assert_eq!(direct(&verts[0].0, &verts[1].1), 1.0);
        assert_eq!(direct(&verts[0].0, &verts[0].1), -4.0);
        assert_eq!(pairing_ambient(&verts[0].0, &verts[1].1).unwrap(), 1.0);
        assert_eq!(pairing_ambient(&verts[0].0, &verts[0].1).unwrap(), -4.0);
        // Zero vector pairs to zero with anything.
        let zero = AmbientVector::new_a(vec![0.0; 5]).unwrap();
        assert_eq!(pairing_ambient(&zero, &verts[2].1).unwrap(), 0.0);
        // Barycentric formula agrees on vertices.
        let m0 = SimplexPoint::vertex(Side::A, 3, 0);
        let n0 = SimplexPoint::vertex(Side::B, 3, 0);
        let n1 = SimplexPoint::vertex(Side::B, 3, 1);
        assert_eq!(pairing(&m0, &n1).unwrap(), 1.0);
        assert_eq!(pairing(&m0, &n0).unwrap(), -4.0);
    }

    #[test]
    fn barycentric_round_trip() {
        let verts = vertices(3).unwrap();
        let p = to_barycentric(&verts[0].0).unwrap();
        assert_eq!(p.bary, vec![1.0, 0.0, 0.0, 0.0, 0.0]);

        // Midpoint of an edge.
        let mid = AmbientVector::new_a(
            verts[0].0.coords.iter().zip(&verts[1].0.coords).map(|(a, b)| (a + b) / 2.0).collect(),
        )
        .unwrap();
        let pm = to_barycentric(&mid).unwrap();
        assert_eq!(pm.bary, vec![0.5, 0.5, 0.0, 0.0, 0.0]);

        let back = from_barycentric(&pm);
        for (a, b) in back.coords.iter().zip(&mid.coords) {
            assert!((a - b).abs() < 1e-12);
        }

        // B side round trip.
        let q = to_barycentric(&verts[2].1).unwrap();
        assert_eq!(q.bary, vec![0.0, 0.0, 1.0, 0.0, 0.0]);

        // Interior point of Δ (not on the boundary) is rejected: the origin.
        let center = AmbientVector::new_a(vec![0.0; 5]).unwrap();
        assert!(matches!(to_barycentric(&center), Err(GeometryError::NotOnBoundary(_))));
    }

    #[test]
    fn pairing_identity_with_vertex() {
        // ⟨m, n_i⟩ = 1 − (d+2) α_i(m) for grid samples, exactly in rationals.
        let grid = sample_grid(Side::A, 2, 3, None).unwrap();
        for p in &grid.points {
            for i in 0..4 {
                let mut n = vec![0i64; 4];
                n[i] = 1;
                let ni = BaryExact::new(n, 1);
                let lhs = pairing_exact(p, &ni);
                let rhs = Ratio::new(p.den as i128 - 4 * p.num[i] as i128, p.den as i128);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn classify_examples() {
        let d = 3;
        let v = SimplexPoint::vertex(Side::A, d, 0);
        let l = classify(&v, 1e-9);
        assert_eq!(l.max_set, vec![0]);
        assert_eq!(l.zero_set, vec![1, 2, 3, 4]);

        let b = SimplexPoint::facet_barycenter(Side::A, d, 1);
        let l = classify(&b, 1e-9);
        assert_eq!(l.max_set, vec![0, 2, 3, 4]);
        assert_eq!(l.zero_set, vec![1]);

        let tie = SimplexPoint::new(Side::A, vec![0.5, 0.5, 0.0, 0.0, 0.0]).unwrap();
        let l = classify(&tie, 1e-9);
        assert_eq!(l.max_set, vec![0, 1]);
        assert_eq!(l.zero_set, vec![2, 3, 4]);
        assert!(l.is_singular());
    }

    #[test]
    fn singular_flag() {
        let l = CellLabel::new(vec![0, 1], vec![2, 3]);
        assert!(l.is_singular());
        let l2 = CellLabel::new(vec![0], vec![1, 2, 3]);
        assert!(!l2.is_singular());
    }

    #[test]
    fn chart_forward_examples() {
        let d = 3;
        // Star chart (i=0, j=1) at the vertex m_0: all coordinates except
        // α_0 vanish, so every chart coordinate is 0.
        let chart = Chart::star(Side::A, 0, 1);
        let m0 = SimplexPoint::vertex(Side::A, d, 0);
        assert_eq!(chart_to_plane(&chart, &m0).unwrap(), vec![0.0, 0.0, 0.0]);

        // Barycenter of σ_1: coordinates (¼,0,¼,¼,¼), chart value (d+2)(¼−0).
        let b1 = SimplexPoint::facet_barycenter(Side::A, d, 1);
        let x = chart_to_plane(&chart, &b1).unwrap();
        for v in x {
            assert!((v - 1.25).abs() < 1e-15);
        }
    }

    #[test]
    fn chart_round_trips_on_grid() {
        let d = 2;
        let grid = sample_grid(Side::A, d, 3, None).unwrap();
        let charts = atlas(Side::A, d);
        let mut covered = 0;
        for chart in &charts {
            for p in &grid.points {
                if !chart.contains_exact(p) {
                    continue;
                }
                covered += 1;
                let sp = p.to_point(Side::A);
                let x = chart_to_plane(&chart, &sp).unwrap();
                let back = chart_from_plane(&chart, &x).unwrap();
                for (a, b) in back.bary.iter().zip(&sp.bary) {
                    assert!((a - b).abs() < tol::ROUND_TRIP, "chart {chart:?} point {p:?}");
                }
            }
        }
        assert!(covered > 0);

        // A plane point with no valid preimage is rejected: huge coordinates
        // force the center coordinate negative.
        let chart = Chart::star(Side::A, 0, 1);
        assert!(matches!(
            chart_from_plane(&chart, &[40.0, 40.0]),
            Err(GeometryError::NotInImage)
        ));
    }

    #[test]
    fn grid_counts() {
        // Face σ_0 at d=1: at the coarsest resolution, exactly the two
        // vertices and the midpoint of the edge; refining keeps them.
        let label = CellLabel::new(vec![], vec![0]);
        let g = sample_grid(Side::A, 1, 1, Some(&Region::Cell(&label))).unwrap();
        assert_eq!(g.len(), 3);
        let g2 = sample_grid(Side::A, 1, 2, Some(&Region::Cell(&label))).unwrap();
        assert_eq!(g2.len(), 5);
        for p in &g.points {
            assert!(g2.position(p).is_some());
        }

        // Whole A at d=2, resolution 1: 4 vertices + 6 edge midpoints
        // + 4 face barycenters.
        let g = sample_grid(Side::A, 2, 1, None).unwrap();
        assert_eq!(g.len(), 14);

        // Doubling the resolution grows the count polynomially of degree d:
        // ratio bounded by 2^d plus lower-order boundary terms.
        let g2 = sample_grid(Side::A, 2, 2, None).unwrap();
        let g4 = sample_grid(Side::A, 2, 4, None).unwrap();
        let ratio = g4.len() as f64 / g2.len() as f64;
        assert!(ratio > 2.0 && ratio < 6.0, "ratio {ratio}");
        assert!(g4.spacing < g2.spacing);
    }

    #[test]
    fn grid_strata_partition() {
        // Exact labels partition the grid: every point gets exactly one
        // (I,J) and the label sets are consistent.
        let g = sample_grid(Side::A, 2, 3, None).unwrap();
        for p in &g.points {
            let l = p.classify();
            assert!(!l.max_set.is_empty());
            assert!(!l.zero_set.is_empty());
            for i in &l.max_set {
                assert!(!l.zero_set.contains(i));
            }
            // Face membership: p ∈ σ_i iff α_i = 0; star: α_i maximal.
            for &j in &l.zero_set {
                assert_eq!(p.num[j], 0);
            }
        }
    }

    #[test]
    fn grid_is_symmetric() {
        let g = sample_grid(Side::A, 2, 2, None).unwrap();
        // A couple of transpositions map grid points to grid points.
        for image in [[1usize, 0, 2, 3], [0, 2, 1, 3], [3, 1, 2, 0]] {
            for p in &g.points {
                let q = p.permuted(&image);
                assert!(g.position(&q).is_some());
            }
        }
    }

    #[test]
    fn empty_region_gives_empty_grid() {
        // All coordinates simultaneously maximal is impossible on A (the
        // minimum must be 0 while the sum is 1), so this cell is empty.
        let label = CellLabel::new(vec![0, 1, 2], vec![]);
        let g = sample_grid(Side::A, 1, 2, Some(&Region::Cell(&label))).unwrap();
        assert_eq!(g.len(), 0);
    }

    #[test]
    fn compositions_enumerate_all() {
        let all: Vec<_> = Compositions::new(3, 2).collect();
        assert_eq!(all.len(), 4);
        let all: Vec<_> = Compositions::new(4, 3).collect();
        assert_eq!(all.len(), 15); // C(4+2, 2)
    }
}
