//! The action of `G = S_{d+2}` on the two boundaries, orbits, stabilizers,
//! and symmetrization of sampled data.
//!
//! `G` acts by permuting barycentric coordinates simultaneously on A and B;
//! the pairing is invariant under the diagonal action. All orbit machinery
//! works on the exact rational coordinates of grid points, so orbit
//! membership, representatives and stabilizer orders are computed exactly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{BaryExact, Grid, SimplexPoint};
use crate::numeric::factorial;

/// A permutation of `{0, …, n−1}` stored as its image array.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymmetryError {
    /// The image array is not a bijection.
    NotBijective,
    /// The sample set is not stable under the group action.
    NonSymmetricSupport { missing_of: usize },
    /// Value array length differs from the sample count.
    LengthMismatch { values: usize, samples: usize },
}

impl fmt::Display for SymmetryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryError::NotBijective => write!(f, "image array is not a bijection"),
            SymmetryError::NonSymmetricSupport { missing_of } => {
                write!(f, "sample set is not G-stable: an image of point {missing_of} is missing")
            }
            SymmetryError::LengthMismatch { values, samples } => {
                write!(f, "{values} values for {samples} samples")
            }
        }
    }
}

impl core::error::Error for SymmetryError {}

impl Permutation {
    pub fn from_image(image: Vec<usize>) -> Result<Self, SymmetryError> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &i in &image {
            if i >= n || seen[i] {
                return Err(SymmetryError::NotBijective);
            }
            seen[i] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { image: (0..n).collect() }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(a, b);
        Permutation { image }
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(k, &v)| k == v)
    }

    /// `(self ∘ other)(k) = self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { image: other.image.iter().map(|&k| self.image[k]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0; self.image.len()];
        for (k, &v) in self.image.iter().enumerate() {
            image[v] = k;
        }
        Permutation { image }
    }
}

/// Apply a permutation to a point: barycentric coordinates are pushed to
/// their image positions, `act(g, p)_g(k) = p_k`.
pub fn act(g: &Permutation, p: &SimplexPoint) -> SimplexPoint {
    p.permuted(g.image())
}

pub fn act_exact(g: &Permutation, p: &BaryExact) -> BaryExact {
    p.permuted(g.image())
}

/// Adjacent transpositions, a generating set of `S_n`.
pub fn generators(n: usize) -> Vec<Permutation> {
    (0..n - 1).map(|k| Permutation::transposition(n, k, k + 1)).collect()
}

/// All `n!` permutations. Desk scale only; refuses n > 8.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    assert!(n <= 8, "full enumeration is desk scale only");
    let mut out = Vec::with_capacity(factorial(n as u64) as usize);
    let mut work: Vec<usize> = (0..n).collect();
    permute_into(&mut work, 0, &mut out);
    out.sort();
    out
}

fn permute_into(work: &mut Vec<usize>, k: usize, out: &mut Vec<Permutation>) {
    if k == work.len() {
        out.push(Permutation { image: work.clone() });
        return;
    }
    for i in k..work.len() {
        work.swap(k, i);
        permute_into(work, k + 1, out);
        work.swap(k, i);
    }
}

/// Orbit of an exact point: closure under the adjacent-transposition
/// generators, returned sorted (the first entry is the lexicographically
/// least tuple, the orbit representative).
pub fn orbit_exact(p: &BaryExact) -> Vec<BaryExact> {
    let n = p.num.len();
    let gens = generators(n);
    let mut seen: BTreeMap<BaryExact, ()> = BTreeMap::new();
    let mut frontier = vec![p.clone()];
    seen.insert(p.clone(), ());
    while let Some(q) = frontier.pop() {
        for g in &gens {
            let img = act_exact(g, &q);
            if !seen.contains_key(&img) {
                seen.insert(img.clone(), ());
                frontier.push(img);
            }
        }
    }
    seen.into_keys().collect()
}

/// Orbit of a float point (exactness recovered by treating equal floats as
/// equal coordinates; intended for analytically constructed points).
pub fn orbit(p: &SimplexPoint) -> Vec<SimplexPoint> {
    let n = p.bary.len();
    let gens = generators(n);
    let mut out: Vec<SimplexPoint> = vec![p.clone()];
    let mut frontier = vec![p.clone()];
    while let Some(q) = frontier.pop() {
        for g in &gens {
            let img = act(g, &q);
            if !out.iter().any(|r| r.bary == img.bary) {
                out.push(img.clone());
                frontier.push(img);
            }
        }
    }
    out
}

/// Stabilizer of a point: the Young subgroup preserving each level set of
/// the coordinate tuple. Returns a generating set (adjacent transpositions
/// within each class of equal coordinates) and the exact order `Π c_i!`.
///
/// For a point of `A_IJ°` with no further coordinate coincidences this is
/// exactly `G_I × G_J`, of order `|I|!·|J|!`; extra coincidences among the
/// intermediate values enlarge it.
pub fn stabilizer(p: &BaryExact) -> (Vec<Permutation>, u64) {
    let n = p.num.len();
    let mut by_value: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (k, &v) in p.num.iter().enumerate() {
        by_value.entry(v).or_default().push(k);
    }
    let mut gens = Vec::new();
    let mut order = 1u64;
    for class in by_value.values() {
        order *= factorial(class.len() as u64);
        for pair in class.windows(2) {
            gens.push(Permutation::transposition(n, pair[0], pair[1]));
        }
    }
    (gens, order)
}

/// Orbit decomposition of a grid's point set.
#[derive(Clone, Debug)]
pub struct Orbits {
    /// Point id → orbit id.
    pub orbit_of: Vec<usize>,
    /// Orbit id → sorted member point ids.
    pub members: Vec<Vec<usize>>,
    /// Orbit id → point id of the lexicographically least member.
    pub rep: Vec<usize>,
}

impl Orbits {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

/// Decompose a grid into orbits; fails with `NonSymmetricSupport` when some
/// image of a grid point is not itself a grid point.
pub fn grid_orbits(grid: &Grid) -> Result<Orbits, SymmetryError> {
    let n_points = grid.len();
    let mut orbit_of = vec![usize::MAX; n_points];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut rep = Vec::new();
    for start in 0..n_points {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let orbit_points = orbit_exact(&grid.points[start]);
        let oid = members.len();
        let mut ids = Vec::with_capacity(orbit_points.len());
        for q in &orbit_points {
            match grid.position(q) {
                Some(id) => {
                    orbit_of[id] = oid;
                    ids.push(id);
                }
                None => return Err(SymmetryError::NonSymmetricSupport { missing_of: start }),
            }
        }
        // orbit_exact returns sorted tuples; the first is the lex-least.
        rep.push(grid.position(&orbit_points[0]).expect("present"));
        ids.sort_unstable();
        members.push(ids);
    }
    Ok(Orbits { orbit_of, members, rep })
}

/// The permutation of point ids induced by `g` on a G-stable grid.
pub fn point_map(grid: &Grid, g: &Permutation) -> Result<Vec<usize>, SymmetryError> {
    let mut map = Vec::with_capacity(grid.len());
    for (id, p) in grid.points.iter().enumerate() {
        match grid.position(&act_exact(g, p)) {
            Some(target) => map.push(target),
            None => return Err(SymmetryError::NonSymmetricSupport { missing_of: id }),
        }
    }
    Ok(map)
}

/// Replace each value by its orbit average. Idempotent, and the output is
/// exactly constant on orbits. Works for potentials (value averaging) and
/// measure weights (orbit-mass averaging) alike.
pub fn symmetrize_values(orbits: &Orbits, values: &[f64]) -> Result<Vec<f64>, SymmetryError> {
    if values.len() != orbits.orbit_of.len() {
        return Err(SymmetryError::LengthMismatch {
            values: values.len(),
            samples: orbits.orbit_of.len(),
        });
    }
    let mut out = vec![0.0; values.len()];
    for ids in &orbits.members {
        // Orbits that are already constant are copied through unchanged so
        // that symmetrization is exactly idempotent (re-averaging k equal
        // floats can perturb the last ulp).
        let first = values[ids[0]];
        let mean = if ids.iter().all(|&i| values[i] == first) {
            first
        } else {
            ids.iter().map(|&i| values[i]).sum::<f64>() / ids.len() as f64
        };
        for &i in ids {
            out[i] = mean;
        }
    }
    Ok(out)
}

/// Largest deviation from orbit-constancy, `max |f(gx) − f(x)|` over
/// generators; zero exactly for symmetrized data.
pub fn symmetry_residual(grid: &Grid, values: &[f64]) -> Result<f64, SymmetryError> {
    let n = grid.points.first().map(|p| p.num.len()).unwrap_or(0);
    if n == 0 {
        return Ok(0.0);
    }
    let mut worst: f64 = 0.0;
    for g in generators(n) {
        let map = point_map(grid, &g)?;
        for (id, &target) in map.iter().enumerate() {
            worst = worst.max((values[id] - values[target]).abs());
        }
    }
    Ok(worst)
}

/// One representative per orbit with its multiplicity; multiplicities sum
/// to the number of points.
pub fn fundamental_domain(orbits: &Orbits) -> Vec<(usize, usize)> {
    orbits
        .rep
        .iter()
        .zip(&orbits.members)
        .map(|(&rep, members)| (rep, members.len()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        pairing, pairing_exact, sample_grid, vertices, classify, Side,
    };
    use alloc::vec;

    #[test]
    fn identity_and_transposition() {
        let p = SimplexPoint::new(Side::A, vec![1.0, 0.0, 0.0]).unwrap();
        let id = Permutation::identity(3);
        assert_eq!(act(&id, &p), p);
        let g = Permutation::transposition(3, 0, 1);
        assert_eq!(act(&g, &p).bary, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn from_image_rejects_non_bijections() {
        assert!(Permutation::from_image(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_image(vec![0, 3, 1]).is_err());
        assert!(Permutation::from_image(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn action_is_a_group_action() {
        let p = SimplexPoint::new(Side::A, vec![0.5, 0.3, 0.2, 0.0]).unwrap();
        for g in all_permutations(4) {
            for h in all_permutations(4) {
                let gh = g.compose(&h);
                assert_eq!(act(&gh, &p).bary, act(&g, &act(&h, &p)).bary);
            }
        }
    }

    #[test]
    fn pairing_is_invariant_under_diagonal_action() {
        let m = BaryExact::new(vec![3, 1, 0, 2], 6);
        let n = BaryExact::new(vec![0, 2, 3, 1], 6);
        let base = pairing_exact(&m, &n);
        for g in all_permutations(4) {
            assert_eq!(pairing_exact(&act_exact(&g, &m), &act_exact(&g, &n)), base);
        }
        // Float pairing agrees bitwise thanks to order-independent summation.
        let pm = m.to_point(Side::A);
        let pn = n.to_point(Side::B);
        let fbase = pairing(&pm, &pn).unwrap();
        for g in all_permutations(4) {
            let lhs = pairing(&act(&g, &pm), &act(&g, &pn)).unwrap();
            assert_eq!(lhs.to_bits(), fbase.to_bits());
        }
    }

    #[test]
    fn transposition_identity_example() {
        // d=1: m = ½m_0 + ½m_1, n with β = (0,⅓,⅔), g = (1 2).
        // ⟨m, g(n)⟩ − ⟨m, n⟩ = (d+2)(α_2−α_1)(β_2−β_1) = 3·(−½)·(⅓) = −½,
        // cross-checked by direct evaluation of both pairings.
        let m = BaryExact::new(vec![1, 1, 0], 2);
        let n = BaryExact::new(vec![0, 1, 2], 3);
        let g = Permutation::transposition(3, 1, 2);
        let delta = pairing_exact(&m, &act_exact(&g, &n)) - pairing_exact(&m, &n);
        assert_eq!(delta, num_rational::Ratio::new(-1i128, 2));
        let pm = m.to_point(Side::A);
        let pn = n.to_point(Side::B);
        let fdelta = pairing(&pm, &act(&g, &pn)).unwrap() - pairing(&pm, &pn).unwrap();
        assert!((fdelta + 0.5).abs() < 1e-15);
    }

    #[test]
    fn transposition_identity_random_exact() {
        // (d+2)(α_l−α_j)(β_l−β_j) for transposition (j l), exactly, on grid points.
        let ga = sample_grid(Side::A, 2, 3, None).unwrap();
        let gb = sample_grid(Side::B, 2, 2, None).unwrap();
        for (pi, m) in ga.points.iter().enumerate().step_by(7) {
            for n in gb.points.iter().skip(pi % 3).step_by(5) {
                for j in 0..4 {
                    for l in j + 1..4 {
                        let g = Permutation::transposition(4, j, l);
                        let lhs = pairing_exact(m, &act_exact(&g, n)) - pairing_exact(m, n);
                        let al = num_rational::Ratio::new(m.num[l] as i128, m.den as i128);
                        let aj = num_rational::Ratio::new(m.num[j] as i128, m.den as i128);
                        let bl = num_rational::Ratio::new(n.num[l] as i128, n.den as i128);
                        let bj = num_rational::Ratio::new(n.num[j] as i128, n.den as i128);
                        let rhs = (al - aj) * (bl - bj) * num_rational::Ratio::from_integer(4i128);
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn orbit_stabilizer_theorem_on_vertices() {
        // Vertex of A at d=3: orbit size 5, stabilizer order 4! = 24.
        let v = BaryExact::new(vec![1, 0, 0, 0, 0], 1);
        let orb = orbit_exact(&v);
        assert_eq!(orb.len(), 5);
        let (_, order) = stabilizer(&v);
        assert_eq!(order, 24);
        assert_eq!(orb.len() as u64 * order, factorial(5));
    }

    #[test]
    fn generic_singular_edge_point_has_stabilizer_four() {
        // d=3, point of A_IJ° with |I|=|J|=2 and a distinct middle value:
        // stabilizer is exactly G_I × G_J, order 2·2 = 4. Checked against
        // brute force over all 120 permutations.
        let p = BaryExact::new(vec![5, 5, 2, 0, 0], 12);
        let (gens, order) = stabilizer(&p);
        assert_eq!(order, 4);
        for g in &gens {
            assert_eq!(act_exact(g, &p), p);
        }
        let brute = all_permutations(5)
            .iter()
            .filter(|g| act_exact(g, &p) == p)
            .count() as u64;
        assert_eq!(brute, 4);
        assert_eq!(orbit_exact(&p).len() as u64 * order, factorial(5));
    }

    #[test]
    fn classify_is_equivariant() {
        let grid = sample_grid(Side::A, 2, 3, None).unwrap();
        for g in all_permutations(4).iter().step_by(5) {
            for p in grid.points.iter().step_by(3) {
                let lhs = act_exact(g, p).classify();
                let rhs = p.classify().permuted(g.image());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn grid_orbit_decomposition_and_fundamental_domain() {
        let grid = sample_grid(Side::A, 3, 2, None).unwrap();
        let orbits = grid_orbits(&grid).unwrap();
        let fd = fundamental_domain(&orbits);
        let total: usize = fd.iter().map(|&(_, m)| m).sum();
        assert_eq!(total, grid.len());

        // The d+2 vertices form a single orbit of multiplicity d+2.
        let vert = BaryExact::new(vec![0, 0, 0, 0, 1], 1);
        let vid = grid.position(&vert).unwrap();
        let vorbit = orbits.orbit_of[vid];
        assert_eq!(orbits.members[vorbit].len(), 5);
        assert_eq!(grid.points[orbits.rep[vorbit]], vert);

        // Midpoints of the singular edges: one orbit of multiplicity 30.
        let edge_mid = BaryExact::new(vec![5, 5, 2, 0, 0], 12);
        let eid = grid.position(&edge_mid).expect("edge midpoints are in the r=2 grid");
        assert_eq!(orbits.members[orbits.orbit_of[eid]].len(), 30);
    }

    #[test]
    fn symmetrize_is_idempotent_and_rejects_bad_support() {
        let grid = sample_grid(Side::A, 2, 2, None).unwrap();
        let orbits = grid_orbits(&grid).unwrap();
        // A deterministic non-symmetric value assignment.
        let values: Vec<f64> = (0..grid.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let sym = symmetrize_values(&orbits, &values).unwrap();
        let twice = symmetrize_values(&orbits, &sym).unwrap();
        assert_eq!(sym, twice);
        assert!(symmetry_residual(&grid, &sym).unwrap() <= 1e-12);

        // Indicator mass at one vertex symmetrizes to the uniform vertex orbit.
        let vert = BaryExact::new(vec![1, 0, 0, 0], 1);
        let vid = grid.position(&vert).unwrap();
        let mut mass = vec![0.0; grid.len()];
        mass[vid] = 1.0;
        let sym_mass = symmetrize_values(&orbits, &mass).unwrap();
        let vorbit = orbits.orbit_of[vid];
        for &member in &orbits.members[vorbit] {
            assert!((sym_mass[member] - 0.25).abs() < 1e-15);
        }
        assert!((sym_mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        // classify returns the grid's own labels; equivariance of the float
        // classify at default tolerance.
        for p in grid.points.iter().take(5) {
            let sp = p.to_point(Side::A);
            assert_eq!(classify(&sp, 1e-9), p.classify());
        }
    }

    #[test]
    fn vertices_pair_with_orbits() {
        // The vertex list and the grid vertex orbit agree.
        let verts = vertices(2).unwrap();
        assert_eq!(verts.len(), 4);
    }
}
