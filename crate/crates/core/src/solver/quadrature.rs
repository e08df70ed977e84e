//! Quadrature weights for the subdivision grid: mass-lumped cell volumes.
//!
//! Each facet of the boundary carries volume `1/(d+2)` (total mass one).
//! The facet splits into `(d+1)!` equal subdivision simplices; each of
//! those splits into `r^d` equal cells of its order-`r` lattice under the
//! standard staircase triangulation. A node's lumped volume is
//! `Σ_{cells ∋ node} vol(cell)/(d+1)`, an exact rational, and the lumped
//! volumes sum to one. Weights of a measure are `density × volume`,
//! normalized and orbit-averaged.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::geometry::{BaryExact, Grid};

/// Exact lumped cell volume per grid node. Requires an unfiltered grid
/// (every lattice node present); returns `None` when a node is missing.
pub fn cell_volumes(grid: &Grid) -> Option<Vec<Ratio<i64>>> {
    let d = grid.dim;
    let n = d + 2;
    let r = grid.resolution as i64;
    let den_lattice = r * lcm_up_to((d + 1) as i64);

    let mut counts: Vec<i64> = vec![0; grid.len()];

    let mut facet_vertices: Vec<usize> = Vec::with_capacity(n - 1);
    for facet in 0..n {
        facet_vertices.clear();
        facet_vertices.extend((0..n).filter(|&k| k != facet));
        for chain in permutations(&facet_vertices) {
            // Subdivision simplex with vertices b_{T_1} ⊂ … ⊂ b_{T_{d+1}}:
            // accumulate incidences of its order-r staircase cells.
            // Work in the d-dimensional "staircase" coordinates
            // y ∈ Z^d with r ≥ y_1 ≥ … ≥ y_d ≥ 0; the lattice point with
            // those coordinates is Σ c_k b_{T_k} / r with c read off the
            // successive differences.
            for base in staircase_points(r - 1, d) {
                'perm: for perm in permutations(&(0..d).collect::<Vec<_>>()) {
                    // Cell vertices: partial sums of unit steps.
                    let mut y = base.clone();
                    let mut cell_ids = Vec::with_capacity(d + 1);
                    match node_id(grid, &chain, &y, r, den_lattice) {
                        Some(id) => cell_ids.push(id),
                        None => return None,
                    }
                    for &axis in &perm {
                        y[axis] += 1;
                        if !is_staircase(&y, r) {
                            continue 'perm;
                        }
                        match node_id(grid, &chain, &y, r, den_lattice) {
                            Some(id) => cell_ids.push(id),
                            None => return None,
                        }
                    }
                    for id in cell_ids {
                        counts[id] += 1;
                    }
                }
            }
        }
    }

    // Each incidence contributes vol(cell)/(d+1) with
    // vol(cell) = 1 / ((d+2)·(d+1)!·r^d).
    let mut cell_den: i64 = (n as i64) * (d as i64 + 1);
    for k in 1..=(d as i64 + 1) {
        cell_den *= k;
    }
    for _ in 0..d {
        cell_den *= r;
    }
    Some(counts.iter().map(|&c| Ratio::new(c, cell_den)).collect())
}

/// Lattice point of the subdivision simplex `chain` at staircase
/// coordinates `y`, as a grid id.
fn node_id(
    grid: &Grid,
    chain: &[usize],
    y: &[i64],
    r: i64,
    den: i64,
) -> Option<usize> {
    let d = y.len();
    let n = grid.dim + 2;
    // c_0 = r − y_1, c_k = y_k − y_{k+1}, c_d = y_d; point = Σ c_k b_{T_{k+1}}.
    let mut num = vec![0i64; n];
    for level in 0..=d {
        let c = if level == 0 {
            r - y[0]
        } else if level == d {
            y[d - 1]
        } else {
            y[level - 1] - y[level]
        };
        if c == 0 {
            continue;
        }
        let t = (level + 1) as i64;
        let share = c * (den / (r * t));
        for &v in &chain[..=level] {
            num[v] += share;
        }
    }
    grid.position(&BaryExact::new(num, den))
}

fn is_staircase(y: &[i64], r: i64) -> bool {
    let mut prev = r;
    for &v in y {
        if v > prev || v < 0 {
            return false;
        }
        prev = v;
    }
    true
}

/// All integer points with `cap ≥ y_1 ≥ … ≥ y_d ≥ 0`.
fn staircase_points(cap: i64, d: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut work = vec![0i64; d];
    fill_staircase(cap, 0, &mut work, &mut out);
    out
}

fn fill_staircase(cap: i64, level: usize, work: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if level == work.len() {
        out.push(work.clone());
        return;
    }
    for v in 0..=cap {
        work[level] = v;
        fill_staircase(v, level + 1, work, out);
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut work = items.to_vec();
    permute(&mut work, 0, &mut out);
    out
}

fn permute(work: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == work.len() {
        out.push(work.clone());
        return;
    }
    for i in k..work.len() {
        work.swap(k, i);
        permute(work, k + 1, out);
        work.swap(k, i);
    }
}

fn lcm_up_to(k: i64) -> i64 {
    use num_integer::Integer;
    let mut l = 1i64;
    for x in 1..=k {
        l = l.lcm(&x);
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_grid, Side};
    use num_traits::Zero;

    #[test]
    fn volumes_are_positive_and_sum_to_one() {
        for (d, r) in [(1usize, 3u32), (2, 2), (3, 2)] {
            let grid = sample_grid(Side::A, d, r, None).unwrap();
            let vols = cell_volumes(&grid).unwrap();
            assert_eq!(vols.len(), grid.len());
            let total: Ratio<i64> = vols.iter().cloned().fold(Ratio::zero(), |a, b| a + b);
            assert_eq!(total, Ratio::new(1, 1), "d={d} r={r}");
            assert!(vols.iter().all(|v| *v > Ratio::zero()));
        }
    }

    #[test]
    fn interior_nodes_outweigh_vertices() {
        // d=1: a facet is an edge of length 1/3 split into 2r cells; end
        // nodes get half a cell, interior nodes one cell — but original
        // vertices belong to two facets, so they match interior nodes.
        let grid = sample_grid(Side::A, 1, 2, None).unwrap();
        let vols = cell_volumes(&grid).unwrap();
        let cell = Ratio::new(1, 3 * 4); // facet volume 1/3, 4 cells each
        for (p, v) in grid.points.iter().zip(&vols) {
            let n_ones = p.num.iter().filter(|&&x| x == p.den).count();
            if n_ones == 1 {
                // A vertex of Δ: two half-cells from the two incident edges.
                assert_eq!(*v, cell);
            }
        }
    }
}
