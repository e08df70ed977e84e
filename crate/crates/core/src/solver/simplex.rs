//! Transportation simplex on a dense bipartite problem.
//!
//! Maximizes `Σ π_ij · gain(i,j)` over couplings with prescribed marginals.
//! The basis is a spanning tree of the bipartite graph; potentials `(u, v)`
//! satisfy `u_i + v_j = gain(i,j)` on tree arcs and certify optimality when
//! `u_i + v_j ≥ gain(i,j) − ε` everywhere. Entering arcs are chosen by the
//! largest reduced gain with lexicographic tie-breaking; after a run of
//! degenerate pivots the rule switches to Bland's (first improving arc in
//! lexicographic order), which prevents cycling on the highly degenerate
//! symmetric instances this crate produces.
//!
//! The scalar is generic: `f64` for production solves (the duality gap is
//! the exactness certificate) and arbitrary-precision rationals for the
//! rational-safe oracle used in tests.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::Zero;

/// Minimal scalar interface for the simplex.
pub trait SimplexScalar: Clone + PartialOrd {
    fn zero_value() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    /// `|self| ≤ eps`.
    fn within(&self, eps: &Self) -> bool;
}

impl SimplexScalar for f64 {
    fn zero_value() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn within(&self, eps: &Self) -> bool {
        self.abs() <= *eps
    }
}

impl SimplexScalar for BigRational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn within(&self, eps: &Self) -> bool {
        let a = if self < &Zero::zero() { -self.clone() } else { self.clone() };
        a <= *eps
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SimplexError {
    /// Supplies and demands do not balance.
    Unbalanced,
    /// Pivot cap exceeded (indicates a bug, not a hard instance).
    IterationCap { pivots: usize },
    Internal(String),
}

impl fmt::Display for SimplexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimplexError::Unbalanced => write!(f, "total supply does not equal total demand"),
            SimplexError::IterationCap { pivots } => {
                write!(f, "pivot cap exceeded after {pivots} pivots")
            }
            SimplexError::Internal(s) => write!(f, "internal simplex error: {s}"),
        }
    }
}

impl core::error::Error for SimplexError {}

/// An optimal basis: basic arcs with flows, and dual potentials.
#[derive(Clone, Debug)]
pub struct TransportBasis<T> {
    /// Basic arcs `(i, j, flow)`; degenerate arcs carry zero flow.
    pub arcs: Vec<(usize, usize, T)>,
    /// Dual potentials with `u_i + v_j ≥ gain(i,j)` at optimality.
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub pivots: usize,
    pub degenerate_pivots: usize,
}

struct Tree<T> {
    m: usize,
    n: usize,
    arcs: Vec<(usize, usize, T)>,
    /// node → incident basic arc ids (nodes: 0..m are sources, m..m+n sinks).
    adjacency: Vec<Vec<usize>>,
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    u: Vec<T>,
    v: Vec<T>,
}

impl<T: SimplexScalar> Tree<T> {
    fn rebuild_adjacency(&mut self) {
        for adj in self.adjacency.iter_mut() {
            adj.clear();
        }
        for (id, &(i, j, _)) in self.arcs.iter().enumerate() {
            self.adjacency[i].push(id);
            self.adjacency[self.m + j].push(id);
        }
    }

    /// BFS from node 0: potentials and parent pointers.
    fn refresh(&mut self, gain: &impl Fn(usize, usize) -> T) -> Result<(), SimplexError> {
        let total = self.m + self.n;
        for x in self.parent.iter_mut() {
            *x = usize::MAX;
        }
        self.parent[0] = 0;
        self.depth[0] = 0;
        self.u[0] = T::zero_value();
        let mut queue = vec![0usize];
        let mut head = 0;
        let mut visited = 1;
        while head < queue.len() {
            let node = queue[head];
            head += 1;
            for &arc_id in &self.adjacency[node] {
                let (i, j, _) = self.arcs[arc_id].clone();
                let other = if node < self.m { self.m + j } else { i };
                if self.parent[other] != usize::MAX {
                    continue;
                }
                self.parent[other] = node;
                self.parent_arc[other] = arc_id;
                self.depth[other] = self.depth[node] + 1;
                if other < self.m {
                    // u_i = gain − v_j
                    self.u[other] = gain(i, j).sub(&self.v[j]);
                } else {
                    self.v[other - self.m] = gain(i, j).sub(&self.u[i]);
                }
                queue.push(other);
                visited += 1;
            }
        }
        if visited != total {
            return Err(SimplexError::Internal(String::from("basis tree is disconnected")));
        }
        Ok(())
    }

    /// The unique cycle created by adding arc `(ei, ej)`: returns the arc
    /// ids of the tree path from sink node `ej` to source node `ei`, in
    /// traversal order (alternating signs start with − on the first entry).
    fn cycle_path(&self, ei: usize, ej: usize) -> Vec<usize> {
        let mut a = ei; // source node id
        let mut b = self.m + ej; // sink node id
        let mut from_b: Vec<usize> = Vec::new();
        let mut from_a: Vec<usize> = Vec::new();
        while self.depth[b] > self.depth[a] {
            from_b.push(self.parent_arc[b]);
            b = self.parent[b];
        }
        while self.depth[a] > self.depth[b] {
            from_a.push(self.parent_arc[a]);
            a = self.parent[a];
        }
        while a != b {
            from_b.push(self.parent_arc[b]);
            b = self.parent[b];
            from_a.push(self.parent_arc[a]);
            a = self.parent[a];
        }
        from_b.extend(from_a.iter().rev());
        from_b
    }
}

/// Solve the balanced transportation problem, maximizing total gain.
///
/// `pivot_eps` is the optimality slack (reduced gains above it trigger a
/// pivot); `flow_eps` decides when a flow counts as zero; `iteration_cap`
/// bounds pivots.
pub fn solve_transport<T: SimplexScalar>(
    supplies: &[T],
    demands: &[T],
    gain: impl Fn(usize, usize) -> T,
    pivot_eps: T,
    flow_eps: T,
    iteration_cap: usize,
) -> Result<TransportBasis<T>, SimplexError> {
    let m = supplies.len();
    let n = demands.len();
    assert!(m > 0 && n > 0);
    let total_sup = supplies.iter().fold(T::zero_value(), |acc, x| acc.add(x));
    let total_dem = demands.iter().fold(T::zero_value(), |acc, x| acc.add(x));
    if !total_sup.sub(&total_dem).within(&pivot_eps_scale(&pivot_eps, &flow_eps)) {
        return Err(SimplexError::Unbalanced);
    }

    // Northwest-corner initial basis: m+n−1 arcs, degenerate ones included.
    let mut arcs: Vec<(usize, usize, T)> = Vec::with_capacity(m + n - 1);
    {
        let mut a = supplies.to_vec();
        let mut b = demands.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let theta = if a[i] < b[j] { a[i].clone() } else { b[j].clone() };
            arcs.push((i, j, theta.clone()));
            a[i] = a[i].sub(&theta);
            b[j] = b[j].sub(&theta);
            if i + 1 == m && j + 1 == n {
                break;
            }
            if a[i].within(&flow_eps) && i + 1 < m {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
    debug_assert_eq!(arcs.len(), m + n - 1);

    let mut tree = Tree {
        m,
        n,
        arcs,
        adjacency: vec![Vec::new(); m + n],
        parent: vec![usize::MAX; m + n],
        parent_arc: vec![usize::MAX; m + n],
        depth: vec![0; m + n],
        u: vec![T::zero_value(); m],
        v: vec![T::zero_value(); n],
    };

    let mut pivots = 0usize;
    let mut degenerate_pivots = 0usize;
    let mut degenerate_run = 0usize;
    let mut bland = false;

    loop {
        tree.rebuild_adjacency();
        tree.refresh(&gain)?;

        // Entering arc.
        let mut entering: Option<(usize, usize, T)> = None;
        'scan: for i in 0..m {
            for j in 0..n {
                let reduced = gain(i, j).sub(&tree.u[i]).sub(&tree.v[j]);
                if reduced > pivot_eps {
                    match (&mut entering, bland) {
                        (_, true) => {
                            entering = Some((i, j, reduced));
                            break 'scan;
                        }
                        (Some((_, _, best)), false) if reduced <= *best => {}
                        _ => entering = Some((i, j, reduced)),
                    }
                }
            }
        }
        let Some((ei, ej, _)) = entering else {
            break;
        };

        if pivots >= iteration_cap {
            return Err(SimplexError::IterationCap { pivots });
        }
        pivots += 1;

        // Flow change along the cycle: signs alternate, − on odd positions
        // (the entering arc is position 0 with +).
        let path = tree.cycle_path(ei, ej);
        let mut theta: Option<T> = None;
        let mut leaving: Option<usize> = None;
        for (pos, &arc_id) in path.iter().enumerate() {
            if pos % 2 == 0 {
                let flow = &tree.arcs[arc_id].2;
                let smaller = match &theta {
                    None => true,
                    Some(t) => flow < t,
                };
                if smaller {
                    theta = Some(flow.clone());
                    leaving = Some(arc_id);
                }
            }
        }
        let theta = theta.ok_or_else(|| SimplexError::Internal(String::from("empty cycle")))?;
        let leaving = leaving.expect("leaving arc with theta");

        if theta.within(&flow_eps) {
            degenerate_pivots += 1;
            degenerate_run += 1;
            if degenerate_run > 40 {
                bland = true;
            }
        } else {
            degenerate_run = 0;
            bland = false;
        }

        for (pos, &arc_id) in path.iter().enumerate() {
            let flow = &tree.arcs[arc_id].2;
            tree.arcs[arc_id].2 =
                if pos % 2 == 0 { flow.sub(&theta) } else { flow.add(&theta) };
            // Clamp float dust on the decreased arcs.
            if pos % 2 == 0 && tree.arcs[arc_id].2.within(&flow_eps) {
                tree.arcs[arc_id].2 = T::zero_value();
            }
        }
        tree.arcs[leaving] = (ei, ej, theta);
    }

    Ok(TransportBasis {
        arcs: tree.arcs,
        u: tree.u,
        v: tree.v,
        pivots,
        degenerate_pivots,
    })
}

fn pivot_eps_scale<T: SimplexScalar>(pivot_eps: &T, flow_eps: &T) -> T {
    // Balance check tolerance: the larger of the two.
    if pivot_eps > flow_eps {
        pivot_eps.clone()
    } else {
        flow_eps.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn solve_f64(
        sup: &[f64],
        dem: &[f64],
        gain: &[Vec<f64>],
    ) -> TransportBasis<f64> {
        solve_transport(
            sup,
            dem,
            |i, j| gain[i][j],
            1e-12,
            1e-15,
            10_000,
        )
        .unwrap()
    }

    fn primal_value(basis: &TransportBasis<f64>, gain: &[Vec<f64>]) -> f64 {
        basis.arcs.iter().map(|&(i, j, f)| f * gain[i][j]).sum()
    }

    fn dual_value(basis: &TransportBasis<f64>, sup: &[f64], dem: &[f64]) -> f64 {
        let a: f64 = basis.u.iter().zip(sup).map(|(u, s)| u * s).sum();
        let b: f64 = basis.v.iter().zip(dem).map(|(v, d)| v * d).sum();
        a + b
    }

    #[test]
    fn assignment_picks_the_diagonal() {
        // gain has a dominant diagonal; the optimal coupling is diagonal.
        let sup = vec![0.25; 4];
        let dem = vec![0.25; 4];
        let gain: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let basis = solve_f64(&sup, &dem, &gain);
        let value = primal_value(&basis, &gain);
        assert!((value - 1.0).abs() < 1e-12);
        assert!((dual_value(&basis, &sup, &dem) - value).abs() < 1e-12);
    }

    #[test]
    fn marginals_and_gap_on_random_instance() {
        // Deterministic pseudo-random gains; checks feasibility of the
        // coupling, feasibility of the duals, and complementary slackness.
        let m = 13;
        let n = 9;
        let sup: Vec<f64> = (0..m).map(|i| (i + 1) as f64).collect();
        let sum_s: f64 = sup.iter().sum();
        let sup: Vec<f64> = sup.iter().map(|s| s / sum_s).collect();
        let dem: Vec<f64> = (0..n).map(|j| ((j * 7) % 5 + 1) as f64).collect();
        let sum_d: f64 = dem.iter().sum();
        let dem: Vec<f64> = dem.iter().map(|d| d / sum_d).collect();
        let gain: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..n)
                    .map(|j| (((i * 31 + j * 17) % 23) as f64 * 0.07).sin())
                    .collect()
            })
            .collect();
        let basis = solve_f64(&sup, &dem, &gain);

        let mut row = vec![0.0; m];
        let mut col = vec![0.0; n];
        for &(i, j, f) in &basis.arcs {
            assert!(f >= 0.0);
            row[i] += f;
            col[j] += f;
        }
        for (r, s) in row.iter().zip(&sup) {
            assert!((r - s).abs() < 1e-12);
        }
        for (c, d) in col.iter().zip(&dem) {
            assert!((c - d).abs() < 1e-12);
        }
        // Dual feasibility and zero gap.
        for i in 0..m {
            for j in 0..n {
                assert!(basis.u[i] + basis.v[j] >= gain[i][j] - 1e-10);
            }
        }
        let gap = dual_value(&basis, &sup, &dem) - primal_value(&basis, &gain);
        assert!(gap.abs() < 1e-10, "gap {gap}");
        // Complementary slackness on the support.
        for &(i, j, f) in &basis.arcs {
            if f > 1e-12 {
                assert!((basis.u[i] + basis.v[j] - gain[i][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_symmetric_instance_terminates() {
        // All gains equal: everything is optimal and every pivot would be
        // degenerate; the solver must stop immediately at the NW basis.
        let sup = vec![0.2; 5];
        let dem = vec![0.25; 4];
        let gain = vec![vec![1.0; 4]; 5];
        let basis = solve_f64(&sup, &dem, &gain);
        assert_eq!(basis.pivots, 0);
        let value = primal_value(&basis, &gain);
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rational_solve_is_exactly_optimal() {
        let rat = |p: i64, q: i64| BigRational::new(p.into(), q.into());
        let sup = vec![rat(1, 3), rat(1, 3), rat(1, 3)];
        let dem = vec![rat(1, 2), rat(1, 2)];
        let gains = [[rat(2, 1), rat(0, 1)], [rat(1, 2), rat(1, 2)], [rat(0, 1), rat(3, 1)]];
        let basis = solve_transport(
            &sup,
            &dem,
            |i, j| gains[i][j].clone(),
            BigRational::zero(),
            BigRational::zero(),
            1000,
        )
        .unwrap();
        let primal = basis
            .arcs
            .iter()
            .fold(BigRational::zero(), |acc, (i, j, f)| acc + f * &gains[*i][*j]);
        let dual = basis
            .u
            .iter()
            .zip(&sup)
            .fold(BigRational::zero(), |acc, (u, s)| acc + u * s)
            + basis
                .v
                .iter()
                .zip(&dem)
                .fold(BigRational::zero(), |acc, (v, d)| acc + v * d);
        assert_eq!(primal, dual, "rational gap must be exactly zero");
        // Optimal value worked out by hand: put 1/3 on (0,0), 1/6 on (1,0),
        // 1/6 on (1,1), 1/3 on (2,1): 2/3 + 1/12 + 1/12 + 1 = 11/6.
        assert_eq!(primal, rat(11, 6));
    }

    #[test]
    fn unbalanced_is_rejected() {
        let sup = vec![0.6, 0.6];
        let dem = vec![0.5, 0.5];
        let r = solve_transport(&sup, &dem, |_, _| 0.0, 1e-12, 1e-15, 100);
        assert!(matches!(r, Err(SimplexError::Unbalanced)));
    }
}
