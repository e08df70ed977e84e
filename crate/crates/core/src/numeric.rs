//! Small numeric helpers shared across modules: order-independent summation,
//! a total order on finite floats, dense solvers for the tiny linear systems
//! arising in local quadratic fits, and rational exponents recovered from
//! floating-point input.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// Sum of at most `N` products in a canonical order.
///
/// Summing floats is order-dependent, so a permutation-invariant quantity
/// (like the pairing of permuted coordinate tuples) computed by a naive loop
/// can differ between group-related inputs by an ulp, which is enough to
/// flip an argmax. Sorting the terms first makes the result depend only on
/// the multiset of terms, so equivariant quantities come out bitwise equal.
pub fn sorted_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(total_cmp);
    let mut acc = 0.0;
    for &t in terms.iter() {
        acc += t;
    }
    acc
}

fn total_cmp(a: &f64, b: &f64) -> core::cmp::Ordering {
    a.total_cmp(b)
}

/// `f64` wrapper with a total order, for use as a priority-queue key.
/// NaN is considered larger than everything (it sorts last in a min-queue).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Solve the dense symmetric positive system `A x = b` in place by Gaussian
/// elimination with partial pivoting. `a` is row-major `n×n`. Returns `None`
/// when the system is numerically singular.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best < 1e-14 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * x[k];
        }
        x[col] = s / a[col * n + col];
    }
    Some(x)
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns
/// (`vecs[r * n + c]` is component `r` of eigenvector `c`).
pub fn symmetric_eigen(mat: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(mat.len(), n * n);
    let mut a = mat.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-30 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigs = (0..n).map(|i| a[i * n + i]).collect();
    (eigs, v)
}

/// Clip a symmetric matrix to the positive semidefinite cone by zeroing
/// negative eigenvalues. Returns the clipped matrix and the most negative
/// eigenvalue encountered (0.0 when the input was already PSD).
pub fn clip_psd(mat: &[f64], n: usize) -> (Vec<f64>, f64) {
    let (eigs, vecs) = symmetric_eigen(mat, n);
    let worst = eigs.iter().cloned().fold(0.0_f64, f64::min);
    if worst >= 0.0 {
        return (mat.to_vec(), 0.0);
    }
    let mut out = vec![0.0; n * n];
    for (k, &lam) in eigs.iter().enumerate() {
        let lam = lam.max(0.0);
        if lam == 0.0 {
            continue;
        }
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] += lam * vecs[r * n + k] * vecs[c * n + k];
            }
        }
    }
    (out, worst)
}

/// Binomial coefficient as u64; panics on overflow (only used at desk scale).
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// A small rational exponent `num/den`, `den > 0`.
///
/// Used for the exponents α and β of the interval-bound verification, where
/// comparisons of the form `r ≤ c · w^(num/den)` can be decided exactly in
/// rational arithmetic by raising both sides to the `den`-th power.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RatExp {
    pub num: i64,
    pub den: i64,
}

impl RatExp {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den > 0, "exponent denominator must be positive");
        let g = gcd_i64(num.unsigned_abs(), den.unsigned_abs()) as i64;
        RatExp { num: num / g, den: den / g }
    }

    /// Recover a small rational from a float by continued fractions.
    /// Returns `None` if no fraction with denominator ≤ `max_den` reproduces
    /// the input exactly (as an f64); callers then fall back to guarded
    /// floating-point comparisons.
    pub fn from_f64(x: f64, max_den: i64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.floor() as i64, 1i64);
        let mut frac = x - x.floor();
        for _ in 0..64 {
            if q1 > max_den {
                return None;
            }
            if (p1 as f64) / (q1 as f64) == x {
                return Some(RatExp::new(p1, q1));
            }
            if frac == 0.0 {
                return None;
            }
            let inv = 1.0 / frac;
            let a = inv.floor();
            frac = inv - a;
            let a = a as i64;
            let p2 = a.checked_mul(p1)?.checked_add(p0)?;
            let q2 = a.checked_mul(q1)?.checked_add(q0)?;
            p0 = p1;
            q0 = q1;
            p1 = p2;
            q1 = q2;
        }
        None
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd_i64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd_i64(b, a % b)
    }
}

/// Least-squares line fit `y ≈ slope·x + intercept`; returns
/// `(slope, intercept, r_squared)`. Needs at least two distinct x values.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx < 1e-300 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy < 1e-300 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some((slope, intercept, r2))
}
