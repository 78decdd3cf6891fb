//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for
//! eigenvalues, inverse iteration with partially pivoted tridiagonal solves
//! for eigenvectors. Radial finite-difference Hamiltonians have simple,
//! well-separated spectra, which is exactly the regime where this pair of
//! algorithms is robust and O(n) per eigenpair.

use crate::error::{Error, Result};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct SymTridiag {
    /// Main diagonal, length n.
    pub diag: Vec<f64>,
    /// Off-diagonal, length n - 1.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal must have length n-1");
        Self { diag, off }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin bounds (lo, hi) containing the whole spectrum.
    pub fn spectrum_bounds(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i < n - 1 {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence / LDL^T
    /// inertia count).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.n();
        let mut count = 0usize;
        let mut d = self.diag[0] - x;
        if d < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let b2 = self.off[i - 1] * self.off[i - 1];
            if d == 0.0 {
                // standard guard against exact zero pivots
                d = f64::MIN_POSITIVE.sqrt();
            }
            d = (self.diag[i] - x) - b2 / d;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// k-th eigenvalue (ascending, 0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.spectrum_bounds();
        self.bisect_into(k, &mut lo, &mut hi);
        0.5 * (lo + hi)
    }

    fn bisect_into(&self, k: usize, lo: &mut f64, hi: &mut f64) {
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let tol = 4.0 * f64::EPSILON * scale;
        for _ in 0..128 {
            if *hi - *lo <= tol {
                break;
            }
            let mid = 0.5 * (*lo + *hi);
            if self.count_below(mid) > k {
                *hi = mid;
            } else {
                *lo = mid;
            }
        }
    }

    /// The `count` lowest eigenvalues, ascending. Bisections for distinct
    /// indices are independent and run in parallel.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        self.eigenvalue_range(0, count.min(self.n()))
    }

    /// Eigenvalues with indices in `from..to` (ascending), in parallel.
    pub fn eigenvalue_range(&self, from: usize, to: usize) -> Vec<f64> {
        let to = to.min(self.n());
        (from..to).into_par_iter().map(|k| self.eigenvalue(k)).collect()
    }

    /// Eigenvector for an eigenvalue `lambda` by inverse iteration.
    /// `ortho` holds previously computed vectors of near-degenerate
    /// eigenvalues to orthogonalize against. Returns a unit vector.
    pub fn eigenvector(&self, lambda: f64, ortho: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.n();
        let lu = TridiagLu::factor(self, lambda);
        let (lo, hi) = self.spectrum_bounds();
        let scale = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);

        // deterministic pseudo-random start vector
        let mut x: Vec<f64> = {
            let mut state = 0x9e37_79b9_7f4a_7c15u64 ^ (n as u64).wrapping_mul(0x2545_f491_4f6c_dd1d);
            (0..n)
                .map(|_| {
                    state = state
                        .wrapping_mul(6_364_136_223_846_793_005)
                        .wrapping_add(1_442_695_040_888_963_407);
                    ((state >> 11) as f64) / (1u64 << 53) as f64 - 0.5
                })
                .collect()
        };
        orthogonalize(&mut x, ortho);
        normalize(&mut x);

        let mut converged = false;
        for _ in 0..8 {
            let mut y = lu.solve(&x);
            orthogonalize(&mut y, ortho);
            let norm = l2_norm(&y);
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::EigenNonConvergence(format!(
                    "inverse iteration breakdown at lambda = {lambda:.6e}"
                )));
            }
            for v in y.iter_mut() {
                *v /= norm;
            }
            x = y;
            if self.residual_norm(&x, lambda) <= 1e2 * f64::EPSILON * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            // accept only if the residual is genuinely small
            let res = self.residual_norm(&x, lambda);
            if res > 1e-8 * scale {
                return Err(Error::EigenNonConvergence(format!(
                    "inverse iteration residual {res:.3e} at lambda = {lambda:.6e}"
                )));
            }
        }
        Ok(x)
    }

    /// || (T - lambda) v ||_2 for a unit vector v.
    pub fn residual_norm(&self, v: &[f64], lambda: f64) -> f64 {
        let n = self.n();
        let mut acc = 0.0f64;
        for i in 0..n {
            let mut t = (self.diag[i] - lambda) * v[i];
            if i > 0 {
                t += self.off[i - 1] * v[i - 1];
            }
            if i < n - 1 {
                t += self.off[i] * v[i + 1];
            }
            acc += t * t;
        }
        acc.sqrt()
    }
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = l2_norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = v.iter().zip(b.iter()).map(|(a, c)| a * c).sum();
        for (x, c) in v.iter_mut().zip(b.iter()) {
            *x -= dot * c;
        }
    }
}

/// LU factorization of (T - lambda I) with partial pivoting. Row swaps
/// introduce a second superdiagonal.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiag, lambda: f64) -> Self {
        let n = t.n();
        let mut d: Vec<f64> = t.diag.iter().map(|&a| a - lambda).collect();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        // replacement for (near-)singular pivots, relative to the matrix
        // scale; inverse iteration thrives on near-singularity
        let scale = d
            .iter()
            .chain(dl.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        let tiny = (f64::EPSILON * scale).max(f64::MIN_POSITIVE.sqrt());

        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < tiny {
                    d[i] = tiny.copysign(d[i]);
                }
                let m = dl[i] / d[i];
                dl[i] = m;
                d[i + 1] -= m * du[i];
                if i + 2 < n {
                    // no fill-in without a swap
                    du2[i] = 0.0;
                }
            } else {
                swapped[i] = true;
                let m = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = m;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - m * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -m;
                }
            }
        }
        if d[n - 1].abs() < tiny {
            d[n - 1] = tiny.copysign(d[n - 1]);
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        // Near-singular systems are the normal case here; whenever a value
        // grows past the overflow guard the whole array (solved part and
        // pending right-hand side alike) is rescaled, which only changes the
        // overall scale of the solution.
        const BIG: f64 = 1e250;
        const SHRINK: f64 = 1e-250;
        let n = self.d.len();
        let mut x = b.to_vec();
        let rescale = |x: &mut [f64]| {
            for v in x.iter_mut() {
                *v *= SHRINK;
            }
        };
        // forward pass with recorded row swaps
        for i in 0..n - 1 {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            let m = self.dl[i];
            let xi = x[i];
            x[i + 1] -= m * xi;
            if x[i + 1].abs() > BIG {
                rescale(&mut x);
            }
        }
        // back substitution; divisions by near-singular pivots are
        // pre-checked so a single step cannot overflow
        let div = |x: &mut Vec<f64>, i: usize, num: f64| {
            let mut num = num;
            while num.abs() > BIG * self.d[i].abs() {
                rescale(x);
                num *= SHRINK;
            }
            x[i] = num / self.d[i];
        };
        let num = x[n - 1];
        div(&mut x, n - 1, num);
        if n >= 2 {
            let num = x[n - 2] - self.du[n - 2] * x[n - 1];
            div(&mut x, n - 2, num);
        }
        for i in (0..n.saturating_sub(2)).rev() {
            let num = x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2];
            div(&mut x, i, num);
        }
        x
    }
}
