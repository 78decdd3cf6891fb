//! Radial grids. Geometric (log-spaced) grids are the default for the
//! electron wavefunction, whose local wavelength shrinks like sqrt(r) toward
//! the core; uniform grids serve the finite-difference box Hamiltonian.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Uniform,
    Geometric,
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    r: Vec<f64>,
    spacing: Spacing,
}

impl RadialGrid {
    /// Uniform grid on [r_min, r_max] with `n` points.
    pub fn uniform(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        Self::check_bounds(r_min, r_max, n)?;
        let dr = (r_max - r_min) / (n - 1) as f64;
        let r = (0..n).map(|i| r_min + i as f64 * dr).collect();
        Ok(Self {
            r,
            spacing: Spacing::Uniform,
        })
    }

    /// Geometric grid on [r_min, r_max] with `n` points (uniform in ln r).
    pub fn geometric(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        Self::check_bounds(r_min, r_max, n)?;
        let dx = (r_max / r_min).ln() / (n - 1) as f64;
        let r: Vec<f64> = (0..n).map(|i| r_min * (i as f64 * dx).exp()).collect();
        Ok(Self {
            r,
            spacing: Spacing::Geometric,
        })
    }

    fn check_bounds(r_min: f64, r_max: f64, n: usize) -> Result<()> {
        if !(r_min > 0.0) {
            return Err(Error::InvalidGrid(format!("r_min must be > 0, got {r_min}")));
        }
        if !(r_max > r_min) {
            return Err(Error::InvalidGrid(format!(
                "r_max ({r_max}) must exceed r_min ({r_min})"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 points, got {n}")));
        }
        Ok(())
    }

    pub fn points(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn r_min(&self) -> f64 {
        self.r[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// ln-step for geometric grids.
    pub fn log_step(&self) -> f64 {
        (self.r_max() / self.r_min()).ln() / (self.len() - 1) as f64
    }

    /// Trapezoid quadrature weights for integrals over r on this grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.r.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * (self.r[i + 1] - self.r[i]);
            w[i] += half;
            w[i + 1] += half;
        }
        w
    }

    /// Integrate sampled values against the trapezoid weights.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.r.len(), "grid/value length mismatch");
        let mut acc = 0.0;
        for i in 0..self.r.len() - 1 {
            acc += 0.5 * (self.r[i + 1] - self.r[i]) * (values[i] + values[i + 1]);
        }
        acc
    }

    /// New grid with the same span and roughly `factor` times the density.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let n = (self.len() - 1) * factor + 1;
        match self.spacing {
            Spacing::Uniform => Self::uniform(self.r_min(), self.r_max(), n),
            Spacing::Geometric => Self::geometric(self.r_min(), self.r_max(), n),
        }
    }
}

/// Linear interpolation of (grid, values) onto an arbitrary target point.
/// Returns 0 outside the source span; sampled fields vanish there by
/// construction (decayed tails, zero-padded potentials).
pub fn interp_linear(grid: &[f64], values: &[f64], r: f64) -> f64 {
    let n = grid.len();
    if r < grid[0] || r > grid[n - 1] {
        return 0.0;
    }
    // binary search for the bracketing interval
    let mut lo = 0usize;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if grid[mid] <= r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = (r - grid[lo]) / (grid[hi] - grid[lo]);
    values[lo] * (1.0 - t) + values[hi] * t
}
