//! Born-Oppenheimer potential seen by a ground-state atom inside the Rydberg
//! orbit, built from the electron density and the low-energy electron-atom
//! scattering parameters:
//!
//! ```text
//!     V(r) = (2 pi hbar^2 / m_e) A_s(k(r)) |Psi(r)|^2
//!          + (6 pi hbar^2 / m_e) a_p^3 |grad Psi(r)|^2      (optional)
//! ```
//!
//! in atomic units V(r) = 2 pi A_s(k) |Psi|^2 + 6 pi a_p^3 |Psi'|^2, with the
//! momentum-dependent s-wave scattering length expanded to first order,
//! A_s(k) = a_s0 + (pi/3) alpha k.

use crate::constants::HARTREE_HZ;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::wavefunction::{semiclassical_momentum, RadialWavefunction, RydbergState};
use std::io::Write;

#[derive(Debug, Clone, Copy)]
pub struct ScatteringParams {
    /// Zero-energy triplet s-wave e-atom scattering length (Bohr). Negative
    /// values support molecular states.
    pub a_s0: f64,
    /// Ground-state atom polarizability (atomic units).
    pub polarizability: f64,
    /// Include the p-wave term.
    pub include_p_wave: bool,
    /// p-wave scattering length scale (Bohr); used only when the flag is set.
    /// Constant in k: no shape resonance in this system.
    pub a_p: f64,
    /// Validity edge of the linear A_s(k) expansion (atomic units). The
    /// momentum argument is frozen beyond it: deep inside the orbit the
    /// electron momentum leaves the low-energy regime, and extrapolating the
    /// expansion there manufactures an enormous unphysical core.
    pub k_expansion_cutoff: f64,
}

impl Default for ScatteringParams {
    fn default() -> Self {
        Self {
            a_s0: -13.2,
            polarizability: 186.0,
            include_p_wave: false,
            a_p: 0.0,
            k_expansion_cutoff: 0.3,
        }
    }
}

/// Momentum-dependent s-wave scattering length A_s(k) = a_s0 + (pi/3) alpha k
/// (atomic units), with k frozen at the expansion validity edge.
pub fn s_wave_scattering_length(k: f64, params: &ScatteringParams) -> Result<f64> {
    if k < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "wavenumber must be >= 0, got {k}"
        )));
    }
    let k_eff = k.min(params.k_expansion_cutoff);
    Ok(params.a_s0 + std::f64::consts::PI / 3.0 * params.polarizability * k_eff)
}

#[derive(Debug, Clone)]
pub struct PseudoPotential {
    grid: RadialGrid,
    /// V(r) in Hartree on the grid.
    v: Vec<f64>,
    state: RydbergState,
    params: ScatteringParams,
}

impl PseudoPotential {
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn v_values(&self) -> &[f64] {
        &self.v
    }

    pub fn state(&self) -> &RydbergState {
        &self.state
    }

    pub fn params(&self) -> &ScatteringParams {
        &self.params
    }

    pub fn min_value(&self) -> f64 {
        self.v.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Radius of the outermost local minimum of V (Bohr). With attractive
    /// s-wave scattering this tracks the outer lobe of the wavefunction.
    pub fn outermost_well_radius(&self) -> Option<f64> {
        let r = self.grid.points();
        let floor = -1.0 / HARTREE_HZ; // 1 Hz in Hartree; ignore tail noise
        for i in (1..r.len() - 1).rev() {
            if self.v[i] < floor && self.v[i] <= self.v[i - 1] && self.v[i] < self.v[i + 1] {
                return Some(r[i]);
            }
        }
        None
    }

    /// Two-column text export: r (nm), V/h (MHz).
    pub fn export_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# r_nm v_over_h_mhz")?;
        for (&r, &v) in self.grid.points().iter().zip(&self.v) {
            let r_nm = r * crate::constants::BOHR_RADIUS * 1e9;
            let v_mhz = v * HARTREE_HZ * 1e-6;
            writeln!(out, "{r_nm:.9e} {v_mhz:.9e}")?;
        }
        Ok(())
    }
}

/// Assemble V(r) on the wavefunction's grid.
pub fn build_potential(wf: &RadialWavefunction, params: &ScatteringParams) -> Result<PseudoPotential> {
    let grid = wf.grid().clone();
    let r = grid.points();
    let u = wf.u_values();
    let n = r.len();
    let state = *wf.state();

    let mut v = vec![0.0; n];
    for i in 0..n {
        let k = semiclassical_momentum(r[i], &state)?;
        let a_s = s_wave_scattering_length(k, params)?;
        // |Psi|^2 = u^2 / (4 pi r^2)  =>  2 pi A_s |Psi|^2 = A_s u^2 / (2 r^2)
        v[i] = a_s * u[i] * u[i] / (2.0 * r[i] * r[i]);
    }

    if params.include_p_wave {
        // |grad Psi|^2 for an s-state: (d/dr (u/r))^2 / (4 pi)
        let ap3 = params.a_p.powi(3);
        for i in 0..n {
            let du = if i == 0 {
                (u[1] - u[0]) / (r[1] - r[0])
            } else if i == n - 1 {
                (u[n - 1] - u[n - 2]) / (r[n - 1] - r[n - 2])
            } else {
                // centered difference on the non-uniform grid
                let hl = r[i] - r[i - 1];
                let hr = r[i + 1] - r[i];
                (u[i + 1] * hl / hr - u[i - 1] * hr / hl) / (hl + hr)
                    + u[i] * (hr - hl) / (hl * hr)
            };
            let dpsi = (du * r[i] - u[i]) / (r[i] * r[i]);
            v[i] += 1.5 * ap3 * dpsi * dpsi;
        }
    }

    Ok(PseudoPotential {
        grid,
        v,
        state,
        params: *params,
    })
}

/// Volume integral of the potential, 4 pi int V r^2 dr, in Hartree Bohr^3.
/// Uses the same quadrature as the wavefunction normalization, so a constant
/// A_s integrates to exactly 2 pi A_s.
pub fn integrated_potential(pot: &PseudoPotential) -> f64 {
    let r = pot.grid.points();
    let integrand: Vec<f64> = pot
        .v
        .iter()
        .zip(r.iter())
        .map(|(&v, &ri)| v * ri * ri)
        .collect();
    4.0 * std::f64::consts::PI * pot.grid.integrate(&integrand)
}

/// Volume integral of V^2, 4 pi int V^2 r^2 dr, in Hartree^2 Bohr^3.
/// Fixes the second moment of the fixed-density many-body response.
pub fn integrated_potential_squared(pot: &PseudoPotential) -> f64 {
    let r = pot.grid.points();
    let integrand: Vec<f64> = pot
        .v
        .iter()
        .zip(r.iter())
        .map(|(&v, &ri)| v * v * ri * ri)
        .collect();
    4.0 * std::f64::consts::PI * pot.grid.integrate(&integrand)
}
