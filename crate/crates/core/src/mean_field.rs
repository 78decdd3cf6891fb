//! Mean-field line shift and the local-density lineshape of a trapped
//! sample. An atom at local density rho contributes at the detuning
//!
//! ```text
//!     Delta(rho) = rho int V(r) d^3r / h,
//! ```
//!
//! so the trap spectrum is the density-weighted histogram
//! A(nu) ~ int d^3r rho(r) delta(nu - Delta(rho(r))). For a Thomas-Fermi
//! profile the change of variables gives the closed form
//! A(nu) = (15/4) |Delta_max|^-1 x sqrt(1 - x), x = nu/Delta_max in [0, 1].

use crate::constants::{BOHR_VOLUME, HARTREE, PLANCK_H};
use crate::error::Result;
use crate::pseudopotential::{integrated_potential, PseudoPotential};
use crate::spectrum::{LineSpectrum, Normalization, Spectrum};
use crate::trap::DensityProfile;
use crate::wavefunction::RydbergState;

#[derive(Debug, Clone, Copy)]
pub struct MeanFieldModel {
    /// int V d^3r in J m^3.
    v_integral_si: f64,
    state: RydbergState,
}

impl MeanFieldModel {
    pub fn from_potential(pot: &PseudoPotential) -> Self {
        let v_au = integrated_potential(pot);
        Self {
            v_integral_si: v_au * HARTREE * BOHR_VOLUME,
            state: *pot.state(),
        }
    }

    pub fn v_integral_si(&self) -> f64 {
        self.v_integral_si
    }

    pub fn state(&self) -> &RydbergState {
        &self.state
    }
}

/// Mean-field shift Delta = rho int V d^3r / h (Hz), linear in density.
pub fn mean_field_shift(density_si: f64, model: &MeanFieldModel) -> f64 {
    density_si * model.v_integral_si / PLANCK_H
}

/// Local-density line list: weight rho dV at detuning Delta(rho(r)),
/// sampled on a fine radial mesh over the profile support.
pub fn lda_lines(profile: &DensityProfile, model: &MeanFieldModel) -> LineSpectrum {
    let r_max = profile.support_radius();
    let n = 200_000usize;
    let dr = r_max / n as f64;
    let mut lines = LineSpectrum::default();
    for i in 0..=n {
        let r = i as f64 * dr;
        let w_trap = if i == 0 || i == n { 0.5 } else { 1.0 };
        let rho = profile.density_at(r);
        let weight = w_trap * rho * r * r * dr;
        if weight > 0.0 {
            lines.push(mean_field_shift(rho, model), weight);
        }
    }
    lines
}

/// Local-density spectrum on the given grid, unit-normalized. The grid must
/// cover the full shift range [Delta_max, 0].
pub fn lda_spectrum(
    profile: &DensityProfile,
    model: &MeanFieldModel,
    grid: &[f64],
) -> Result<Spectrum> {
    let lines = lda_lines(profile, model);
    lines
        .bin_onto(grid)?
        .into_normalized(Normalization::UnitArea)
}

/// Density-weighted mean shift over the profile,
/// int rho Delta(rho) dV / int rho dV, by direct quadrature; an independent
/// route to the first moment of the local-density spectrum.
pub fn mean_shift_over_profile(profile: &DensityProfile, model: &MeanFieldModel) -> f64 {
    let r_max = profile.support_radius();
    let n = 400_000usize;
    let dr = r_max / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..=n {
        let r = i as f64 * dr;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let rho = profile.density_at(r);
        num += w * rho * rho * r * r;
        den += w * rho * r * r;
    }
    num / den * model.v_integral_si / PLANCK_H
}

/// Closed-form Thomas-Fermi lineshape (15/4) x sqrt(1-x) / |Delta_max| on
/// the scaled axis x = nu / Delta_max, evaluated at a detuning.
pub fn thomas_fermi_closed_form(nu_hz: f64, delta_max_hz: f64) -> f64 {
    let x = nu_hz / delta_max_hz;
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    15.0 / 4.0 * x * (1.0 - x).sqrt() / delta_max_hz.abs()
}
