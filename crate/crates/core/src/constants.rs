//! Physical constants (CODATA 2018, SI) and atomic-unit conversion factors.
//!
//! Electron-scale quantities (wavefunctions, potentials) are handled in
//! Hartree atomic units; gas densities stay in SI; spectra are reported in Hz.
//! The factors below form the single conversion boundary between those
//! conventions.

/// Bohr radius a0 (m).
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;

/// Planck constant (J s), exact by definition.
pub const PLANCK_H: f64 = 6.626_070_15e-34;

/// Reduced Planck constant (J s), h / 2 pi.
pub const HBAR: f64 = PLANCK_H / (2.0 * std::f64::consts::PI);

/// Electron mass (kg).
pub const ELECTRON_MASS: f64 = 9.109_383_7015e-31;

/// Boltzmann constant (J/K).
pub const BOLTZMANN_K: f64 = 1.380_649e-23;

/// Rydberg energy (J), hc R_inf.
pub const RYDBERG_ENERGY: f64 = 2.179_872_361_1035e-18;

/// Hartree energy (J), = 2 Ry.
pub const HARTREE: f64 = 4.359_744_722_2071e-18;

/// Unified atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Sr-84 mass (u). Standard atomic-mass evaluation value; overridable in config.
pub const SR84_MASS_AMU: f64 = 83.913_4;

/// Hartree expressed as a frequency, E/h (Hz).
pub const HARTREE_HZ: f64 = HARTREE / PLANCK_H;

/// Atomic unit of time (s).
pub const ATOMIC_TIME: f64 = HBAR / HARTREE;

/// One Bohr radius cubed (m^3); converts number densities between m^-3 and a0^-3.
pub const BOHR_VOLUME: f64 = BOHR_RADIUS * BOHR_RADIUS * BOHR_RADIUS;

/// Bundle of the constants used across the pipelines, with the impurity/bath
/// atom mass as the one experiment-dependent entry.
#[derive(Debug, Clone, Copy)]
pub struct Constants {
    pub bohr_radius: f64,
    pub hbar: f64,
    pub planck_h: f64,
    pub electron_mass: f64,
    pub boltzmann_k: f64,
    pub rydberg_energy: f64,
    /// Bath/impurity atom mass (kg).
    pub atom_mass: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self::with_atom_mass_amu(SR84_MASS_AMU)
    }
}

impl Constants {
    pub fn with_atom_mass_amu(mass_amu: f64) -> Self {
        Self {
            bohr_radius: BOHR_RADIUS,
            hbar: HBAR,
            planck_h: PLANCK_H,
            electron_mass: ELECTRON_MASS,
            boltzmann_k: BOLTZMANN_K,
            rydberg_energy: RYDBERG_ENERGY,
            atom_mass: mass_amu * ATOMIC_MASS_UNIT,
        }
    }

    /// Atom mass in electron masses (the natural unit for the radial solvers).
    pub fn atom_mass_au(&self) -> f64 {
        self.atom_mass / self.electron_mass
    }

    /// Two-body reduced mass of a bath atom and an equal-mass impurity, in
    /// electron masses. Captures impurity recoil at the two-body level.
    pub fn reduced_mass_au(&self) -> f64 {
        0.5 * self.atom_mass_au()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rydberg_consistent_with_hbar_and_bohr_radius() {
        // Ry = hbar^2 / (2 m_e a0^2)
        let derived = HBAR * HBAR / (2.0 * ELECTRON_MASS * BOHR_RADIUS * BOHR_RADIUS);
        let rel = (derived - RYDBERG_ENERGY).abs() / RYDBERG_ENERGY;
        assert!(rel < 1e-9, "Ry consistency off by {rel:e}");
    }

    #[test]
    fn hartree_is_twice_rydberg() {
        let rel = (HARTREE - 2.0 * RYDBERG_ENERGY).abs() / HARTREE;
        assert!(rel < 1e-12);
    }

    #[test]
    fn all_constants_positive() {
        let c = Constants::default();
        for v in [
            c.bohr_radius,
            c.hbar,
            c.planck_h,
            c.electron_mass,
            c.boltzmann_k,
            c.rydberg_energy,
            c.atom_mass,
        ] {
            assert!(v > 0.0);
        }
    }

    #[test]
    fn sr84_reduced_mass() {
        let c = Constants::default();
        // m/2 for equal masses, in units of m_e.
        let m_red = c.reduced_mass_au();
        assert!((m_red - 76_483.0).abs() / 76_483.0 < 1e-3, "m_red = {m_red}");
    }
}
