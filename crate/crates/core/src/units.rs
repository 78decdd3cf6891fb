//! Minimal unit conversions for the quantities this crate actually moves
//! across module boundaries: lengths, energies (including E = h nu detuning
//! equivalents), number densities, times, and frequencies.
//!
//! Not a general units library. Each unit carries a dimension tag and a
//! factor to the SI base for that dimension; conversion is a ratio of
//! factors, with detuning <-> energy handled through h.

use crate::constants::{BOHR_RADIUS, BOHR_VOLUME, HARTREE, PLANCK_H, RYDBERG_ENERGY};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Energy,
    NumberDensity,
    Time,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    // lengths
    Meter,
    Nanometer,
    Micrometer,
    Bohr,
    // energies
    Joule,
    Hartree,
    Rydberg,
    /// Energy of a photon at the given frequency, E = h nu. Signed.
    HertzTimesH,
    MegahertzTimesH,
    // number densities
    PerCubicMeter,
    PerCubicCentimeter,
    PerCubicBohr,
    // times
    Second,
    Microsecond,
    // frequencies
    Hertz,
    Megahertz,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Meter | Nanometer | Micrometer | Bohr => Dimension::Length,
            Joule | Hartree | Rydberg | HertzTimesH | MegahertzTimesH => Dimension::Energy,
            PerCubicMeter | PerCubicCentimeter | PerCubicBohr => Dimension::NumberDensity,
            Second | Microsecond => Dimension::Time,
            Hertz | Megahertz => Dimension::Frequency,
        }
    }

    /// Factor to the SI base unit of this unit's dimension.
    fn si_factor(self) -> f64 {
        use Unit::*;
        match self {
            Meter => 1.0,
            Nanometer => 1e-9,
            Micrometer => 1e-6,
            Bohr => BOHR_RADIUS,
            Joule => 1.0,
            Hartree => HARTREE,
            Rydberg => RYDBERG_ENERGY,
            HertzTimesH => PLANCK_H,
            MegahertzTimesH => PLANCK_H * 1e6,
            PerCubicMeter => 1.0,
            PerCubicCentimeter => 1e6,
            PerCubicBohr => 1.0 / BOHR_VOLUME,
            Second => 1.0,
            Microsecond => 1e-6,
            Hertz => 1.0,
            Megahertz => 1e6,
        }
    }
}

/// Convert `value` between dimensionally compatible units.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::IncompatibleUnits {
            from: format!("{from:?}"),
            to: format!("{to:?}"),
        });
    }
    Ok(value * (from.si_factor() / to.si_factor()))
}

/// Conversion factors pinning the internal conventions: atomic units for
/// electron-scale quantities, SI for densities, Hz for spectral axes.
#[derive(Debug, Clone, Copy)]
pub struct UnitSystem {
    /// Bohr radii per meter.
    pub bohr_per_meter: f64,
    /// Hz per Hartree (E/h).
    pub hz_per_hartree: f64,
    /// Bohr^-3 per m^-3.
    pub density_au_per_si: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            bohr_per_meter: 1.0 / BOHR_RADIUS,
            hz_per_hartree: HARTREE / PLANCK_H,
            density_au_per_si: BOHR_VOLUME,
        }
    }
}

impl UnitSystem {
    pub fn length_si_to_au(&self, meters: f64) -> f64 {
        meters * self.bohr_per_meter
    }
    pub fn length_au_to_si(&self, bohr: f64) -> f64 {
        bohr / self.bohr_per_meter
    }
    pub fn energy_au_to_hz(&self, hartree: f64) -> f64 {
        hartree * self.hz_per_hartree
    }
    pub fn energy_hz_to_au(&self, hz: f64) -> f64 {
        hz / self.hz_per_hartree
    }
    pub fn density_si_to_au(&self, per_m3: f64) -> f64 {
        per_m3 * self.density_au_per_si
    }
    pub fn density_au_to_si(&self, per_bohr3: f64) -> f64 {
        per_bohr3 / self.density_au_per_si
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn bohr_to_nanometer() {
        let nm = convert(1.0, Unit::Bohr, Unit::Nanometer).unwrap();
        assert_relative_eq!(nm, 0.052_917_7, max_relative = 1e-6);
    }

    #[test]
    fn per_cm3_to_per_m3() {
        let v = convert(1.0, Unit::PerCubicCentimeter, Unit::PerCubicMeter).unwrap();
        assert_relative_eq!(v, 1e6, max_relative = 1e-14);
    }

    #[test]
    fn detuning_to_energy_preserves_sign() {
        // E = h nu for nu = -1 GHz
        let e = convert(-1e9, Unit::HertzTimesH, Unit::Joule).unwrap();
        assert_relative_eq!(e, -6.626_070_15e-25, max_relative = 1e-12);
        assert!(e < 0.0);
    }

    #[test]
    fn incompatible_dimensions_error() {
        assert!(convert(1.0, Unit::Bohr, Unit::Joule).is_err());
        assert!(convert(1.0, Unit::Hertz, Unit::Second).is_err());
    }

    #[test]
    fn hartree_in_hz() {
        let hz = convert(1.0, Unit::Hartree, Unit::HertzTimesH).unwrap();
        assert_relative_eq!(hz, 6.579_683_920_5e15, max_relative = 1e-9);
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(v in -1e20f64..1e20, idx in 0usize..4) {
            let pairs = [
                (Unit::Bohr, Unit::Nanometer),
                (Unit::Hartree, Unit::MegahertzTimesH),
                (Unit::PerCubicCentimeter, Unit::PerCubicBohr),
                (Unit::Microsecond, Unit::Second),
            ];
            let (a, b) = pairs[idx];
            let back = convert(convert(v, a, b).unwrap(), b, a).unwrap();
            let scale = v.abs().max(1e-300);
            prop_assert!(((back - v) / scale).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_system_round_trip() {
        let us = UnitSystem::default();
        let x = 3.7e14;
        let rt = us.density_au_to_si(us.density_si_to_au(x));
        assert_relative_eq!(rt, x, max_relative = 1e-12);
        let e = -29.0e6;
        let rt = us.energy_au_to_hz(us.energy_hz_to_au(e));
        assert_relative_eq!(rt, e, max_relative = 1e-12);
    }
}
