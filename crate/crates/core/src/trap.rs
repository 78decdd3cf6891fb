//! Trap density profiles and the shell decomposition used to average
//! fixed-density spectra over the cloud: an inverted-parabola condensate
//! inside the trap radius plus a dilute Gaussian thermal cloud.

use crate::error::{Error, Result};
use crate::spectrum::{Normalization, Spectrum};
use rayon::prelude::*;
use statrs::function::erf::erf;
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy)]
pub struct TrapConfig {
    /// Peak condensate density (m^-3).
    pub peak_density_si: f64,
    /// Condensate (Thomas-Fermi) radius (m).
    pub tf_radius_m: f64,
    /// Total atom number.
    pub atom_number: f64,
    /// Sample temperature (K).
    pub temperature_k: f64,
    /// Condensate fraction, in (0, 1].
    pub condensate_fraction: f64,
    /// Thermal-cloud 1/e width in units of the condensate radius.
    pub thermal_width_factor: f64,
}

impl Default for TrapConfig {
    fn default() -> Self {
        Self {
            peak_density_si: 3.6e20,
            tf_radius_m: 8e-6,
            atom_number: 3.5e5,
            temperature_k: 150e-9,
            condensate_fraction: 0.75,
            thermal_width_factor: 3.0,
        }
    }
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.peak_density_si > 0.0)
            || !(self.tf_radius_m > 0.0)
            || !(self.atom_number > 0.0)
            || !(self.temperature_k > 0.0)
            || !(self.thermal_width_factor > 0.0)
        {
            return Err(Error::InvalidArgument(
                "trap parameters must be positive".into(),
            ));
        }
        if !(self.condensate_fraction > 0.0 && self.condensate_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "condensate fraction must lie in (0, 1], got {}",
                self.condensate_fraction
            )));
        }
        Ok(())
    }
}

/// Spherically symmetric density fields with closed-form mass integrals.
#[derive(Debug, Clone, Copy)]
pub enum DensityProfile {
    /// rho_max (1 - r^2/R^2), r < R.
    ThomasFermi { peak_si: f64, radius_m: f64 },
    /// rho_0 exp(-r^2/w^2) with 1/e width w.
    Gaussian { peak_si: f64, width_m: f64 },
    /// Constant density inside a sphere.
    Uniform { density_si: f64, radius_m: f64 },
}

impl DensityProfile {
    pub fn density_at(&self, r_m: f64) -> f64 {
        match *self {
            DensityProfile::ThomasFermi { peak_si, radius_m } => {
                let x = r_m / radius_m;
                (peak_si * (1.0 - x * x)).max(0.0)
            }
            DensityProfile::Gaussian { peak_si, width_m } => {
                let x = r_m / width_m;
                peak_si * (-x * x).exp()
            }
            DensityProfile::Uniform {
                density_si,
                radius_m,
            } => {
                if r_m <= radius_m {
                    density_si
                } else {
                    0.0
                }
            }
        }
    }

    /// Total atom number.
    pub fn total_atoms(&self) -> f64 {
        match *self {
            DensityProfile::ThomasFermi { peak_si, radius_m } => {
                8.0 * PI / 15.0 * peak_si * radius_m.powi(3)
            }
            DensityProfile::Gaussian { peak_si, width_m } => {
                peak_si * PI.powf(1.5) * width_m.powi(3)
            }
            DensityProfile::Uniform {
                density_si,
                radius_m,
            } => 4.0 * PI / 3.0 * density_si * radius_m.powi(3),
        }
    }

    /// Atoms inside radius r.
    pub fn mass_within(&self, r_m: f64) -> f64 {
        match *self {
            DensityProfile::ThomasFermi { peak_si, radius_m } => {
                let x = (r_m / radius_m).min(1.0);
                4.0 * PI * peak_si * radius_m.powi(3) * (x.powi(3) / 3.0 - x.powi(5) / 5.0)
            }
            DensityProfile::Gaussian { peak_si, width_m } => {
                let x = r_m / width_m;
                // int_0^r 4 pi s^2 rho0 e^{-s^2/w^2} ds
                peak_si * PI * width_m.powi(3) * (PI.sqrt() * erf(x) - 2.0 * x * (-x * x).exp())
            }
            DensityProfile::Uniform {
                density_si,
                radius_m,
            } => {
                let r = r_m.min(radius_m);
                4.0 * PI / 3.0 * density_si * r.powi(3)
            }
        }
    }

    /// Radius beyond which the remaining mass is negligible.
    pub fn support_radius(&self) -> f64 {
        match *self {
            DensityProfile::ThomasFermi { radius_m, .. } => radius_m,
            DensityProfile::Gaussian { width_m, .. } => 4.0 * width_m,
            DensityProfile::Uniform { radius_m, .. } => radius_m,
        }
    }
}

/// Condensate profile from the trap configuration.
pub fn thomas_fermi_profile(cfg: &TrapConfig) -> Result<DensityProfile> {
    cfg.validate()?;
    Ok(DensityProfile::ThomasFermi {
        peak_si: cfg.peak_density_si,
        radius_m: cfg.tf_radius_m,
    })
}

/// Thermal cloud: a Gaussian of configurable width normalized to the
/// non-condensed atom number (1 - eta) N.
pub fn thermal_profile(cfg: &TrapConfig) -> Result<DensityProfile> {
    cfg.validate()?;
    let width = cfg.thermal_width_factor * cfg.tf_radius_m;
    let atoms = (1.0 - cfg.condensate_fraction) * cfg.atom_number;
    let peak = atoms / (PI.powf(1.5) * width.powi(3));
    Ok(DensityProfile::Gaussian {
        peak_si: peak,
        width_m: width,
    })
}

/// Combined trap density: condensate plus optional thermal cloud.
#[derive(Debug, Clone)]
pub struct TrapDensity {
    pub condensate: DensityProfile,
    pub thermal: Option<DensityProfile>,
}

impl TrapDensity {
    pub fn from_config(cfg: &TrapConfig, include_thermal: bool) -> Result<Self> {
        let condensate = thomas_fermi_profile(cfg)?;
        let thermal = if include_thermal && cfg.condensate_fraction < 1.0 {
            Some(thermal_profile(cfg)?)
        } else {
            None
        };
        Ok(Self {
            condensate,
            thermal,
        })
    }

    pub fn density_at(&self, r_m: f64) -> f64 {
        self.condensate.density_at(r_m) + self.thermal.map(|t| t.density_at(r_m)).unwrap_or(0.0)
    }

    pub fn total_atoms(&self) -> f64 {
        self.condensate.total_atoms() + self.thermal.map(|t| t.total_atoms()).unwrap_or(0.0)
    }

    fn mass_within(&self, r_m: f64) -> f64 {
        self.condensate.mass_within(r_m)
            + self.thermal.map(|t| t.mass_within(r_m)).unwrap_or(0.0)
    }
}

/// Radial shells with atom-count weights and volume-averaged densities.
#[derive(Debug, Clone)]
pub struct DensityShells {
    /// Equal-volume shell centers, ((a^3+b^3)/2)^(1/3) (m).
    radii: Vec<f64>,
    /// Volume-averaged total density per shell (m^-3).
    densities: Vec<f64>,
    /// Atoms per shell.
    weights: Vec<f64>,
}

impl DensityShells {
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn total_atoms(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Keep only shells with centers inside the given radius.
    pub fn restricted_to(&self, r_max: f64) -> DensityShells {
        let mut radii = Vec::new();
        let mut densities = Vec::new();
        let mut weights = Vec::new();
        for i in 0..self.len() {
            if self.radii[i] <= r_max {
                radii.push(self.radii[i]);
                densities.push(self.densities[i]);
                weights.push(self.weights[i]);
            }
        }
        DensityShells {
            radii,
            densities,
            weights,
        }
    }

    /// Shell table CSV: index, radius_m, density_m3, weight_atoms.
    pub fn to_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,radius_m,density_m3,weight_atoms")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{i},{:.17e},{:.17e},{:.17e}",
                self.radii[i], self.densities[i], self.weights[i]
            )?;
        }
        Ok(())
    }
}

/// Decompose the trap into equal-volume shells: `n_inner` inside the
/// condensate radius plus `n_outer` covering the thermal halo. Shell masses
/// use the closed-form integrals, so the atom number is conserved exactly.
pub fn shell_decomposition(
    trap: &TrapDensity,
    n_inner: usize,
    n_outer: usize,
) -> Result<DensityShells> {
    if n_inner < 16 {
        return Err(Error::InvalidArgument(format!(
            "need at least 16 condensate shells, got {n_inner}"
        )));
    }
    let r_cond = trap.condensate.support_radius();
    let r_halo = trap
        .thermal
        .map(|t| t.support_radius())
        .unwrap_or(r_cond)
        .max(r_cond);

    let mut bounds = Vec::new();
    for k in 0..=n_inner {
        bounds.push(r_cond * (k as f64 / n_inner as f64).cbrt());
    }
    if r_halo > r_cond && n_outer > 0 {
        // equal-volume continuation over (r_cond, r_halo]
        let v0 = r_cond.powi(3);
        let v1 = r_halo.powi(3);
        for k in 1..=n_outer {
            bounds.push((v0 + (v1 - v0) * k as f64 / n_outer as f64).cbrt());
        }
    }

    let mut radii = Vec::new();
    let mut densities = Vec::new();
    let mut weights = Vec::new();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mass = trap.mass_within(b) - trap.mass_within(a);
        let volume = 4.0 * PI / 3.0 * (b.powi(3) - a.powi(3));
        radii.push(((a.powi(3) + b.powi(3)) / 2.0).cbrt());
        densities.push(mass / volume);
        weights.push(mass);
    }
    Ok(DensityShells {
        radii,
        densities,
        weights,
    })
}

/// Volume-weighted density statistics of the central region r <= cut * R:
/// solve the cut so the mean density is `target_fraction` of the central
/// density, and report (cut radius, mean density, relative standard
/// deviation).
pub fn central_region_stats(trap: &TrapDensity, target_fraction: f64) -> Result<(f64, f64, f64)> {
    if !(0.0 < target_fraction && target_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target fraction must be in (0,1), got {target_fraction}"
        )));
    }
    let rho0 = trap.density_at(0.0);
    let r_max = trap.condensate.support_radius();

    let stats = |cut: f64| -> (f64, f64) {
        // volume-weighted mean and variance of rho over r <= cut r_max
        let n = 4000usize;
        let dr = cut * r_max / n as f64;
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for i in 0..=n {
            let r = i as f64 * dr;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let rho = trap.density_at(r);
            let vol = w * r * r;
            m0 += vol;
            m1 += vol * rho;
            m2 += vol * rho * rho;
        }
        let mean = m1 / m0;
        let var = (m2 / m0 - mean * mean).max(0.0);
        (mean, var.sqrt())
    };

    let mut lo = 0.02f64;
    let mut hi = 1.0f64;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let (mean, _) = stats(mid);
        if mean / rho0 > target_fraction {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cut = 0.5 * (lo + hi);
    let (mean, std) = stats(cut);
    Ok((cut * r_max, mean, std / mean))
}

/// Weighted sum of per-density spectra over the shells, unit-normalized.
/// The generator maps a density (m^-3) to a spectrum on `grid`; shells run
/// in parallel and are merged in shell order.
pub fn trap_averaged_spectrum<F>(
    shells: &DensityShells,
    grid: &[f64],
    generator: F,
) -> Result<Spectrum>
where
    F: Fn(f64) -> Result<Spectrum> + Sync,
{
    if shells.is_empty() {
        return Err(Error::InvalidArgument("no shells to average".into()));
    }
    let spectra: Vec<Spectrum> = shells
        .densities()
        .par_iter()
        .map(|&rho| generator(rho))
        .collect::<Result<Vec<_>>>()?;

    let mut acc = vec![0.0f64; grid.len()];
    let total: f64 = shells.total_atoms();
    for (spec, &w) in spectra.iter().zip(shells.weights()) {
        if spec.detunings() != grid {
            return Err(Error::InvalidArgument(
                "generator returned a spectrum on a different grid".into(),
            ));
        }
        let scale = w / total / spec.area();
        for (a, &v) in acc.iter_mut().zip(spec.intensities()) {
            *a += scale * v;
        }
    }
    Spectrum::new(grid.to_vec(), acc, Normalization::Raw)?.into_normalized(Normalization::UnitArea)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{uniform_grid, LineSpectrum};
    use approx::assert_relative_eq;

    #[test]
    fn thomas_fermi_profile_values() {
        let cfg = TrapConfig::default();
        let tf = thomas_fermi_profile(&cfg).unwrap();
        assert_relative_eq!(tf.density_at(0.0), 3.6e20);
        assert_eq!(tf.density_at(8e-6), 0.0);
        assert_eq!(tf.density_at(10e-6), 0.0);
        // (8 pi / 15) rho R^3 ~ 3.1e5, within 25% of eta N = 2.6e5
        let n_c = tf.total_atoms();
        assert_relative_eq!(n_c, 3.09e5, max_relative = 0.01);
        let target = cfg.condensate_fraction * cfg.atom_number;
        assert!((n_c - target).abs() / target < 0.25);
    }

    #[test]
    fn thermal_profile_normalization_and_dilution() {
        let cfg = TrapConfig::default();
        let th = thermal_profile(&cfg).unwrap();
        let expected = 0.25 * 3.5e5;
        assert_relative_eq!(th.total_atoms(), expected, max_relative = 1e-9);
        // peak thermal density far below the condensate peak
        assert!(th.density_at(0.0) < 0.05 * cfg.peak_density_si);
    }

    #[test]
    fn gaussian_mass_within_matches_total() {
        let g = DensityProfile::Gaussian {
            peak_si: 1e18,
            width_m: 2e-5,
        };
        assert_relative_eq!(
            g.mass_within(20.0 * 2e-5),
            g.total_atoms(),
            max_relative = 1e-12
        );
        // support radius captures all but ~4e-6 of the mass
        assert!(g.mass_within(g.support_radius()) > 0.999_99 * g.total_atoms());
    }

    #[test]
    fn pure_condensate_has_no_thermal_field() {
        let cfg = TrapConfig {
            condensate_fraction: 1.0,
            ..Default::default()
        };
        let trap = TrapDensity::from_config(&cfg, true).unwrap();
        assert!(trap.thermal.is_none());
    }

    #[test]
    fn shells_conserve_atom_number() {
        let cfg = TrapConfig::default();
        let trap = TrapDensity::from_config(&cfg, true).unwrap();
        let shells = shell_decomposition(&trap, 64, 16).unwrap();
        let expected = trap.total_atoms();
        // closed-form shell masses; only the 4-width Gaussian tail (~5e-7
        // of the thermal mass) falls outside the outermost shell
        assert_relative_eq!(shells.total_atoms(), expected, max_relative = 1e-6);
    }

    #[test]
    fn uniform_sphere_gives_equal_shell_densities() {
        let trap = TrapDensity {
            condensate: DensityProfile::Uniform {
                density_si: 2e20,
                radius_m: 5e-6,
            },
            thermal: None,
        };
        let shells = shell_decomposition(&trap, 32, 0).unwrap();
        for &d in shells.densities() {
            assert_relative_eq!(d, 2e20, max_relative = 1e-12);
        }
    }

    #[test]
    fn tf_shell_densities_monotonic() {
        let cfg = TrapConfig::default();
        let trap = TrapDensity::from_config(&cfg, false).unwrap();
        let shells = shell_decomposition(&trap, 64, 0).unwrap();
        for w in shells.densities().windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn too_few_shells_rejected() {
        let cfg = TrapConfig::default();
        let trap = TrapDensity::from_config(&cfg, false).unwrap();
        assert!(shell_decomposition(&trap, 8, 0).is_err());
    }

    #[test]
    fn central_region_matches_tf_closed_form() {
        // volume-weighted TF stats: mean/rho0 = 1 - 3c^2/5, and at
        // mean = 0.92 rho0 the relative std is ~0.038
        let cfg = TrapConfig::default();
        let trap = TrapDensity::from_config(&cfg, false).unwrap();
        let (cut_m, mean, rel_std) = central_region_stats(&trap, 0.92).unwrap();
        let c = cut_m / cfg.tf_radius_m;
        assert_relative_eq!(c, (0.4f64 / 3.0).sqrt(), max_relative = 1e-3);
        assert_relative_eq!(mean, 0.92 * cfg.peak_density_si, max_relative = 1e-6);
        assert!((rel_std - 0.04).abs() < 0.005, "rel std {rel_std}");
    }

    #[test]
    fn single_density_average_reproduces_generator() {
        let trap = TrapDensity {
            condensate: DensityProfile::Uniform {
                density_si: 1e20,
                radius_m: 4e-6,
            },
            thermal: None,
        };
        let shells = shell_decomposition(&trap, 16, 0).unwrap();
        // all densities equal, so averaging must reproduce the generator
        let grid = uniform_grid(-2e6, 1e6, 401);
        let gen = |rho: f64| {
            let mut lines = LineSpectrum::default();
            lines.push(-1e-14 * rho, 1.0);
            lines.bin_onto(&grid)
        };
        let avg = trap_averaged_spectrum(&shells, &grid, gen).unwrap();
        let single = gen(1e20)
            .unwrap()
            .into_normalized(Normalization::UnitArea)
            .unwrap();
        let l1 = avg.l1_distance(&single).unwrap();
        assert!(l1 < 1e-12);
    }

    #[test]
    fn shell_table_csv_shape() {
        let cfg = TrapConfig::default();
        let trap = TrapDensity::from_config(&cfg, true).unwrap();
        let shells = shell_decomposition(&trap, 16, 4).unwrap();
        let mut buf = Vec::new();
        shells.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,radius_m,density_m3,weight_atoms"));
        assert_eq!(text.lines().count(), 1 + shells.len());
    }
}
