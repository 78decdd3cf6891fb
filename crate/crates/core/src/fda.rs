//! Many-body absorption spectrum at fixed density from the time-domain
//! overlap of the free and interacting single-particle evolutions.
//!
//! One bath atom initially in the condensate mode |s> contributes
//!
//! ```text
//!     s(t) = e^{i eps_s0 t / hbar} sum_i p_i e^{-i eps_i t / hbar},
//! ```
//!
//! and a condensate of N_box atoms in the box contributes
//! S(t) = exp[N_box (s(t) - 1)] in the thermodynamic-limit (cumulant) form,
//! or S(t) = s(t)^{N_box} as the finite-power cross-check. The spectrum is
//! the windowed Fourier transform
//!
//! ```text
//!     A(nu) = 2 Re int_0^{t_max} e^{i 2 pi nu t} S(t) w(t) dt,
//! ```
//!
//! with a Gaussian window w(t) matched to the laser resolution. In the
//! cumulant form the spectral cumulants are kappa_m = N_box sum_i p_i nu_i^m,
//! which pins the detuning grid and all moment checks.

use crate::bound_states::{BoundStateSet, BoxModel};
use crate::constants::HARTREE_HZ;
use crate::error::{Error, Result};
use crate::spectra_models::fwhm_to_sigma;
use crate::spectrum::{Normalization, Spectrum};
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::Write;

const UNITARITY_SLACK: f64 = 1e-9;
const DECAY_LIMIT: f64 = 1e-4;
const RINGING_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapForm {
    /// exp[N (s - 1)]; cumulants exactly linear in density.
    Exponentiated,
    /// s^N with a continuously tracked complex logarithm.
    FinitePower,
}

#[derive(Debug, Clone, Copy)]
pub struct FdaConfig {
    /// Length of the time window (s).
    pub t_max: f64,
    pub n_time_steps: usize,
    /// Gaussian spectral resolution (FWHM, Hz) applied as a time window.
    pub window_fwhm_hz: f64,
    pub form: OverlapForm,
}

impl FdaConfig {
    /// Defaults: t_max = factor / window fwhm with factor 20, 2^15 samples.
    pub fn for_window(window_fwhm_hz: f64) -> Result<Self> {
        Self::with_t_max_factor(window_fwhm_hz, 20.0, 1 << 15)
    }

    pub fn with_t_max_factor(
        window_fwhm_hz: f64,
        t_max_factor: f64,
        n_time_steps: usize,
    ) -> Result<Self> {
        if !(window_fwhm_hz > 0.0) || !(t_max_factor > 0.0) || n_time_steps < 16 {
            return Err(Error::InvalidArgument(format!(
                "bad overlap config: fwhm {window_fwhm_hz}, factor {t_max_factor}, steps {n_time_steps}"
            )));
        }
        Ok(Self {
            t_max: t_max_factor / window_fwhm_hz,
            n_time_steps,
            window_fwhm_hz,
            form: OverlapForm::Exponentiated,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.t_max / (self.n_time_steps - 1) as f64;
        (0..self.n_time_steps).map(|k| k as f64 * dt).collect()
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.n_time_steps - 1) as f64
    }

    pub fn nyquist_hz(&self) -> f64 {
        0.5 / self.dt()
    }

    /// Gaussian time window with w(0) = 1 whose Fourier transform is the
    /// unit-area spectral Gaussian of the configured FWHM.
    pub fn window_at(&self, t: f64) -> f64 {
        let sigma_nu = fwhm_to_sigma(self.window_fwhm_hz);
        let arg = std::f64::consts::PI * sigma_nu * t;
        (-2.0 * arg * arg).exp()
    }
}

/// Time-domain overlap S(t) of the many-body system at one density.
#[derive(Debug, Clone)]
pub struct OverlapSeries {
    times: Vec<f64>,
    values: Vec<Complex64>,
    density_si: f64,
    n_box: f64,
}

impl OverlapSeries {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn density_si(&self) -> f64 {
        self.density_si
    }

    pub fn atom_count(&self) -> f64 {
        self.n_box
    }

    /// Directly wrap a computed overlap series (for synthetic signals).
    pub fn from_values(times: Vec<f64>, values: Vec<Complex64>, density_si: f64) -> Self {
        Self {
            times,
            values,
            density_si,
            n_box: 0.0,
        }
    }

    /// CSV dump: t_s, re, im.
    pub fn to_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t_s,re,im")?;
        for (&t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{t:.17e},{:.17e},{:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Single-atom overlap s(t) on a uniform time grid from the eigenbasis and
/// condensate overlaps. Levels advance by per-step phase rotations, refreshed
/// against exact exponentials every 1024 steps.
pub fn single_atom_overlap(states: &BoundStateSet, times: &[f64]) -> Result<Vec<Complex64>> {
    let (energies, weights) = states.spectral_weights()?;
    let eps_s0 = states.epsilon_s0();
    check_uniform(times)?;
    let dt = times[1] - times[0];
    let n_t = times.len();

    // angular frequencies relative to the condensate mode (rad/s)
    let omega: Vec<f64> = energies
        .iter()
        .map(|&e| (e - eps_s0) * HARTREE_HZ * 2.0 * std::f64::consts::PI)
        .collect();

    let chunks: Vec<(usize, usize)> = {
        let step = 64usize;
        (0..omega.len())
            .step_by(step)
            .map(|a| (a, (a + step).min(omega.len())))
            .collect()
    };
    let partials: Vec<Vec<Complex64>> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n_t];
            for i in a..b {
                let p = weights[i];
                if p == 0.0 {
                    continue;
                }
                let rot = Complex64::from_polar(1.0, -omega[i] * dt);
                let mut z = Complex64::new(1.0, 0.0);
                for (k, acc_k) in acc.iter_mut().enumerate() {
                    if k % 1024 == 0 {
                        z = Complex64::from_polar(1.0, -omega[i] * times[k]);
                    }
                    *acc_k += p * z;
                    z *= rot;
                }
            }
            acc
        })
        .collect();

    let mut s = vec![Complex64::new(0.0, 0.0); n_t];
    for part in partials {
        for (sk, pk) in s.iter_mut().zip(part) {
            *sk += pk;
        }
    }

    let s0_err = (s[0].re - 1.0).abs().max(s[0].im.abs());
    if s0_err > states.completeness_deficit() + 1e-10 {
        return Err(Error::EigenNonConvergence(format!(
            "s(0) deviates from 1 by {s0_err:e}"
        )));
    }
    Ok(s)
}

fn check_uniform(times: &[f64]) -> Result<()> {
    if times.len() < 2 || times[0] != 0.0 {
        return Err(Error::InvalidArgument(
            "time grid must start at 0 with >= 2 samples".into(),
        ));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(Error::InvalidArgument("time grid must be uniform".into()));
        }
    }
    Ok(())
}

/// Promote the single-atom overlap to the condensate of N_box = rho V_box
/// atoms. Zero density short-circuits to S = 1; a box holding less than one
/// atom cannot represent the density and is rejected.
pub fn condensate_overlap(
    s_values: &[Complex64],
    times: &[f64],
    density_si: f64,
    box_model: &BoxModel,
    form: OverlapForm,
) -> Result<OverlapSeries> {
    if density_si < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "density must be >= 0, got {density_si}"
        )));
    }
    let n_box = box_model.atom_count(density_si);
    if density_si == 0.0 {
        return Ok(OverlapSeries {
            times: times.to_vec(),
            values: vec![Complex64::new(1.0, 0.0); times.len()],
            density_si,
            n_box,
        });
    }
    if n_box < 1.0 {
        return Err(Error::BoxTooSmall { n_box });
    }

    let values = match form {
        OverlapForm::Exponentiated => s_values
            .iter()
            .map(|&s| (n_box * (s - 1.0)).exp())
            .collect::<Vec<_>>(),
        OverlapForm::FinitePower => {
            // continuous branch of ln s along the series
            let mut out = Vec::with_capacity(s_values.len());
            let mut prev_phase = 0.0f64;
            let two_pi = 2.0 * std::f64::consts::PI;
            for &s in s_values {
                let mag = s.norm();
                let mut phase = s.arg();
                while phase - prev_phase > std::f64::consts::PI {
                    phase -= two_pi;
                }
                while phase - prev_phase < -std::f64::consts::PI {
                    phase += two_pi;
                }
                prev_phase = phase;
                let ln_s = Complex64::new(mag.ln(), phase);
                out.push((n_box * ln_s).exp());
            }
            out
        }
    };

    for v in &values {
        if v.norm() > 1.0 + UNITARITY_SLACK {
            return Err(Error::EigenNonConvergence(format!(
                "|S(t)| = {} violates unitarity",
                v.norm()
            )));
        }
    }

    Ok(OverlapSeries {
        times: times.to_vec(),
        values,
        density_si,
        n_box,
    })
}

/// Diagnostics of the Fourier step.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumDiagnostics {
    /// Trapezoid area before unit normalization; 1 up to truncation error.
    pub raw_area: f64,
    /// Most negative intensity relative to the peak, before clipping.
    pub min_intensity_fraction: f64,
    /// |S w| at t_max.
    pub tail_residual: f64,
}

/// Windowed Fourier transform of the overlap onto a detuning grid, clipped
/// of sub-1e-3 truncation ringing and normalized to unit area.
pub fn spectrum_from_overlap(
    overlap: &OverlapSeries,
    cfg: &FdaConfig,
    grid: &[f64],
) -> Result<(Spectrum, SpectrumDiagnostics)> {
    let times = &overlap.times;
    let values = &overlap.values;
    let dt = times[1] - times[0];

    let max_nu = grid.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if max_nu > 0.45 / dt {
        return Err(Error::InvalidArgument(format!(
            "grid reaches {max_nu:.3e} Hz, beyond the usable band of the {:.3e} Hz Nyquist",
            0.5 / dt
        )));
    }

    let windowed: Vec<Complex64> = values
        .iter()
        .zip(times)
        .map(|(&s, &t)| s * cfg.window_at(t))
        .collect();
    let tail_residual = windowed.last().unwrap().norm();
    if tail_residual > DECAY_LIMIT {
        return Err(Error::OverlapNotDecayed {
            residual: tail_residual,
        });
    }

    let n_t = times.len();
    let intensities_raw: Vec<f64> = grid
        .par_iter()
        .map(|&nu| {
            let rot = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * nu * dt);
            let mut z = Complex64::new(1.0, 0.0);
            let mut acc = 0.0f64;
            for (k, w) in windowed.iter().enumerate() {
                if k % 1024 == 0 {
                    z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * nu * times[k]);
                }
                let c = if k == 0 || k == n_t - 1 { 0.5 } else { 1.0 };
                acc += c * (w * z).re;
                z *= rot;
            }
            2.0 * dt * acc
        })
        .collect();

    let peak = intensities_raw.iter().cloned().fold(0.0f64, f64::max);
    let min = intensities_raw.iter().cloned().fold(0.0f64, f64::min);
    let min_fraction = if peak > 0.0 { min / peak } else { 0.0 };
    if min_fraction < -RINGING_LIMIT {
        return Err(Error::ExcessiveRinging {
            min_frac: min_fraction,
        });
    }
    let clipped: Vec<f64> = intensities_raw.iter().map(|&v| v.max(0.0)).collect();

    let spec = Spectrum::new(grid.to_vec(), clipped, Normalization::Raw)?;
    let raw_area = spec.area();
    let spec = spec.into_normalized(Normalization::UnitArea)?;
    Ok((
        spec,
        SpectrumDiagnostics {
            raw_area,
            min_intensity_fraction: min_fraction,
            tail_residual,
        },
    ))
}

/// Spectral cumulants of the exponentiated form: kappa_m = N sum_i p_i nu_i^m
/// (Hz^m), m = 1, 2.
pub fn overlap_cumulants(states: &BoundStateSet, density_si: f64) -> Result<(f64, f64)> {
    let (energies, weights) = states.spectral_weights()?;
    let eps_s0 = states.epsilon_s0();
    let n_box = states.box_model().atom_count(density_si);
    let mut k1 = 0.0;
    let mut k2 = 0.0;
    for (&e, &p) in energies.iter().zip(weights) {
        let nu = (e - eps_s0) * HARTREE_HZ;
        k1 += p * nu;
        k2 += p * nu * nu;
    }
    Ok((n_box * k1, n_box * k2))
}

/// Detuning grid sized from the cumulants: the support of a Poisson-like
/// comb lies within the mean +/- 6 widths, extended red to cover multiple
/// occupation of the deepest bound level and blue for the window.
pub fn auto_grid(states: &BoundStateSet, density_si: f64, window_fwhm_hz: f64) -> Result<Vec<f64>> {
    let (k1, k2) = overlap_cumulants(states, density_si)?;
    let sigma = k2.max(0.0).sqrt();
    let deepest = states
        .s_channel()
        .bound_energies()
        .first()
        .map(|&e| e * HARTREE_HZ)
        .unwrap_or(0.0);
    let lo = (k1 - 6.0 * sigma).min(3.0 * deepest) - 6.0 * window_fwhm_hz;
    let hi = (k1 + 6.0 * sigma).max(0.0) + 6.0 * window_fwhm_hz;
    let step = (window_fwhm_hz / 6.0).min(sigma.max(window_fwhm_hz) / 40.0);
    let n = (((hi - lo) / step).ceil() as usize + 1).clamp(64, 8192);
    Ok(crate::spectrum::uniform_grid(lo, hi, n))
}

/// Least-squares Gaussian fit a exp(-(nu-c)^2/2s^2) over a detuning window.
#[derive(Debug, Clone, Copy)]
pub struct GaussianFit {
    pub center_hz: f64,
    pub sigma_hz: f64,
    pub amplitude: f64,
    /// max |residual| / fitted amplitude.
    pub residual_fraction: f64,
}

pub fn gaussian_width(spec: &Spectrum, fit_window: (f64, f64)) -> Result<GaussianFit> {
    let (lo, hi) = fit_window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&x, &y) in spec.detunings().iter().zip(spec.intensities()) {
        if x >= lo && x <= hi {
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.len() < 8 {
        return Err(Error::InvalidArgument(format!(
            "fit window [{lo:.3e}, {hi:.3e}] holds only {} samples",
            xs.len()
        )));
    }

    // moment-based start
    let total: f64 = ys.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("fit window holds no weight".into()));
    }
    let mut c: f64 = xs.iter().zip(&ys).map(|(&x, &y)| x * y).sum::<f64>() / total;
    let s2: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (x - c) * (x - c) * y)
        .sum::<f64>()
        / total;
    let mut s = s2.max(1e-300).sqrt();
    let mut a = ys.iter().cloned().fold(0.0f64, f64::max);

    let mut lambda: f64 = 1e-3; // Levenberg damping
    let mut last_cost = f64::INFINITY;
    for _ in 0..200 {
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        let mut cost = 0.0f64;
        for (&x, &y) in xs.iter().zip(&ys) {
            let u = (x - c) / s;
            let g = (-0.5 * u * u).exp();
            let f = a * g;
            let r = y - f;
            cost += r * r;
            let grad = [g, f * u / s, f * u * u / s];
            for i in 0..3 {
                jtr[i] += grad[i] * r;
                for j in 0..3 {
                    jtj[i][j] += grad[i] * grad[j];
                }
            }
        }
        if cost > last_cost {
            lambda *= 10.0;
        } else {
            lambda = (lambda * 0.3).max(1e-12);
            last_cost = cost;
        }
        for (i, row) in jtj.iter_mut().enumerate() {
            row[i] *= 1.0 + lambda;
        }
        let step = solve3(&jtj, &jtr).ok_or_else(|| {
            Error::InvalidArgument("singular normal equations in gaussian fit".into())
        })?;
        a += step[0];
        c += step[1];
        s += step[2];
        s = s.abs().max(1e-300);
        a = a.max(1e-300);
        let rel = (step[0] / a)
            .abs()
            .max((step[1] / s).abs())
            .max((step[2] / s).abs());
        if rel < 1e-12 {
            break;
        }
    }

    let mut max_resid = 0.0f64;
    for (&x, &y) in xs.iter().zip(&ys) {
        let u = (x - c) / s;
        let f = a * (-0.5 * u * u).exp();
        max_resid = max_resid.max((y - f).abs());
    }
    let residual_fraction = max_resid / a;
    if residual_fraction > 0.2 {
        return Err(Error::FitResidual {
            residual_frac: residual_fraction,
        });
    }
    Ok(GaussianFit {
        center_hz: c,
        sigma_hz: s,
        amplitude: a,
        residual_fraction,
    })
}

fn solve3(m: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let mut a = *m;
    let mut x = *b;
    for i in 0..3 {
        let mut piv = i;
        for r in i + 1..3 {
            if a[r][i].abs() > a[piv][i].abs() {
                piv = r;
            }
        }
        if a[piv][i] == 0.0 {
            return None;
        }
        a.swap(i, piv);
        x.swap(i, piv);
        for r in i + 1..3 {
            let f = a[r][i] / a[i][i];
            for cidx in i..3 {
                a[r][cidx] -= f * a[i][cidx];
            }
            x[r] -= f * x[i];
        }
    }
    let mut out = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut acc = x[i];
        for j in i + 1..3 {
            acc -= a[i][j] * out[j];
        }
        out[i] = acc / a[i][i];
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound_states::{BoundaryCondition, BoxModel};
    use crate::constants::Constants;
    use crate::spectrum::uniform_grid;
    use approx::assert_relative_eq;

    fn toy_box() -> BoxModel {
        BoxModel {
            box_radius: 15_000.0,
            n_points: 128,
            reduced_mass: Constants::default().reduced_mass_au(),
            l_max: 0,
            boundary: BoundaryCondition::UniformGround,
            energy_cutoff_hz: None,
        }
    }

    fn synthetic_two_level(p0: f64, nu_b_hz: f64) -> BoundStateSet {
        let eb = nu_b_hz / HARTREE_HZ;
        BoundStateSet::synthetic(vec![(eb, p0), (0.0, 1.0 - p0)], 0.0, toy_box()).unwrap()
    }

    #[test]
    fn free_evolution_gives_unit_overlap() {
        let states = BoundStateSet::synthetic(vec![(0.0, 1.0)], 0.0, toy_box()).unwrap();
        let cfg = FdaConfig::for_window(0.4e6).unwrap();
        let s = single_atom_overlap(&states, &cfg.times()).unwrap();
        for v in &s {
            assert_relative_eq!(v.re, 1.0, epsilon = 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn two_level_overlap_matches_closed_form() {
        let (p0, nu_b) = (0.07, -1.5e6);
        let states = synthetic_two_level(p0, nu_b);
        let cfg = FdaConfig::for_window(0.4e6).unwrap();
        let times = cfg.times();
        let s = single_atom_overlap(&states, &times).unwrap();
        for (k, &t) in times.iter().enumerate().step_by(997) {
            let expected = Complex64::new(1.0 - p0, 0.0)
                + p0 * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * nu_b * t);
            assert!((s[k] - expected).norm() < 1e-10, "t = {t}");
            assert!(s[k].norm() <= 1.0 + 1e-12);
        }
        // beat period h / |eps_B|: overlap magnitude dips halfway through
        let period = 1.0 / nu_b.abs();
        let idx = (period / (2.0 * cfg.dt())).round() as usize;
        assert!(s[idx].norm() < 1.0 - p0);
    }

    #[test]
    fn zero_density_gives_unit_condensate_overlap() {
        let states = synthetic_two_level(0.05, -1e6);
        let cfg = FdaConfig::for_window(0.4e6).unwrap();
        let times = cfg.times();
        let s = single_atom_overlap(&states, &times).unwrap();
        let overlap =
            condensate_overlap(&s, &times, 0.0, states.box_model(), OverlapForm::Exponentiated)
                .unwrap();
        assert!(overlap.values().iter().all(|v| (v - 1.0).norm() < 1e-15));
    }

    #[test]
    fn box_below_one_atom_is_rejected() {
        let states = synthetic_two_level(0.05, -1e6);
        let cfg = FdaConfig::for_window(0.4e6).unwrap();
        let times = cfg.times();
        let s = single_atom_overlap(&states, &times).unwrap();
        let err =
            condensate_overlap(&s, &times, 1e10, states.box_model(), OverlapForm::Exponentiated);
        assert!(matches!(err, Err(Error::BoxTooSmall { .. })));
    }

    #[test]
    fn unitarity_bound_holds() {
        let states = synthetic_two_level(0.12, -2e6);
        let cfg = FdaConfig::for_window(0.4e6).unwrap();
        let times = cfg.times();
        let s = single_atom_overlap(&states, &times).unwrap();
        let rho = 3.6e20;
        for form in [OverlapForm::Exponentiated, OverlapForm::FinitePower] {
            let overlap = condensate_overlap(&s, &times, rho, states.box_model(), form).unwrap();
            assert!(overlap
                .values()
                .iter()
                .all(|v| v.norm() <= 1.0 + UNITARITY_SLACK));
            assert_relative_eq!(overlap.values()[0].re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_phase_gives_window_limited_line() {
        let nu0 = -2.5e6;
        let cfg = FdaConfig::for_window(0.4e6).unwrap();
        let times = cfg.times();
        let values: Vec<Complex64> = times
            .iter()
            .map(|&t| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * nu0 * t))
            .collect();
        let overlap = OverlapSeries::from_values(times.clone(), values, 0.0);
        let grid = uniform_grid(-6e6, 2e6, 1601);
        let (spec, diag) = spectrum_from_overlap(&overlap, &cfg, &grid).unwrap();
        assert_relative_eq!(diag.raw_area, 1.0, epsilon = 5e-3);
        assert_relative_eq!(spec.peak_position(), nu0, epsilon = 2e3);
        // line width set by the window
        let fit = gaussian_width(&spec, (nu0 - 1.5e6, nu0 + 1.5e6)).unwrap();
        assert_relative_eq!(fit.sigma_hz, fwhm_to_sigma(0.4e6), max_relative = 0.02);
    }

    #[test]
    fn poisson_comb_matches_analytic_expansion() {
        // exp[lambda (e^{-i 2 pi nu_B t} - 1)]: weights e^-lambda lambda^j/j!
        let lambda = 3.0f64;
        let nu_b = -1.2e6;
        let n_box_target = 400.0;
        let p0 = lambda / n_box_target;
        let states = synthetic_two_level(p0, nu_b);
        let rho = n_box_target / states.box_model().volume_si();
        let cfg = FdaConfig::for_window(0.4e6).unwrap();
        let times = cfg.times();
        let s = single_atom_overlap(&states, &times).unwrap();
        let overlap =
            condensate_overlap(&s, &times, rho, states.box_model(), OverlapForm::Exponentiated)
                .unwrap();
        let grid = uniform_grid(-16e6, 4e6, 2001);
        let (spec, _) = spectrum_from_overlap(&overlap, &cfg, &grid).unwrap();

        // analytic windowed comb on the same grid
        let lam_eff = overlap.atom_count() * p0;
        let sigma = fwhm_to_sigma(cfg.window_fwhm_hz);
        let mut weights = Vec::new();
        let mut term = (-lam_eff).exp();
        for j in 0..60 {
            if j > 0 {
                term *= lam_eff / j as f64;
            }
            weights.push(term);
        }
        let analytic: Vec<f64> = grid
            .iter()
            .map(|&nu| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(j, &w)| {
                        let center = j as f64 * nu_b;
                        let u = (nu - center) / sigma;
                        w * (-0.5 * u * u).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
                    })
                    .sum()
            })
            .collect();
        let analytic_spec = Spectrum::new(grid.clone(), analytic, Normalization::Raw)
            .unwrap()
            .into_normalized(Normalization::UnitArea)
            .unwrap();
        let l1 = spec.l1_distance(&analytic_spec).unwrap();
        assert!(l1 < 0.01, "L1 distance to Poisson comb {l1}");
    }

    #[test]
    fn sum_rule_and_first_moment() {
        let (p0, nu_b) = (0.04, -1.8e6);
        let states = synthetic_two_level(p0, nu_b);
        let rho = 900.0 / states.box_model().volume_si();
        let cfg = FdaConfig::for_window(0.4e6).unwrap();
        let times = cfg.times();
        let s = single_atom_overlap(&states, &times).unwrap();
        let overlap =
            condensate_overlap(&s, &times, rho, states.box_model(), OverlapForm::Exponentiated)
                .unwrap();
        let grid = auto_grid(&states, rho, cfg.window_fwhm_hz).unwrap();
        let (spec, diag) = spectrum_from_overlap(&overlap, &cfg, &grid).unwrap();
        assert!((diag.raw_area - 1.0).abs() < 5e-3, "area {}", diag.raw_area);
        let (k1, k2) = overlap_cumulants(&states, rho).unwrap();
        assert_relative_eq!(spec.first_moment(), k1, max_relative = 0.01);
        // support: negligible weight below the mean minus six widths
        let red_edge = k1 - 6.0 * k2.sqrt();
        let mut below = 0.0;
        for i in 0..grid.len() - 1 {
            if 0.5 * (grid[i] + grid[i + 1]) < red_edge {
                below += 0.5
                    * (spec.intensities()[i] + spec.intensities()[i + 1])
                    * (grid[i + 1] - grid[i]);
            }
        }
        assert!(below < 1e-4, "weight below the red support edge: {below:e}");
    }

    #[test]
    fn exponentiated_and_finite_power_agree() {
        let (p0, nu_b) = (0.016, -1.5e6);
        let states = synthetic_two_level(p0, nu_b);
        let rho = 800.0 / states.box_model().volume_si();
        let cfg = FdaConfig::for_window(0.4e6).unwrap();
        let times = cfg.times();
        let s = single_atom_overlap(&states, &times).unwrap();
        let grid = auto_grid(&states, rho, cfg.window_fwhm_hz).unwrap();
        let mut specs = Vec::new();
        for form in [OverlapForm::Exponentiated, OverlapForm::FinitePower] {
            let overlap = condensate_overlap(&s, &times, rho, states.box_model(), form).unwrap();
            let (spec, _) = spectrum_from_overlap(&overlap, &cfg, &grid).unwrap();
            specs.push(spec);
        }
        let l1 = specs[0].l1_distance(&specs[1]).unwrap();
        assert!(l1 < 0.02, "forms differ by L1 {l1}");
    }

    #[test]
    fn undecayed_overlap_is_rejected() {
        // single bound level, no scattering admixture and a short window:
        // |S w| stays above threshold at t_max
        let states = synthetic_two_level(0.5, -0.2e6);
        let cfg = FdaConfig::with_t_max_factor(2e6, 0.2, 4096).unwrap();
        let times = cfg.times();
        let s = single_atom_overlap(&states, &times).unwrap();
        let rho = 400.0 / states.box_model().volume_si();
        let overlap =
            condensate_overlap(&s, &times, rho, states.box_model(), OverlapForm::Exponentiated)
                .unwrap();
        let grid = uniform_grid(-5e6, 1e6, 301);
        assert!(matches!(
            spectrum_from_overlap(&overlap, &cfg, &grid),
            Err(Error::OverlapNotDecayed { .. })
        ));
    }

    #[test]
    fn gaussian_fit_recovers_exact_parameters() {
        let grid = uniform_grid(-30e6, 10e6, 4001);
        let (a0, c0, s0) = (3.7e-7, -9.5e6, 2.2e6);
        let vals: Vec<f64> = grid
            .iter()
            .map(|&x| a0 * (-0.5 * ((x - c0) / s0).powi(2)).exp())
            .collect();
        let spec = Spectrum::new(grid, vals, Normalization::Raw).unwrap();
        let fit = gaussian_width(&spec, (-20e6, 0.0)).unwrap();
        assert_relative_eq!(fit.center_hz, c0, max_relative = 1e-6);
        assert_relative_eq!(fit.sigma_hz, s0, max_relative = 1e-6);
        assert_relative_eq!(fit.amplitude, a0, max_relative = 1e-6);
    }

    #[test]
    fn poisson_width_is_sqrt_lambda() {
        let lambda = 50.0f64;
        let nu_b = -1.5e6;
        let n_box_target = 2500.0;
        let p0 = lambda / n_box_target;
        let states = synthetic_two_level(p0, nu_b);
        let rho = n_box_target / states.box_model().volume_si();
        // window wide enough to smooth the comb into its envelope
        let cfg = FdaConfig::for_window(3e6).unwrap();
        let times = cfg.times();
        let s = single_atom_overlap(&states, &times).unwrap();
        let overlap =
            condensate_overlap(&s, &times, rho, states.box_model(), OverlapForm::Exponentiated)
                .unwrap();
        let grid = auto_grid(&states, rho, cfg.window_fwhm_hz).unwrap();
        let (spec, _) = spectrum_from_overlap(&overlap, &cfg, &grid).unwrap();
        let lam_eff = overlap.atom_count() * p0;
        let center = lam_eff * nu_b;
        let sigma_est = lam_eff.sqrt() * nu_b.abs();
        let fit =
            gaussian_width(&spec, (center - 3.0 * sigma_est, center + 3.0 * sigma_est)).unwrap();
        let window_var = fwhm_to_sigma(cfg.window_fwhm_hz).powi(2);
        let sigma_pol = (fit.sigma_hz.powi(2) - window_var).max(0.0).sqrt();
        assert_relative_eq!(sigma_pol, sigma_est, max_relative = 0.03);
    }

    #[test]
    fn overlap_csv_has_three_columns() {
        let states = synthetic_two_level(0.05, -1e6);
        let cfg = FdaConfig::for_window(0.4e6).unwrap();
        let times = cfg.times();
        let s = single_atom_overlap(&states, &times).unwrap();
        let overlap =
            condensate_overlap(&s, &times, 0.0, states.box_model(), OverlapForm::Exponentiated)
                .unwrap();
        let mut buf = Vec::new();
        overlap.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_s,re,im"));
        assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 3);
    }
}
