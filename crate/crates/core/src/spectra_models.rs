//! Occupation-number spectral models. With one bound level of per-atom
//! weight p0 the excitation spectrum of N independent bath atoms is the
//! binomial comb
//!
//! ```text
//!     A(nu) = sum_j C(N,j) p0^j (1-p0)^(N-j) delta(nu - j nu_B),
//! ```
//!
//! (the j = 0 term is kept so the comb is a normalized probability); with a
//! set of levels the binomial generalizes to a multinomial over occupation
//! vectors. For large N p0 the comb approaches a Gaussian of mean N p0 nu_B
//! and variance N p0 (1-p0) nu_B^2.

use crate::error::{Error, Result};
use crate::spectrum::{LineSpectrum, Normalization, Spectrum};
use statrs::function::gamma::ln_gamma;

/// Bound levels seen by each bath atom: line positions eps_i/h (Hz, negative
/// red) with per-atom occupation probabilities p_i.
#[derive(Debug, Clone)]
pub struct OccupationModel {
    levels: Vec<(f64, f64)>,
    n_atoms: u64,
    max_total_bound: usize,
    truncation_limit: f64,
}

impl OccupationModel {
    pub fn new(levels: Vec<(f64, f64)>, n_atoms: u64, max_total_bound: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidArgument("need at least one atom".into()));
        }
        let total: f64 = levels.iter().map(|&(_, p)| p).sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "level probabilities sum to {total} > 1"
            )));
        }
        if levels.iter().any(|&(_, p)| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidArgument(
                "level probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            levels,
            n_atoms,
            max_total_bound,
            truncation_limit: 1e-6,
        })
    }

    pub fn with_truncation_limit(mut self, limit: f64) -> Self {
        self.truncation_limit = limit;
        self
    }

    pub fn levels(&self) -> &[(f64, f64)] {
        &self.levels
    }

    pub fn n_atoms(&self) -> u64 {
        self.n_atoms
    }
}

/// Exact binomial comb as a line list: weights C(N,j) p0^j (1-p0)^(N-j) at
/// j * nu_b, j = 0..=N.
pub fn binomial_lines(n_atoms: u64, p0: f64, nu_b_hz: f64) -> Result<LineSpectrum> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidArgument(format!(
            "occupation probability must be in [0,1], got {p0}"
        )));
    }
    let n = n_atoms;
    let mut lines = LineSpectrum::default();
    if p0 == 0.0 {
        lines.push(0.0, 1.0);
        return Ok(lines);
    }
    if p0 == 1.0 {
        lines.push(n as f64 * nu_b_hz, 1.0);
        return Ok(lines);
    }
    let ln_p = p0.ln();
    let ln_q = (1.0 - p0).ln();
    let ln_n1 = ln_gamma(n as f64 + 1.0);
    for j in 0..=n {
        let jf = j as f64;
        let ln_w = ln_n1 - ln_gamma(jf + 1.0) - ln_gamma((n - j) as f64 + 1.0)
            + jf * ln_p
            + (n - j) as f64 * ln_q;
        let w = ln_w.exp();
        if w > 0.0 {
            lines.push(jf * nu_b_hz, w);
        }
    }
    Ok(lines)
}

/// Binomial comb deposited on a detuning grid.
pub fn binomial_spectrum(n_atoms: u64, p0: f64, nu_b_hz: f64, grid: &[f64]) -> Result<Spectrum> {
    binomial_lines(n_atoms, p0, nu_b_hz)?.bin_onto(grid)
}

/// Multinomial line list over occupation vectors (j_1..j_L) with
/// sum j_i <= max_total_bound. Returns the lines and the truncated weight
/// (occupancies beyond the cap); errors if the truncation exceeds the
/// model's limit.
pub fn multinomial_lines(model: &OccupationModel) -> Result<(LineSpectrum, f64)> {
    let n = model.n_atoms as f64;
    let p_scatter = 1.0 - model.levels.iter().map(|&(_, p)| p).sum::<f64>();
    let ln_n1 = ln_gamma(n + 1.0);

    let mut lines = LineSpectrum::default();
    let mut occupation = vec![0u64; model.levels.len()];
    let cap = (model.max_total_bound as u64).min(model.n_atoms);
    // per-level occupancy bound from the Poisson tail of lambda_i = N p_i;
    // weight beyond it is below 1e-15 per level and shows up in the reported
    // truncation
    let level_caps: Vec<u64> = model
        .levels
        .iter()
        .map(|&(_, p)| {
            let lam = n * p;
            let mut term = (-lam).exp();
            let mut cum = term;
            let mut j = 0u64;
            while 1.0 - cum > 1e-15 && j < cap {
                j += 1;
                term *= lam / j as f64;
                cum += term;
            }
            (j + 3).min(cap)
        })
        .collect();
    enumerate_occupations(
        &model.levels,
        &level_caps,
        &mut occupation,
        0,
        cap,
        n,
        ln_n1,
        p_scatter,
        &mut lines,
    );

    let truncated = (1.0 - lines.total_weight()).max(0.0);
    if truncated > model.truncation_limit {
        return Err(Error::TruncationWeight {
            weight: truncated,
            limit: model.truncation_limit,
        });
    }
    Ok((lines, truncated))
}

#[allow(clippy::too_many_arguments)]
fn enumerate_occupations(
    levels: &[(f64, f64)],
    level_caps: &[u64],
    occupation: &mut Vec<u64>,
    depth: usize,
    remaining_cap: u64,
    n: f64,
    ln_n1: f64,
    p_scatter: f64,
    lines: &mut LineSpectrum,
) {
    if depth == levels.len() {
        let total_bound: u64 = occupation.iter().sum();
        let unbound = n - total_bound as f64;
        if unbound < 0.0 {
            return;
        }
        let mut ln_w = ln_n1 - ln_gamma(unbound + 1.0);
        let mut position = 0.0f64;
        for (i, &(nu, p)) in levels.iter().enumerate() {
            let j = occupation[i];
            if j > 0 {
                if p <= 0.0 {
                    return;
                }
                ln_w += j as f64 * p.ln() - ln_gamma(j as f64 + 1.0);
                position += j as f64 * nu;
            }
        }
        if unbound > 0.0 {
            if p_scatter <= 0.0 {
                return;
            }
            ln_w += unbound * p_scatter.ln();
        }
        let w = ln_w.exp();
        if w > 0.0 {
            lines.push(position, w);
        }
        return;
    }
    for j in 0..=remaining_cap.min(level_caps[depth]) {
        occupation[depth] = j;
        enumerate_occupations(
            levels,
            level_caps,
            occupation,
            depth + 1,
            remaining_cap - j,
            n,
            ln_n1,
            p_scatter,
            lines,
        );
    }
    occupation[depth] = 0;
}

/// Multinomial spectrum on a grid; the truncated weight is checked against
/// the model limit.
pub fn multinomial_spectrum(model: &OccupationModel, grid: &[f64]) -> Result<Spectrum> {
    let (lines, _) = multinomial_lines(model)?;
    lines.bin_onto(grid)
}

/// Gaussian-limit parameters of the multinomial: mean and width of the total
/// detuning of N atoms (Hz). The variance is the full multinomial one,
/// N [sum p_i nu_i^2 - (sum p_i nu_i)^2].
pub fn gaussian_limit(model: &OccupationModel) -> (f64, f64) {
    let n = model.n_atoms as f64;
    let m1: f64 = model.levels.iter().map(|&(nu, p)| p * nu).sum();
    let m2: f64 = model.levels.iter().map(|&(nu, p)| p * nu * nu).sum();
    let mean = n * m1;
    let var = n * (m2 - m1 * m1);
    (mean, var.max(0.0).sqrt())
}

/// sigma of a Gaussian with the given FWHM.
pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// Convolve a spectrum on a uniform grid with a Gaussian of the given FWHM.
/// The sampled kernel is renormalized to unit weight, so the area and (by
/// symmetry) the first moment are preserved as long as the support stays
/// clear of the grid edges.
pub fn convolve_lineshape(spec: &Spectrum, fwhm_hz: f64) -> Result<Spectrum> {
    if !(fwhm_hz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fwhm must be positive, got {fwhm_hz}"
        )));
    }
    let x = spec.detunings();
    let n = x.len();
    let step = (x[n - 1] - x[0]) / (n - 1) as f64;
    for w in x.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs() {
            return Err(Error::InvalidArgument(
                "convolution requires a uniform grid".into(),
            ));
        }
    }
    if step > fwhm_hz / 4.0 {
        return Err(Error::GridTooCoarse {
            spacing: step,
            limit: fwhm_hz / 4.0,
        });
    }

    let sigma = fwhm_to_sigma(fwhm_hz);
    let half = ((8.0 * sigma) / step).ceil() as usize;
    let mut kernel = Vec::with_capacity(2 * half + 1);
    for j in -(half as i64)..=(half as i64) {
        let u = j as f64 * step / sigma;
        kernel.push((-0.5 * u * u).exp());
    }
    let ksum: f64 = kernel.iter().sum();
    for k in kernel.iter_mut() {
        *k /= ksum;
    }

    let y = spec.intensities();
    let mut out = vec![0.0f64; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (kj, &k) in kernel.iter().enumerate() {
            let j = i as i64 + kj as i64 - half as i64;
            if j >= 0 && (j as usize) < n {
                acc += k * y[j as usize];
            }
        }
        *o = acc;
    }
    Spectrum::new(x.to_vec(), out, Normalization::Raw)
}
