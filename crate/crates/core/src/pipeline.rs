//! End-to-end pipelines: wavefunction -> potential -> boxed levels ->
//! spectra, shared by the command-line front end and the verification
//! suites. All stages are pure given their parameter structs, so repeated
//! runs of the same configuration produce identical outputs.

use crate::bound_states::{
    bound_refinement_delta_from, condensate_overlaps, solve_box_states, BoundStateSet,
    BoundaryCondition, BoxModel,
};
use crate::constants::{Constants, HARTREE_HZ};
use crate::error::{Error, Result};
use crate::fda::{
    auto_grid, condensate_overlap, gaussian_width, overlap_cumulants, single_atom_overlap,
    spectrum_from_overlap, FdaConfig, GaussianFit, OverlapForm, SpectrumDiagnostics,
};
use crate::mean_field::{lda_spectrum, mean_field_shift, MeanFieldModel};
use crate::pseudopotential::{build_potential, PseudoPotential, ScatteringParams};
use crate::spectra_models::{
    convolve_lineshape, fwhm_to_sigma, multinomial_lines, OccupationModel,
};
use crate::spectrum::{uniform_grid, LineSpectrum, Normalization, Spectrum};
use crate::trap::{shell_decomposition, TrapConfig, TrapDensity};
use crate::wavefunction::{
    default_grid, outer_lobe_radius, solve_radial, RadialWavefunction, RydbergState,
};
use num_complex::Complex64;

/// Everything a run needs beyond the principal quantum number.
#[derive(Debug, Clone)]
pub struct PipelineParams {
    pub constants: Constants,
    pub quantum_defect: f64,
    pub l: u32,
    pub scattering: ScatteringParams,
    pub box_radius_factor: f64,
    pub box_points: usize,
    pub box_l_max: u32,
    pub boundary: BoundaryCondition,
    pub energy_cutoff_hz: Option<f64>,
    pub t_max_factor: f64,
    pub n_time_steps: usize,
    pub window_fwhm_hz: f64,
    pub trap: TrapConfig,
    pub max_total_bound: usize,
    pub truncation_limit: f64,
    pub n_shells: usize,
    pub n_thermal_shells: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            constants: Constants::default(),
            quantum_defect: 3.371,
            l: 0,
            scattering: ScatteringParams::default(),
            box_radius_factor: 4.0,
            box_points: 20_000,
            box_l_max: 0,
            boundary: BoundaryCondition::UniformGround,
            energy_cutoff_hz: None,
            t_max_factor: 20.0,
            n_time_steps: 1 << 15,
            window_fwhm_hz: 0.4e6,
            trap: TrapConfig::default(),
            max_total_bound: 8,
            truncation_limit: 5e-2,
            n_shells: 64,
            n_thermal_shells: 16,
        }
    }
}

impl PipelineParams {
    pub fn fda_config(&self) -> Result<FdaConfig> {
        FdaConfig::with_t_max_factor(self.window_fwhm_hz, self.t_max_factor, self.n_time_steps)
    }
}

/// Solved single-n chain: wavefunction, potential, boxed eigenbasis with
/// overlaps, and convergence diagnostics.
pub struct ChainSolution {
    pub state: RydbergState,
    pub wavefunction: RadialWavefunction,
    pub r_lobe_bohr: f64,
    pub potential: PseudoPotential,
    pub states: BoundStateSet,
    pub mean_field: MeanFieldModel,
    /// Largest relative bound-energy change under grid doubling.
    pub refinement_delta: f64,
}

/// Run the chain for one principal quantum number.
pub fn solve_chain(n: u32, params: &PipelineParams) -> Result<ChainSolution> {
    let state = RydbergState::new(n, params.l, params.quantum_defect)?;
    let grid = default_grid(&state)?;
    let wavefunction = solve_radial(&state, &grid)?;
    let r_lobe = outer_lobe_radius(&wavefunction)?;
    let potential = build_potential(&wavefunction, &params.scattering)?;

    let mut model = BoxModel::with_radius_factor(
        r_lobe,
        params.box_radius_factor,
        params.box_points,
        &params.constants,
    )?;
    model.l_max = params.box_l_max;
    model.boundary = params.boundary;
    model.energy_cutoff_hz = params.energy_cutoff_hz;

    let base = solve_box_states(&potential, &model)?;
    let refinement_delta = bound_refinement_delta_from(&base, &potential, &model)?;
    if refinement_delta > 0.02 {
        return Err(Error::RefinementNotConverged {
            rel_change: refinement_delta,
            limit: 0.02,
        });
    }
    let states = condensate_overlaps(base)?;
    let mean_field = MeanFieldModel::from_potential(&potential);

    Ok(ChainSolution {
        state,
        wavefunction,
        r_lobe_bohr: r_lobe,
        potential,
        states,
        mean_field,
        refinement_delta,
    })
}

/// Fixed-density many-body spectrum.
pub fn fda_spectrum(
    chain: &ChainSolution,
    density_si: f64,
    params: &PipelineParams,
) -> Result<(Spectrum, SpectrumDiagnostics)> {
    let cfg = params.fda_config()?;
    let times = cfg.times();
    let s = single_atom_overlap(&chain.states, &times)?;
    let overlap = condensate_overlap(
        &s,
        &times,
        density_si,
        chain.states.box_model(),
        OverlapForm::Exponentiated,
    )?;
    let grid = auto_grid(&chain.states, density_si, cfg.window_fwhm_hz)?;
    spectrum_from_overlap(&overlap, &cfg, &grid)
}

/// Gaussian width of the fixed-density response. The comb is smoothed by a
/// window wide enough to merge adjacent molecular lines, and the window
/// variance is subtracted from the fitted one, so the reported width is the
/// intrinsic envelope width.
pub fn fda_width(
    chain: &ChainSolution,
    density_si: f64,
    params: &PipelineParams,
) -> Result<PolaronWidth> {
    // envelope variance from the bound-level intensities
    let lambdas = chain.states.bound_intensities(density_si)?;
    let bound_nu: Vec<f64> = chain
        .states
        .s_channel()
        .bound_energies()
        .iter()
        .map(|&e| (e - chain.states.epsilon_s0()) * HARTREE_HZ)
        .collect();
    let kappa2_bound: f64 = lambdas
        .iter()
        .zip(&bound_nu)
        .map(|(&l, &nu)| l * nu * nu)
        .sum();
    let sigma_env = kappa2_bound.sqrt();

    // smooth hard enough to merge the comb into its envelope
    let smooth_fwhm = params.window_fwhm_hz.max(0.35 * sigma_env);
    let cfg = FdaConfig::with_t_max_factor(smooth_fwhm, params.t_max_factor, params.n_time_steps)?;
    let times = cfg.times();
    let s = single_atom_overlap(&chain.states, &times)?;
    let overlap = condensate_overlap(
        &s,
        &times,
        density_si,
        chain.states.box_model(),
        OverlapForm::Exponentiated,
    )?;
    let grid = auto_grid(&chain.states, density_si, cfg.window_fwhm_hz)?;
    let (spec, _) = spectrum_from_overlap(&overlap, &cfg, &grid)?;

    let (k1, _) = overlap_cumulants(&chain.states, density_si)?;
    let window_sigma = fwhm_to_sigma(smooth_fwhm);
    let sigma_obs_est = (sigma_env.powi(2) + window_sigma.powi(2)).sqrt();

    // two-pass fit: moments seed the window, the first fit refines it
    let mut center = k1;
    let mut sigma = sigma_obs_est;
    let mut fit: Option<GaussianFit> = None;
    for _ in 0..2 {
        let window = (center - 2.5 * sigma, center + 2.5 * sigma);
        let f = gaussian_width(&spec, window)?;
        center = f.center_hz;
        sigma = f.sigma_hz;
        fit = Some(f);
    }
    let fit = fit.unwrap();
    let sigma_pol = (fit.sigma_hz.powi(2) - window_sigma.powi(2)).max(0.0).sqrt();
    Ok(PolaronWidth {
        center_hz: fit.center_hz,
        sigma_hz: sigma_pol,
        sigma_observed_hz: fit.sigma_hz,
        smoothing_fwhm_hz: smooth_fwhm,
        residual_fraction: fit.residual_fraction,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PolaronWidth {
    pub center_hz: f64,
    /// Intrinsic width, window variance removed.
    pub sigma_hz: f64,
    pub sigma_observed_hz: f64,
    pub smoothing_fwhm_hz: f64,
    pub residual_fraction: f64,
}

/// Few-body line spectrum: multinomial comb over the bound levels, convolved
/// with the laser lineshape. Returns the spectrum and the truncated weight.
pub fn fewbody_spectrum(
    chain: &ChainSolution,
    density_si: f64,
    params: &PipelineParams,
) -> Result<(Spectrum, f64)> {
    let (lines, truncated) = fewbody_lines(chain, density_si, params)?;
    let positions: Vec<f64> = lines.lines().iter().map(|&(x, _)| x).collect();
    let lo = positions.iter().cloned().fold(0.0f64, f64::min) - 8.0 * params.window_fwhm_hz;
    let hi = positions.iter().cloned().fold(0.0f64, f64::max) + 8.0 * params.window_fwhm_hz;
    let step = params.window_fwhm_hz / 8.0;
    let n = (((hi - lo) / step).ceil() as usize + 1).clamp(64, 60_000);
    let grid = uniform_grid(lo, hi, n);
    let spec = lines.bin_onto(&grid)?;
    let spec = convolve_lineshape(&spec, params.window_fwhm_hz)?
        .into_normalized(Normalization::UnitArea)?;
    Ok((spec, truncated))
}

/// The multinomial lines behind the few-body spectrum.
pub fn fewbody_lines(
    chain: &ChainSolution,
    density_si: f64,
    params: &PipelineParams,
) -> Result<(LineSpectrum, f64)> {
    let (energies, p) = chain.states.spectral_weights()?;
    let nb = chain.states.s_channel().bound_count();
    let eps_s0 = chain.states.epsilon_s0();
    let levels: Vec<(f64, f64)> = energies[..nb]
        .iter()
        .zip(&p[..nb])
        .map(|(&e, &pi)| ((e - eps_s0) * HARTREE_HZ, pi))
        .collect();
    let n_atoms = chain.states.box_model().atom_count(density_si).round() as u64;
    let model = OccupationModel::new(levels, n_atoms.max(1), params.max_total_bound)?
        .with_truncation_limit(params.truncation_limit);
    multinomial_lines(&model)
}

/// Mean-field local-density spectrum of the condensate.
pub fn meanfield_trap_spectrum(
    chain: &ChainSolution,
    params: &PipelineParams,
) -> Result<Spectrum> {
    let profile = crate::trap::thomas_fermi_profile(&params.trap)?;
    let delta_max = mean_field_shift(params.trap.peak_density_si, &chain.mean_field);
    let grid = uniform_grid(1.02 * delta_max, -0.02 * delta_max, 2000);
    lda_spectrum(&profile, &chain.mean_field, &grid)
}

/// Trap-averaged many-body spectrum. The average over shells is linear, so
/// it is taken in the time domain — one Fourier transform of the
/// atom-weighted overlap sum — which is both exact and cheap. The cumulant
/// form exp[N(s-1)] stays well-defined for arbitrarily dilute shells.
pub fn trap_fda_spectrum(
    chain: &ChainSolution,
    params: &PipelineParams,
    include_thermal: bool,
) -> Result<Spectrum> {
    let trap = TrapDensity::from_config(&params.trap, include_thermal)?;
    let shells = shell_decomposition(&trap, params.n_shells, params.n_thermal_shells)?;
    let (spec, _) = shell_overlap_average(chain, params, &shells, shells.total_atoms())?;
    Ok(spec)
}

/// Trap-averaged spectrum of the central high-density region only
/// (condensate shells within `cut_radius_m`), weighted exactly as its
/// contribution to the full average. Returns the spectrum of the region
/// normalized to unit area and its atom fraction.
pub fn central_fda_contribution(
    chain: &ChainSolution,
    params: &PipelineParams,
    cut_radius_m: f64,
    include_thermal: bool,
) -> Result<(Spectrum, f64)> {
    let trap = TrapDensity::from_config(&params.trap, include_thermal)?;
    let shells = shell_decomposition(&trap, params.n_shells, params.n_thermal_shells)?;
    let total = trap.total_atoms();
    let central = shells.restricted_to(cut_radius_m);
    let fraction = central.total_atoms() / total;
    let (spec, _) = shell_overlap_average(chain, params, &central, central.total_atoms())?;
    Ok((spec, fraction))
}

/// Atom-weighted time-domain average of the per-shell overlaps, transformed
/// to a spectrum on the common trap grid.
fn shell_overlap_average(
    chain: &ChainSolution,
    params: &PipelineParams,
    shells: &crate::trap::DensityShells,
    weight_norm: f64,
) -> Result<(Spectrum, SpectrumDiagnostics)> {
    let cfg = params.fda_config()?;
    let times = cfg.times();
    let s = single_atom_overlap(&chain.states, &times)?;
    let box_model = chain.states.box_model();

    let mut acc = vec![Complex64::new(0.0, 0.0); times.len()];
    for (&rho, &w) in shells.densities().iter().zip(shells.weights()) {
        let n_box = box_model.atom_count(rho);
        let frac = w / weight_norm;
        for (a, &sk) in acc.iter_mut().zip(&s) {
            *a += frac * (n_box * (sk - 1.0)).exp();
        }
    }
    let overlap = crate::fda::OverlapSeries::from_values(times.clone(), acc, 0.0);
    let grid = trap_grid(chain, params)?;
    spectrum_from_overlap(&overlap, &cfg, &grid)
}

/// Common detuning grid for trap averages: spans the peak-density response
/// through zero detuning.
fn trap_grid(chain: &ChainSolution, params: &PipelineParams) -> Result<Vec<f64>> {
    let per_shell = auto_grid(
        &chain.states,
        params.trap.peak_density_si,
        params.window_fwhm_hz,
    )?;
    let lo = per_shell[0];
    let hi = per_shell[per_shell.len() - 1].max(4.0 * params.window_fwhm_hz);
    let step = params.window_fwhm_hz / 6.0;
    let n = (((hi - lo) / step).ceil() as usize + 1).clamp(64, 12_000);
    Ok(uniform_grid(lo, hi, n))
}

/// One row of the width-scaling sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub n: u32,
    pub effective_n: f64,
    /// Mean-field shift at the sweep density (Hz).
    pub delta_hz: f64,
    /// Intrinsic Gaussian width (Hz).
    pub sigma_hz: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Power-law exponent of sigma against effective n (least squares in
    /// log-log), when at least two rows exist.
    pub exponent: Option<f64>,
    pub density_si: f64,
}

/// Fixed-density width sweep over principal quantum numbers.
pub fn width_sweep(ns: &[u32], density_si: f64, params: &PipelineParams) -> Result<SweepResult> {
    let mut rows = Vec::new();
    for &n in ns {
        let chain = solve_chain(n, params)?;
        let width = fda_width(&chain, density_si, params)?;
        rows.push(SweepRow {
            n,
            effective_n: chain.state.effective_n(),
            delta_hz: mean_field_shift(density_si, &chain.mean_field),
            sigma_hz: width.sigma_hz,
        });
    }
    let exponent = fit_power_law(&rows);
    Ok(SweepResult {
        rows,
        exponent,
        density_si,
    })
}

/// Least-squares slope of ln sigma against ln n*.
pub fn fit_power_law(rows: &[SweepRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.effective_n.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.sigma_hz.ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Condensate-overlap consistency: L1 distance between the exponentiated and
/// finite-power spectra at one density.
pub fn form_consistency_l1(
    chain: &ChainSolution,
    density_si: f64,
    params: &PipelineParams,
) -> Result<f64> {
    let cfg = params.fda_config()?;
    let times = cfg.times();
    let s = single_atom_overlap(&chain.states, &times)?;
    let grid = auto_grid(&chain.states, density_si, cfg.window_fwhm_hz)?;
    let mut specs: Vec<Spectrum> = Vec::new();
    for form in [OverlapForm::Exponentiated, OverlapForm::FinitePower] {
        let overlap = condensate_overlap(&s, &times, density_si, chain.states.box_model(), form)?;
        let (spec, _) = spectrum_from_overlap(&overlap, &cfg, &grid)?;
        specs.push(spec);
    }
    specs[0].l1_distance(&specs[1])
}

/// The single-atom overlap and times for external cross-checks.
pub fn single_atom_series(
    chain: &ChainSolution,
    params: &PipelineParams,
) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let cfg = params.fda_config()?;
    let times = cfg.times();
    let s = single_atom_overlap(&chain.states, &times)?;
    Ok((times, s))
}
