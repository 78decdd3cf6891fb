//! Run configuration: a sectioned TOML file, schema-checked (unknown keys
//! rejected) and range-validated, resolved against built-in defaults.

use anyhow::{bail, Context};
use polaron_spectra::bound_states::BoundaryCondition;
use polaron_spectra::pipeline::PipelineParams;
use polaron_spectra::pseudopotential::ScatteringParams;
use polaron_spectra::trap::TrapConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub rydberg: RydbergSection,
    #[serde(default)]
    pub scattering: ScatteringSection,
    #[serde(default, rename = "box")]
    pub box_section: BoxSection,
    #[serde(default)]
    pub fda: FdaSection,
    #[serde(default)]
    pub trap: TrapSection,
    #[serde(default)]
    pub fewbody: FewbodySection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RydbergSection {
    pub n_list: Vec<u32>,
    #[serde(default)]
    pub l: u32,
    #[serde(default = "default_quantum_defect")]
    pub quantum_defect: f64,
}

fn default_quantum_defect() -> f64 {
    3.371
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringSection {
    pub a_s0_bohr: f64,
    pub polarizability_au: f64,
    pub include_p_wave: bool,
    pub a_p_bohr: f64,
}

impl Default for ScatteringSection {
    fn default() -> Self {
        let p = ScatteringParams::default();
        Self {
            a_s0_bohr: p.a_s0,
            polarizability_au: p.polarizability,
            include_p_wave: p.include_p_wave,
            a_p_bohr: p.a_p,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoxSection {
    pub radius_factor: f64,
    pub grid_points: usize,
    pub l_max: u32,
    /// "uniform-ground" (default) or "hard-wall".
    pub boundary: String,
}

impl Default for BoxSection {
    fn default() -> Self {
        Self {
            radius_factor: 4.0,
            grid_points: 20_000,
            l_max: 0,
            boundary: "uniform-ground".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdaSection {
    pub t_max_factor: f64,
    pub n_time_steps: usize,
    pub window_fwhm_hz: f64,
}

impl Default for FdaSection {
    fn default() -> Self {
        Self {
            t_max_factor: 20.0,
            n_time_steps: 1 << 15,
            window_fwhm_hz: 0.4e6,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapSection {
    pub peak_density_cm3: f64,
    pub tf_radius_um: f64,
    pub atom_number: f64,
    pub temperature_nk: f64,
    pub condensate_fraction: f64,
    pub thermal_width_factor: f64,
    pub include_thermal: bool,
    pub n_shells: usize,
    pub n_thermal_shells: usize,
}

impl Default for TrapSection {
    fn default() -> Self {
        Self {
            peak_density_cm3: 3.6e14,
            tf_radius_um: 8.0,
            atom_number: 3.5e5,
            temperature_nk: 150.0,
            condensate_fraction: 0.75,
            thermal_width_factor: 3.0,
            include_thermal: true,
            n_shells: 64,
            n_thermal_shells: 16,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FewbodySection {
    pub max_total_bound: usize,
    pub truncation_limit: f64,
}

impl Default for FewbodySection {
    fn default() -> Self {
        Self {
            max_total_bound: 8,
            truncation_limit: 5e-2,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    /// "unit-area" | "peak-unit" | "raw"
    pub normalization: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            normalization: "unit-area".into(),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: FileConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.rydberg.n_list.is_empty() {
            bail!("rydberg.n_list: must name at least one principal quantum number");
        }
        for &n in &self.rydberg.n_list {
            if !(5..=200).contains(&n) {
                bail!("rydberg.n_list: n = {n} outside the supported range 5..=200");
            }
            if self.rydberg.l >= n {
                bail!("rydberg.l: l = {} must be below n = {n}", self.rydberg.l);
            }
            if n as f64 - self.rydberg.quantum_defect <= self.rydberg.l as f64 {
                bail!(
                    "rydberg.quantum_defect: effective n for n = {n} falls at or below l = {}",
                    self.rydberg.l
                );
            }
        }
        if !(0.0..=10.0).contains(&self.rydberg.quantum_defect) {
            bail!(
                "rydberg.quantum_defect: {} outside [0, 10]",
                self.rydberg.quantum_defect
            );
        }
        if !(-1000.0..=1000.0).contains(&self.scattering.a_s0_bohr) {
            bail!(
                "scattering.a_s0_bohr: {} outside [-1000, 1000]",
                self.scattering.a_s0_bohr
            );
        }
        if !(0.0..=10_000.0).contains(&self.scattering.polarizability_au) {
            bail!(
                "scattering.polarizability_au: {} outside [0, 10000]",
                self.scattering.polarizability_au
            );
        }
        if self.box_section.radius_factor < 3.0 || self.box_section.radius_factor > 20.0 {
            bail!(
                "box.radius_factor: {} outside [3, 20]",
                self.box_section.radius_factor
            );
        }
        if !(1000..=200_000).contains(&self.box_section.grid_points) {
            bail!(
                "box.grid_points: {} outside [1000, 200000]",
                self.box_section.grid_points
            );
        }
        if self.boundary_condition().is_none() {
            bail!(
                "box.boundary: '{}' is neither 'uniform-ground' nor 'hard-wall'",
                self.box_section.boundary
            );
        }
        if !(1.0..=1000.0).contains(&self.fda.t_max_factor) {
            bail!("fda.t_max_factor: {} outside [1, 1000]", self.fda.t_max_factor);
        }
        if !(256..=1 << 22).contains(&self.fda.n_time_steps) {
            bail!(
                "fda.n_time_steps: {} outside [256, 4194304]",
                self.fda.n_time_steps
            );
        }
        if !(1e3..=1e9).contains(&self.fda.window_fwhm_hz) {
            bail!(
                "fda.window_fwhm_hz: {} outside [1e3, 1e9]",
                self.fda.window_fwhm_hz
            );
        }
        if !(1e10..=1e25).contains(&(self.trap.peak_density_cm3 * 1e6)) {
            bail!(
                "trap.peak_density_cm3: {} outside [1e4, 1e19]",
                self.trap.peak_density_cm3
            );
        }
        if !(0.0..=1.0).contains(&self.trap.condensate_fraction)
            || self.trap.condensate_fraction == 0.0
        {
            bail!(
                "trap.condensate_fraction: {} outside (0, 1]",
                self.trap.condensate_fraction
            );
        }
        if self.trap.n_shells < 16 {
            bail!("trap.n_shells: {} below 16", self.trap.n_shells);
        }
        if self.fewbody.max_total_bound == 0 || self.fewbody.max_total_bound > 64 {
            bail!(
                "fewbody.max_total_bound: {} outside [1, 64]",
                self.fewbody.max_total_bound
            );
        }
        if polaron_spectra::spectrum::Normalization::from_tag(&self.output.normalization).is_err()
        {
            bail!(
                "output.normalization: '{}' is not one of unit-area, peak-unit, raw",
                self.output.normalization
            );
        }
        Ok(())
    }

    fn boundary_condition(&self) -> Option<BoundaryCondition> {
        match self.box_section.boundary.as_str() {
            "uniform-ground" => Some(BoundaryCondition::UniformGround),
            "hard-wall" => Some(BoundaryCondition::HardWall),
            _ => None,
        }
    }

    pub fn trap_config(&self) -> TrapConfig {
        TrapConfig {
            peak_density_si: self.trap.peak_density_cm3 * 1e6,
            tf_radius_m: self.trap.tf_radius_um * 1e-6,
            atom_number: self.trap.atom_number,
            temperature_k: self.trap.temperature_nk * 1e-9,
            condensate_fraction: self.trap.condensate_fraction,
            thermal_width_factor: self.trap.thermal_width_factor,
        }
    }

    pub fn pipeline_params(&self) -> PipelineParams {
        PipelineParams {
            quantum_defect: self.rydberg.quantum_defect,
            l: self.rydberg.l,
            scattering: ScatteringParams {
                a_s0: self.scattering.a_s0_bohr,
                polarizability: self.scattering.polarizability_au,
                include_p_wave: self.scattering.include_p_wave,
                a_p: self.scattering.a_p_bohr,
                ..Default::default()
            },
            box_radius_factor: self.box_section.radius_factor,
            box_points: self.box_section.grid_points,
            box_l_max: self.box_section.l_max,
            boundary: self
                .boundary_condition()
                .expect("validated boundary condition"),
            t_max_factor: self.fda.t_max_factor,
            n_time_steps: self.fda.n_time_steps,
            window_fwhm_hz: self.fda.window_fwhm_hz,
            trap: self.trap_config(),
            max_total_bound: self.fewbody.max_total_bound,
            truncation_limit: self.fewbody.truncation_limit,
            n_shells: self.trap.n_shells,
            n_thermal_shells: self.trap.n_thermal_shells,
            ..Default::default()
        }
    }
}
