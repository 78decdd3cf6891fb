//! Command implementations. Each command runs its pipeline stages, writes
//! CSV artifacts through the manifest builder, and finishes with a JSON
//! manifest naming every output and its checksum.

use crate::config::FileConfig;
use crate::manifest::ManifestBuilder;
use crate::SpectrumMode;
use anyhow::Context;
use polaron_spectra::bound_states::export_levels;
use polaron_spectra::mean_field::mean_field_shift;
use polaron_spectra::pipeline::{
    fda_spectrum, fewbody_spectrum, meanfield_trap_spectrum, solve_chain, trap_fda_spectrum,
    width_sweep, ChainSolution,
};
use polaron_spectra::spectrum::{Normalization, Spectrum};
use std::fmt::Write as _;
use std::path::Path;

fn chain_diagnostics(builder: &mut ManifestBuilder, chain: &ChainSolution) {
    builder.record("r_lobe_bohr", chain.r_lobe_bohr);
    builder.record("effective_n", chain.state.effective_n());
    builder.record(
        "bound_levels",
        chain.states.s_channel().bound_count() as f64,
    );
    builder.record("states_kept", chain.states.s_channel().energies().len() as f64);
    builder.record("completeness_deficit", chain.states.completeness_deficit());
    builder.record("bound_refinement_delta", chain.refinement_delta);
}

fn render_spectrum(spec: &Spectrum, cfg: &FileConfig) -> anyhow::Result<Vec<u8>> {
    let tag = Normalization::from_tag(&cfg.output.normalization)?;
    let spec = spec.clone().into_normalized(tag)?;
    let mut buf = Vec::new();
    spec.to_csv(&mut buf)?;
    Ok(buf)
}

pub fn bound_states(cfg: &FileConfig, out_dir: &Path, dump_potential: bool) -> anyhow::Result<()> {
    let params = cfg.pipeline_params();
    let mut builder = ManifestBuilder::new("bound-states", cfg.clone());
    for &n in &cfg.rydberg.n_list {
        builder.begin_stage(format!("chain n={n}"));
        let chain = solve_chain(n, &params).with_context(|| format!("chain for n = {n}"))?;
        chain_diagnostics(&mut builder, &chain);
        let mut buf = Vec::new();
        export_levels(&chain.states, params.trap.peak_density_si, &mut buf)?;
        builder.emit(&out_dir.join(format!("levels_n{n}.csv")), &buf)?;
        if dump_potential {
            let mut buf = Vec::new();
            chain.potential.export_text(&mut buf)?;
            builder.emit(&out_dir.join(format!("potential_n{n}.txt")), &buf)?;
        }
    }
    builder.write(out_dir, "manifest_bound_states.json")?;
    Ok(())
}

pub fn spectrum(
    cfg: &FileConfig,
    out_dir: &Path,
    mode: SpectrumMode,
    dump_overlap: bool,
    dump_shells: bool,
) -> anyhow::Result<()> {
    let params = cfg.pipeline_params();
    let rho = params.trap.peak_density_si;
    let mode_name = match mode {
        SpectrumMode::Fewbody => "fewbody",
        SpectrumMode::Fda => "fda",
        SpectrumMode::Meanfield => "meanfield",
        SpectrumMode::Trap => "trap",
    };
    let mut builder = ManifestBuilder::new(&format!("spectrum --mode {mode_name}"), cfg.clone());

    for &n in &cfg.rydberg.n_list {
        builder.begin_stage(format!("chain n={n}"));
        let chain = solve_chain(n, &params).with_context(|| format!("chain for n = {n}"))?;
        chain_diagnostics(&mut builder, &chain);
        builder.record(
            "mean_field_shift_hz",
            mean_field_shift(rho, &chain.mean_field),
        );

        builder.begin_stage(format!("spectrum n={n} mode={mode_name}"));
        let spec = match mode {
            SpectrumMode::Fewbody => {
                let (spec, truncated) = fewbody_spectrum(&chain, rho, &params)
                    .with_context(|| format!("few-body spectrum for n = {n}"))?;
                builder.record("truncated_weight", truncated);
                spec
            }
            SpectrumMode::Fda => {
                let (spec, diag) = fda_spectrum(&chain, rho, &params)
                    .with_context(|| format!("fixed-density spectrum for n = {n}"))?;
                builder.record("raw_area", diag.raw_area);
                builder.record("min_intensity_fraction", diag.min_intensity_fraction);
                builder.record("tail_residual", diag.tail_residual);
                spec
            }
            SpectrumMode::Meanfield => meanfield_trap_spectrum(&chain, &params)
                .with_context(|| format!("mean-field lineshape for n = {n}"))?,
            SpectrumMode::Trap => {
                trap_fda_spectrum(&chain, &params, cfg.trap.include_thermal)
                    .with_context(|| format!("trap-averaged spectrum for n = {n}"))?
            }
        };
        let buf = render_spectrum(&spec, cfg)?;
        builder.emit(&out_dir.join(format!("spectrum_{mode_name}_n{n}.csv")), &buf)?;

        if dump_overlap {
            let (times, s) = polaron_spectra::pipeline::single_atom_series(&chain, &params)?;
            let overlap = polaron_spectra::fda::condensate_overlap(
                &s,
                &times,
                rho,
                chain.states.box_model(),
                polaron_spectra::fda::OverlapForm::Exponentiated,
            )?;
            let mut buf = Vec::new();
            overlap.to_csv(&mut buf)?;
            builder.emit(&out_dir.join(format!("overlap_n{n}.csv")), &buf)?;
        }
        if dump_shells {
            let trap = polaron_spectra::trap::TrapDensity::from_config(
                &params.trap,
                cfg.trap.include_thermal,
            )?;
            let shells = polaron_spectra::trap::shell_decomposition(
                &trap,
                params.n_shells,
                params.n_thermal_shells,
            )?;
            let mut buf = Vec::new();
            shells.to_csv(&mut buf)?;
            builder.emit(&out_dir.join(format!("shells_n{n}.csv")), &buf)?;
        }
    }
    builder.write(out_dir, &format!("manifest_spectrum_{mode_name}.json"))?;
    Ok(())
}

pub fn sweep(cfg: &FileConfig, out_dir: &Path) -> anyhow::Result<()> {
    let params = cfg.pipeline_params();
    let rho = params.trap.peak_density_si;
    let mut builder = ManifestBuilder::new("sweep", cfg.clone());

    builder.begin_stage("width sweep");
    let result = width_sweep(&cfg.rydberg.n_list, rho, &params).context("width sweep")?;
    if let Some(exponent) = result.exponent {
        builder.record("width_scaling_exponent", exponent);
    }
    builder.record("density_si", result.density_si);

    let mut table = String::from("n,effective_n,delta_hz,sigma_hz\n");
    for row in &result.rows {
        writeln!(
            table,
            "{},{:.17e},{:.17e},{:.17e}",
            row.n, row.effective_n, row.delta_hz, row.sigma_hz
        )?;
    }
    builder.emit(&out_dir.join("sweep_widths.csv"), table.as_bytes())?;
    builder.write(out_dir, "manifest_sweep.json")?;
    Ok(())
}
