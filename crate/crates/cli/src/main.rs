//! Batch command-line front end: load a TOML run configuration, execute the
//! requested pipeline, and emit CSV artifacts plus a JSON manifest with
//! convergence diagnostics and content checksums.
//!
//! Exit codes: 0 success, 2 configuration error, 3 convergence failure,
//! 1 anything else.

mod commands;
mod config;
mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "polaron",
    about = "Excitation spectra of a Rydberg impurity in a Bose gas",
    version
)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true, default_value = "polaron.toml")]
    config: PathBuf,

    /// Output directory (overrides the config's output.directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (overrides the POLARON_THREADS environment variable).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Molecular levels and condensate overlaps for each configured n.
    BoundStates {
        /// Also write the molecular potential as two-column text (r_nm, V/h MHz).
        #[arg(long)]
        dump_potential: bool,
    },
    /// Excitation spectra.
    Spectrum {
        #[arg(long, value_enum)]
        mode: SpectrumMode,
        /// Also write the time-domain overlap series (t_s, re, im).
        #[arg(long)]
        dump_overlap: bool,
        /// Also write the trap shell table (trap mode).
        #[arg(long)]
        dump_shells: bool,
    },
    /// Width-scaling sweep over the configured n list.
    Sweep,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpectrumMode {
    /// Multinomial line comb over the bound levels.
    Fewbody,
    /// Fixed-density many-body spectrum at the trap peak density.
    Fda,
    /// Mean-field local-density lineshape of the condensate.
    Meanfield,
    /// Many-body spectrum averaged over the trap density profile.
    Trap,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("POLARON_THREADS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(0);
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("polaron: cannot configure {threads} worker threads: {e}");
            return ExitCode::from(1);
        }
    }

    let file_config = match config::FileConfig::load(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("polaron: configuration error: {e:#}");
            return ExitCode::from(2);
        }
    };

    let out_dir = cli
        .out
        .unwrap_or_else(|| PathBuf::from(&file_config.output.directory));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("polaron: cannot create output directory {}: {e}", out_dir.display());
        return ExitCode::from(1);
    }

    let result = match cli.command {
        Command::BoundStates { dump_potential } => {
            commands::bound_states(&file_config, &out_dir, dump_potential)
        }
        Command::Spectrum {
            mode,
            dump_overlap,
            dump_shells,
        } => commands::spectrum(&file_config, &out_dir, mode, dump_overlap, dump_shells),
        Command::Sweep => commands::sweep(&file_config, &out_dir),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polaron: {e:#}");
            let code = e
                .downcast_ref::<polaron_spectra::Error>()
                .map(|core| if core.is_convergence() { 3 } else { 1 })
                .unwrap_or(1);
            ExitCode::from(code)
        }
    }
}
