//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible units: cannot convert {from} to {to}")]
    IncompatibleUnits { from: String, to: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("wavefunction tail has not decayed at r_max (|u(r_max)|/max|u| = {tail_ratio:.3e}); enlarge the grid")]
    NonDecayingTail { tail_ratio: f64 },

    #[error("NaN encountered during radial integration near r = {r:.3e} Bohr")]
    NanDuringIntegration { r: f64 },

    #[error("radial node count {found} outside expected {expected} +/- 1")]
    NodeCount { found: usize, expected: usize },

    #[error("no local maximum of |u(r)|^2 found")]
    NoOuterLobe,

    #[error("eigensolve failed to converge: {0}")]
    EigenNonConvergence(String),

    #[error("bound-state energies not converged under grid refinement: max change {rel_change:.3e} (limit {limit:.1e})")]
    RefinementNotConverged { rel_change: f64, limit: f64 },

    #[error("eigenbasis is missing condensate overlaps; call condensate_overlaps first")]
    MissingOverlaps,

    #[error("overlap completeness deficit {deficit:.3e} exceeds {limit:.1e}; raise the energy cutoff")]
    IncompleteBasis { deficit: f64, limit: f64 },

    #[error("spectral grid does not cover the line support; lost weight {lost_weight:.3e}")]
    GridNotCovering { lost_weight: f64 },

    #[error("spectral grid too coarse: spacing {spacing:.3e} Hz exceeds {limit:.3e} Hz")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("multinomial truncation weight {weight:.3e} above {limit:.1e}; raise max_total_bound")]
    TruncationWeight { weight: f64, limit: f64 },

    #[error("box holds {n_box:.3} atoms at this density; enlarge box_radius")]
    BoxTooSmall { n_box: f64 },

    #[error("windowed overlap has not decayed by t_max (|S w| = {residual:.3e} at t_max)")]
    OverlapNotDecayed { residual: f64 },

    #[error("spectral ringing below -1e-3 of peak (min intensity {min_frac:.3e} of peak); raise t_max or widen the window")]
    ExcessiveRinging { min_frac: f64 },

    #[error("gaussian fit residual {residual_frac:.3} of peak exceeds 0.2")]
    FitResidual { residual_frac: f64 },

    #[error("spectrum normalization tag '{tag}' violated by {error:.3e}")]
    NormalizationViolated { tag: String, error: f64 },

    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of iterative/numerical convergence, as opposed to
    /// bad input. The CLI maps these to a dedicated exit code.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::NonDecayingTail { .. }
                | Error::EigenNonConvergence(_)
                | Error::RefinementNotConverged { .. }
                | Error::IncompleteBasis { .. }
                | Error::TruncationWeight { .. }
                | Error::OverlapNotDecayed { .. }
                | Error::ExcessiveRinging { .. }
                | Error::FitResidual { .. }
        )
    }
}
