//! Small geometric/statistical relations of the gas: expected atom number
//! inside a Rydberg orbit and the Poisson nearest-neighbor distance.

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

/// Expected number of ground-state atoms inside a sphere of radius `r_orbit`:
/// (4 pi / 3) rho r^3. Density in m^-3, radius in m.
pub fn orbital_atom_count(density_si: f64, r_orbit_m: f64) -> Result<f64> {
    if density_si < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "density must be >= 0, got {density_si}"
        )));
    }
    if !(r_orbit_m > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "orbit radius must be > 0, got {r_orbit_m}"
        )));
    }
    Ok(4.0 * std::f64::consts::PI / 3.0 * density_si * r_orbit_m.powi(3))
}

/// Mean nearest-neighbor distance of an ideal (Poisson) gas at the given
/// density: Gamma(4/3) (4 pi rho / 3)^(-1/3). Density in m^-3, result in m.
pub fn nearest_neighbor_distance(density_si: f64) -> Result<f64> {
    if !(density_si > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "density must be > 0, got {density_si}"
        )));
    }
    let prefactor = gamma(4.0 / 3.0);
    Ok(prefactor * (4.0 * std::f64::consts::PI * density_si / 3.0).powf(-1.0 / 3.0))
}
