//! Radial wavefunction of the Rydberg electron from quantum-defect theory.
//!
//! The reduced radial function u(r) = r R(r) solves
//! ```text
//!     u'' = [l(l+1)/r^2 - 2/r - 2E] u        (atomic units)
//! ```
//! at the defect-shifted energy E = -1/(2 n*^2), n* = n - delta. The solution
//! is generated by inward Numerov integration from the classically forbidden
//! tail. On geometric grids the integration runs in x = ln r on
//! v = u / sqrt(r), which keeps the phase step uniform across the orbit.
//!
//! The defect solution is irregular at the origin; it is cut off by a smooth
//! taper just above r_min, where the amplitude is far below the outer lobes.

use crate::constants::RYDBERG_ENERGY;
use crate::error::{Error, Result};
use crate::grid::{interp_linear, RadialGrid, Spacing};

#[derive(Debug, Clone, Copy)]
pub struct RydbergState {
    n: u32,
    l: u32,
    quantum_defect: f64,
}

impl RydbergState {
    pub fn new(n: u32, l: u32, quantum_defect: f64) -> Result<Self> {
        if n == 0 || l >= n {
            return Err(Error::InvalidArgument(format!(
                "require 0 <= l < n, got n = {n}, l = {l}"
            )));
        }
        let state = Self {
            n,
            l,
            quantum_defect,
        };
        if state.effective_n() <= l as f64 {
            return Err(Error::InvalidArgument(format!(
                "effective n = {:.3} must exceed l = {l}",
                state.effective_n()
            )));
        }
        Ok(state)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn quantum_defect(&self) -> f64 {
        self.quantum_defect
    }

    pub fn effective_n(&self) -> f64 {
        self.n as f64 - self.quantum_defect
    }

    /// Binding energy in Hartree: -1/(2 n*^2). Always negative.
    pub fn energy_hartree(&self) -> f64 {
        let ns = self.effective_n();
        -1.0 / (2.0 * ns * ns)
    }

    /// Binding energy in joules, -Ry/n*^2.
    pub fn energy_si(&self) -> f64 {
        let ns = self.effective_n();
        -RYDBERG_ENERGY / (ns * ns)
    }

    /// Outer classical turning point 2 n*^2 (Bohr).
    pub fn turning_point(&self) -> f64 {
        2.0 * self.effective_n() * self.effective_n()
    }
}

/// Semiclassical electron wavenumber at radius r (both in atomic units):
/// k^2/2 = E + 1/r, clamped to zero beyond the turning point.
pub fn semiclassical_momentum(r_bohr: f64, state: &RydbergState) -> Result<f64> {
    if !(r_bohr > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be > 0, got {r_bohr}"
        )));
    }
    let k2 = 2.0 / r_bohr + 2.0 * state.energy_hartree();
    Ok(k2.max(0.0).sqrt())
}

#[derive(Debug, Clone)]
pub struct RadialWavefunction {
    grid: RadialGrid,
    u: Vec<f64>,
    state: RydbergState,
    node_count: usize,
}

impl RadialWavefunction {
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u
    }

    pub fn state(&self) -> &RydbergState {
        &self.state
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// integral of u^2 dr on the grid (1 after construction).
    pub fn norm(&self) -> f64 {
        let u2: Vec<f64> = self.u.iter().map(|&v| v * v).collect();
        self.grid.integrate(&u2)
    }

    /// |Psi(r)|^2 = u^2 / (4 pi r^2) for the s-state density at radius r.
    pub fn density_at(&self, r_bohr: f64) -> f64 {
        let u = interp_linear(self.grid.points(), &self.u, r_bohr);
        u * u / (4.0 * std::f64::consts::PI * r_bohr * r_bohr)
    }
}

/// Fraction of the grid span tapered to zero at the inner boundary,
/// expressed as a factor on r_min (taper active on [r_min, 2 r_min]).
const TAPER_FACTOR: f64 = 2.0;
const TAIL_LIMIT: f64 = 1e-4;

/// Default grid for a state: geometric, r_min = 2 Bohr, r_max comfortably
/// past the turning point so the forbidden tail decays below 1e-4 of the
/// outer lobe, and a point count keeping the Numerov phase step ~0.01 rad.
pub fn default_grid(state: &RydbergState) -> Result<RadialGrid> {
    let ns = state.effective_n();
    let r_min = 2.0;
    let r_max = (3.0 + 22.0 / ns) * ns * ns;
    let x_range = (r_max / r_min).ln();
    let n = ((x_range * ns / 0.009).ceil() as usize).max(20_000);
    RadialGrid::geometric(r_min, r_max, n)
}

/// Solve for the normalized radial wavefunction on the given grid.
pub fn solve_radial(state: &RydbergState, grid: &RadialGrid) -> Result<RadialWavefunction> {
    let ns = state.effective_n();
    if grid.r_max() < 2.5 * ns * ns {
        return Err(Error::InvalidGrid(format!(
            "grid r_max = {:.1} Bohr below 2.5 n*^2 = {:.1}",
            grid.r_max(),
            2.5 * ns * ns
        )));
    }

    let e2 = 2.0 * state.energy_hartree();
    let ll1 = (state.l * (state.l + 1)) as f64;
    // u'' = q(r) u
    let q = |r: f64| ll1 / (r * r) - 2.0 / r - e2;

    let mut u = match grid.spacing() {
        Spacing::Geometric => integrate_log_grid(grid, &q)?,
        Spacing::Uniform => integrate_uniform_grid(grid, &q)?,
    };

    taper_inner(grid, &mut u);
    let node_count = count_sign_changes(&u);

    // normalize: integral u^2 dr = 1
    let u2: Vec<f64> = u.iter().map(|&v| v * v).collect();
    let norm = grid.integrate(&u2);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::NanDuringIntegration { r: grid.r_min() });
    }
    let scale = 1.0 / norm.sqrt();
    for v in u.iter_mut() {
        *v *= scale;
    }

    let max_abs = u.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tail_ratio = u.last().unwrap().abs() / max_abs;
    if tail_ratio > TAIL_LIMIT {
        return Err(Error::NonDecayingTail { tail_ratio });
    }

    let expected =
        (state.n as i64 - state.l as i64 - 1 - state.quantum_defect.floor() as i64).max(0) as usize;
    if node_count.abs_diff(expected) > 1 {
        return Err(Error::NodeCount {
            found: node_count,
            expected,
        });
    }

    Ok(RadialWavefunction {
        grid: grid.clone(),
        u,
        state: *state,
        node_count,
    })
}

/// Numerov in x = ln r on v = u/sqrt(r): v'' = W v with W = r^2 q + 1/4.
fn integrate_log_grid(grid: &RadialGrid, q: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
    let r = grid.points();
    let n = r.len();
    let h = grid.log_step();
    let h2 = h * h;

    let w_at = |i: usize| -> f64 { r[i] * r[i] * q(r[i]) + 0.25 };

    let mut v = vec![0.0; n];
    v[n - 1] = 1.0;
    // WKB seed for the second point of the decaying tail
    let w_end = w_at(n - 1).max(0.0).sqrt();
    let w_prev = w_at(n - 2).max(0.0).sqrt();
    v[n - 2] = v[n - 1] * (0.5 * (w_end + w_prev) * h).exp();

    let mut w_ip1 = w_at(n - 1);
    let mut w_i = w_at(n - 2);
    for i in (1..n - 1).rev() {
        let w_im1 = w_at(i - 1);
        let num = 2.0 * (1.0 + 5.0 * h2 * w_i / 12.0) * v[i] - (1.0 - h2 * w_ip1 / 12.0) * v[i + 1];
        let den = 1.0 - h2 * w_im1 / 12.0;
        v[i - 1] = num / den;
        if !v[i - 1].is_finite() {
            return Err(Error::NanDuringIntegration { r: r[i - 1] });
        }
        w_ip1 = w_i;
        w_i = w_im1;
    }

    // back to u = sqrt(r) v
    Ok(v.iter().zip(r.iter()).map(|(&vi, &ri)| vi * ri.sqrt()).collect())
}

/// Plain Numerov in r for uniform grids: u'' = q u.
fn integrate_uniform_grid(grid: &RadialGrid, q: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
    let r = grid.points();
    let n = r.len();
    let h = r[1] - r[0];
    let h2 = h * h;

    let mut u = vec![0.0; n];
    u[n - 1] = 1.0;
    let k_end = q(r[n - 1]).max(0.0).sqrt();
    let k_prev = q(r[n - 2]).max(0.0).sqrt();
    u[n - 2] = u[n - 1] * (0.5 * (k_end + k_prev) * h).exp();

    for i in (1..n - 1).rev() {
        let q_im1 = q(r[i - 1]);
        let q_i = q(r[i]);
        let q_ip1 = q(r[i + 1]);
        let num = 2.0 * (1.0 + 5.0 * h2 * q_i / 12.0) * u[i] - (1.0 - h2 * q_ip1 / 12.0) * u[i + 1];
        let den = 1.0 - h2 * q_im1 / 12.0;
        u[i - 1] = num / den;
        if !u[i - 1].is_finite() {
            return Err(Error::NanDuringIntegration { r: r[i - 1] });
        }
    }
    Ok(u)
}

/// Smoothstep taper to zero over [r_min, TAPER_FACTOR * r_min].
fn taper_inner(grid: &RadialGrid, u: &mut [f64]) {
    let r_min = grid.r_min();
    let r_cut = TAPER_FACTOR * r_min;
    for (ui, &ri) in u.iter_mut().zip(grid.points()) {
        if ri >= r_cut {
            break;
        }
        let t = ((ri - r_min) / (r_cut - r_min)).clamp(0.0, 1.0);
        *ui *= t * t * (3.0 - 2.0 * t);
    }
}

fn count_sign_changes(u: &[f64]) -> usize {
    let mut count = 0;
    let mut last_sign = 0i8;
    for &v in u {
        let s = if v > 0.0 {
            1i8
        } else if v < 0.0 {
            -1i8
        } else {
            0i8
        };
        if s != 0 {
            if last_sign != 0 && s != last_sign {
                count += 1;
            }
            last_sign = s;
        }
    }
    count
}

/// Location of the outermost local maximum of |u(r)|^2, refined by a
/// parabolic fit through the bracketing samples.
pub fn outer_lobe_radius(wf: &RadialWavefunction) -> Result<f64> {
    let r = wf.grid.points();
    let u = &wf.u;
    let n = u.len();
    let max2 = u.iter().fold(0.0f64, |m, &v| m.max(v * v));
    let floor = 1e-12 * max2;

    let mut i = n - 2;
    while i > 0 {
        let c = u[i] * u[i];
        if c > floor && c >= u[i + 1] * u[i + 1] && c > u[i - 1] * u[i - 1] {
            // parabola through (r_{i-1..i+1}, u^2)
            let (x0, x1, x2) = (r[i - 1], r[i], r[i + 1]);
            let (y0, y1, y2) = (u[i - 1] * u[i - 1], c, u[i + 1] * u[i + 1]);
            let d01 = (y1 - y0) / (x1 - x0);
            let d12 = (y2 - y1) / (x2 - x1);
            let second = (d12 - d01) / (x2 - x0);
            if second < 0.0 {
                let vertex = 0.5 * (x0 + x1) - d01 / (2.0 * second);
                if vertex > x0 && vertex < x2 {
                    return Ok(vertex);
                }
            }
            return Ok(x1);
        }
        i -= 1;
    }
    Err(Error::NoOuterLobe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hydrogenic(n: u32) -> RydbergState {
        RydbergState::new(n, 0, 0.0).unwrap()
    }

    fn sr_s_state(n: u32) -> RydbergState {
        RydbergState::new(n, 0, 3.371).unwrap()
    }

    #[test]
    fn state_validation() {
        assert!(RydbergState::new(10, 10, 0.0).is_err());
        assert!(RydbergState::new(5, 4, 3.371).is_err()); // n* = 1.629 < l = 4
        let s = sr_s_state(49);
        assert_relative_eq!(s.effective_n(), 45.629, max_relative = 1e-12);
        assert!(s.energy_hartree() < 0.0);
    }

    #[test]
    fn energy_ordering_in_n() {
        let mut prev = f64::NEG_INFINITY;
        for n in [38, 49, 60, 72] {
            let e = sr_s_state(n).energy_hartree();
            assert!(e > prev && e < 0.0);
            prev = e;
        }
    }

    #[test]
    fn hydrogenic_n38_energy_and_nodes() {
        let state = hydrogenic(38);
        assert_relative_eq!(state.energy_si(), -RYDBERG_ENERGY / (38.0 * 38.0));
        let grid = default_grid(&state).unwrap();
        let wf = solve_radial(&state, &grid).unwrap();
        // innermost node of the n=38 s-state sits below r_min = 2 Bohr
        assert!(wf.node_count().abs_diff(37) <= 1, "nodes = {}", wf.node_count());
    }

    #[test]
    fn normalization_contract_n72() {
        let state = sr_s_state(72);
        let grid = default_grid(&state).unwrap();
        let wf = solve_radial(&state, &grid).unwrap();
        assert_relative_eq!(wf.norm(), 1.0, epsilon = 1e-6);
        // endpoints decayed
        let max = wf.u_values().iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(wf.u_values()[0].abs() <= 1e-4 * max);
        assert!(wf.u_values().last().unwrap().abs() <= 1e-4 * max);
    }

    #[test]
    fn norm_stable_under_grid_refinement() {
        let state = sr_s_state(49);
        let grid = default_grid(&state).unwrap();
        let fine = grid.refined(2).unwrap();
        let wf_fine = solve_radial(&state, &fine).unwrap();
        // quadrature of the fine solution restricted to the coarse subgrid
        let coarse_u: Vec<f64> = wf_fine.u_values().iter().step_by(2).copied().collect();
        assert_eq!(coarse_u.len(), grid.len());
        let u2: Vec<f64> = coarse_u.iter().map(|&v| v * v).collect();
        let norm_coarse = grid.integrate(&u2);
        assert!(
            (norm_coarse - 1.0).abs() < 1e-7,
            "norm changed by {:e} under refinement",
            (norm_coarse - 1.0).abs()
        );
    }

    #[test]
    fn grid_too_small_is_rejected() {
        let state = sr_s_state(49);
        let ns = state.effective_n();
        let grid = RadialGrid::geometric(2.0, 2.0 * ns * ns, 20_000).unwrap();
        assert!(solve_radial(&state, &grid).is_err());
    }

    #[test]
    fn outer_lobe_hydrogen_n2_analytic() {
        // u_{20} ~ r (1 - r/2) e^{-r/2}; outermost max of u^2 at 3 + sqrt(5)
        let state = hydrogenic(2);
        let grid = default_grid(&state).unwrap();
        let wf = solve_radial(&state, &grid).unwrap();
        let r_lobe = outer_lobe_radius(&wf).unwrap();
        assert_relative_eq!(r_lobe, 3.0 + 5.0f64.sqrt(), max_relative = 1e-3);
    }

    #[test]
    fn outer_lobe_grows_with_n() {
        let mut prev = 0.0;
        for n in [49, 60, 72] {
            let state = sr_s_state(n);
            let wf = solve_radial(&state, &default_grid(&state).unwrap()).unwrap();
            let r = outer_lobe_radius(&wf).unwrap();
            assert!(r > prev, "r_R({n}) = {r} not above {prev}");
            prev = r;
        }
    }

    #[test]
    fn outer_lobe_scales_as_effective_n_squared() {
        let mut ratios = Vec::new();
        for n in [38, 49, 60, 72] {
            let state = sr_s_state(n);
            let wf = solve_radial(&state, &default_grid(&state).unwrap()).unwrap();
            let r = outer_lobe_radius(&wf).unwrap();
            ratios.push(r / (state.effective_n() * state.effective_n()));
        }
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            (max - min) / min < 0.03,
            "r_R/n*^2 spread {:.4}..{:.4}",
            min,
            max
        );
    }

    #[test]
    fn momentum_turning_point_and_coulomb_limit() {
        let state = sr_s_state(49);
        let rt = state.turning_point();
        assert_eq!(semiclassical_momentum(rt, &state).unwrap(), 0.0);
        assert_eq!(semiclassical_momentum(1.5 * rt, &state).unwrap(), 0.0);
        let k = semiclassical_momentum(10.0, &state).unwrap();
        assert_relative_eq!(k, (2.0f64 / 10.0).sqrt(), max_relative = 2e-3);
        assert!(semiclassical_momentum(0.0, &state).is_err());
    }

    #[test]
    fn momentum_matches_wkb_phase_of_solution() {
        // phase advances pi between adjacent nodes: k ~ pi / node spacing
        let state = sr_s_state(49);
        let wf = solve_radial(&state, &default_grid(&state).unwrap()).unwrap();
        let r_lobe = outer_lobe_radius(&wf).unwrap();
        let r = wf.grid().points();
        let u = wf.u_values();
        let mut nodes = Vec::new();
        for i in 1..r.len() {
            if r[i] > r_lobe {
                break;
            }
            if u[i - 1] != 0.0 && u[i] != 0.0 && u[i - 1].signum() != u[i].signum() {
                let t = u[i - 1] / (u[i - 1] - u[i]);
                nodes.push(r[i - 1] + t * (r[i] - r[i - 1]));
            }
        }
        assert!(nodes.len() >= 2);
        let (ra, rb) = (nodes[nodes.len() - 2], nodes[nodes.len() - 1]);
        let k_est = std::f64::consts::PI / (rb - ra);
        let k = semiclassical_momentum(0.5 * (ra + rb), &state).unwrap();
        assert_relative_eq!(k, k_est, max_relative = 0.05);
    }

    // -- independent integration oracle ------------------------------------

    /// RK4 integration of v'' = W(x) v in x = ln r, inward from the tail,
    /// on its own uniform-x mesh. Independent of the Numerov path.
    fn rk4_inward(state: &RydbergState, r_min: f64, r_max: f64, dx: f64) -> (Vec<f64>, Vec<f64>) {
        let e2 = 2.0 * state.energy_hartree();
        let ll1 = (state.l * (state.l + 1)) as f64;
        let w = |x: f64| -> f64 {
            let r = x.exp();
            let q = ll1 / (r * r) - 2.0 / r - e2;
            r * r * q + 0.25
        };
        let x_max = r_max.ln();
        let x_min = r_min.ln();
        let steps = ((x_max - x_min) / dx).ceil() as usize;
        let h = (x_max - x_min) / steps as f64;

        let mut xs = Vec::with_capacity(steps + 1);
        let mut vs = Vec::with_capacity(steps + 1);
        let mut x = x_max;
        let mut v = 1.0f64;
        // decaying-outward tail: dv/dx = -sqrt(W) v, which grows inward
        let mut p = -w(x_max).max(0.0).sqrt() * v;
        xs.push(x.exp());
        vs.push(v);
        for _ in 0..steps {
            // integrate in -x direction
            let f = |x: f64, v: f64, p: f64| (-p, -(w(x) * v));
            let (k1v, k1p) = f(x, v, p);
            let (k2v, k2p) = f(x - 0.5 * h, v + 0.5 * h * k1v, p + 0.5 * h * k1p);
            let (k3v, k3p) = f(x - 0.5 * h, v + 0.5 * h * k2v, p + 0.5 * h * k2p);
            let (k4v, k4p) = f(x - h, v + h * k3v, p + h * k3p);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            x -= h;
            xs.push(x.exp());
            vs.push(v);
        }
        xs.reverse();
        vs.reverse();
        let us: Vec<f64> = xs.iter().zip(vs.iter()).map(|(&r, &v)| v * r.sqrt()).collect();
        (xs, us)
    }

    #[test]
    fn numerov_matches_rk4_shooting_oracle() {
        let state = sr_s_state(49);
        let grid = default_grid(&state).unwrap();
        let wf = solve_radial(&state, &grid).unwrap();

        let (r_o, u_o) = rk4_inward(&state, 2.0, grid.r_max(), 1e-4);

        // compare on the main grid above the taper zone, both normalized on
        // the comparison range
        let r_lo = 20.0;
        let pts = grid.points();
        let mut main = Vec::new();
        let mut oracle = Vec::new();
        let mut rs = Vec::new();
        for (i, &ri) in pts.iter().enumerate() {
            if ri < r_lo {
                continue;
            }
            rs.push(ri);
            main.push(wf.u_values()[i]);
            oracle.push(interp_linear(&r_o, &u_o, ri));
        }
        let norm = |v: &[f64]| -> f64 {
            let mut acc = 0.0;
            for i in 0..v.len() - 1 {
                acc += 0.5 * (rs[i + 1] - rs[i]) * (v[i] * v[i] + v[i + 1] * v[i + 1]);
            }
            acc.sqrt()
        };
        let nm = norm(&main);
        let no = norm(&oracle);
        // align overall sign at the outer lobe
        let i_ref = main
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap()
            .0;
        let sign = (main[i_ref] / nm).signum() * (oracle[i_ref] / no).signum();

        let mut sup = 0.0f64;
        let mut umax = 0.0f64;
        for i in 0..main.len() {
            let a = main[i] / nm;
            let b = sign * oracle[i] / no;
            sup = sup.max((a - b).abs());
            umax = umax.max(a.abs());
        }
        assert!(sup / umax < 1e-4, "sup-norm mismatch {:e}", sup / umax);
    }

    #[test]
    fn energy_bisection_oracle_recovers_defect_energy() {
        // Dirichlet eigenproblem on [r_node, r_max], with r_node a node of the
        // independently integrated solution, must reproduce E = -1/(2 n*^2).
        let state = sr_s_state(49);
        let ns = state.effective_n();
        let e_exact = state.energy_hartree();
        let r_max = (3.0 + 22.0 / ns) * ns * ns;

        let (r_o, u_o) = rk4_inward(&state, 2.0, r_max, 1e-4);
        // first node above 20 Bohr
        let mut r_node = 0.0;
        for i in 1..r_o.len() {
            if r_o[i - 1] < 20.0 {
                continue;
            }
            if u_o[i - 1].signum() != u_o[i].signum() {
                let t = u_o[i - 1] / (u_o[i - 1] - u_o[i]);
                r_node = r_o[i - 1] + t * (r_o[i] - r_o[i - 1]);
                break;
            }
        }
        assert!(r_node > 20.0);

        // shoot at trial energy, read u(r_node)
        let boundary_value = |e: f64| -> f64 {
            let trial = TrialState { e, l: 0 };
            let (r_t, u_t) = rk4_inward_energy(&trial, r_node * 0.9, r_max, 2e-4);
            interp_linear(&r_t, &u_t, r_node)
        };
        let mut lo = e_exact * 1.001; // more negative
        let mut hi = e_exact * 0.999;
        let f_lo = boundary_value(lo);
        assert!(
            f_lo * boundary_value(hi) < 0.0,
            "bracket does not straddle the eigenvalue"
        );
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if boundary_value(mid) * f_lo > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let e_found = 0.5 * (lo + hi);
        assert!(
            ((e_found - e_exact) / e_exact).abs() < 1e-6,
            "bisection found {e_found:e}, expected {e_exact:e}"
        );
    }

    struct TrialState {
        e: f64,
        l: u32,
    }

    fn rk4_inward_energy(trial: &TrialState, r_min: f64, r_max: f64, dx: f64) -> (Vec<f64>, Vec<f64>) {
        let e2 = 2.0 * trial.e;
        let ll1 = (trial.l * (trial.l + 1)) as f64;
        let w = |x: f64| -> f64 {
            let r = x.exp();
            let q = ll1 / (r * r) - 2.0 / r - e2;
            r * r * q + 0.25
        };
        let x_max = r_max.ln();
        let x_min = r_min.ln();
        let steps = ((x_max - x_min) / dx).ceil() as usize;
        let h = (x_max - x_min) / steps as f64;
        let mut x = x_max;
        let mut v = 1.0f64;
        let mut p = -w(x_max).max(0.0).sqrt() * v;
        let mut xs = vec![x.exp()];
        let mut vs = vec![v];
        for _ in 0..steps {
            let f = |x: f64, v: f64, p: f64| (-p, -(w(x) * v));
            let (k1v, k1p) = f(x, v, p);
            let (k2v, k2p) = f(x - 0.5 * h, v + 0.5 * h * k1v, p + 0.5 * h * k1p);
            let (k3v, k3p) = f(x - 0.5 * h, v + 0.5 * h * k2v, p + 0.5 * h * k2p);
            let (k4v, k4p) = f(x - h, v + h * k3v, p + h * k3p);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            x -= h;
            xs.push(x.exp());
            vs.push(v);
        }
        xs.reverse();
        vs.reverse();
        let us: Vec<f64> = xs.iter().zip(vs.iter()).map(|(&r, &v)| v * r.sqrt()).collect();
        (xs, us)
    }
}
