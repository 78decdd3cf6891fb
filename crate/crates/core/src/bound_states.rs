//! Single-atom levels in the molecular potential: a finite-difference radial
//! Hamiltonian h = -hbar^2 nabla^2 / (2 m_red) + V(r) per angular channel,
//! diagonalized in a finite spherical box, plus the overlaps p_i of each
//! eigenstate with the zero-momentum condensate mode.
//!
//! Boundary conditions
//! -------------------
//! `HardWall` imposes u(R) = 0 and gives the textbook box spectrum
//! (j pi / R)^2 hbar^2 / 2m. Its ground state, however, piles up probability
//! in the middle of the box: |psi(0)|^2 is 2 pi^2/3 times the uniform value,
//! which misweights every overlap against a homogeneous condensate.
//! `UniformGround` (the default) instead imposes u(R) = R u'(R), under which
//! u = r — the uniform zero-momentum mode — is the exact ground state of the
//! free Hamiltonian at exactly zero energy. Overlap intensities computed in
//! this box converge to their bulk values as the box grows.
//!
//! Impurity recoil enters through the two-body reduced mass in h.

use crate::constants::{Constants, BOHR_RADIUS, HARTREE_HZ};
use crate::eigen::SymTridiag;
use crate::error::{Error, Result};
use crate::grid::interp_linear;
use crate::pseudopotential::PseudoPotential;
use rayon::prelude::*;
use std::io::Write;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Bound/scattering classifier: a bound state carries essentially no weight
/// in the outer shell of the box.
const BOUND_TAIL_FRACTION: f64 = 0.9;
const BOUND_TAIL_WEIGHT: f64 = 1e-4;

/// Completeness deficit allowed in the truncated eigenbasis.
const COMPLETENESS_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// u(R) = 0.
    HardWall,
    /// u(R) = R u'(R); the uniform mode is the exact free ground state.
    UniformGround,
}

#[derive(Debug, Clone, Copy)]
pub struct BoxModel {
    /// Box radius (Bohr).
    pub box_radius: f64,
    /// Number of interior grid nodes (matrix dimension).
    pub n_points: usize,
    /// Reduced mass (electron masses).
    pub reduced_mass: f64,
    /// Angular channels 0..=l_max.
    pub l_max: u32,
    pub boundary: BoundaryCondition,
    /// Diagonalization cutoff (Hz, as energy/h); None picks one from the
    /// potential depth and verifies completeness afterwards.
    pub energy_cutoff_hz: Option<f64>,
}

impl BoxModel {
    /// Default box for a Rydberg state whose outer lobe sits at `r_lobe`
    /// (Bohr): radius 4 r_lobe, 2e4 nodes, two-body reduced mass.
    pub fn for_orbit(r_lobe: f64, constants: &Constants) -> Result<Self> {
        Self::with_radius_factor(r_lobe, 4.0, 20_000, constants)
    }

    pub fn with_radius_factor(
        r_lobe: f64,
        radius_factor: f64,
        n_points: usize,
        constants: &Constants,
    ) -> Result<Self> {
        if radius_factor < 3.0 {
            return Err(Error::InvalidArgument(format!(
                "box radius factor {radius_factor} below 3 lobe radii"
            )));
        }
        if n_points < 64 {
            return Err(Error::InvalidArgument(format!(
                "box needs at least 64 nodes, got {n_points}"
            )));
        }
        Ok(Self {
            box_radius: radius_factor * r_lobe,
            n_points,
            reduced_mass: constants.reduced_mass_au(),
            l_max: 0,
            boundary: BoundaryCondition::UniformGround,
            energy_cutoff_hz: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.box_radius > 0.0) || !(self.reduced_mass > 0.0) || self.n_points < 64 {
            return Err(Error::InvalidArgument(format!(
                "invalid box: radius {}, mass {}, nodes {}",
                self.box_radius, self.reduced_mass, self.n_points
            )));
        }
        Ok(())
    }

    /// Grid step (Bohr). Interior nodes sit at j h, j = 1..=n.
    pub fn grid_step(&self) -> f64 {
        match self.boundary {
            BoundaryCondition::HardWall => self.box_radius / (self.n_points + 1) as f64,
            BoundaryCondition::UniformGround => self.box_radius / self.n_points as f64,
        }
    }

    pub fn node_radii(&self) -> Vec<f64> {
        let h = self.grid_step();
        (1..=self.n_points).map(|j| j as f64 * h).collect()
    }

    /// Box volume in m^3.
    pub fn volume_si(&self) -> f64 {
        let r_m = self.box_radius * BOHR_RADIUS;
        4.0 * std::f64::consts::PI / 3.0 * r_m.powi(3)
    }

    /// Expected atom number at the given density (m^-3).
    pub fn atom_count(&self, density_si: f64) -> f64 {
        density_si * self.volume_si()
    }

    fn with_points(&self, n_points: usize) -> Self {
        Self { n_points, ..*self }
    }

    /// Assemble the symmetrized tridiagonal Hamiltonian for channel `l`.
    /// For `UniformGround` the boundary row is scaled by the similarity
    /// transform diag(1,..,1,1/sqrt(2)); eigenvectors transform back with
    /// u_n = sqrt(2) w_n and physical trapezoid norms become Euclidean ones.
    fn assemble(&self, v_nodes: &[f64], l: u32) -> SymTridiag {
        let n = self.n_points;
        assert_eq!(v_nodes.len(), n);
        let h = self.grid_step();
        let t = 1.0 / (2.0 * self.reduced_mass * h * h);
        let ll1 = (l * (l + 1)) as f64;
        let m2 = 2.0 * self.reduced_mass;

        let mut diag = Vec::with_capacity(n);
        for j in 1..=n {
            let r = j as f64 * h;
            diag.push(2.0 * t + v_nodes[j - 1] + ll1 / (m2 * r * r));
        }
        let mut off = vec![-t; n - 1];
        if self.boundary == BoundaryCondition::UniformGround {
            // ghost elimination for u(R) = R u'(R): h/R = 1/n
            diag[n - 1] = 2.0 * t * (1.0 - 1.0 / n as f64)
                + v_nodes[n - 1]
                + ll1 / (m2 * self.box_radius * self.box_radius);
            off[n - 2] = -SQRT_2 * t;
        }
        SymTridiag::new(diag, off)
    }

    /// Condensate mode in the symmetrized (w) basis, unit Euclidean norm,
    /// plus its free energy (Hartree).
    fn condensate_mode(&self) -> (Vec<f64>, f64) {
        let n = self.n_points;
        match self.boundary {
            BoundaryCondition::UniformGround => {
                // exact discrete ground state of the free Hamiltonian: u = r
                let mut w: Vec<f64> = (1..=n).map(|j| j as f64).collect();
                w[n - 1] /= SQRT_2;
                normalize(&mut w);
                (w, 0.0)
            }
            BoundaryCondition::HardWall => {
                let free = self.assemble(&vec![0.0; n], 0);
                let e0 = free.eigenvalue(0);
                let w = free
                    .eigenvector(e0, &[])
                    .expect("free box ground state must converge");
                (w, e0)
            }
        }
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}

#[derive(Debug, Clone)]
pub struct ChannelSolution {
    pub l: u32,
    /// Eigenvalues below the cutoff, ascending (Hartree).
    energies: Vec<f64>,
    bound_count: usize,
    matrix: SymTridiag,
}

impl ChannelSolution {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn bound_count(&self) -> usize {
        self.bound_count
    }

    pub fn bound_energies(&self) -> &[f64] {
        &self.energies[..self.bound_count]
    }
}

/// Eigenpairs of the boxed single-atom problem together with the
/// condensate-mode overlaps of the s channel.
#[derive(Debug, Clone)]
pub struct BoundStateSet {
    box_model: BoxModel,
    channels: Vec<ChannelSolution>,
    /// p_i = |<beta_i|s>|^2 for the l = 0 channel, aligned with its energies.
    overlaps: Option<Vec<f64>>,
    completeness_deficit: f64,
    /// Free energy of the condensate mode (Hartree); zero for UniformGround.
    epsilon_s0: f64,
    /// <s|V|s> (Hartree).
    s_mean_v: f64,
    /// Condensate mode in the w basis.
    w_s: Vec<f64>,
    /// Physical u(r) samples of the l = 0 bound states (optional export).
    bound_wavefunctions: Vec<Vec<f64>>,
}

impl BoundStateSet {
    pub fn box_model(&self) -> &BoxModel {
        &self.box_model
    }

    pub fn channels(&self) -> &[ChannelSolution] {
        &self.channels
    }

    pub fn s_channel(&self) -> &ChannelSolution {
        &self.channels[0]
    }

    pub fn epsilon_s0(&self) -> f64 {
        self.epsilon_s0
    }

    /// <s|V|s> in Hartree: the per-atom mean shift in this box.
    pub fn s_mean_potential(&self) -> f64 {
        self.s_mean_v
    }

    pub fn overlaps(&self) -> Option<&[f64]> {
        self.overlaps.as_deref()
    }

    pub fn completeness_deficit(&self) -> f64 {
        self.completeness_deficit
    }

    pub fn bound_wavefunctions(&self) -> &[Vec<f64>] {
        &self.bound_wavefunctions
    }

    /// Diagonal and off-diagonal of the symmetrized s-channel Hamiltonian
    /// (Hartree), for external propagation cross-checks.
    pub fn s_matrix(&self) -> (&[f64], &[f64]) {
        let m = &self.channels[0].matrix;
        (&m.diag, &m.off)
    }

    /// Condensate mode in the symmetrized basis (unit Euclidean norm).
    pub fn condensate_mode_vector(&self) -> &[f64] {
        &self.w_s
    }

    /// (energies, p_i) of the s channel; errors if overlaps are not filled.
    pub fn spectral_weights(&self) -> Result<(&[f64], &[f64])> {
        let p = self.overlaps.as_deref().ok_or(Error::MissingOverlaps)?;
        Ok((self.s_channel().energies(), p))
    }

    /// Occupation intensities lambda_i = N_box p_i of the s-channel bound
    /// states at the given density (m^-3).
    pub fn bound_intensities(&self, density_si: f64) -> Result<Vec<f64>> {
        let (_, p) = self.spectral_weights()?;
        let n_box = self.box_model.atom_count(density_si);
        Ok(p[..self.s_channel().bound_count]
            .iter()
            .map(|&pi| n_box * pi)
            .collect())
    }

    /// sum_i p_i eps_i - eps_s0 against <s|V|s>: a completeness sum rule of
    /// the eigenbasis. Returns (lhs, rhs) in Hartree.
    pub fn first_moment_identity(&self) -> Result<(f64, f64)> {
        let (e, p) = self.spectral_weights()?;
        let lhs: f64 = e.iter().zip(p).map(|(&ei, &pi)| ei * pi).sum::<f64>() - self.epsilon_s0;
        Ok((lhs, self.s_mean_v))
    }

    /// Synthetic level set for model studies: explicit (energy, weight)
    /// pairs with a declared condensate-mode energy. Weights must sum to <= 1.
    pub fn synthetic(levels: Vec<(f64, f64)>, epsilon_s0: f64, box_model: BoxModel) -> Result<Self> {
        let total: f64 = levels.iter().map(|&(_, p)| p).sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "synthetic weights sum to {total} > 1"
            )));
        }
        let mut idx: Vec<usize> = (0..levels.len()).collect();
        idx.sort_by(|&a, &b| levels[a].0.total_cmp(&levels[b].0));
        let energies: Vec<f64> = idx.iter().map(|&i| levels[i].0).collect();
        let p: Vec<f64> = idx.iter().map(|&i| levels[i].1).collect();
        let bound_count = energies.iter().filter(|&&e| e < 0.0).count();
        let s_mean_v =
            energies.iter().zip(&p).map(|(&e, &w)| e * w).sum::<f64>() - epsilon_s0;
        let matrix = SymTridiag::new(vec![0.0; 2], vec![0.0]);
        Ok(Self {
            box_model,
            channels: vec![ChannelSolution {
                l: 0,
                energies,
                bound_count,
                matrix,
            }],
            completeness_deficit: (1.0 - total).max(0.0),
            overlaps: Some(p),
            epsilon_s0,
            s_mean_v,
            w_s: Vec::new(),
            bound_wavefunctions: Vec::new(),
        })
    }
}

/// Potential samples on the box nodes, zero-padded beyond the source grid.
pub fn potential_on_nodes(pot: &PseudoPotential, model: &BoxModel) -> Vec<f64> {
    let src_r = pot.grid().points();
    let src_v = pot.v_values();
    model
        .node_radii()
        .iter()
        .map(|&r| interp_linear(src_r, src_v, r))
        .collect()
}

/// Diagonalize every channel of the boxed Hamiltonian. Eigenvalues are kept
/// up to an energy cutoff chosen from the potential depth; the subsequent
/// overlap pass verifies the truncated basis is complete to 1e-8.
pub fn solve_box_states(pot: &PseudoPotential, model: &BoxModel) -> Result<BoundStateSet> {
    model.validate()?;
    let v_nodes = potential_on_nodes(pot, model);
    solve_box_states_from_nodes(&v_nodes, model)
}

/// As `solve_box_states`, for a potential already sampled on the box nodes.
pub fn solve_box_states_from_nodes(v_nodes: &[f64], model: &BoxModel) -> Result<BoundStateSet> {
    model.validate()?;
    let v_min = v_nodes.iter().cloned().fold(0.0f64, f64::min);
    let cutoff = model
        .energy_cutoff_hz
        .map(|hz| hz / HARTREE_HZ)
        .unwrap_or_else(|| (50.0 * v_min.abs()).max(0.5e9 / HARTREE_HZ));

    let (w_s, epsilon_s0) = model.condensate_mode();
    let s_mean_v: f64 = w_s.iter().zip(v_nodes).map(|(&w, &v)| w * w * v).sum();

    let mut channels = Vec::new();
    for l in 0..=model.l_max {
        let matrix = model.assemble(v_nodes, l);
        let count = matrix.count_below(cutoff).clamp(1, model.n_points);
        let energies = matrix.lowest_eigenvalues(count);
        let bound_count = classify_bound(&matrix, &energies, model)?;
        channels.push(ChannelSolution {
            l,
            energies,
            bound_count,
            matrix,
        });
    }

    // physical u(r) of the s-channel bound states, for export
    let mut bound_wavefunctions = Vec::new();
    {
        let ch = &channels[0];
        let h = model.grid_step();
        let mut prev: Vec<Vec<f64>> = Vec::new();
        for i in 0..ch.bound_count {
            let w = ch.matrix.eigenvector(ch.energies[i], &prev)?;
            let mut u: Vec<f64> = w.iter().map(|&x| x / h.sqrt()).collect();
            if model.boundary == BoundaryCondition::UniformGround {
                let n = u.len();
                u[n - 1] *= SQRT_2;
            }
            prev.push(w);
            bound_wavefunctions.push(u);
        }
    }

    Ok(BoundStateSet {
        box_model: *model,
        channels,
        overlaps: None,
        completeness_deficit: 1.0,
        epsilon_s0,
        s_mean_v,
        w_s,
        bound_wavefunctions,
    })
}

/// Bound states have negative energy and no weight at the box edge. The edge
/// check matters because scattering states are themselves shifted slightly
/// negative by the mean field.
fn classify_bound(matrix: &SymTridiag, energies: &[f64], model: &BoxModel) -> Result<usize> {
    let n = model.n_points;
    let tail_start = (BOUND_TAIL_FRACTION * n as f64) as usize;
    let mut count = 0;
    let mut prev: Vec<Vec<f64>> = Vec::new();
    for &e in energies.iter().take_while(|&&e| e < 0.0) {
        let w = matrix.eigenvector(e, &prev)?;
        let tail: f64 = w[tail_start..].iter().map(|x| x * x).sum();
        prev.push(w);
        if tail < BOUND_TAIL_WEIGHT {
            count += 1;
        } else {
            break;
        }
    }
    Ok(count)
}

/// Fill the condensate-mode overlaps p_i = |<beta_i|s>|^2 of the s channel.
/// Eigenvectors are streamed; near-degenerate neighbors are grouped into
/// clusters and re-orthogonalized within each. If the completeness sum falls
/// short of 1 - 1e-8, the eigenvalue list is extended upward in chunks until
/// the sum rule is met (the spectrum is finite, so this always terminates).
pub fn condensate_overlaps(mut states: BoundStateSet) -> Result<BoundStateSet> {
    if states.w_s.is_empty() {
        return Err(Error::MissingOverlaps);
    }
    let w_s = states.w_s.clone();
    let n_max = states.box_model.n_points;
    let ch = &mut states.channels[0];
    let span = {
        let (lo, hi) = ch.matrix.spectrum_bounds();
        (hi - lo).abs()
    };
    let cluster_gap = 1e4 * f64::EPSILON * span;

    let mut p: Vec<f64> = Vec::with_capacity(ch.energies.len());
    let mut total = 0.0f64;
    let mut done = 0usize;
    loop {
        if done == ch.energies.len() {
            if 1.0 - total <= COMPLETENESS_LIMIT || ch.energies.len() == n_max {
                break;
            }
            let from = ch.energies.len();
            let to = (from + from.max(2048)).min(n_max);
            let more = ch.matrix.eigenvalue_range(from, to);
            ch.energies.extend(more);
        }

        // group the fresh indices into near-degenerate clusters
        let mut clusters: Vec<(usize, usize)> = Vec::new();
        let mut start = done;
        for i in done + 1..=ch.energies.len() {
            if i == ch.energies.len() || ch.energies[i] - ch.energies[i - 1] > cluster_gap {
                clusters.push((start, i));
                start = i;
            }
        }
        let matrix = &ch.matrix;
        let w_s = &w_s;
        let chunk: Vec<f64> = clusters
            .par_iter()
            .map(|&(a, b)| {
                let mut out = Vec::with_capacity(b - a);
                let mut prev: Vec<Vec<f64>> = Vec::new();
                for &e in &ch.energies[a..b] {
                    let w = matrix.eigenvector(e, &prev)?;
                    let dot: f64 = w.iter().zip(w_s).map(|(x, y)| x * y).sum();
                    out.push(dot * dot);
                    if b - a > 1 {
                        prev.push(w);
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        total += chunk.iter().sum::<f64>();
        p.extend(chunk);
        done = ch.energies.len();
    }

    let deficit = 1.0 - total;
    if deficit > COMPLETENESS_LIMIT {
        return Err(Error::IncompleteBasis {
            deficit,
            limit: COMPLETENESS_LIMIT,
        });
    }
    states.overlaps = Some(p);
    states.completeness_deficit = deficit;
    Ok(states)
}

/// Re-solve the bound part of the s channel on a doubled grid and return the
/// largest relative energy change. Levels shallower than 1% of the potential
/// depth are excluded, their box discretization error being comparable to
/// the level itself.
pub fn bound_refinement_delta(pot: &PseudoPotential, model: &BoxModel) -> Result<f64> {
    let base = solve_box_states(pot, model)?;
    bound_refinement_delta_from(&base, pot, model)
}

/// As `bound_refinement_delta`, reusing an already solved base set.
pub fn bound_refinement_delta_from(
    base: &BoundStateSet,
    pot: &PseudoPotential,
    model: &BoxModel,
) -> Result<f64> {
    let fine_model = model.with_points(2 * model.n_points);
    let v_fine = potential_on_nodes(pot, &fine_model);
    let matrix = fine_model.assemble(&v_fine, 0);

    let bound = base.s_channel().bound_energies();
    if bound.is_empty() {
        return Ok(0.0);
    }
    let depth = bound[0].abs();
    let fine = matrix.lowest_eigenvalues(bound.len());
    let mut worst = 0.0f64;
    for (i, &e) in bound.iter().enumerate() {
        if e.abs() < 0.01 * depth {
            continue;
        }
        worst = worst.max(((fine[i] - e) / e).abs());
    }
    Ok(worst)
}

/// Level table export: index, l, energy (MHz as E/h), p_i, lambda_i at the
/// given density.
pub fn export_levels<W: Write>(states: &BoundStateSet, density_si: f64, mut out: W) -> Result<()> {
    writeln!(out, "index,l,energy_mhz,p_i,lambda_i")?;
    let n_box = states.box_model.atom_count(density_si);
    for ch in states.channels() {
        for (i, &e) in ch.energies()[..ch.bound_count()].iter().enumerate() {
            let e_mhz = e * HARTREE_HZ * 1e-6;
            let (p, lambda) = if ch.l == 0 {
                match states.overlaps() {
                    Some(p) => (p[i], n_box * p[i]),
                    None => (f64::NAN, f64::NAN),
                }
            } else {
                (0.0, 0.0)
            };
            writeln!(out, "{i},{},{e_mhz:.9e},{p:.9e},{lambda:.9e}", ch.l)?;
        }
    }
    Ok(())
}
