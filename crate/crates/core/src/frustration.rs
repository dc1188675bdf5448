//! Entanglement excitation energy and the singlet-overlap frustration
//! measure with its entanglement lower bound.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::basis::ChainSpec;
use crate::eigensolver::SpectrumLevel;
use crate::error::{Error, Result};
use crate::hamiltonian::apply_full;
use crate::linalg::dot;
use crate::rdm::{correlators, two_site_rdm, TwoSiteRdm};

/// `f - E^(1)` above this marks geometric frustration.
pub const GEOMETRIC_THRESHOLD: f64 = 1e-6;

/// `-(8/3) e` for an SU(2)-symmetric state with energy per site `e`.
pub fn exe_closed(e_per_site: f64) -> f64 {
    -8.0 / 3.0 * e_per_site
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExeGrid {
    pub min: f64,
    pub max: f64,
    pub theta_points: usize,
    pub phi_points: usize,
    /// Row-major over `(theta, phi)`.
    pub values: Vec<f64>,
}

impl ExeGrid {
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }
}

/// `<O H O> - <H>` for `O = n . sigma` at `site`, over a `(theta, phi)` grid.
///
/// The energy shift is the quadratic form `n^T M n - <H>` with
/// `M_ab = Re <sigma_a psi| H |sigma_b psi>`, averaged over the degenerate
/// vectors of `level`.
pub fn exe_direct(level: &SpectrumLevel, spec: &ChainSpec, site: usize, grid: (usize, usize)) -> Result<ExeGrid> {
    let n = spec.n_sites;
    if site >= n {
        return Err(Error::arg(format!("site {site} out of range for {n} sites")));
    }
    let (nt, np) = grid;
    if nt < 2 || np < 1 {
        return Err(Error::arg("EXE grid needs at least 2 x 1 points"));
    }
    let bit = 1usize << site;
    let g = level.eigenvectors.len() as f64;
    let mut m = Matrix3::<f64>::zeros();
    let mut energy = 0.0;
    for psi in &level.eigenvectors {
        let dim = psi.len();
        let sx: Vec<f64> = (0..dim).map(|k| psi[k ^ bit]).collect();
        // sigma_y psi = i * sy
        let sy: Vec<f64> = (0..dim)
            .map(|k| if k & bit != 0 { psi[k ^ bit] } else { -psi[k ^ bit] })
            .collect();
        let sz: Vec<f64> = (0..dim).map(|k| if k & bit != 0 { -psi[k] } else { psi[k] }).collect();
        let hx = apply_full(spec, &sx)?;
        let hy = apply_full(spec, &sy)?;
        let hz = apply_full(spec, &sz)?;
        let hpsi = apply_full(spec, psi)?;
        energy += dot(psi, &hpsi) / g;
        // Cross terms with sigma_y are purely imaginary for real vectors.
        m[(0, 0)] += dot(&sx, &hx) / g;
        m[(1, 1)] += dot(&sy, &hy) / g;
        m[(2, 2)] += dot(&sz, &hz) / g;
        let xz = 0.5 * (dot(&sx, &hz) + dot(&sz, &hx)) / g;
        m[(0, 2)] += xz;
        m[(2, 0)] += xz;
    }

    let mut values = Vec::with_capacity(nt * np);
    for i in 0..nt {
        let (st, ct) = (PI * i as f64 / (nt - 1) as f64).sin_cos();
        for j in 0..np {
            let (sp, cp) = (2.0 * PI * j as f64 / np as f64).sin_cos();
            let v = nalgebra::Vector3::new(st * cp, st * sp, ct);
            values.push((v.transpose() * m * v)[0] - energy);
        }
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ExeGrid {
        min,
        max,
        theta_points: nt,
        phi_points: np,
        values,
    })
}

/// `3/4 + (3/4) c` with `c` the per-component correlator.
pub fn frustration_from_correlator(c: f64) -> f64 {
    0.75 + 0.75 * c
}

/// `1 - <Psi-| rho |Psi->` with `Psi- = (|10> - |01>) / sqrt 2`.
/// Cross-checked against the correlator route, which holds for any state.
pub fn frustration_measure(rdm: &TwoSiteRdm) -> Result<f64> {
    let m = &rdm.matrix;
    let overlap = 0.5 * (m[(1, 1)] + m[(2, 2)] - m[(1, 2)] - m[(2, 1)]).re;
    let f = 1.0 - overlap;
    let via_c = frustration_from_correlator(correlators(rdm).component);
    if (f - via_c).abs() > 1e-10 {
        return Err(Error::numerical(
            format!("singlet overlap gives f = {f}, correlators give {via_c}"),
            vec![(f - via_c).abs()],
        ));
    }
    Ok(f)
}

/// `E^(d) = 1 - sum of the d largest eigenvalues of rho`.
pub fn frustration_lower_bound(rdm: &TwoSiteRdm, d: usize) -> Result<f64> {
    if !(1..=4).contains(&d) {
        return Err(Error::arg(format!("projector rank d = {d} outside 1..=4")));
    }
    let eig = rdm.eigenvalues();
    Ok((1.0 - eig[..d].iter().sum::<f64>()).max(0.0))
}

/// `E^(1)` of a symmetric X state as a function of its correlator.
pub fn lower_bound_from_correlator(c: f64) -> f64 {
    if c <= 0.0 {
        0.75 + 0.75 * c
    } else {
        0.75 - 0.25 * c
    }
}

/// Average over the `2N` bonds: half NN, half NNN.
pub fn total_frustration(f_nn: f64, f_nnn: f64) -> f64 {
    0.5 * (f_nn + f_nnn)
}

/// `(8/9)(f - 3/4)^2`.
pub fn gmqd_from_frustration(f: f64) -> f64 {
    8.0 / 9.0 * (f - 0.75).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrustrationReport {
    pub f_nn: f64,
    pub f_nnn: f64,
    pub e1_nn: f64,
    pub e1_nnn: f64,
    pub total_f: f64,
    pub exe: f64,
    pub geometric_frustration_nn: bool,
    pub geometric_frustration_nnn: bool,
    /// Excited levels: `f` is an overlap deficit, not a frustration.
    pub overlap_deficit: bool,
}

/// Frustration quantities of `level` (index 0 is the ground state).
pub fn frustration_report(spec: &ChainSpec, level: &SpectrumLevel, level_index: usize) -> Result<FrustrationReport> {
    let nn = two_site_rdm(level, (0, 1))?;
    let nnn = two_site_rdm(level, (0, 2))?;
    let f_nn = frustration_measure(&nn)?;
    let f_nnn = frustration_measure(&nnn)?;
    let e1_nn = frustration_lower_bound(&nn, 1)?;
    let e1_nnn = frustration_lower_bound(&nnn, 1)?;
    Ok(FrustrationReport {
        f_nn,
        f_nnn,
        e1_nn,
        e1_nnn,
        total_f: total_frustration(f_nn, f_nnn),
        exe: exe_closed(level.energy / spec.n_sites as f64),
        geometric_frustration_nn: f_nn - e1_nn > GEOMETRIC_THRESHOLD,
        geometric_frustration_nnn: f_nnn - e1_nnn > GEOMETRIC_THRESHOLD,
        overlap_deficit: level_index > 0,
    })
}
