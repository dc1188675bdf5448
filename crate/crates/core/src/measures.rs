//! Entropic and geometric quantum correlation measures of two-qubit states.
//!
//! All entropies are in bits. Measurements act on subsystem A (the first
//! qubit of the pair).

use nalgebra::{DMatrix, Matrix2, Matrix3x4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::optimize::nelder_mead_max;
use crate::rdm::{pauli, BlochForm, TwoSiteRdm, XState};

const NEG_EIG_TOL: f64 = 1e-10;

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `-sum p log2 p`, ignoring non-positive weights.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    -eigenvalues.iter().map(|&p| xlog2x(p)).sum::<f64>()
}

pub fn von_neumann_entropy(rho: &DMatrix<Complex64>) -> Result<f64> {
    if !rho.is_square() {
        return Err(Error::arg("density matrix must be square"));
    }
    let eig = rho.clone().symmetric_eigenvalues();
    if let Some(&low) = eig.iter().min_by(|a, b| a.total_cmp(b)) {
        if low < -NEG_EIG_TOL {
            return Err(Error::arg(format!("negative eigenvalue {low:e}")));
        }
    }
    Ok(spectrum_entropy(eig.as_slice()))
}

fn rdm_entropy(rdm: &TwoSiteRdm) -> Result<f64> {
    let m = DMatrix::from_fn(4, 4, |r, c| rdm.matrix[(r, c)]);
    von_neumann_entropy(&m)
}

/// Eigenvalues of a 2x2 Hermitian matrix.
fn eig2(m: &Matrix2<Complex64>) -> [f64; 2] {
    let mean = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let half = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    let r = (half * half + m[(0, 1)].norm_sqr()).sqrt();
    [mean + r, mean - r]
}

fn entropy2(m: &Matrix2<Complex64>) -> f64 {
    spectrum_entropy(&eig2(m))
}

/// `S(rho_A) + S(rho_B) - S(rho)`.
pub fn mutual_information(rdm: &TwoSiteRdm) -> Result<f64> {
    Ok(entropy2(&rdm.reduced_a()) + entropy2(&rdm.reduced_b()) - rdm_entropy(rdm)?)
}

/// Rank-one projective measurement `E_pm = (I +- n.sigma) / 2` on qubit A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    /// Folds arbitrary angles into `theta in [0, pi]`, `phi in [0, 2 pi)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut t = theta.rem_euclid(2.0 * PI);
        let mut p = phi;
        if t > PI {
            t = 2.0 * PI - t;
            p += PI;
        }
        Self {
            theta: t,
            phi: p.rem_euclid(2.0 * PI),
        }
    }

    pub fn direction(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn projectors(&self) -> [Matrix2<Complex64>; 2] {
        let n = self.direction();
        let mut ns = Matrix2::zeros();
        for (k, nk) in n.iter().enumerate() {
            ns += pauli(k + 1) * Complex64::new(*nk, 0.0);
        }
        let half = Complex64::new(0.5, 0.0);
        [(pauli(0) + ns) * half, (pauli(0) - ns) * half]
    }
}

/// `S(rho_B) - sum_k p_k S(rho_B|k)` for measurement `basis` on A.
pub fn measured_information(rdm: &TwoSiteRdm, basis: &MeasurementBasis) -> f64 {
    entropy2(&rdm.reduced_b()) - conditional_entropy(rdm, basis)
}

fn conditional_entropy(rdm: &TwoSiteRdm, basis: &MeasurementBasis) -> f64 {
    let m = &rdm.matrix;
    let mut total = 0.0;
    for e in basis.projectors() {
        // Unnormalized Tr_A[(E (x) I) rho].
        let post = Matrix2::from_fn(|b, b2| {
            let mut z = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                for a2 in 0..2 {
                    z += e[(a, a2)] * m[(2 * a2 + b, 2 * a + b2)];
                }
            }
            z
        });
        let p = post[(0, 0)].re + post[(1, 1)].re;
        if p > 1e-15 {
            total += -eig2(&post).iter().map(|&l| xlog2x(l)).sum::<f64>() + xlog2x(p);
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordOptions {
    pub theta_points: usize,
    pub phi_points: usize,
    /// Objective tolerance of the local refinement.
    pub refine_tol: f64,
    /// Number of best grid points refined.
    pub starts: usize,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        Self {
            theta_points: 64,
            phi_points: 128,
            refine_tol: 1e-9,
            starts: 3,
        }
    }
}

/// Maximum of [`measured_information`] over measurement directions: an
/// exhaustive `(theta, phi)` grid followed by Nelder–Mead from the best
/// grid points.
pub fn classical_correlation(rdm: &TwoSiteRdm, opts: &DiscordOptions) -> Result<(f64, MeasurementBasis)> {
    if opts.theta_points < 2 || opts.phi_points < 1 {
        return Err(Error::arg("measurement grid needs at least 2 x 1 points"));
    }
    let dt = PI / (opts.theta_points - 1) as f64;
    let dp = 2.0 * PI / opts.phi_points as f64;
    let mut samples = Vec::with_capacity(opts.theta_points * opts.phi_points);
    for i in 0..opts.theta_points {
        let theta = i as f64 * dt;
        // The poles are a single direction each.
        let phis = if i == 0 || i + 1 == opts.theta_points { 1 } else { opts.phi_points };
        for j in 0..phis {
            let basis = MeasurementBasis::new(theta, j as f64 * dp);
            samples.push((measured_information(rdm, &basis), basis));
        }
    }
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best = samples[0];
    for &(_, start) in samples.iter().take(opts.starts.max(1)) {
        let objective = |p: [f64; 2]| measured_information(rdm, &MeasurementBasis::new(p[0], p[1]));
        let (p, v) = nelder_mead_max(objective, [start.theta, start.phi], 0.5 * dt, opts.refine_tol, 500);
        if v > best.0 {
            best = (v, MeasurementBasis::new(p[0], p[1]));
        }
    }
    Ok((best.0.max(0.0), best.1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordResult {
    pub discord: f64,
    pub classical_correlation: f64,
    pub mutual_information: f64,
    pub optimal_basis: MeasurementBasis,
}

pub fn quantum_discord(rdm: &TwoSiteRdm) -> Result<DiscordResult> {
    quantum_discord_with(rdm, &DiscordOptions::default())
}

/// `D = I - C` with the measurement on subsystem A.
pub fn quantum_discord_with(rdm: &TwoSiteRdm, opts: &DiscordOptions) -> Result<DiscordResult> {
    let mi = mutual_information(rdm)?.max(0.0);
    let (mut c, basis) = classical_correlation(rdm, opts)?;
    // C <= I holds exactly; rounding can push it past by ~1e-15.
    if c > mi {
        c = mi;
    }
    Ok(DiscordResult {
        discord: mi - c,
        classical_correlation: c,
        mutual_information: mi,
        optimal_basis: basis,
    })
}

/// Geometric discord `(1/4) [sum mu_k^2 - max mu_k^2]` where `mu_k` are the
/// singular values of the 3x4 expectation matrix `(<s_k (x) I> | <s_k (x) s_l>)`.
pub fn gmqd_general(b: &BlochForm) -> f64 {
    let mut t = Matrix3x4::zeros();
    for k in 0..3 {
        t[(k, 0)] = 4.0 * b.x[k];
        for l in 0..3 {
            t[(k, l + 1)] = 4.0 * b.r[(k, l)];
        }
    }
    let eig = (t * t.transpose()).symmetric_eigenvalues();
    let sum: f64 = eig.iter().sum();
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0.25 * (sum - max)).max(0.0)
}

/// Closed-form geometric discord of an X state.
pub fn gmqd_xstate(x: &XState) -> Result<f64> {
    const TOL: f64 = 1e-10;
    let total = x.a + x.b + x.c + x.d;
    if (total - 1.0).abs() > TOL {
        return Err(Error::arg(format!("X-state diagonal sums to {total}")));
    }
    if x.b * x.c < x.w.norm_sqr() - TOL || x.a * x.d < x.g.norm_sqr() - TOL {
        return Err(Error::arg("X-state parameters violate positivity"));
    }
    let (g, w) = (x.g.norm(), x.w.norm());
    let mu1 = 4.0 * (g + w).powi(2);
    let mu2 = 4.0 * (g - w).powi(2);
    let mu3 = 2.0 * ((x.a - x.c).powi(2) + (x.b - x.d).powi(2));
    Ok((0.25 * (mu1 + mu2 + mu3 - mu1.max(mu3))).max(0.0))
}

/// `c^2 / 2` from the per-component correlator `c = <s^a_i s^a_j>`.
pub fn gmqd_symmetric(c: f64) -> Result<f64> {
    if c.is_nan() || c.abs() > 1.0 + 1e-12 {
        return Err(Error::arg(format!("correlator {c} outside [-1, 1]")));
    }
    Ok(0.5 * c * c)
}

pub fn linear_entropy(rdm: &TwoSiteRdm) -> f64 {
    1.0 - rdm.purity()
}

/// The closed-form discord as printed for the symmetric X state, kept for
/// comparison only: it returns -1 for `I/4` and is not a valid discord.
#[cfg(feature = "literal-discord")]
pub fn discord_closed_form_literal(a: f64, b: f64, w: f64) -> f64 {
    let xl = |x: f64| if x == 0.0 { 0.0 } else { x * x.abs().log2() };
    let w2 = 4.0 * w * w;
    -2.0 * xl(a + b) + 2.0 * xl(a) + 2.0 * xl(b) + 2.0 * xl(w) - 0.5 * (xl(1.0 + w2) + xl(1.0 - w2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdm::{bloch_form, x_state, XParams};
    use nalgebra::Matrix4;
    use proptest::prelude::*;

    const C0: Complex64 = Complex64::new(0.0, 0.0);

    fn bell() -> TwoSiteRdm {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        TwoSiteRdm::from_pure([s, C0, C0, s]).unwrap()
    }

    fn product() -> TwoSiteRdm {
        // |0> (x) |+>
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        TwoSiteRdm::from_pure([s, s, C0, C0]).unwrap()
    }

    /// Symmetric X state with component correlator `c`.
    fn werner(c: f64) -> TwoSiteRdm {
        let (a, b, w) = ((1.0 + c) / 4.0, (1.0 - c) / 4.0, c / 2.0);
        TwoSiteRdm::from_real([[a, 0.0, 0.0, 0.0], [0.0, b, w, 0.0], [0.0, w, b, 0.0], [0.0, 0.0, 0.0, a]]).unwrap()
    }

    fn werner_oracle(c: f64) -> (f64, f64) {
        // Mutual information and classical correlation of a Bell-diagonal
        // state with equal correlators c.
        let lam = [(1.0 - 3.0 * c) / 4.0, (1.0 + c) / 4.0, (1.0 + c) / 4.0, (1.0 + c) / 4.0];
        let mi = 2.0 + lam.iter().map(|&l| xlog2x(l)).sum::<f64>();
        let m = c.abs();
        let cc = 0.5 * (xlog2x(1.0 - m) + xlog2x(1.0 + m));
        (mi, cc)
    }

    #[test]
    fn entropies() {
        let half = DMatrix::from_diagonal_element(2, 2, Complex64::new(0.5, 0.0));
        assert!((von_neumann_entropy(&half).unwrap() - 1.0).abs() < 1e-14);
        let pure = DMatrix::from_fn(4, 4, |r, c| bell().matrix[(r, c)]);
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            [0.75, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0].map(|x| Complex64::new(x, 0.0)).to_vec(),
        ));
        assert!((von_neumann_entropy(&w).unwrap() - 1.207_518_749_639_422).abs() < 1e-12);
        let neg = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.1, 0.0), Complex64::new(-0.1, 0.0)]));
        assert!(von_neumann_entropy(&neg).is_err());
    }

    #[test]
    fn mutual_information_references() {
        assert!(mutual_information(&product()).unwrap().abs() < 1e-12);
        assert!((mutual_information(&bell()).unwrap() - 2.0).abs() < 1e-12);
        assert!((mutual_information(&werner(-2.0 / 3.0)).unwrap() - 0.792_481_250_360_578).abs() < 1e-12);
    }

    #[test]
    fn discord_references() {
        let d = quantum_discord(&bell()).unwrap();
        assert!((d.discord - 1.0).abs() < 1e-9);
        assert!((d.classical_correlation - 1.0).abs() < 1e-9);

        let d = quantum_discord(&product()).unwrap();
        assert!(d.discord.abs() < 1e-9);

        let d = quantum_discord(&TwoSiteRdm::maximally_mixed()).unwrap();
        assert!(d.discord.abs() < 1e-12 && d.classical_correlation.abs() < 1e-12);

        let classical = TwoSiteRdm::from_real([
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.5],
        ])
        .unwrap();
        let d = quantum_discord(&classical).unwrap();
        assert!(d.discord.abs() < 1e-9);
        assert!((d.classical_correlation - 1.0).abs() < 1e-9);
    }

    #[test]
    fn werner_discord_matches_closed_form() {
        for c in [-1.0, -2.0 / 3.0, -0.3, 0.0, 0.2, 1.0 / 3.0] {
            let (mi, cc) = werner_oracle(c);
            let d = quantum_discord(&werner(c)).unwrap();
            assert!((d.mutual_information - mi).abs() < 1e-10, "c={c}");
            assert!((d.classical_correlation - cc).abs() < 1e-9, "c={c}");
            assert!((d.discord + d.classical_correlation - d.mutual_information).abs() < 1e-12);
        }
        let (mi, cc) = werner_oracle(-2.0 / 3.0);
        assert!((cc - 0.349_977_578_351_4).abs() < 1e-12);
        assert!((mi - cc - 0.442_503_672_009_2).abs() < 1e-12);
    }

    #[test]
    fn refined_grid_matches_fine_grid() {
        // A state whose optimal direction is off the coarse grid.
        let psi = [
            Complex64::new(0.6, 0.0),
            Complex64::new(0.2, 0.3),
            Complex64::new(-0.1, 0.5),
            Complex64::new(0.3, -0.1),
        ];
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let pure = TwoSiteRdm::from_pure(psi.map(|z| z / n)).unwrap();
        let m = pure.matrix * Complex64::new(0.6, 0.0) + Matrix4::identity() * Complex64::new(0.1, 0.0);
        let rdm = TwoSiteRdm::new(m).unwrap();

        let (refined, _) = classical_correlation(&rdm, &DiscordOptions::default()).unwrap();
        let fine = DiscordOptions {
            theta_points: 640,
            phi_points: 1280,
            starts: 0,
            refine_tol: 0.0,
        };
        let mut best = f64::NEG_INFINITY;
        for i in 0..fine.theta_points {
            for j in 0..fine.phi_points {
                let b = MeasurementBasis::new(PI * i as f64 / 639.0, 2.0 * PI * j as f64 / 1280.0);
                best = best.max(measured_information(&rdm, &b));
            }
        }
        assert!(refined >= best - 1e-7, "refined {refined} < fine grid {best}");
        assert!(refined - best < 1e-5);
    }

    #[test]
    fn gmqd_routes() {
        let mixed = TwoSiteRdm::maximally_mixed();
        assert_eq!(gmqd_general(&bloch_form(&mixed)), 0.0);
        let classical = TwoSiteRdm::from_real([
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.5],
        ])
        .unwrap();
        assert!(gmqd_general(&bloch_form(&classical)).abs() < 1e-15);
        assert!((gmqd_general(&bloch_form(&bell())) - 0.5).abs() < 1e-14);
        assert!((gmqd_general(&bloch_form(&werner(-2.0 / 3.0))) - 2.0 / 9.0).abs() < 1e-14);

        let sym = XState::symmetric(XParams {
            a: 1.0 / 12.0,
            b: 5.0 / 12.0,
            w: -1.0 / 3.0,
        });
        assert!((gmqd_xstate(&sym).unwrap() - 2.0 / 9.0).abs() < 1e-14);
        let b = x_state(&bell(), 1e-12).unwrap();
        assert!((gmqd_xstate(&b).unwrap() - 0.5).abs() < 1e-14);
        let flat = XState::symmetric(XParams { a: 0.25, b: 0.25, w: 0.0 });
        assert_eq!(gmqd_xstate(&flat).unwrap(), 0.0);
        let bad = XState::symmetric(XParams { a: 0.25, b: 0.25, w: 0.4 });
        assert!(gmqd_xstate(&bad).is_err());

        assert_eq!(gmqd_symmetric(0.0).unwrap(), 0.0);
        assert!((gmqd_symmetric(-2.0 / 3.0).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!((gmqd_symmetric(-1.0 / 3.0).unwrap() - 1.0 / 18.0).abs() < 1e-15);
        assert!(gmqd_symmetric(1.2).is_err());
    }

    #[test]
    fn linear_entropy_references() {
        assert!(linear_entropy(&bell()).abs() < 1e-14);
        assert!((linear_entropy(&TwoSiteRdm::maximally_mixed()) - 0.75).abs() < 1e-15);
        assert!((linear_entropy(&werner(-2.0 / 3.0)) - 5.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn measurement_projectors() {
        for (t, p) in [(0.0, 0.0), (1.0, 2.0), (PI, 5.0), (4.0, -1.0)] {
            let b = MeasurementBasis::new(t, p);
            assert!((0.0..=PI).contains(&b.theta) && (0.0..2.0 * PI).contains(&b.phi));
            let [ep, em] = b.projectors();
            assert!((ep + em - pauli(0)).camax() < 1e-14);
            assert!((ep * ep - ep).camax() < 1e-14);
            assert!((ep.trace().re - 1.0).abs() < 1e-14);
        }
    }

    #[cfg(feature = "literal-discord")]
    #[test]
    fn literal_closed_form_fails_on_maximally_mixed() {
        assert!((discord_closed_form_literal(0.25, 0.25, 0.0) + 1.0).abs() < 1e-14);
    }

    fn random_x_state() -> impl Strategy<Value = (f64, f64, f64)> {
        // Symmetric X states with correlator c in [-1, 1/3] stay positive.
        (-1.0f64..=1.0 / 3.0).prop_map(|c| ((1.0 + c) / 4.0, (1.0 - c) / 4.0, c / 2.0))
    }

    proptest! {
        #[test]
        fn gmqd_routes_agree((a, b, w) in random_x_state()) {
            let rdm = TwoSiteRdm::from_real([[a, 0.0, 0.0, 0.0], [0.0, b, w, 0.0], [0.0, w, b, 0.0], [0.0, 0.0, 0.0, a]]).unwrap();
            let general = gmqd_general(&bloch_form(&rdm));
            let xs = gmqd_xstate(&x_state(&rdm, 1e-12).unwrap()).unwrap();
            let sym = gmqd_symmetric(2.0 * w).unwrap();
            prop_assert!((general - xs).abs() < 1e-12);
            prop_assert!((general - sym).abs() < 1e-12);
            prop_assert!((0.0..=0.5 + 1e-12).contains(&general));
        }

        #[test]
        fn local_sigma_z_invariance(c in -1.0f64..=1.0 / 3.0, skew in -0.1f64..0.1) {
            // Break the symmetric form slightly but stay inside the X family.
            let (a, b, w) = ((1.0 + c) / 4.0, (1.0 - c) / 4.0, c / 2.0);
            let s = skew * a.min(b);
            let rdm = TwoSiteRdm::from_real([[a + s, 0.0, 0.0, 0.0], [0.0, b - s, w * 0.9, 0.0], [0.0, w * 0.9, b + s, 0.0], [0.0, 0.0, 0.0, a - s]]).unwrap();
            let z = pauli(3);
            let rotated = rdm.conjugated(&z, &z);
            let d0 = gmqd_general(&bloch_form(&rdm));
            let d1 = gmqd_general(&bloch_form(&rotated));
            prop_assert!((d0 - d1).abs() < 1e-9);
            let q0 = quantum_discord(&rdm).unwrap().discord;
            let q1 = quantum_discord(&rotated).unwrap().discord;
            prop_assert!((q0 - q1).abs() < 1e-9);
        }
    }
}
