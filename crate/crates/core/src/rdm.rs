//! Two-site reduced density matrices of (mixtures of) ring eigenstates.
//!
//! The two-qubit basis is `{|00>, |01>, |10>, |11>}` with the first label on
//! site `i` (subsystem A, the measured side) and the second on site `j`.
//! Label `0` is an unset bit, the `+1` eigenstate of `sigma_z`.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3};
use num_complex::Complex64;

use crate::eigensolver::SpectrumLevel;
use crate::error::{Error, Result};

pub const DEFAULT_X_TOL: f64 = 1e-8;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

/// `sigma_0 = I, sigma_1 = x, sigma_2 = y, sigma_3 = z`.
pub fn pauli(k: usize) -> Matrix2<Complex64> {
    match k {
        0 => Matrix2::new(C1, C0, C0, C1),
        1 => Matrix2::new(C0, C1, C1, C0),
        2 => Matrix2::new(C0, -CI, CI, C0),
        3 => Matrix2::new(C1, C0, C0, -C1),
        _ => panic!("pauli index {k} out of range"),
    }
}

pub fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    for r in 0..4 {
        for c in 0..4 {
            m[(r, c)] = a[(r / 2, c / 2)] * b[(r % 2, c % 2)];
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    NearestNeighbor,
    NextNearestNeighbor,
    /// Ring distance of any other pair.
    Distance(usize),
}

impl PairKind {
    pub fn of(i: usize, j: usize, n_sites: usize) -> Self {
        let d = i.abs_diff(j);
        match d.min(n_sites - d) {
            1 => PairKind::NearestNeighbor,
            2 => PairKind::NextNearestNeighbor,
            other => PairKind::Distance(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteRdm {
    pub matrix: Matrix4<Complex64>,
    pub sites: (usize, usize),
    pub kind: Option<PairKind>,
}

impl TwoSiteRdm {
    /// Validates a two-qubit density matrix: Hermitian, unit trace, positive.
    pub fn new(matrix: Matrix4<Complex64>) -> Result<Self> {
        let herm = (matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-10 {
            return Err(Error::arg(format!("density matrix is not Hermitian (deviation {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::arg(format!("density matrix has trace {tr}")));
        }
        let rdm = Self {
            matrix,
            sites: (0, 1),
            kind: None,
        };
        let low = rdm.eigenvalues()[3];
        if low < -1e-10 {
            return Err(Error::arg(format!("density matrix has negative eigenvalue {low:e}")));
        }
        Ok(rdm)
    }

    pub fn from_real(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|r, c| Complex64::new(rows[r][c], 0.0)))
    }

    /// `|psi><psi|` for a normalized two-qubit amplitude vector.
    pub fn from_pure(psi: [Complex64; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|r, c| psi[r] * psi[c].conj()))
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Matrix4::identity() * Complex64::new(0.25, 0.0),
            sites: (0, 1),
            kind: None,
        }
    }

    /// The singlet `(|10> - |01>) / sqrt 2`.
    pub fn singlet() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_pure([C0, Complex64::new(-s, 0.0), Complex64::new(s, 0.0), C0]).unwrap()
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = self.matrix.symmetric_eigen();
        let mut v = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2], eig.eigenvalues[3]];
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// State of site `i` after tracing out site `j`.
    pub fn reduced_a(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|a, a2| self.matrix[(2 * a, 2 * a2)] + self.matrix[(2 * a + 1, 2 * a2 + 1)])
    }

    pub fn reduced_b(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|b, b2| self.matrix[(b, b2)] + self.matrix[(2 + b, 2 + b2)])
    }

    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    /// `Tr[rho (sigma_a (x) sigma_b)]`.
    pub fn expectation(&self, a: usize, b: usize) -> f64 {
        (self.matrix * kron(&pauli(a), &pauli(b))).trace().re
    }

    /// Conjugation by a local product unitary `U_A (x) U_B`.
    pub fn conjugated(&self, ua: &Matrix2<Complex64>, ub: &Matrix2<Complex64>) -> Self {
        let u = kron(ua, ub);
        Self {
            matrix: u * self.matrix * u.adjoint(),
            ..self.clone()
        }
    }
}

/// Equal-weight mixture `(1/G) sum_v Tr_rest |psi_v><psi_v|` over the
/// degenerate states of `level`, reduced to sites `(i, j)`.
pub fn two_site_rdm(level: &SpectrumLevel, sites: (usize, usize)) -> Result<TwoSiteRdm> {
    let (i, j) = sites;
    let first = level
        .eigenvectors
        .first()
        .ok_or_else(|| Error::arg("level carries no eigenvectors"))?;
    let dim = first.len();
    if !dim.is_power_of_two() {
        return Err(Error::arg(format!("vector length {dim} is not a power of two")));
    }
    let n = dim.trailing_zeros() as usize;
    if i == j || i >= n || j >= n {
        return Err(Error::arg(format!("invalid site pair ({i}, {j}) for {n} sites")));
    }
    let bi = 1usize << i;
    let bj = 1usize << j;
    let offsets = [0, bj, bi, bi | bj];
    let mut acc = [[0.0f64; 4]; 4];
    for psi in &level.eigenvectors {
        for m in 0..dim {
            if m & (bi | bj) != 0 {
                continue;
            }
            let amp = [psi[m], psi[m | offsets[1]], psi[m | offsets[2]], psi[m | offsets[3]]];
            for r in 0..4 {
                if amp[r] == 0.0 {
                    continue;
                }
                for c in 0..4 {
                    acc[r][c] += amp[r] * amp[c];
                }
            }
        }
    }
    let g = level.eigenvectors.len() as f64;
    Ok(TwoSiteRdm {
        matrix: Matrix4::from_fn(|r, c| Complex64::new(acc[r][c] / g, 0.0)),
        sites,
        kind: Some(PairKind::of(i, j, n)),
    })
}

/// Parameters of the symmetric form `[[a,0,0,0],[0,b,w,0],[0,w,b,0],[0,0,0,a]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XParams {
    pub a: f64,
    pub b: f64,
    pub w: f64,
}

pub fn extract_x_params(rdm: &TwoSiteRdm, tol: f64) -> Result<XParams> {
    let m = &rdm.matrix;
    let a = 0.5 * (m[(0, 0)].re + m[(3, 3)].re);
    let b = 0.5 * (m[(1, 1)].re + m[(2, 2)].re);
    let w = 0.5 * (m[(1, 2)].re + m[(2, 1)].re);
    let mut worst = 0.0f64;
    for r in 0..4 {
        for c in 0..4 {
            let expected = match (r, c) {
                (0, 0) | (3, 3) => a,
                (1, 1) | (2, 2) => b,
                (1, 2) | (2, 1) => w,
                _ => 0.0,
            };
            worst = worst.max((m[(r, c)] - Complex64::new(expected, 0.0)).norm());
        }
    }
    if worst > tol {
        return Err(Error::Structure(format!(
            "reduced state deviates from the symmetric X form by {worst:e} (tol {tol:e})"
        )));
    }
    if (2.0 * a + 2.0 * b - 1.0).abs() > tol {
        return Err(Error::Structure(format!("2a + 2b = {} differs from 1", 2.0 * (a + b))));
    }
    Ok(XParams { a, b, w })
}

/// General X state `[[a,0,0,g],[0,b,w,0],[0,w*,c,0],[g*,0,0,d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub g: Complex64,
    pub w: Complex64,
}

impl XState {
    pub fn symmetric(p: XParams) -> Self {
        Self {
            a: p.a,
            b: p.b,
            c: p.b,
            d: p.a,
            g: C0,
            w: Complex64::new(p.w, 0.0),
        }
    }
}

/// Reads the X-pattern entries, failing if anything outside it exceeds `tol`.
pub fn x_state(rdm: &TwoSiteRdm, tol: f64) -> Result<XState> {
    let m = &rdm.matrix;
    for (r, c) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
        let off = m[(r, c)].norm().max(m[(c, r)].norm());
        if off > tol {
            return Err(Error::Structure(format!("entry ({r}, {c}) = {off:e} breaks the X pattern")));
        }
    }
    Ok(XState {
        a: m[(0, 0)].re,
        b: m[(1, 1)].re,
        c: m[(2, 2)].re,
        d: m[(3, 3)].re,
        g: m[(0, 3)],
        w: m[(1, 2)],
    })
}

/// Spin-spin correlators `<sigma_i^a sigma_j^a>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorSet {
    pub cxx: f64,
    pub cyy: f64,
    pub czz: f64,
    /// `<sigma_i . sigma_j> / 3`; equals each component for SU(2)-symmetric states.
    pub component: f64,
}

impl CorrelatorSet {
    /// `<sigma_i . sigma_j>`.
    pub fn scalar(&self) -> f64 {
        3.0 * self.component
    }

    pub fn max_anisotropy(&self) -> f64 {
        (self.cxx - self.cyy)
            .abs()
            .max((self.cxx - self.czz).abs())
            .max((self.cyy - self.czz).abs())
    }
}

pub fn correlators(rdm: &TwoSiteRdm) -> CorrelatorSet {
    let cxx = rdm.expectation(1, 1);
    let cyy = rdm.expectation(2, 2);
    let czz = rdm.expectation(3, 3);
    CorrelatorSet {
        cxx,
        cyy,
        czz,
        component: (cxx + cyy + czz) / 3.0,
    }
}

/// `rho = I(x)I/4 + sum x_k s_k(x)I + sum y_k I(x)s_k + sum R_kl s_k(x)s_l`,
/// so `x_k = Tr[rho s_k(x)I]/4` and `R_kl = Tr[rho s_k(x)s_l]/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochForm {
    pub x: Vector3<f64>,
    pub y: Vector3<f64>,
    pub r: Matrix3<f64>,
}

impl BlochForm {
    pub fn reconstruct(&self) -> Matrix4<Complex64> {
        let mut m = kron(&pauli(0), &pauli(0)) * Complex64::new(0.25, 0.0);
        for k in 0..3 {
            m += kron(&pauli(k + 1), &pauli(0)) * Complex64::new(self.x[k], 0.0);
            m += kron(&pauli(0), &pauli(k + 1)) * Complex64::new(self.y[k], 0.0);
            for l in 0..3 {
                m += kron(&pauli(k + 1), &pauli(l + 1)) * Complex64::new(self.r[(k, l)], 0.0);
            }
        }
        m
    }
}

pub fn bloch_form(rdm: &TwoSiteRdm) -> BlochForm {
    BlochForm {
        x: Vector3::from_fn(|k, _| rdm.expectation(k + 1, 0) / 4.0),
        y: Vector3::from_fn(|k, _| rdm.expectation(0, k + 1) / 4.0),
        r: Matrix3::from_fn(|k, l| rdm.expectation(k + 1, l + 1) / 4.0),
    }
}
