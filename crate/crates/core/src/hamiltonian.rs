//! The J1-J2 Hamiltonian `H = sum_i J1 s_i.s_{i+1} + J2 s_i.s_{i+2}` restricted
//! to one magnetization sector, with `s = sigma / 2`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::basis::{Bond, ChainSpec, SzSectorBasis};
use crate::error::{Error, Result};
use crate::parallel::Execution;

pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Sparse row storage of one sector block. Built once per coupling value;
/// applying it never leaves the sector.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    spec: ChainSpec,
    basis: Arc<SzSectorBasis>,
    diag: Vec<f64>,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    amps: Vec<f64>,
    exec: Execution,
}

impl SectorOperator {
    pub fn new(spec: ChainSpec, basis: Arc<SzSectorBasis>) -> Self {
        let bonds = spec.bonds();
        let dim = basis.len();
        let mut diag = Vec::with_capacity(dim);
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut amps = Vec::new();
        row_start.push(0);
        for &m in basis.states() {
            let mut d = 0.0;
            for b in &bonds {
                if aligned(m, b) {
                    d += 0.25 * b.coupling;
                } else {
                    d -= 0.25 * b.coupling;
                    if b.coupling != 0.0 {
                        let c = basis
                            .index_of(m ^ b.mask)
                            .expect("bond swap stays inside the sector");
                        cols.push(c as u32);
                        amps.push(0.5 * b.coupling);
                    }
                }
            }
            diag.push(d);
            row_start.push(cols.len());
        }
        Self {
            spec,
            basis,
            diag,
            row_start,
            cols,
            amps,
            exec: Execution::Sequential,
        }
    }

    /// Row application policy for large sectors.
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn basis(&self) -> &SzSectorBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply_h(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::arg(format!(
                "vector length {} does not match sector dimension {}",
                v.len(),
                self.dim()
            )));
        }
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    /// Unchecked `out = H v`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let row = |r: usize| {
            let mut acc = self.diag[r] * v[r];
            for k in self.row_start[r]..self.row_start[r + 1] {
                acc += self.amps[k] * v[self.cols[k] as usize];
            }
            acc
        };
        if self.exec.is_parallel() && self.dim() >= 4096 {
            self.exec.fill(out, row);
        } else {
            for (r, y) in out.iter_mut().enumerate() {
                *y = row(r);
            }
        }
    }

    pub fn build_dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        if dim > cap {
            return Err(Error::Capacity { dim, cap });
        }
        let mut m = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            m[(r, r)] = self.diag[r];
            for k in self.row_start[r]..self.row_start[r + 1] {
                m[(r, self.cols[k] as usize)] += self.amps[k];
            }
        }
        Ok(m)
    }
}

#[inline]
fn aligned(m: u32, b: &Bond) -> bool {
    ((m >> b.i) ^ (m >> b.j)) & 1 == 0
}

/// `H v` on the full `2^N` space, used where operators mix sectors.
pub fn apply_full(spec: &ChainSpec, v: &[f64]) -> Result<Vec<f64>> {
    let dim = spec.hilbert_dim();
    if v.len() != dim {
        return Err(Error::arg(format!(
            "vector length {} does not match Hilbert dimension {dim}",
            v.len()
        )));
    }
    let bonds = spec.bonds();
    let mut out = vec![0.0; dim];
    for (m, y) in out.iter_mut().enumerate() {
        let m = m as u32;
        let mut acc = 0.0;
        for b in &bonds {
            if aligned(m, b) {
                acc += 0.25 * b.coupling * v[m as usize];
            } else {
                acc -= 0.25 * b.coupling * v[m as usize];
                acc += 0.5 * b.coupling * v[(m ^ b.mask) as usize];
            }
        }
        *y = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_sector, translate};
    use crate::linalg::dense_eigh;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn op(n: usize, n_up: usize, j2: f64) -> SectorOperator {
        let spec = ChainSpec::new(n, j2).unwrap();
        SectorOperator::new(spec, Arc::new(enumerate_sector(n, n_up).unwrap()))
    }

    fn unit(dim: usize, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        v
    }

    #[test]
    fn neel_column_on_four_sites() {
        let h = op(4, 2, 0.0);
        let k = h.basis().index_of(0b0101).unwrap();
        let y = h.apply_h(&unit(6, k)).unwrap();
        assert!((y[k] + 1.0).abs() < 1e-15);
        // Swapping any NN bond of 0101 gives one of 0011, 0110, 1001, 1100.
        for m in [0b0011u32, 0b0110, 0b1001, 0b1100] {
            let c = h.basis().index_of(m).unwrap();
            assert!((y[c] - 0.5).abs() < 1e-15, "mask {m:04b}: {}", y[c]);
        }
        let other = h.basis().index_of(0b1010).unwrap();
        assert_eq!(y[other], 0.0);
    }

    #[test]
    fn aligned_state_energy_includes_j2() {
        for j2 in [0.0, 0.3, 1.0, -0.4] {
            let h = op(4, 0, j2);
            let y = h.apply_h(&[1.0]).unwrap();
            assert!((y[0] - (1.0 + j2)).abs() < 1e-15);
            let d = h.build_dense(DEFAULT_DENSE_CAP).unwrap();
            assert_eq!(d.shape(), (1, 1));
            assert!((d[(0, 0)] - (1.0 + j2)).abs() < 1e-15);
        }
    }

    #[test]
    fn four_site_half_filled_block() {
        let h = op(4, 2, 0.0);
        let d = h.build_dense(DEFAULT_DENSE_CAP).unwrap();
        assert_eq!((&d - d.transpose()).amax(), 0.0);
        let (vals, _) = dense_eigh(&d).unwrap();
        assert!((vals[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn six_site_ground_state_is_an_eigenvector() {
        let h = op(6, 3, 0.0);
        let d = h.build_dense(DEFAULT_DENSE_CAP).unwrap();
        let (vals, vecs) = dense_eigh(&d).unwrap();
        let e0 = -0.5 * 13f64.sqrt() - 1.0;
        assert!((vals[0] - e0).abs() < 1e-12);
        assert!((e0 + 2.8027756).abs() < 1e-7);
        let v: Vec<f64> = vecs.column(0).iter().copied().collect();
        let hv = h.apply_h(&v).unwrap();
        for (a, b) in hv.iter().zip(&v) {
            assert!((a - e0 * b).abs() < 1e-10);
        }
    }

    #[test]
    fn dense_cap_is_enforced() {
        let h = op(10, 5, 0.2);
        assert!(matches!(h.build_dense(100), Err(Error::Capacity { dim: 252, cap: 100 })));
        assert!(h.apply_h(&[0.0; 3]).is_err());
    }

    #[test]
    fn matrix_free_matches_dense_and_full_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, j2) in [(6, 0.35), (8, 0.5), (10, 0.9)] {
            let spec = ChainSpec::new(n, j2).unwrap();
            let mut full = vec![0.0; 1 << n];
            let mut full_out = vec![0.0; 1 << n];
            for n_up in 0..=n {
                let h = op(n, n_up, j2);
                let d = h.build_dense(DEFAULT_DENSE_CAP).unwrap();
                assert!((&d - d.transpose()).amax() < 1e-12);
                let v: Vec<f64> = (0..h.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let y = h.apply_h(&v).unwrap();
                let yd = &d * nalgebra::DVector::from_column_slice(&v);
                for (a, b) in y.iter().zip(yd.iter()) {
                    assert!((a - b).abs() < 1e-12);
                }
                for (k, &m) in h.basis().states().iter().enumerate() {
                    full[m as usize] = v[k];
                    full_out[m as usize] = y[k];
                }
            }
            let yf = apply_full(&spec, &full).unwrap();
            for (a, b) in yf.iter().zip(&full_out) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn commutes_with_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, n_up, j2) in [(6, 3, 0.2), (8, 3, 0.7), (10, 4, 0.45)] {
            let h = op(n, n_up, j2);
            let v: Vec<f64> = (0..h.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let shift = |x: &[f64]| {
                let mut t = vec![0.0; x.len()];
                for (k, &m) in h.basis().states().iter().enumerate() {
                    t[h.basis().index_of(translate(m, n)).unwrap()] = x[k];
                }
                t
            };
            let a = h.apply_h(&shift(&v)).unwrap();
            let b = shift(&h.apply_h(&v).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spin_flip_partner_sectors_share_spectra() {
        for (n, j2) in [(6, 0.3), (8, 0.62)] {
            for n_up in 0..n / 2 {
                let a = dense_eigh(&op(n, n_up, j2).build_dense(4096).unwrap()).unwrap().0;
                let b = dense_eigh(&op(n, n - n_up, j2).build_dense(4096).unwrap()).unwrap().0;
                for (x, y) in a.iter().zip(b.iter()) {
                    assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn energy_expectation_is_variationally_bounded(
            seed in any::<u64>(), j2 in 0.0f64..1.2, n_up in 0usize..=8
        ) {
            let h = op(8, n_up, j2);
            let (vals, _) = dense_eigh(&h.build_dense(4096).unwrap()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..h.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm2: f64 = v.iter().map(|x| x * x).sum();
            let hv = h.apply_h(&v).unwrap();
            let e: f64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>() / norm2;
            prop_assert!(e >= vals[0] - 1e-12);
        }
    }
}
