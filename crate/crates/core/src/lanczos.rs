//! Lanczos iteration for the lowest eigenpairs of a symmetric operator.
//!
//! Every new Krylov vector is reorthogonalized (twice) against the whole
//! stored basis and against all previously locked eigenvectors. A single
//! Krylov space sees each distinct eigenvalue once, so degenerate copies are
//! picked up by deflated restarts: after locking, a fresh random start
//! vector orthogonal to the locked set is expanded again, until the lowest
//! value of the complement lies above the requested window.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dense_eigh, dot, norm, project_out, scale};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Residual bound `||A v - lambda v|| <= tol * max(1, |lambda|)`.
    pub tol: f64,
    pub seed: u64,
    /// Largest Krylov basis before an explicit restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Relative width used to complete a degenerate multiplet at the top of
    /// the window.
    pub degeneracy_tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            seed: 0x5eed,
            max_basis: 200,
            max_restarts: 200,
            degeneracy_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// The `k` lowest eigenpairs of the operator `apply` (`out = A v`), plus any
/// further copies degenerate with the `k`-th value. Ascending.
pub fn lanczos_lowest<F>(apply: F, dim: usize, k: usize, opts: &LanczosOptions) -> Result<Vec<EigenPair>>
where
    F: Fn(&[f64], &mut [f64]),
{
    if k == 0 || k > dim {
        return Err(Error::arg(format!("need 1 <= k <= dim, got k = {k}, dim = {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<EigenPair> = Vec::new();
    let mut budget = opts.max_restarts;

    for _round in 0..(4 * k + 64) {
        if locked.len() == dim {
            break;
        }
        let threshold = (locked.len() >= k).then(|| kth_value(&locked, k));
        let want = k.saturating_sub(locked.len()).max(1);

        let mut start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            project_out(&mut start, locked.iter().map(|p| p.vector.as_slice()));
        }
        let nrm = norm(&start);
        if nrm < 1e-8 {
            break;
        }
        scale(1.0 / nrm, &mut start);

        let found = krylov_run(&apply, dim, &locked, start, want, opts, &mut budget)?;
        let lowest_new = found.first().map(|p| p.value);
        locked.extend(found);
        locked.sort_by(|a, b| a.value.total_cmp(&b.value));

        match (threshold, lowest_new) {
            (Some(kth), Some(low)) if low > kth + slack(kth, opts) => break,
            (_, None) => break,
            _ => {}
        }
    }

    if locked.len() < k {
        return Err(Error::numerical(
            format!("only {} of {k} eigenpairs converged", locked.len()),
            locked.iter().map(|p| p.residual).collect(),
        ));
    }
    let kth = kth_value(&locked, k);
    let cut = kth + slack(kth, opts);
    locked.retain(|p| p.value <= cut);
    Ok(locked)
}

fn kth_value(sorted: &[EigenPair], k: usize) -> f64 {
    sorted[k - 1].value
}

fn slack(value: f64, opts: &LanczosOptions) -> f64 {
    opts.degeneracy_tol * value.abs().max(1.0)
}

/// One Krylov expansion in the complement of `locked`. Returns the converged
/// bottom Ritz pairs (contiguous from the lowest), restarting explicitly
/// when the basis fills up.
fn krylov_run<F>(
    apply: &F,
    dim: usize,
    locked: &[EigenPair],
    mut start: Vec<f64>,
    want: usize,
    opts: &LanczosOptions,
    budget: &mut usize,
) -> Result<Vec<EigenPair>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let room = dim - locked.len();
    let max_basis = opts.max_basis.max(want + 20).min(room);

    loop {
        let mut basis: Vec<Vec<f64>> = vec![std::mem::take(&mut start)];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![0.0; dim];
        let mut anorm = 0.0f64;

        for j in 0..max_basis {
            apply(&basis[j], &mut w);
            let alpha = dot(&basis[j], &w);
            axpy(-alpha, &basis[j], &mut w);
            if j > 0 {
                axpy(-betas[j - 1], &basis[j - 1], &mut w);
            }
            for _ in 0..2 {
                project_out(&mut w, locked.iter().map(|p| p.vector.as_slice()));
                project_out(&mut w, basis.iter().map(|u| u.as_slice()));
            }
            alphas.push(alpha);
            let beta = norm(&w);
            anorm = anorm.max(alpha.abs() + beta + betas.last().copied().unwrap_or(0.0));
            let exhausted = beta <= 1e-12 * anorm.max(1.0) || j + 1 == room;
            let full = j + 1 == max_basis;

            let m = j + 1;
            let check = exhausted || full || (m >= want && (m % 4 == 0 || m == want));
            if check {
                let (theta, s) = tridiagonal_eig(&alphas, &betas)?;
                let take = want.min(m);
                let estimates: Vec<f64> = (0..take).map(|i| (beta * s[(m - 1, i)]).abs()).collect();
                let converged = if exhausted {
                    take
                } else {
                    estimates
                        .iter()
                        .zip(&theta)
                        .take_while(|(r, t)| **r <= opts.tol * t.abs().max(1.0))
                        .count()
                };
                if converged == take || (full && converged > 0) {
                    let pairs = ritz_pairs(apply, &basis, &s, converged, dim);
                    let ok: Vec<EigenPair> = pairs
                        .into_iter()
                        .take_while(|p| p.residual <= opts.tol * p.value.abs().max(1.0))
                        .collect();
                    if !ok.is_empty() {
                        return Ok(ok);
                    }
                }
                if full {
                    // Explicit restart from the wanted Ritz directions.
                    if *budget == 0 {
                        return Err(Error::numerical(
                            "Lanczos restart budget exhausted",
                            estimates,
                        ));
                    }
                    *budget -= 1;
                    let mut next = vec![0.0; dim];
                    for i in 0..take {
                        for (col, u) in basis.iter().enumerate() {
                            axpy(s[(col, i)], u, &mut next);
                        }
                    }
                    for _ in 0..2 {
                        project_out(&mut next, locked.iter().map(|p| p.vector.as_slice()));
                    }
                    let nrm = norm(&next);
                    if nrm < 1e-12 {
                        return Err(Error::numerical("Lanczos restart vector vanished", estimates));
                    }
                    scale(1.0 / nrm, &mut next);
                    start = next;
                    break;
                }
                if exhausted {
                    return Err(Error::numerical(
                        "invariant subspace reached without converged Ritz pairs",
                        estimates,
                    ));
                }
            }
            let mut q = w.clone();
            scale(1.0 / beta, &mut q);
            betas.push(beta);
            basis.push(q);
        }
    }
}

fn tridiagonal_eig(alphas: &[f64], betas: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let (theta, s) = dense_eigh(&t)?;
    Ok((theta.iter().copied().collect(), s))
}

fn ritz_pairs<F>(
    apply: &F,
    basis: &[Vec<f64>],
    s: &DMatrix<f64>,
    count: usize,
    dim: usize,
) -> Vec<EigenPair>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut out = Vec::with_capacity(count);
    let mut hv = vec![0.0; dim];
    for i in 0..count {
        let mut y = vec![0.0; dim];
        for (col, u) in basis.iter().enumerate() {
            axpy(s[(col, i)], u, &mut y);
        }
        let nrm = norm(&y);
        scale(1.0 / nrm, &mut y);
        apply(&y, &mut hv);
        let value = dot(&y, &hv);
        axpy(-value, &y, &mut hv);
        out.push(EigenPair {
            value,
            residual: norm(&hv),
            vector: y,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_sector, ChainSpec};
    use crate::hamiltonian::SectorOperator;
    use crate::linalg::dense_eigh;
    use std::sync::Arc;

    fn sector(n: usize, n_up: usize, j2: f64) -> SectorOperator {
        SectorOperator::new(
            ChainSpec::new(n, j2).unwrap(),
            Arc::new(enumerate_sector(n, n_up).unwrap()),
        )
    }

    #[test]
    fn four_site_ground_state() {
        let h = sector(4, 2, 0.0);
        let pairs = lanczos_lowest(|v, o| h.apply_into(v, o), h.dim(), 1, &LanczosOptions::default()).unwrap();
        assert!((pairs[0].value + 2.0).abs() < 1e-10);
    }

    #[test]
    fn one_dimensional_sector() {
        let h = sector(6, 0, 0.4);
        let pairs = lanczos_lowest(|v, o| h.apply_into(v, o), 1, 1, &LanczosOptions::default()).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].value - 1.5 * 1.4).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_with_multiplicities() {
        for (n, j2) in [(10, 0.3), (10, 0.5), (8, 0.25)] {
            for n_up in [n / 2 - 1, n / 2] {
                let h = sector(n, n_up, j2);
                let (dense, _) = dense_eigh(&h.build_dense(4096).unwrap()).unwrap();
                let k = 4;
                let pairs = lanczos_lowest(|v, o| h.apply_into(v, o), h.dim(), k, &LanczosOptions::default()).unwrap();
                assert!(pairs.len() >= k);
                for (p, d) in pairs.iter().zip(dense.iter()) {
                    assert!((p.value - d).abs() < 1e-9, "n={n} j2={j2} n_up={n_up}: {} vs {d}", p.value);
                    assert!(p.residual <= 1e-10 * p.value.abs().max(1.0));
                }
                for a in 0..pairs.len() {
                    for b in 0..pairs.len() {
                        let g = dot(&pairs[a].vector, &pairs[b].vector);
                        let want = if a == b { 1.0 } else { 0.0 };
                        assert!((g - want).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn finds_both_dimer_states_at_the_majumdar_ghosh_point() {
        // The two dimer coverings are degenerate ground states inside Sz = 0.
        let h = sector(10, 5, 0.5);
        let pairs = lanczos_lowest(|v, o| h.apply_into(v, o), h.dim(), 1, &LanczosOptions::default()).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].value + 3.75).abs() < 1e-10);
        assert!((pairs[1].value + 3.75).abs() < 1e-10);
    }

    #[test]
    fn argument_errors() {
        let h = sector(4, 2, 0.0);
        assert!(lanczos_lowest(|v, o| h.apply_into(v, o), 6, 0, &LanczosOptions::default()).is_err());
        assert!(lanczos_lowest(|v, o| h.apply_into(v, o), 6, 7, &LanczosOptions::default()).is_err());
    }
}
