//! Lowest distinct energy levels of the ring across all magnetization
//! sectors, with degenerate eigenvector sets.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{enumerate_sector, flip_all, ChainSpec, SzSectorBasis};
use crate::error::{Error, Result};
use crate::hamiltonian::{SectorOperator, DEFAULT_DENSE_CAP};
use crate::lanczos::{lanczos_lowest, LanczosOptions};
use crate::linalg::{dense_eigenvalues, dense_eigh, orthonormalize};
use crate::parallel::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Hard cap on dense sector matrices.
    pub dense_cap: usize,
    /// Sectors up to this dimension are diagonalized densely, larger ones
    /// with Lanczos.
    pub dense_switch: usize,
    pub lanczos_tol: f64,
    /// Relative width of a degenerate group: `|dE| <= tol * max(1, |E|)`.
    pub degeneracy_tol: f64,
    /// Eigenpairs requested per sector; `None` means `n_levels * (N + 1)`.
    pub per_sector_k: Option<usize>,
    pub max_krylov: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dense_cap: DEFAULT_DENSE_CAP,
            dense_switch: 300,
            lanczos_tol: 1e-10,
            degeneracy_tol: 1e-9,
            per_sector_k: None,
            max_krylov: 200,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumLevel {
    pub energy: f64,
    pub degeneracy: usize,
    /// Orthonormal full-space vectors, one per degenerate state.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Number of reversed spins of each eigenvector.
    pub sector_tags: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LowSpectrum {
    pub n_sites: usize,
    pub j2: f64,
    pub levels: Vec<SpectrumLevel>,
    pub degeneracy_tol: f64,
}

/// Energy and multiplicity of a level, without eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelEnergy {
    pub energy: f64,
    pub degeneracy: usize,
}

type SectorSet = Arc<Vec<Arc<SzSectorBasis>>>;

/// Sector bases depend only on the ring size, so they are shared.
pub fn sector_bases(n_sites: usize) -> Result<SectorSet> {
    static CACHE: OnceLock<Mutex<HashMap<usize, SectorSet>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&n_sites) {
        return Ok(hit.clone());
    }
    let bases = (0..=n_sites)
        .map(|k| enumerate_sector(n_sites, k).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let bases = Arc::new(bases);
    cache.lock().unwrap().insert(n_sites, bases.clone());
    Ok(bases)
}

struct SectorSolution {
    n_up: usize,
    values: Vec<f64>,
    vectors: Option<Vec<Vec<f64>>>,
    truncated: bool,
}

fn sector_seed(spec: &ChainSpec, n_up: usize, seed: u64) -> u64 {
    let mut x = seed
        ^ (spec.n_sites as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ spec.j2.to_bits().rotate_left(17)
        ^ (n_up as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn solve_sector(
    spec: &ChainSpec,
    basis: &Arc<SzSectorBasis>,
    k: usize,
    cfg: &SolverConfig,
    want_vectors: bool,
) -> Result<SectorSolution> {
    let n_up = basis.n_up();
    let dim = basis.len();
    let k = k.min(dim);
    let op = SectorOperator::new(*spec, basis.clone()).with_execution(cfg.execution);
    let window = |values: &[f64]| {
        let kth = values[k - 1];
        let cut = kth + cfg.degeneracy_tol * kth.abs().max(1.0);
        values.iter().take_while(|&&v| v <= cut).count()
    };

    if dim <= cfg.dense_switch.min(cfg.dense_cap) {
        let m: DMatrix<f64> = op.build_dense(cfg.dense_cap)?;
        if want_vectors {
            let (vals, vecs) = dense_eigh(&m)?;
            let count = window(vals.as_slice());
            let vectors = (0..count).map(|c| vecs.column(c).iter().copied().collect()).collect();
            Ok(SectorSolution {
                n_up,
                values: vals.as_slice()[..count].to_vec(),
                vectors: Some(vectors),
                truncated: count < dim,
            })
        } else {
            let vals = dense_eigenvalues(&m)?;
            let count = window(&vals);
            Ok(SectorSolution {
                n_up,
                values: vals[..count].to_vec(),
                vectors: None,
                truncated: count < dim,
            })
        }
    } else {
        let opts = LanczosOptions {
            tol: cfg.lanczos_tol,
            seed: sector_seed(spec, n_up, cfg.seed),
            max_basis: cfg.max_krylov,
            degeneracy_tol: cfg.degeneracy_tol,
            ..LanczosOptions::default()
        };
        let pairs = lanczos_lowest(|v, o| op.apply_into(v, o), dim, k, &opts)?;
        let truncated = pairs.len() < dim;
        let values = pairs.iter().map(|p| p.value).collect();
        let vectors = want_vectors.then(|| pairs.into_iter().map(|p| p.vector).collect());
        Ok(SectorSolution {
            n_up,
            values,
            vectors,
            truncated,
        })
    }
}

/// One eigenstate candidate: `(energy, n_up, slot within that sector)`.
type Entry = (f64, usize, usize);

/// Solves the sectors and groups the lowest `n_levels` complete levels.
/// Grows the per-sector window until every returned level is complete.
fn collect(
    spec: &ChainSpec,
    n_levels: usize,
    cfg: &SolverConfig,
    want_vectors: bool,
) -> Result<(Vec<SectorSolution>, Vec<Vec<Entry>>)> {
    if n_levels == 0 {
        return Err(Error::arg("n_levels must be at least 1"));
    }
    let n = spec.n_sites;
    let bases = sector_bases(n)?;
    let max_dim = bases.iter().map(|b| b.len()).max().unwrap_or(1);
    let mut k = cfg.per_sector_k.unwrap_or(n_levels * (n + 1)).max(1);

    loop {
        // Sectors above half filling mirror those below under a global flip.
        let half: Vec<usize> = (0..=n / 2).collect();
        let solved = cfg
            .execution
            .map(&half, |&n_up| solve_sector(spec, &bases[n_up], k, cfg, want_vectors));
        let solved = solved.into_iter().collect::<Result<Vec<_>>>()?;

        let mut entries = Vec::new();
        // Energies up to the cutoff are complete in every sector.
        let mut cutoff = f64::INFINITY;
        for sol in &solved {
            if sol.truncated {
                cutoff = cutoff.min(*sol.values.last().unwrap());
            }
            for (slot, &e) in sol.values.iter().enumerate() {
                entries.push((e, sol.n_up, slot));
                if sol.n_up * 2 != n {
                    entries.push((e, n - sol.n_up, slot));
                }
            }
        }
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let groups = group_levels(&entries, cfg.degeneracy_tol);
        let complete = groups.iter().filter(|g| g[0].0 <= cutoff).count();
        if complete >= n_levels || k >= max_dim {
            let groups: Vec<Vec<Entry>> = groups.into_iter().take(n_levels.min(complete.max(1))).collect();
            return Ok((solved, groups));
        }
        k = (2 * k).min(max_dim);
    }
}

fn group_levels(entries: &[Entry], tol: f64) -> Vec<Vec<Entry>> {
    let mut groups: Vec<Vec<Entry>> = Vec::new();
    for &e in entries {
        match groups.last_mut() {
            Some(g) if (e.0 - g[0].0).abs() <= tol * e.0.abs().max(1.0) => g.push(e),
            _ => groups.push(vec![e]),
        }
    }
    groups
}

fn mean_energy(group: &[Entry]) -> f64 {
    group.iter().map(|e| e.0).sum::<f64>() / group.len() as f64
}

/// Merges per-sector eigenpairs of all sectors `n_up = 0..=N` into the
/// lowest `n_levels` distinct levels.
pub fn assemble_low_spectrum(spec: &ChainSpec, n_levels: usize, cfg: &SolverConfig) -> Result<LowSpectrum> {
    let (solutions, groups) = collect(spec, n_levels, cfg, true)?;
    let n = spec.n_sites;
    let bases = sector_bases(n)?;
    let by_sector: HashMap<usize, &SectorSolution> =
        solutions.iter().map(|s| (s.n_up, s)).collect();

    let mut levels = Vec::with_capacity(groups.len());
    for group in &groups {
        let mut vectors = Vec::with_capacity(group.len());
        let mut tags = Vec::with_capacity(group.len());
        for &(_, n_up, slot) in group {
            let mirrored = n_up * 2 > n;
            let source_sector = if mirrored { n - n_up } else { n_up };
            let sol = by_sector[&source_sector];
            let local = &sol.vectors.as_ref().expect("vectors requested")[slot];
            let mut full = vec![0.0; spec.hilbert_dim()];
            for (idx, &m) in bases[source_sector].states().iter().enumerate() {
                let target = if mirrored { flip_all(m, n) } else { m };
                full[target as usize] = local[idx];
            }
            vectors.push(full);
            tags.push(n_up);
        }
        if !orthonormalize(&mut vectors) {
            return Err(Error::numerical(
                "degenerate eigenvectors are linearly dependent",
                vec![],
            ));
        }
        levels.push(SpectrumLevel {
            energy: mean_energy(group),
            degeneracy: group.len(),
            eigenvectors: vectors,
            sector_tags: tags,
        });
    }
    Ok(LowSpectrum {
        n_sites: n,
        j2: spec.j2,
        levels,
        degeneracy_tol: cfg.degeneracy_tol,
    })
}

/// Same grouping as [`assemble_low_spectrum`], eigenvalues only.
pub fn low_energies(spec: &ChainSpec, n_levels: usize, cfg: &SolverConfig) -> Result<Vec<LevelEnergy>> {
    let (_, groups) = collect(spec, n_levels, cfg, false)?;
    Ok(groups
        .iter()
        .map(|g| LevelEnergy {
            energy: mean_energy(g),
            degeneracy: g.len(),
        })
        .collect())
}

impl SpectrumLevel {
    /// Largest `||H v - E v|| / max(1, |E|)` over the degenerate set.
    pub fn max_residual(&self, spec: &ChainSpec) -> Result<f64> {
        let mut worst = 0.0f64;
        for v in &self.eigenvectors {
            let hv = crate::hamiltonian::apply_full(spec, v)?;
            let r: f64 = hv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - self.energy * b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r / self.energy.abs().max(1.0));
        }
        Ok(worst)
    }
}

impl LowSpectrum {
    pub fn ground(&self) -> &SpectrumLevel {
        &self.levels[0]
    }

    pub fn energies(&self) -> Vec<LevelEnergy> {
        self.levels
            .iter()
            .map(|l| LevelEnergy {
                energy: l.energy,
                degeneracy: l.degeneracy,
            })
            .collect()
    }
}
