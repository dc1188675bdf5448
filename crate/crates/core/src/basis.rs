//! Bit-coded spin-1/2 basis states of a periodic ring.
//!
//! Bit `k` of a state mask holds site `k`; a set bit is a reversed spin.
//! Magnetization sectors are labelled by the number of reversed spins.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_SITES: usize = 16;

/// Model definition of the periodic J1-J2 ring. `j1` is the energy unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub j1: f64,
    pub j2: f64,
}

impl ChainSpec {
    pub fn new(n_sites: usize, j2: f64) -> Result<Self> {
        if !(4..=MAX_SITES).contains(&n_sites) || !n_sites.is_multiple_of(2) {
            return Err(Error::arg(format!(
                "n_sites must be even and within [4, {MAX_SITES}], got {n_sites}"
            )));
        }
        if !j2.is_finite() {
            return Err(Error::arg(format!("j2 must be finite, got {j2}")));
        }
        Ok(Self {
            n_sites,
            j1: 1.0,
            j2,
        })
    }

    pub fn with_j2(&self, j2: f64) -> Self {
        Self { j2, ..*self }
    }

    /// Negative J2 is accepted but lies outside the frustrated regime.
    pub fn out_of_regime(&self) -> bool {
        self.j2 < 0.0
    }

    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Bonds of the literal ring sum `sum_i J1 s_i.s_{i+1} + J2 s_i.s_{i+2}`.
    ///
    /// Every `i` contributes one NN and one NNN bond, so for `n_sites = 4`
    /// each NNN pair appears twice.
    pub fn bonds(&self) -> Vec<Bond> {
        let n = self.n_sites;
        let mut bonds = Vec::with_capacity(2 * n);
        for i in 0..n {
            bonds.push(Bond::new(i, (i + 1) % n, self.j1));
        }
        for i in 0..n {
            bonds.push(Bond::new(i, (i + 2) % n, self.j2));
        }
        bonds
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub coupling: f64,
    pub mask: u32,
}

impl Bond {
    fn new(i: usize, j: usize, coupling: f64) -> Self {
        Self {
            i,
            j,
            coupling,
            mask: (1 << i) | (1 << j),
        }
    }
}

/// All basis states with a fixed number of reversed spins.
#[derive(Debug, Clone)]
pub struct SzSectorBasis {
    n_sites: usize,
    n_up: usize,
    states: Vec<u32>,
    // Dense inverse table over all 2^n masks; u32::MAX marks foreign masks.
    lookup: Vec<u32>,
}

impl SzSectorBasis {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> u32 {
        self.states[index]
    }

    /// Ordinal of `mask` in this sector.
    #[inline]
    pub fn index_of(&self, mask: u32) -> Option<usize> {
        match self.lookup.get(mask as usize) {
            Some(&k) if k != u32::MAX => Some(k as usize),
            _ => None,
        }
    }
}

pub fn enumerate_sector(n_sites: usize, n_up: usize) -> Result<SzSectorBasis> {
    if n_sites > MAX_SITES {
        return Err(Error::arg(format!(
            "n_sites must be at most {MAX_SITES}, got {n_sites}"
        )));
    }
    if n_up > n_sites {
        return Err(Error::arg(format!(
            "n_up = {n_up} exceeds n_sites = {n_sites}"
        )));
    }
    let total = 1u32 << n_sites;
    let states: Vec<u32> = (0..total)
        .filter(|m| m.count_ones() as usize == n_up)
        .collect();
    let mut lookup = vec![u32::MAX; total as usize];
    for (k, &m) in states.iter().enumerate() {
        lookup[m as usize] = k as u32;
    }
    Ok(SzSectorBasis {
        n_sites,
        n_up,
        states,
        lookup,
    })
}

/// One-site cyclic shift `|m1 m2 .. mN> -> |mN m1 .. m(N-1)>`, reading the
/// mask as a bit string with the highest site first: the pattern rotates
/// right by one, site `k` moves to `k - 1` and site 0 wraps to `n_sites - 1`.
#[inline]
pub fn translate(state: u32, n_sites: usize) -> u32 {
    let full = if n_sites == 32 {
        u32::MAX
    } else {
        (1u32 << n_sites) - 1
    };
    ((state >> 1) | (state << (n_sites - 1))) & full
}

/// Global spin flip; maps sector `n_up` onto `n_sites - n_up`.
#[inline]
pub fn flip_all(state: u32, n_sites: usize) -> u32 {
    !state & ((1u32 << n_sites) - 1)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_and_half_filled_sectors() {
        let b = enumerate_sector(4, 0).unwrap();
        assert_eq!(b.states(), &[0b0000]);

        let b = enumerate_sector(4, 2).unwrap();
        assert_eq!(
            b.states(),
            &[0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]
        );

        // C(10, 5) counted by enumeration of subsets.
        let subsets = (0u32..1 << 10).filter(|m| m.count_ones() == 5).count();
        assert_eq!(subsets, 252);
        assert_eq!(enumerate_sector(10, 5).unwrap().len(), 252);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(enumerate_sector(4, 5).is_err());
        assert!(enumerate_sector(17, 2).is_err());
        assert!(ChainSpec::new(5, 0.0).is_err());
        assert!(ChainSpec::new(2, 0.0).is_err());
        assert!(ChainSpec::new(18, 0.0).is_err());
        assert!(ChainSpec::new(4, f64::NAN).is_err());
    }

    #[test]
    fn translation_examples() {
        assert_eq!(translate(0b1000, 4), 0b0100);
        assert_eq!(translate(0b0001, 4), 0b1000);
        assert_eq!(translate(0b1010, 4), 0b0101);
    }

    #[test]
    fn sector_sizes_sum_to_hilbert_dim() {
        for n in [4, 6, 8, 10, 12] {
            let total: usize = (0..=n).map(|k| enumerate_sector(n, k).unwrap().len()).sum();
            assert_eq!(total, 1 << n);
            for k in 0..=n {
                assert_eq!(enumerate_sector(n, k).unwrap().len(), binomial(n, k));
            }
        }
    }

    #[test]
    fn translation_cycle_is_identity_exhaustively() {
        for n in 1..=10 {
            for m in 0u32..(1 << n) {
                let mut t = m;
                for _ in 0..n {
                    t = translate(t, n);
                    assert_eq!(t.count_ones(), m.count_ones());
                }
                assert_eq!(t, m, "n = {n}, m = {m:b}");
            }
        }
    }

    #[test]
    fn nnn_bonds_double_count_on_four_sites() {
        let spec = ChainSpec::new(4, 0.3).unwrap();
        let nnn: Vec<_> = spec.bonds().into_iter().filter(|b| b.coupling == 0.3).collect();
        assert_eq!(nnn.len(), 4);
        assert_eq!(nnn.iter().filter(|b| b.mask == 0b0101).count(), 2);
    }

    proptest! {
        #[test]
        fn lookup_is_a_bijection(n in 1usize..=12, k_frac in 0.0f64..=1.0) {
            let k = ((n as f64) * k_frac).round() as usize;
            let b = enumerate_sector(n, k).unwrap();
            for (idx, &m) in b.states().iter().enumerate() {
                prop_assert_eq!(b.index_of(m), Some(idx));
                prop_assert_eq!(m.count_ones() as usize, k);
            }
            prop_assert!(b.states().windows(2).all(|w| w[0] < w[1]));
            let foreign = (0u32..1 << n).filter(|m| m.count_ones() as usize != k).take(5);
            for m in foreign {
                prop_assert_eq!(b.index_of(m), None);
            }
        }

        #[test]
        fn flip_maps_sectors(n in 2usize..=12, m in 0u32..4096) {
            let m = m & ((1 << n) - 1);
            let f = flip_all(m, n);
            prop_assert_eq!(f.count_ones() as usize, n - m.count_ones() as usize);
            prop_assert_eq!(flip_all(f, n), m);
        }
    }
}
