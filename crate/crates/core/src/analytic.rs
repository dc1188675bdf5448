//! Closed-form low-lying spectra of the 4- and 6-site rings.
//!
//! Each ring is described by a few energy branches `E(J2)` with known
//! multiplicity. The ground state and first excited level at a given `J2`
//! are the lowest two groups of branches after sorting; coinciding branches
//! form one level, matching the equal-weight mixture. Correlators follow
//! from the energy slopes:
//! `c_nn = (4/3)(e - J2 e')`, `c_nnn = (4/3) e'` with `e = E/N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::gmqd_symmetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Gs,
    Es1,
}

impl Level {
    pub fn index(self) -> usize {
        match self {
            Level::Gs => 0,
            Level::Es1 => 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Branch {
    degeneracy: usize,
    /// Energy and its `J2` derivative.
    eval: fn(f64) -> (f64, f64),
}

/// `-(1/2) sqrt(9 J^2 + beta J + gamma) - 1`.
fn radical(j: f64, beta: f64, gamma: f64) -> (f64, f64) {
    let q = (9.0 * j * j + beta * j + gamma).sqrt();
    (-0.5 * q - 1.0, -(18.0 * j + beta) / (4.0 * q))
}

const FOUR_SITE: [Branch; 4] = [
    Branch {
        degeneracy: 1,
        eval: |j| (-2.0 + j, 1.0),
    },
    Branch {
        degeneracy: 1,
        eval: |j| (-3.0 * j, -3.0),
    },
    Branch {
        degeneracy: 3,
        eval: |j| (-1.0 + j, 1.0),
    },
    // Meets the -2 + J2 singlet at the upper end of the window.
    Branch {
        degeneracy: 6,
        eval: |j| (-j, -1.0),
    },
];

const SIX_SITE: [Branch; 5] = [
    Branch {
        degeneracy: 1,
        eval: |j| radical(j, -18.0, 13.0),
    },
    Branch {
        degeneracy: 1,
        eval: |j| (-1.5 * (1.0 + j), -1.5),
    },
    Branch {
        degeneracy: 3,
        eval: |j| radical(j, -10.0, 5.0),
    },
    // These two meet the triplet above at the upper end of the window.
    Branch {
        degeneracy: 2,
        eval: |j| (-0.5 - 1.5 * j, -1.5),
    },
    Branch {
        degeneracy: 6,
        eval: |j| {
            let q = (9.0 * j * j - 10.0 * j + 17.0).sqrt();
            (-0.25 - 0.75 * j - 0.25 * q, -0.75 - (18.0 * j - 10.0) / (8.0 * q))
        },
    },
];

/// Valid window of the branch tables; outside it other levels intrude.
pub const J2_RANGE: (f64, f64) = (0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticLevel {
    pub energy: f64,
    pub degeneracy: usize,
    /// Per-component correlators of the (mixed) level.
    pub c_nn: f64,
    pub c_nnn: f64,
    pub dg_nn: f64,
}

pub fn analytic_level(n: usize, level: Level, j2: f64) -> Result<AnalyticLevel> {
    let branches: &[Branch] = match n {
        4 => &FOUR_SITE,
        6 => &SIX_SITE,
        _ => return Err(Error::arg(format!("no closed-form spectrum for {n} sites"))),
    };
    if !(J2_RANGE.0..=J2_RANGE.1).contains(&j2) {
        return Err(Error::arg(format!("j2 = {j2} outside the closed-form window [0, 1]")));
    }
    let mut values: Vec<(f64, f64, usize)> = branches
        .iter()
        .map(|b| {
            let (e, de) = (b.eval)(j2);
            (e, de, b.degeneracy)
        })
        .collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut groups: Vec<Vec<(f64, f64, usize)>> = Vec::new();
    for v in values {
        match groups.last_mut() {
            Some(g) if (v.0 - g[0].0).abs() <= 1e-12 => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    let group = &groups[level.index()];

    let nf = n as f64;
    let total: usize = group.iter().map(|g| g.2).sum();
    let mut c_nn = 0.0;
    let mut c_nnn = 0.0;
    for &(e, de, g) in group {
        let w = g as f64 / total as f64;
        c_nn += w * (4.0 / 3.0) * (e / nf - j2 * de / nf);
        c_nnn += w * (4.0 / 3.0) * de / nf;
    }
    Ok(AnalyticLevel {
        energy: group[0].0,
        degeneracy: total,
        c_nn,
        c_nnn,
        dg_nn: gmqd_symmetric(c_nn)?,
    })
}

/// `(energy, NN geometric discord)` of the ground or first excited level.
pub fn analytic_reference(n: usize, level: Level, j2: f64) -> Result<(f64, f64)> {
    let l = analytic_level(n, level, j2)?;
    Ok((l.energy, l.dg_nn))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn four_site_piecewise() {
        assert!(close(analytic_reference(4, Level::Gs, 0.3).unwrap().0, -1.7));
        assert!(close(analytic_reference(4, Level::Gs, 0.3).unwrap().1, 2.0 / 9.0));
        assert!(close(analytic_reference(4, Level::Gs, 0.8).unwrap().0, -2.4));
        assert!(close(analytic_reference(4, Level::Gs, 0.8).unwrap().1, 0.0));
        for (j, e, d) in [(0.1, -0.9, 1.0 / 18.0), (0.4, -1.2, 0.0), (0.7, -1.3, 2.0 / 9.0)] {
            let (en, dg) = analytic_reference(4, Level::Es1, j).unwrap();
            assert!(close(en, e) && close(dg, d), "j2={j}: {en} {dg}");
        }
        assert_eq!(analytic_level(4, Level::Es1, 0.1).unwrap().degeneracy, 3);
    }

    #[test]
    fn six_site_piecewise() {
        let (e, _) = analytic_reference(6, Level::Gs, 0.0).unwrap();
        assert!((e + 2.802_775_637_731_995).abs() < 1e-12);
        let (e, d) = analytic_reference(6, Level::Gs, 0.7).unwrap();
        assert!(close(e, -2.55) && close(d, 1.0 / 18.0));
        let (e, _) = analytic_reference(6, Level::Es1, 0.1).unwrap();
        assert!((e + 2.011_187_420_807_834).abs() < 1e-12);
        let (_, d) = analytic_reference(6, Level::Es1, 0.4).unwrap();
        assert!(close(d, 1.0 / 18.0));
    }

    #[test]
    fn six_site_gmqd_closed_forms() {
        for i in 0..50 {
            let j = 0.49 * i as f64 / 49.0;
            let om = (9.0 * j * j - 18.0 * j + 13.0).sqrt();
            let gs = ((9.0 * j - 13.0 - 2.0 * om) / om).powi(2) / 162.0;
            assert!(close(analytic_reference(6, Level::Gs, j).unwrap().1, gs));
        }
        for i in 0..25 {
            let j = 0.24 * i as f64 / 24.0;
            let om = (9.0 * j * j - 10.0 * j + 5.0).sqrt();
            let es = ((5.0 - 5.0 * j) / om + 2.0).powi(2) / 162.0;
            assert!(close(analytic_reference(6, Level::Es1, j).unwrap().1, es));
        }
    }

    #[test]
    fn six_site_frustration_closed_forms() {
        for j in [0.0f64, 0.1, 0.3, 0.45] {
            let om = (9.0 * j * j - 18.0 * j + 13.0).sqrt();
            let l = analytic_level(6, Level::Gs, j).unwrap();
            let f_nn = 0.75 + 0.75 * l.c_nn;
            assert!(close(f_nn, (9.0 * j - 13.0 + 7.0 * om) / (12.0 * om)));
            let f_nnn = 0.75 + 0.75 * l.c_nnn;
            assert!(close(f_nnn, 3.0 * (om - j + 1.0) / (4.0 * om)));
        }
    }

    #[test]
    fn crossing_points_merge_levels() {
        // At J2 = 0.5 the two singlets of the 4-site ring coincide.
        let l = analytic_level(4, Level::Gs, 0.5).unwrap();
        assert_eq!(l.degeneracy, 2);
        assert!(close(l.c_nn, -1.0 / 3.0));
    }

    #[test]
    fn unsupported_sizes() {
        assert!(analytic_reference(8, Level::Gs, 0.2).unwrap_err().is_argument());
        assert!(analytic_reference(4, Level::Gs, 1.5).is_err());
    }
}
