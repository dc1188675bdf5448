//! Coupling sweeps: per-point observables of the lowest levels, energy-slope
//! correlators, and detection of level crossings and GMQD jumps.

use serde::{Deserialize, Serialize};

use crate::basis::ChainSpec;
use crate::eigensolver::{assemble_low_spectrum, low_energies, SolverConfig, SpectrumLevel};
use crate::error::{Error, Result};
use crate::frustration::{exe_closed, frustration_lower_bound, frustration_measure, total_frustration, GEOMETRIC_THRESHOLD};
use crate::linalg::dot;
use crate::measures::{gmqd_general, gmqd_symmetric, gmqd_xstate, linear_entropy, quantum_discord_with, DiscordOptions};
use crate::rdm::{bloch_form, correlators, two_site_rdm, x_state, DEFAULT_X_TOL};

/// Stencil curvature `|e(J+h) - 2e(J) + e(J-h)| / h^2` above which the
/// per-site energy is taken to have a kink inside the stencil.
pub const KINK_CURVATURE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub j2_min: f64,
    pub j2_max: f64,
    pub steps: usize,
    pub n_levels: usize,
    /// Finite-difference step for the energy-slope correlators.
    pub fd_step: f64,
    /// Skip the (comparatively expensive) entropic discord columns.
    pub discord: bool,
    pub discord_grid: (usize, usize),
    /// Grid points evaluated per parallel batch.
    pub chunk: usize,
    pub solver: SolverConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            j2_min: 0.0,
            j2_max: 1.0,
            steps: 201,
            n_levels: 2,
            fd_step: 1e-4,
            discord: true,
            discord_grid: (64, 128),
            chunk: 32,
            solver: SolverConfig::default(),
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        let span = self.j2_max - self.j2_min;
        let last = (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.j2_min + span * i as f64 / last).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::arg(format!("steps must be at least 2, got {}", self.steps)));
        }
        if !(self.j2_min.is_finite() && self.j2_max.is_finite()) || self.j2_max <= self.j2_min {
            return Err(Error::arg(format!("need finite j2_min < j2_max, got [{}, {}]", self.j2_min, self.j2_max)));
        }
        if self.n_levels == 0 {
            return Err(Error::arg("n_levels must be at least 1"));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::arg(format!("fd_step must be positive, got {}", self.fd_step)));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.j2_max - self.j2_min) / (self.steps - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowFlags {
    /// Degenerate crossing on the grid point; observables use the merged mixture.
    pub crossing: bool,
    /// Within two finite-difference steps of a detected kink.
    pub near_kink: bool,
    pub geom_frust_nn: bool,
    pub geom_frust_nnn: bool,
    /// Excited level: `f` measures an overlap deficit, not frustration.
    pub overlap_deficit: bool,
    pub out_of_regime: bool,
}

impl RowFlags {
    pub fn labels(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (on, name) in [
            (self.crossing, "crossing"),
            (self.near_kink, "near_kink"),
            (self.geom_frust_nn, "geom_frust_nn"),
            (self.geom_frust_nnn, "geom_frust_nnn"),
            (self.overlap_deficit, "overlap_deficit"),
            (self.out_of_regime, "out_of_regime"),
        ] {
            if on {
                out.push(name);
            }
        }
        out
    }
}

/// Observables of one level at one coupling. Correlators are per component,
/// `<s^a_i s^a_j>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelObservables {
    pub level: usize,
    pub energy: f64,
    pub degeneracy: usize,
    pub c_nn: f64,
    pub c_nnn: f64,
    pub dg_nn: f64,
    pub dg_nnn: f64,
    /// Largest disagreement between the three GMQD routes on either pair.
    pub dg_route_dev: f64,
    /// NaN when discord is disabled.
    pub qd_nn: f64,
    pub qd_nnn: f64,
    /// `|D + C - I|` on either pair (0 when discord is disabled).
    pub qd_balance: f64,
    pub sl_nn: f64,
    pub f_nn: f64,
    pub f_nnn: f64,
    pub e1_nn: f64,
    pub e1_nnn: f64,
    pub total_f: f64,
    pub exe: f64,
    /// Per-component correlators from energy slopes; `None` near kinks.
    pub fh_c_nn: Option<f64>,
    pub fh_c_nnn: Option<f64>,
    pub flags: RowFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub j2: f64,
    pub levels: Vec<LevelObservables>,
    /// `overlap_next[l][m]`: weight of level `l`'s subspace inside level `m`
    /// of the next row. Empty on the last row.
    pub overlap_next: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepFailure {
    pub j2: f64,
    pub message: String,
    pub numerical: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub n_sites: usize,
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn j2(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.j2).collect()
    }

    /// Column of a level across rows; `None` where the level is missing.
    pub fn column(&self, level: usize, f: impl Fn(&LevelObservables) -> f64) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.levels.get(level).map(&f)).collect()
    }
}

/// Scalar correlators `<s_i . s_j>` (NN, NNN) from per-site energies at
/// `J2 - h`, `J2`, `J2 + h`:
/// `NN = 4 (e - J2 e')`, `NNN = 4 e'`, with `e'` the central difference.
pub fn feynman_hellmann_correlators(e_minus: f64, e: f64, e_plus: f64, j2: f64, h: f64) -> Result<(f64, f64)> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::arg("finite-difference step must be positive"));
    }
    let curvature = (e_plus - 2.0 * e + e_minus).abs() / (h * h);
    if curvature > KINK_CURVATURE {
        return Err(Error::Domain(format!(
            "stencil around j2 = {j2} straddles a kink (curvature {curvature:.3e})"
        )));
    }
    let slope = (e_plus - e_minus) / (2.0 * h);
    Ok((4.0 * (e - j2 * slope), 4.0 * slope))
}

/// Fraction of the subspace spanned by `a` that lies inside span(`b`).
/// Both sets are orthonormal.
pub fn subspace_overlap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for u in a {
        for v in b {
            total += dot(u, v).powi(2);
        }
    }
    total / a.len() as f64
}

fn level_observables(
    spec: &ChainSpec,
    level: &SpectrumLevel,
    index: usize,
    cfg: &SweepConfig,
    fh: Option<(f64, f64)>,
) -> Result<LevelObservables> {
    let nn = two_site_rdm(level, (0, 1))?;
    let nnn = two_site_rdm(level, (0, 2))?;
    let c_nn = correlators(&nn).component;
    let c_nnn = correlators(&nnn).component;

    let mut dg = [0.0; 2];
    let mut dev = 0.0f64;
    for (k, (rdm, c)) in [(&nn, c_nn), (&nnn, c_nnn)].into_iter().enumerate() {
        let general = gmqd_general(&bloch_form(rdm));
        let xs = gmqd_xstate(&x_state(rdm, DEFAULT_X_TOL)?)?;
        let sym = gmqd_symmetric(c)?;
        dev = dev.max((general - xs).abs()).max((general - sym).abs());
        dg[k] = general;
    }

    let (qd_nn, qd_nnn, qd_balance) = if cfg.discord {
        let opts = DiscordOptions {
            theta_points: cfg.discord_grid.0,
            phi_points: cfg.discord_grid.1,
            ..DiscordOptions::default()
        };
        let a = quantum_discord_with(&nn, &opts)?;
        let b = quantum_discord_with(&nnn, &opts)?;
        let bal = |d: &crate::measures::DiscordResult| (d.discord + d.classical_correlation - d.mutual_information).abs();
        (a.discord, b.discord, bal(&a).max(bal(&b)))
    } else {
        (f64::NAN, f64::NAN, 0.0)
    };

    let f_nn = frustration_measure(&nn)?;
    let f_nnn = frustration_measure(&nnn)?;
    let e1_nn = frustration_lower_bound(&nn, 1)?;
    let e1_nnn = frustration_lower_bound(&nnn, 1)?;

    Ok(LevelObservables {
        level: index,
        energy: level.energy,
        degeneracy: level.degeneracy,
        c_nn,
        c_nnn,
        dg_nn: dg[0],
        dg_nnn: dg[1],
        dg_route_dev: dev,
        qd_nn,
        qd_nnn,
        qd_balance,
        sl_nn: linear_entropy(&nn),
        f_nn,
        f_nnn,
        e1_nn,
        e1_nnn,
        total_f: total_frustration(f_nn, f_nnn),
        exe: exe_closed(level.energy / spec.n_sites as f64),
        fh_c_nn: fh.map(|(a, _)| a / 3.0),
        fh_c_nnn: fh.map(|(_, b)| b / 3.0),
        flags: RowFlags {
            geom_frust_nn: f_nn - e1_nn > GEOMETRIC_THRESHOLD,
            geom_frust_nnn: f_nnn - e1_nnn > GEOMETRIC_THRESHOLD,
            overlap_deficit: index > 0,
            out_of_regime: spec.out_of_regime(),
            ..RowFlags::default()
        },
    })
}

/// Row of one grid point plus the level eigenvectors for overlap tracking.
fn evaluate_point(template: &ChainSpec, j2: f64, cfg: &SweepConfig) -> Result<(SweepRow, Vec<Vec<Vec<f64>>>)> {
    let spec = template.with_j2(j2);
    let spectrum = assemble_low_spectrum(&spec, cfg.n_levels, &cfg.solver)?;
    let h = cfg.fd_step;
    let plus = low_energies(&spec.with_j2(j2 + h), cfg.n_levels, &cfg.solver)?;
    let minus = low_energies(&spec.with_j2(j2 - h), cfg.n_levels, &cfg.solver)?;
    let nf = spec.n_sites as f64;

    let mut levels = Vec::with_capacity(spectrum.levels.len());
    for (l, level) in spectrum.levels.iter().enumerate() {
        let fh = match (minus.get(l), plus.get(l)) {
            (Some(m), Some(p)) => feynman_hellmann_correlators(m.energy / nf, level.energy / nf, p.energy / nf, j2, h).ok(),
            _ => None,
        };
        levels.push(level_observables(&spec, level, l, cfg, fh)?);
    }
    let vectors = spectrum.levels.into_iter().map(|l| l.eigenvectors).collect();
    Ok((
        SweepRow {
            j2,
            levels,
            overlap_next: Vec::new(),
        },
        vectors,
    ))
}

fn overlaps(a: &[Vec<Vec<f64>>], b: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    a.iter().map(|la| b.iter().map(|lb| subspace_overlap(la, lb)).collect()).collect()
}

/// Runs every grid point, keeping completed rows when some points fail.
/// Rows stay in grid order; overlaps are only linked between adjacent
/// successful points.
pub fn run_sweep_partial(template: &ChainSpec, cfg: &SweepConfig) -> Result<(SweepTable, Vec<SweepFailure>)> {
    cfg.validate()?;
    let grid = cfg.grid();
    let mut rows: Vec<SweepRow> = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    let mut prev: Option<Vec<Vec<Vec<f64>>>> = None;

    for chunk in grid.chunks(cfg.chunk.max(1)) {
        let results = cfg.solver.execution.map(chunk, |&j2| evaluate_point(template, j2, cfg));
        for (&j2, res) in chunk.iter().zip(results) {
            match res {
                Ok((row, vectors)) => {
                    if let (Some(p), Some(last)) = (prev.as_ref(), rows.last_mut()) {
                        last.overlap_next = overlaps(p, &vectors);
                    }
                    rows.push(row);
                    prev = Some(vectors);
                }
                Err(e) => {
                    failures.push(SweepFailure {
                        j2,
                        numerical: !e.is_argument(),
                        message: e.to_string(),
                    });
                    prev = None;
                }
            }
        }
    }
    mark_crossing_rows(&mut rows);
    Ok((
        SweepTable {
            n_sites: template.n_sites,
            config: *cfg,
            rows,
        },
        failures,
    ))
}

/// All-or-nothing sweep; the first failing point is reported with its `j2`.
pub fn run_sweep(template: &ChainSpec, cfg: &SweepConfig) -> Result<SweepTable> {
    let (table, failures) = run_sweep_partial(template, cfg)?;
    match failures.into_iter().next() {
        None => Ok(table),
        Some(f) => {
            // Re-evaluate to recover the typed error of the failing point.
            let err = evaluate_point(template, f.j2, cfg)
                .err()
                .unwrap_or_else(|| Error::numerical(f.message, vec![]));
            Err(Error::SweepPoint {
                j2: f.j2,
                source: Box::new(err),
            })
        }
    }
}

/// A level whose degeneracy exceeds that of both neighbours sits on an
/// exact crossing.
fn mark_crossing_rows(rows: &mut [SweepRow]) {
    let n = rows.len();
    for i in 0..n {
        for l in 0..rows[i].levels.len() {
            let g = rows[i].levels[l].degeneracy;
            let deg = |k: usize| rows[k].levels.get(l).map(|x| x.degeneracy);
            let left = if i > 0 { deg(i - 1) } else { None };
            let right = if i + 1 < n { deg(i + 1) } else { None };
            let above = |d: Option<usize>| d.is_none_or(|d| g > d);
            if (left.is_some() || right.is_some()) && above(left) && above(right) {
                rows[i].levels[l].flags.crossing = true;
                rows[i].levels[l].fh_c_nn = None;
                rows[i].levels[l].fh_c_nnn = None;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    GsKink,
    EsCrossing,
    GmqdJump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub kind: CrossingKind,
    pub level: usize,
    pub j2: f64,
    /// Half-width of the bracket that contains the signature.
    pub resolution: f64,
    /// Slope discontinuity of the level energy (kinks, crossings) or the
    /// size of the GMQD step (jumps).
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossingThresholds {
    /// Kink when `|second difference| > max(kink_floor, kink_factor * median)`,
    /// with the median taken over the surrounding window of grid points.
    pub kink_factor: f64,
    pub kink_floor: f64,
    /// Jump when the step `|dD_g|`, or its departure from the neighbouring
    /// steps, exceeds `max(jump_floor, jump_factor * local median)`.
    pub jump_factor: f64,
    pub jump_floor: f64,
    /// Adjacent levels with subspace overlap below this are different states.
    pub min_overlap: f64,
    /// Bisection stops at this bracket width.
    pub refine_tol: f64,
}

impl Default for CrossingThresholds {
    fn default() -> Self {
        Self {
            kink_factor: 10.0,
            kink_floor: 1e-7,
            jump_factor: 10.0,
            jump_floor: 1e-6,
            min_overlap: 0.5,
            refine_tol: 1e-10,
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let m = values.len() / 2;
    if values.len().is_multiple_of(2) {
        0.5 * (values[m - 1] + values[m])
    } else {
        values[m]
    }
}

const MEDIAN_HALF_WINDOW: usize = 5;

/// Median of `values[k - w ..= k + w]`, clipped to the slice.
fn local_median(values: &[f64], k: usize) -> f64 {
    let lo = k.saturating_sub(MEDIAN_HALF_WINDOW);
    let hi = (k + MEDIAN_HALF_WINDOW + 1).min(values.len());
    median(&mut values[lo..hi].to_vec())
}

/// Groups sorted indices into runs of consecutive values.
fn runs(indices: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &i in indices {
        match out.last_mut() {
            Some((_, end)) if *end + 1 == i => *end = i,
            _ => out.push((i, i)),
        }
    }
    out
}

struct Bisector<'a> {
    template: ChainSpec,
    table: &'a SweepTable,
    thresholds: &'a CrossingThresholds,
}

impl Bisector<'_> {
    fn level_at(&self, j2: f64, level: usize) -> Result<Option<SpectrumLevel>> {
        let spec = self.template.with_j2(j2);
        let mut s = assemble_low_spectrum(&spec, level + 1, &self.table.config.solver)?;
        Ok((s.levels.len() > level).then(|| s.levels.swap_remove(level)))
    }

    /// Narrows `[lo, hi]` around the point where `level` switches from the
    /// state continued from `lo` to the one continued from `hi`.
    fn refine(&self, mut lo: f64, mut hi: f64, level: usize) -> Result<(f64, f64)> {
        let (Some(left), Some(right)) = (self.level_at(lo, level)?, self.level_at(hi, level)?) else {
            return Ok((0.5 * (lo + hi), 0.5 * (hi - lo)));
        };
        if subspace_overlap(&left.eigenvectors, &right.eigenvectors) >= self.thresholds.min_overlap {
            // Same state on both ends: nothing to label.
            return Ok((0.5 * (lo + hi), 0.5 * (hi - lo)));
        }
        while hi - lo > self.thresholds.refine_tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let Some(here) = self.level_at(mid, level)? else { break };
            let ov_l = subspace_overlap(&left.eigenvectors, &here.eigenvectors);
            let ov_r = subspace_overlap(&right.eigenvectors, &here.eigenvectors);
            let merged = ov_l >= self.thresholds.min_overlap && ov_r >= self.thresholds.min_overlap;
            if merged {
                return Ok((mid, 0.0));
            }
            if ov_l >= self.thresholds.min_overlap {
                lo = mid;
            } else if ov_r >= self.thresholds.min_overlap {
                hi = mid;
            } else {
                // A third state intrudes; keep the current bracket.
                break;
            }
        }
        Ok((0.5 * (lo + hi), 0.5 * (hi - lo)))
    }
}

/// Slope jump of a level energy across `[a, b]` from one-sided grid slopes
/// just outside the bracket.
fn slope_jump(table: &SweepTable, level: usize, a: usize, b: usize) -> f64 {
    let e = |i: usize| table.rows[i].levels.get(level).map(|l| l.energy);
    let x = |i: usize| table.rows[i].j2;
    let n = table.rows.len();
    let left = (a >= 1).then(|| Some((e(a)? - e(a - 1)?) / (x(a) - x(a - 1)))).flatten();
    let right = (b + 1 < n).then(|| Some((e(b + 1)? - e(b)?) / (x(b + 1) - x(b)))).flatten();
    match (left, right) {
        (Some(l), Some(r)) => (r - l).abs(),
        _ => f64::NAN,
    }
}

/// Ground-state kinks, first-excited-level crossings and GMQD jumps.
///
/// A merge exactly on the first or last grid point cannot be told apart
/// from a touching of two levels, so no signature is reported there; the
/// row keeps its `crossing` flag.
pub fn detect_crossings(template: &ChainSpec, table: &SweepTable, thresholds: &CrossingThresholds) -> Result<Vec<CrossingReport>> {
    let rows = &table.rows;
    let n = rows.len();
    let mut reports = Vec::new();
    if n < 3 {
        return Ok(reports);
    }
    let bisector = Bisector {
        template: *template,
        table,
        thresholds,
    };

    // (a) ground-state kinks from the energy second difference.
    let e0: Vec<f64> = rows.iter().map(|r| r.levels[0].energy).collect();
    let d2: Vec<f64> = (1..n - 1).map(|i| e0[i - 1] - 2.0 * e0[i] + e0[i + 1]).collect();
    let abs: Vec<f64> = d2.iter().map(|v| v.abs()).collect();
    let flagged: Vec<usize> = (1..n - 1)
        .filter(|&i| abs[i - 1] > thresholds.kink_floor.max(thresholds.kink_factor * local_median(&abs, i - 1)))
        .collect();
    for (a, b) in runs(&flagged) {
        let (lo, hi) = if a == b {
            if rows[a].levels[0].flags.crossing {
                reports.push(CrossingReport {
                    kind: CrossingKind::GsKink,
                    level: 0,
                    j2: rows[a].j2,
                    resolution: 0.0,
                    magnitude: slope_jump(table, 0, a - 1, a + 1),
                });
                continue;
            }
            (a - 1, b + 1)
        } else {
            (a, b)
        };
        let (j2, res) = bisector.refine(rows[lo].j2, rows[hi].j2, 0)?;
        reports.push(CrossingReport {
            kind: CrossingKind::GsKink,
            level: 0,
            j2,
            resolution: res,
            magnitude: slope_jump(table, 0, lo, hi),
        });
    }

    // Ground-state swaps too gentle for the curvature test.
    for i in 0..n - 1 {
        let (a, b) = (&rows[i], &rows[i + 1]);
        let swapped = a.overlap_next.first().and_then(|o| o.first()).is_some_and(|&o| o < thresholds.min_overlap);
        let seen = reports.iter().any(|r| r.j2 >= a.j2 && r.j2 <= b.j2);
        if swapped && !seen && !a.levels[0].flags.crossing && !b.levels[0].flags.crossing {
            let (j2, res) = bisector.refine(a.j2, b.j2, 0)?;
            reports.push(CrossingReport {
                kind: CrossingKind::GsKink,
                level: 0,
                j2,
                resolution: res,
                magnitude: slope_jump(table, 0, i, i + 1),
            });
        }
    }

    // (b) first-excited-level crossings: exact crossings on the grid,
    // degeneracy changes and tracked-state swaps between grid points.
    if rows.iter().all(|r| r.levels.len() > 1) {
        let level = 1;
        let mut i = 0;
        while i + 1 < n {
            let here = &rows[i].levels[level];
            let next = &rows[i + 1].levels[level];
            if i + 2 == n && next.flags.crossing {
                break;
            }
            if next.flags.crossing {
                let end = (i + 2).min(n - 1);
                reports.push(CrossingReport {
                    kind: CrossingKind::EsCrossing,
                    level,
                    j2: rows[i + 1].j2,
                    resolution: 0.0,
                    magnitude: slope_jump(table, level, i, end),
                });
                i += 2;
                continue;
            }
            if here.flags.crossing {
                i += 1;
                continue;
            }
            let overlap = rows[i].overlap_next.get(level).and_then(|o| o.get(level)).copied();
            let swapped = overlap.is_some_and(|o| o < thresholds.min_overlap);
            if here.degeneracy != next.degeneracy || swapped {
                let (j2, res) = bisector.refine(rows[i].j2, rows[i + 1].j2, level)?;
                reports.push(CrossingReport {
                    kind: CrossingKind::EsCrossing,
                    level,
                    j2,
                    resolution: res,
                    magnitude: slope_jump(table, level, i, i + 1),
                });
            }
            i += 1;
        }
    }

    // (c) GMQD jumps between adjacent grid points, per level.
    let levels = rows.iter().map(|r| r.levels.len()).min().unwrap_or(0);
    for level in 0..levels {
        let dg: Vec<f64> = rows.iter().map(|r| r.levels[level].dg_nn).collect();
        let signed: Vec<f64> = dg.windows(2).map(|w| w[1] - w[0]).collect();
        let diffs: Vec<f64> = signed.iter().map(|d| d.abs()).collect();
        let boundary = |k: usize| rows[k].levels[level].flags.crossing && (k == 0 || k + 1 == n);
        // Departure of each interior step from the mean of its neighbours; a
        // jump in a steep stretch stands out here even when |dD| does not.
        let detrended: Vec<f64> = (0..signed.len())
            .map(|k| {
                if k == 0 || k + 1 == signed.len() || boundary(k - 1) || boundary(k + 2) {
                    return 0.0;
                }
                (signed[k] - 0.5 * (signed[k - 1] + signed[k + 1])).abs()
            })
            .collect();
        let exceeds = |v: &[f64], k: usize| v[k] > thresholds.jump_floor.max(thresholds.jump_factor * local_median(v, k));
        let flagged: Vec<usize> = (0..diffs.len())
            .filter(|&k| (exceeds(&diffs, k) || (diffs[k] > thresholds.jump_floor && exceeds(&detrended, k))) && !boundary(k) && !boundary(k + 1))
            .collect();
        for (a, b) in runs(&flagged) {
            // Intervals a..=b span grid points a..=b+1.
            let (lo, hi) = (rows[a].j2, rows[b + 1].j2);
            reports.push(CrossingReport {
                kind: CrossingKind::GmqdJump,
                level,
                j2: 0.5 * (lo + hi),
                resolution: 0.5 * (hi - lo),
                magnitude: (dg[b + 1] - dg[a]).abs(),
            });
        }
    }
    Ok(reports)
}

/// Suppresses slope correlators within `2h` of every detected kink or
/// level crossing and flags those rows.
pub fn mark_kinks(table: &mut SweepTable, reports: &[CrossingReport]) {
    let h = table.config.fd_step;
    for row in &mut table.rows {
        for obs in &mut row.levels {
            let near = reports.iter().any(|r| {
                r.kind != CrossingKind::GmqdJump
                    && (r.kind == CrossingKind::GsKink || r.level == obs.level)
                    && (row.j2 - r.j2).abs() <= 2.0 * h + r.resolution
            });
            if near || obs.fh_c_nn.is_none() {
                obs.flags.near_kink = true;
                obs.fh_c_nn = None;
                obs.fh_c_nnn = None;
            }
        }
    }
}

/// Runs the sweep, detects crossings and masks derivative data near them.
pub fn analyze(template: &ChainSpec, cfg: &SweepConfig, thresholds: &CrossingThresholds) -> Result<(SweepTable, Vec<CrossingReport>)> {
    let mut table = run_sweep(template, cfg)?;
    let reports = detect_crossings(template, &table, thresholds)?;
    mark_kinks(&mut table, &reports);
    Ok((table, reports))
}

/// Central grid differences of `values` (one-sided at the ends). A stencil
/// that contains any point of `breaks` is left as `None`.
pub fn grid_derivative(j2: &[f64], values: &[Option<f64>], breaks: &[f64]) -> Vec<Option<f64>> {
    let n = j2.len();
    let straddles = |a: f64, b: f64| breaks.iter().any(|&x| x >= a && x <= b);
    (0..n)
        .map(|i| {
            let (lo, hi) = match i {
                0 => (0, 1.min(n - 1)),
                _ if i + 1 == n => (i - 1, i),
                _ => (i - 1, i + 1),
            };
            if lo == hi || straddles(j2[lo], j2[hi]) {
                return None;
            }
            Some((values[hi]? - values[lo]?) / (j2[hi] - j2[lo]))
        })
        .collect()
}
