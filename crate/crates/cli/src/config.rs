//! Run configuration: JSON file format, validation and conversion into the
//! library's solver and sweep settings.

use std::fmt;
use std::path::PathBuf;

use j1j2::sweep::SweepConfig;
use j1j2::{ChainSpec, Execution, SolverConfig};
use serde::{Deserialize, Serialize};

/// Column groups of the sweep table. Unrequested groups print as `NA`;
/// dropping `qd` also skips the discord optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Energy,
    Correlators,
    Gmqd,
    Qd,
    Entropy,
    Frustration,
    Exe,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Observable::Energy,
        Observable::Correlators,
        Observable::Gmqd,
        Observable::Qd,
        Observable::Entropy,
        Observable::Frustration,
        Observable::Exe,
    ];

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::Energy => "energy",
            Observable::Correlators => "correlators",
            Observable::Gmqd => "gmqd",
            Observable::Qd => "qd",
            Observable::Entropy => "entropy",
            Observable::Frustration => "frustration",
            Observable::Exe => "exe",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output file; standard output when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
    /// Optional JSON summary written next to a sweep.
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    pub dense_cap: usize,
    pub dense_switch: usize,
    pub lanczos_tol: f64,
    pub degeneracy_tol: f64,
    pub max_krylov: usize,
    pub fd_step: f64,
    /// Polar and azimuthal points of the discord measurement grid.
    pub discord_grid: [usize; 2],
}

impl Default for SolverOverrides {
    fn default() -> Self {
        let s = SolverConfig::default();
        let w = SweepConfig::default();
        Self {
            dense_cap: s.dense_cap,
            dense_switch: s.dense_switch,
            lanczos_tol: s.lanczos_tol,
            degeneracy_tol: s.degeneracy_tol,
            max_krylov: s.max_krylov,
            fd_step: w.fd_step,
            discord_grid: [w.discord_grid.0, w.discord_grid.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_sites: usize,
    /// Single coupling for `spectrum`.
    pub j2: Option<f64>,
    pub j2_min: f64,
    pub j2_max: f64,
    pub steps: usize,
    pub levels: usize,
    pub observables: Vec<Observable>,
    pub output: OutputConfig,
    pub solver: SolverOverrides,
    pub seed: u64,
    /// Worker threads; all available cores when absent.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let w = SweepConfig::default();
        Self {
            n_sites: 0,
            j2: None,
            j2_min: w.j2_min,
            j2_max: w.j2_max,
            steps: w.steps,
            levels: w.n_levels,
            observables: Observable::ALL.to_vec(),
            output: OutputConfig::default(),
            solver: SolverOverrides::default(),
            seed: 0,
            threads: None,
        }
    }
}

/// Field-level validation failures.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<(String, String)>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (field, msg)) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{field}: {msg}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Pretty JSON with a trailing newline; parsing it back and
    /// re-serializing yields the same bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn wants(&self, o: Observable) -> bool {
        self.observables.contains(&o)
    }

    fn check_common(&self, errors: &mut Vec<(String, String)>) {
        let mut bad = |field: &str, msg: String| errors.push((field.to_string(), msg));
        if let Err(e) = ChainSpec::new(self.n_sites, 0.0) {
            let hint = if self.n_sites == 0 { " (set --n or n_sites)" } else { "" };
            let msg = e.to_string();
            let msg = msg.strip_prefix("invalid argument: n_sites ").unwrap_or(&msg);
            bad("n_sites", format!("{msg}{hint}"));
        }
        if self.levels == 0 {
            bad("levels", "must be at least 1".into());
        }
        let s = &self.solver;
        if s.dense_cap == 0 {
            bad("solver.dense_cap", "must be positive".into());
        }
        if !(s.lanczos_tol > 0.0 && s.lanczos_tol < 1.0) {
            bad("solver.lanczos_tol", format!("must lie in (0, 1), got {}", s.lanczos_tol));
        }
        if !(s.degeneracy_tol > 0.0 && s.degeneracy_tol < 1.0) {
            bad("solver.degeneracy_tol", format!("must lie in (0, 1), got {}", s.degeneracy_tol));
        }
        if s.max_krylov < 2 {
            bad("solver.max_krylov", format!("must be at least 2, got {}", s.max_krylov));
        }
        if !(s.fd_step > 0.0 && s.fd_step < 0.1) {
            bad("solver.fd_step", format!("must lie in (0, 0.1), got {}", s.fd_step));
        }
        if s.discord_grid.iter().any(|&p| p < 2) {
            bad("solver.discord_grid", format!("needs at least 2 points per angle, got {:?}", s.discord_grid));
        }
        if self.threads == Some(0) {
            bad("threads", "must be at least 1".into());
        }
    }

    /// Checks a single-coupling run.
    pub fn validate_point(&self) -> Result<f64, ConfigErrors> {
        let mut errors = Vec::new();
        self.check_common(&mut errors);
        let j2 = match self.j2 {
            Some(j) if j.is_finite() => j,
            Some(j) => {
                errors.push(("j2".into(), format!("must be finite, got {j}")));
                0.0
            }
            None => {
                errors.push(("j2".into(), "required (set --j2)".into()));
                0.0
            }
        };
        if errors.is_empty() { Ok(j2) } else { Err(ConfigErrors(errors)) }
    }

    /// Checks a sweep run.
    pub fn validate_sweep(&self) -> Result<(), ConfigErrors> {
        let mut errors = Vec::new();
        self.check_common(&mut errors);
        if self.steps < 2 {
            errors.push(("steps".into(), format!("must be at least 2, got {}", self.steps)));
        }
        if !(self.j2_min.is_finite() && self.j2_max.is_finite() && self.j2_min < self.j2_max) {
            errors.push(("j2_min".into(), format!("need finite j2_min < j2_max, got [{}, {}]", self.j2_min, self.j2_max)));
        }
        if self.j2.is_some() {
            errors.push(("j2".into(), "sweeps take j2_min, j2_max and steps instead".into()));
        }
        if errors.is_empty() { Ok(()) } else { Err(ConfigErrors(errors)) }
    }

    pub fn execution(&self) -> Execution {
        if self.threads == Some(1) { Execution::Sequential } else { Execution::Parallel }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dense_cap: self.solver.dense_cap,
            dense_switch: self.solver.dense_switch,
            lanczos_tol: self.solver.lanczos_tol,
            degeneracy_tol: self.solver.degeneracy_tol,
            max_krylov: self.solver.max_krylov,
            seed: self.seed,
            execution: self.execution(),
            ..SolverConfig::default()
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            j2_min: self.j2_min,
            j2_max: self.j2_max,
            steps: self.steps,
            n_levels: self.levels,
            fd_step: self.solver.fd_step,
            discord: self.wants(Observable::Qd),
            discord_grid: (self.solver.discord_grid[0], self.solver.discord_grid[1]),
            solver: self.solver_config(),
            ..SweepConfig::default()
        }
    }
}
