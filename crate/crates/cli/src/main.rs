use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use j1j2_cli::commands::{self, Outcome};
use j1j2_cli::{CliError, Format, Observable, RunConfig};

#[derive(Parser)]
#[command(name = "j1j2", version, about = "Exact diagonalization of the frustrated spin-1/2 J1-J2 ring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest levels at one coupling.
    Spectrum(RunArgs),
    /// Observables of the lowest levels over a coupling grid.
    Sweep(RunArgs),
    /// Kinks, level crossings and GMQD jumps over a coupling grid.
    Crossings(RunArgs),
    /// Compare exact diagonalization with the 4- and 6-site closed forms.
    Validate(RunArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of sites (even, 4 to 16).
    #[arg(long = "n")]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    j2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    j2_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    j2_max: Option<f64>,
    /// Grid points including both ends.
    #[arg(long)]
    steps: Option<usize>,
    /// Number of distinct levels.
    #[arg(long)]
    levels: Option<usize>,
    /// Comma-separated column groups: energy, correlators, gmqd, qd, entropy, frustration, exe.
    #[arg(long, value_delimiter = ',')]
    observables: Option<Vec<String>>,
    /// Output file (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON summary of a sweep.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    dense_cap: Option<usize>,
    #[arg(long)]
    tol_degeneracy: Option<f64>,
    #[arg(long)]
    fd_step: Option<f64>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?;
                RunConfig::from_json(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($flag:expr => $($field:tt)+) => {
                if let Some(v) = $flag.clone() {
                    cfg.$($field)+ = v;
                }
            };
        }
        set!(self.n => n_sites);
        set!(self.j2_min => j2_min);
        set!(self.j2_max => j2_max);
        set!(self.steps => steps);
        set!(self.levels => levels);
        set!(self.format => output.format);
        set!(self.seed => seed);
        set!(self.dense_cap => solver.dense_cap);
        set!(self.tol_degeneracy => solver.degeneracy_tol);
        set!(self.fd_step => solver.fd_step);
        if self.j2.is_some() {
            cfg.j2 = self.j2;
        }
        if self.out.is_some() {
            cfg.output.path = self.out.clone();
        }
        if self.summary.is_some() {
            cfg.output.summary = self.summary.clone();
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if let Some(names) = &self.observables {
            let mut list = Vec::new();
            for name in names {
                let o = Observable::parse(name.trim())
                    .ok_or_else(|| CliError::Usage(format!("observables: unknown group '{name}'")))?;
                if !list.contains(&o) {
                    list.push(o);
                }
            }
            list.sort();
            cfg.observables = list;
        }
        Ok(cfg)
    }
}

fn emit(outcome: &Outcome) -> Result<(), CliError> {
    let io = |what: &str, e: std::io::Error| CliError::Usage(format!("{what}: {e}"));
    for a in &outcome.artifacts {
        match &a.path {
            None => std::io::stdout().write_all(a.contents.as_bytes()).map_err(|e| io("stdout", e))?,
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| io(&dir.display().to_string(), e))?;
                }
                std::fs::write(p, &a.contents).map_err(|e| io(&p.display().to_string(), e))?;
            }
        }
    }
    Ok(())
}

type CommandFn = fn(&RunConfig) -> Result<Outcome, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, command): (&RunArgs, CommandFn) = match &cli.command {
        Command::Spectrum(a) => (a, commands::spectrum),
        Command::Sweep(a) => (a, commands::sweep),
        Command::Crossings(a) => (a, commands::crossings),
        Command::Validate(a) => (a, commands::validate),
    };
    let cfg = args.resolve()?;
    if args.print_config {
        print!("{}", cfg.to_json());
        return Ok(());
    }
    if let Some(t) = cfg.threads.filter(|&t| t > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("threads: {e}")))?;
    }
    let outcome = command(&cfg)?;
    emit(&outcome)?;
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
