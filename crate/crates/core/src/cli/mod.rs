//! Command-line experiment runner.
//!
//! Exit codes: 0 success, 1 acceptance violation, 2 configuration error,
//! 3 numerical failure.

mod config;
mod experiments;
mod validate;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{ExperimentConfig, MeshSection, RbSection, SolverSection, ValidateSection};
pub use experiments::{
    family_meshes, manufactured_gradient, manufactured_solution, manufactured_source, run_grid, sweep_hierarchy,
    ConvergenceTable, IterationsTable, RhoSpread, RunRow,
};
pub use validate::{
    consistency_identity_error, energy_errors, log_log_slope, partition_of_unity_error, projector_reproduction,
    run_validation, tilde_orthogonality_error, Check, ValidationSummary,
};

use crate::mesh::{build_hierarchy_with, load_mesh, save_mesh, validate as validate_mesh};
use crate::rbspace::RbCompressor;
use crate::transfer::Restriction;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ACCEPTANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// VEM Poisson solver with a reduced-basis non-nested W-cycle multigrid.
///
/// Configuration is TOML with optional sections; missing keys take these defaults:
///
///   [mesh]      families = [512], levels = 4, seed = 1, lloyd_iterations = 100
///   [solver]    smoothing = [3, 6, 8], cycle_levels = [2, 3, 4], modes = [1, 8],
///               convergence_modes = 1, tol = 1e-8, max_iterations = 200,
///               restriction = "algebraic"
///   [rb]        depth = 3, snapshots = 20, seed = 0, cache_dir unset,
///               train_sizes = [3, ..., 10]
///   [validate]  counts = [128, 512, 2048], seed = 10, finest = 512, levels = 3
#[derive(Debug, Parser)]
#[command(name = "rbmg", version, verbatim_doc_comment)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: hardware count).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides mesh.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides solver.restriction (algebraic | l2proj).
    #[arg(long, global = true)]
    pub restriction: Option<Restriction>,
    /// Overrides solver.tol.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mesh generation and checking.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Multigrid experiments.
    #[command(subcommand)]
    Run(RunCommand),
    /// Discretization, rb-space, transfer and multigrid checks.
    Validate,
    /// Train and cache rb compressors for the configured polygon sizes.
    TrainRb,
}

#[derive(Debug, Subcommand)]
pub enum MeshCommand {
    /// Write each level of every configured family as JSON.
    Gen,
    /// Check mesh files; fails with exit code 1 on any violation.
    Validate { files: Vec<PathBuf> },
}

#[derive(Debug, Subcommand)]
pub enum RunCommand {
    /// Iteration counts for every M; fails if counts differ across M.
    Iterations,
    /// Convergence factors for one M; fails if ρ varies by more than 2x over
    /// the level counts or does not decrease with m.
    Convergence,
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliFailure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::Parse(_) | Error::Io { .. } | Error::FormatVersion { .. } => EXIT_CONFIG,
            Error::InvalidHierarchy(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        CliFailure {
            code,
            message: e.to_string(),
        }
    }
}

fn acceptance(message: String) -> CliFailure {
    CliFailure {
        code: EXIT_ACCEPTANCE,
        message,
    }
}

/// Effective configuration after applying command-line overrides.
pub fn resolve_config(g: &GlobalArgs) -> Result<ExperimentConfig, CliFailure> {
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.mesh.seed = s;
    }
    if let Some(r) = g.restriction {
        cfg.solver.restriction = r;
    }
    if let Some(t) = g.tol {
        cfg.solver.tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliFailure> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p = dir.join(name);
    std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    Ok(())
}

/// Runs a parsed command; output files go to `--out`, progress to stderr.
pub fn run(cli: &Cli) -> Result<(), CliFailure> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()).into());
        }
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = resolve_config(&cli.global)?;
    let out = &cli.global.out;
    let log = |s: &str| eprintln!("{s}");
    match &cli.command {
        Command::Mesh(MeshCommand::Gen) => {
            for &finest in &cfg.mesh.families {
                let h = build_hierarchy_with(finest, cfg.mesh.levels, cfg.mesh.seed, cfg.mesh.lloyd_iterations)?;
                for (j, m) in h.levels.iter().enumerate() {
                    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
                    let p = out.join(format!("mesh_{finest}_seed{}_level{}.json", cfg.mesh.seed, j + 1));
                    save_mesh(m, &p)?;
                    println!("{} ({} cells, h = {:.4})", p.display(), m.num_cells(), m.h());
                }
            }
            Ok(())
        }
        Command::Mesh(MeshCommand::Validate { files }) => {
            if files.is_empty() {
                return Err(Error::Config("no mesh files given".into()).into());
            }
            let mut bad = 0;
            for f in files {
                let m = load_mesh(f)?;
                let rep = validate_mesh(&m);
                if rep.is_valid() {
                    println!("{}: ok ({} cells)", f.display(), m.num_cells());
                } else {
                    bad += 1;
                    println!("{}: {} violations", f.display(), rep.violations.len());
                    for v in &rep.violations {
                        println!("  {v:?}");
                    }
                }
            }
            if bad > 0 {
                return Err(acceptance(format!("{bad} mesh file(s) failed validation")));
            }
            Ok(())
        }
        Command::Run(RunCommand::Iterations) => {
            let lib = cfg.library();
            let rows = run_grid(&cfg, &cfg.solver.modes, &lib, log)?;
            let t = IterationsTable {
                rows,
                tol: cfg.solver.tol,
            };
            write(out, "iterations.csv", &t.csv())?;
            let text = t.render();
            write(out, "iterations.txt", &text)?;
            print!("{text}");
            check_converged(&t.rows)?;
            let d = t.disagreements();
            if !d.is_empty() {
                return Err(acceptance(format!("iteration counts differ across M for (set, m, J) = {d:?}")));
            }
            Ok(())
        }
        Command::Run(RunCommand::Convergence) => {
            let lib = cfg.library();
            let rows = run_grid(&cfg, &[cfg.solver.convergence_modes], &lib, log)?;
            let t = ConvergenceTable {
                rows,
                tol: cfg.solver.tol,
            };
            write(out, "convergence.csv", &t.csv())?;
            write(out, "convergence_spread.csv", &t.spread_csv())?;
            let text = t.render();
            write(out, "convergence.txt", &text)?;
            print!("{text}");
            check_converged(&t.rows)?;
            let wide: Vec<_> = t.spreads().into_iter().filter(|s| s.ratio() > 2.0).collect();
            if !wide.is_empty() {
                return Err(acceptance(format!("max/min rho above 2 for {wide:?}")));
            }
            let nm = t.non_monotone();
            if !nm.is_empty() {
                return Err(acceptance(format!("rho does not decrease with m for (set, J) = {nm:?}")));
            }
            Ok(())
        }
        Command::Validate => {
            let lib = cfg.library();
            let s = run_validation(&cfg, &lib, log)?;
            write(out, "validate.csv", &s.csv())?;
            let text = s.render();
            write(out, "validate.txt", &text)?;
            print!("{text}");
            if !s.all_passed() {
                let names: Vec<&str> = s.failures().iter().map(|c| c.name.as_str()).collect();
                return Err(acceptance(format!("failed checks: {}", names.join(", "))));
            }
            Ok(())
        }
        Command::TrainRb => {
            let dir = cfg.rb.cache_dir.clone().unwrap_or_else(|| out.clone());
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let lib = cfg.library().with_cache_dir(&dir);
            for &n in &cfg.rb.train_sizes {
                let c: std::sync::Arc<RbCompressor> = lib.get(n)?;
                println!(
                    "N = {n}: rank {}, energy captured by 1 mode {:.4}",
                    c.rank(),
                    c.energy_fraction(1)
                );
            }
            println!("compressors cached in {}", dir.display());
            Ok(())
        }
    }
}

fn check_converged(rows: &[RunRow]) -> Result<(), CliFailure> {
    match rows.iter().find(|r| !r.converged) {
        Some(r) => Err(CliFailure {
            code: EXIT_NUMERICAL,
            message: format!(
                "no convergence within max_iterations for set {}, m = {}, J = {}, M = {}",
                r.set, r.m, r.levels, r.modes
            ),
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn overrides_apply() {
        let cli = Cli::try_parse_from([
            "rbmg",
            "run",
            "iterations",
            "--seed",
            "7",
            "--restriction",
            "l2proj",
            "--tol",
            "1e-6",
        ])
        .unwrap();
        let cfg = resolve_config(&cli.global).unwrap();
        assert_eq!(cfg.mesh.seed, 7);
        assert_eq!(cfg.solver.restriction, Restriction::L2Projection);
        assert_eq!(cfg.solver.tol, 1e-6);
    }

    #[test]
    fn bad_override_is_a_config_error() {
        let cli = Cli::try_parse_from(["rbmg", "validate", "--tol", "2.0"]).unwrap();
        assert_eq!(resolve_config(&cli.global).unwrap_err().code, EXIT_CONFIG);
        assert!(Cli::try_parse_from(["rbmg", "validate", "--restriction", "x"]).is_err());
    }
}
