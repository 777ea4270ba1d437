use std::time::Instant;

use serde::Serialize;

use super::hierarchy::MultigridHierarchy;
use super::smoother::{richardson, DEFAULT_LAMBDA_TOL, LAMBDA_SAFETY};
use crate::numerics::norm2;
use crate::transfer::Restriction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MgConfig {
    pub m1: usize,
    pub m2: usize,
    pub tol: f64,
    pub max_iterations: usize,
    pub restriction: Restriction,
    pub lambda_tol: f64,
}

impl Default for MgConfig {
    fn default() -> Self {
        MgConfig {
            m1: 3,
            m2: 3,
            tol: 1e-8,
            max_iterations: 200,
            restriction: Restriction::Algebraic,
            lambda_tol: DEFAULT_LAMBDA_TOL,
        }
    }
}

impl MgConfig {
    /// Symmetric smoothing, `m1 = m2 = m`.
    pub fn with_smoothing(m: usize) -> Self {
        MgConfig {
            m1: m,
            m2: m,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m1 + self.m2 == 0 {
            return Err(Error::Config("at least one smoothing step is required".into()));
        }
        if !(self.tol > 0.0) || !(self.lambda_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgReport {
    pub n_it: usize,
    /// Euclidean residual norms, `n_it + 1` entries.
    pub history: Vec<f64>,
    pub rho: f64,
    /// Safety-scaled Λ of each level used, coarse to fine (the coarsest is
    /// solved directly and listed as 0).
    pub lambdas: Vec<f64>,
    pub lambda_safety: f64,
    pub wall_time_s: f64,
    pub converged: bool,
}

impl MgReport {
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::MaxIterationsExceeded {
                iterations: self.n_it,
                residual: self.history.last().copied().unwrap_or(f64::NAN),
            })
        }
    }
}

/// `exp(log(r_n / r_0) / n)` over a residual history.
pub fn convergence_factor(history: &[f64]) -> Result<f64> {
    if history.len() < 2 {
        return Err(Error::EmptyHistory);
    }
    let n = (history.len() - 1) as f64;
    let (r0, rn) = (history[0], history[history.len() - 1]);
    if r0 == 0.0 || rn == 0.0 {
        return Ok(0.0);
    }
    Ok(((rn / r0).ln() / n).exp())
}

/// One W-cycle at hierarchy level `j` for a run whose coarsest level is `lo`.
pub fn w_cycle(
    hier: &MultigridHierarchy,
    lo: usize,
    j: usize,
    g: &[f64],
    z0: &[f64],
    cfg: &MgConfig,
) -> Result<Vec<f64>> {
    if j == lo {
        return hier.coarse_factor(j)?.solve(g);
    }
    let a = &hier.levels[j].system.matrix;
    let lambda = hier.lambda(j, cfg.lambda_tol)?;
    let mut z = z0.to_vec();
    richardson(a, g, &mut z, lambda, cfg.m1)?;

    let az = a.spmv(&z)?;
    let r: Vec<f64> = g.iter().zip(&az).map(|(g, a)| g - a).collect();
    let transfer = &hier.transfers[j - 1];
    let rc = transfer.restrict_to_dual_as(cfg.restriction, &r)?;
    let zero = vec![0.0; rc.len()];
    let e_bar = w_cycle(hier, lo, j - 1, &rc, &zero, cfg)?;
    let e = w_cycle(hier, lo, j - 1, &rc, &e_bar, cfg)?;
    let correction = transfer.prolong(&e)?;
    for (zi, ci) in z.iter_mut().zip(&correction) {
        *zi += ci;
    }

    richardson(a, g, &mut z, lambda, cfg.m2)?;
    Ok(z)
}

/// W-cycle iteration from `u_0 = 0` using the finest `levels` levels of the
/// hierarchy, until the relative residual drops below `cfg.tol`.
pub fn solve(hier: &MultigridHierarchy, levels: usize, f: &[f64], cfg: &MgConfig) -> Result<(Vec<f64>, MgReport)> {
    cfg.validate()?;
    let total = hier.num_levels();
    if levels == 0 || levels > total {
        return Err(Error::Config(format!("cannot run {levels} levels on a {total}-level hierarchy")));
    }
    let top = total - 1;
    let lo = total - levels;
    let a = &hier.levels[top].system.matrix;
    if f.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: f.len(),
        });
    }
    let start = Instant::now();
    let lambdas = (lo..=top)
        .map(|k| if k == lo { Ok(0.0) } else { hier.lambda(k, cfg.lambda_tol) })
        .collect::<Result<Vec<_>>>()?;

    let mut u = vec![0.0; f.len()];
    let r0 = norm2(f);
    let mut history = vec![r0];
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        u = w_cycle(hier, lo, top, f, &u, cfg)?;
        let au = a.spmv(&u)?;
        let r = norm2(&f.iter().zip(&au).map(|(f, a)| f - a).collect::<Vec<_>>());
        history.push(r);
        if !r.is_finite() {
            return Err(Error::SolverFailure(format!("residual became {r}")));
        }
        if r0 == 0.0 || r < cfg.tol * r0 {
            converged = true;
            break;
        }
    }
    let rho = convergence_factor(&history)?;
    Ok((
        u,
        MgReport {
            n_it: history.len() - 1,
            history,
            rho,
            lambdas,
            lambda_safety: LAMBDA_SAFETY,
            wall_time_s: start.elapsed().as_secs_f64(),
            converged,
        },
    ))
}
