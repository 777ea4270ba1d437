use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use super::config::ExperimentConfig;
use crate::geometry::Point;
use crate::mesh::{build_hierarchy_with, MeshHierarchy};
use crate::mg::{solve, HierarchyOptions, MgConfig, MultigridHierarchy};
use crate::rbspace::RbLibrary;
use crate::Result;

/// `-Δu` for `u = sin(πx) sin(πy)`.
pub fn manufactured_source(p: Point) -> f64 {
    2.0 * PI * PI * (PI * p.x).sin() * (PI * p.y).sin()
}

pub fn manufactured_solution(p: Point) -> f64 {
    (PI * p.x).sin() * (PI * p.y).sin()
}

pub fn manufactured_gradient(p: Point) -> Point {
    Point::new(
        PI * (PI * p.x).cos() * (PI * p.y).sin(),
        PI * (PI * p.x).sin() * (PI * p.y).cos(),
    )
}

/// One multigrid solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    /// 1-based index of the mesh family.
    pub set: usize,
    pub finest: usize,
    pub m: usize,
    pub levels: usize,
    pub modes: usize,
    pub n_it: usize,
    pub rho: f64,
    pub converged: bool,
}

pub fn family_meshes(cfg: &ExperimentConfig, finest: usize) -> Result<MeshHierarchy> {
    build_hierarchy_with(finest, cfg.mesh.levels, cfg.mesh.seed, cfg.mesh.lloyd_iterations)
}

/// Solves every `(m, J)` of the config on one assembled hierarchy.
pub fn sweep_hierarchy(
    cfg: &ExperimentConfig,
    hier: &MultigridHierarchy,
    set: usize,
    finest: usize,
    modes: usize,
) -> Result<Vec<RunRow>> {
    let f = hier.finest().system.rhs.clone();
    let mut rows = Vec::new();
    for &m in &cfg.solver.smoothing {
        for &j in &cfg.solver.cycle_levels {
            let mg = MgConfig {
                tol: cfg.solver.tol,
                max_iterations: cfg.solver.max_iterations,
                restriction: cfg.solver.restriction,
                ..MgConfig::with_smoothing(m)
            };
            let (_, rep) = solve(hier, j, &f, &mg)?;
            rows.push(RunRow {
                set,
                finest,
                m,
                levels: j,
                modes,
                n_it: rep.n_it,
                rho: rep.rho,
                converged: rep.converged,
            });
        }
    }
    Ok(rows)
}

/// Runs the `(family, M, m, J)` grid. `progress` receives one line per
/// assembled hierarchy.
pub fn run_grid(
    cfg: &ExperimentConfig,
    modes: &[usize],
    library: &RbLibrary,
    mut progress: impl FnMut(&str),
) -> Result<Vec<RunRow>> {
    let mut rows = Vec::new();
    for (s, &finest) in cfg.mesh.families.iter().enumerate() {
        let meshes = family_meshes(cfg, finest)?;
        for &mm in modes {
            let opts = HierarchyOptions {
                modes: mm,
                restriction: cfg.solver.restriction,
                ..Default::default()
            };
            let hier = MultigridHierarchy::build(&meshes, manufactured_source, opts, library)?;
            progress(&format!("set {} ({} cells), M = {mm}: hierarchy ready", s + 1, finest));
            rows.extend(sweep_hierarchy(cfg, &hier, s + 1, finest, mm)?);
        }
    }
    Ok(rows)
}

/// Iteration counts for several `M` side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationsTable {
    pub rows: Vec<RunRow>,
    pub tol: f64,
}

impl IterationsTable {
    /// `(set, m, J)` triples whose counts differ across `M`.
    pub fn disagreements(&self) -> Vec<(usize, usize, usize)> {
        let mut by_key: BTreeMap<(usize, usize, usize), Vec<usize>> = BTreeMap::new();
        for r in &self.rows {
            by_key.entry((r.set, r.m, r.levels)).or_default().push(r.n_it);
        }
        by_key
            .into_iter()
            .filter(|(_, v)| v.iter().any(|&n| n != v[0]))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("set,finest,m,levels,M,n_it,rho,converged\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:.6e},{}",
                r.set, r.finest, r.m, r.levels, r.modes, r.n_it, r.rho, r.converged
            );
        }
        s
    }

    /// Plain-text layout: one block per set, `J` groups of `M` columns.
    pub fn render(&self) -> String {
        let mut out = format!("W-cycle, Richardson smoother, tol = {:e}\n", self.tol);
        for set in distinct(self.rows.iter().map(|r| r.set)) {
            let rows: Vec<&RunRow> = self.rows.iter().filter(|r| r.set == set).collect();
            let ms = distinct(rows.iter().map(|r| r.m));
            let js = distinct(rows.iter().map(|r| r.levels));
            let modes = distinct(rows.iter().map(|r| r.modes));
            let _ = writeln!(out, "\nSet {set} ({} cells)", rows[0].finest);
            let mut head = format!("{:<8}", "");
            let mut sub = format!("{:<8}", "M");
            for j in &js {
                head += &format!("|{:^width$}", format!("{j} levels"), width = 6 * modes.len());
                sub += "|";
                for mm in &modes {
                    sub += &format!("{mm:>6}");
                }
            }
            let _ = writeln!(out, "{head}\n{sub}");
            for m in &ms {
                let mut line = format!("{:<8}", format!("m={m}"));
                for j in &js {
                    line += "|";
                    for mm in &modes {
                        let cell = rows
                            .iter()
                            .find(|r| r.m == *m && r.levels == *j && r.modes == *mm)
                            .map_or("-".to_string(), |r| r.n_it.to_string());
                        line += &format!("{cell:>6}");
                    }
                }
                let _ = writeln!(out, "{line}");
            }
        }
        out
    }
}

/// Convergence factors for a single `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<RunRow>,
    pub tol: f64,
}

/// Spread of ρ over the level counts of one `(set, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSpread {
    pub set: usize,
    pub m: usize,
    pub min: f64,
    pub max: f64,
}

impl RhoSpread {
    pub fn ratio(&self) -> f64 {
        self.max / self.min
    }
}

impl ConvergenceTable {
    pub fn spreads(&self) -> Vec<RhoSpread> {
        let mut by_key: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
        for r in &self.rows {
            let e = by_key.entry((r.set, r.m)).or_insert((f64::INFINITY, 0.0));
            e.0 = e.0.min(r.rho);
            e.1 = e.1.max(r.rho);
        }
        by_key
            .into_iter()
            .map(|((set, m), (min, max))| RhoSpread { set, m, min, max })
            .collect()
    }

    /// `(set, J)` pairs where ρ fails to decrease strictly with `m`.
    pub fn non_monotone(&self) -> Vec<(usize, usize)> {
        let mut by_key: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
        for r in &self.rows {
            by_key.entry((r.set, r.levels)).or_default().push((r.m, r.rho));
        }
        by_key
            .into_iter()
            .filter_map(|(k, mut v)| {
                v.sort_by_key(|p| p.0);
                v.windows(2).any(|w| w[1].1 >= w[0].1).then_some(k)
            })
            .collect()
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("set,finest,m,levels,rho,n_it,converged\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.6e},{},{}",
                r.set, r.finest, r.m, r.levels, r.rho, r.n_it, r.converged
            );
        }
        s
    }

    pub fn spread_csv(&self) -> String {
        let mut s = String::from("set,m,rho_min,rho_max,ratio\n");
        for sp in self.spreads() {
            let _ = writeln!(s, "{},{},{:.6e},{:.6e},{:.4}", sp.set, sp.m, sp.min, sp.max, sp.ratio());
        }
        s
    }

    pub fn render(&self) -> String {
        let modes = self.rows.first().map_or(0, |r| r.modes);
        let mut out = format!(
            "W-cycle, Richardson smoother, tol = {:e}, M = {modes}\n",
            self.tol
        );
        let spreads = self.spreads();
        for set in distinct(self.rows.iter().map(|r| r.set)) {
            let rows: Vec<&RunRow> = self.rows.iter().filter(|r| r.set == set).collect();
            let js = distinct(rows.iter().map(|r| r.levels));
            let _ = writeln!(out, "\nSet {set} ({} cells)", rows[0].finest);
            let mut head = format!("{:<8}", "");
            for j in &js {
                head += &format!("{:>14}", format!("{j} levels"));
            }
            let _ = writeln!(out, "{head}{:>10}", "max/min");
            for m in distinct(rows.iter().map(|r| r.m)) {
                let mut line = format!("{:<8}", format!("m={m}"));
                for j in &js {
                    let cell = rows
                        .iter()
                        .find(|r| r.m == m && r.levels == *j)
                        .map_or("-".to_string(), |r| format!("{:.4} ({})", r.rho, r.n_it));
                    line += &format!("{cell:>14}");
                }
                let ratio = spreads
                    .iter()
                    .find(|s| s.set == set && s.m == m)
                    .map_or(f64::NAN, RhoSpread::ratio);
                let _ = writeln!(out, "{line}{ratio:>10.3}");
            }
        }
        out
    }
}

fn distinct<I: Iterator<Item = usize>>(it: I) -> Vec<usize> {
    let mut v: Vec<usize> = it.collect();
    v.sort_unstable();
    v.dedup();
    v
}
