use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::experiments::{manufactured_gradient, manufactured_source};
use crate::mesh::{build_hierarchy_with, generate_polygonal_mesh, validate as validate_mesh, PolygonalMesh};
use crate::mg::{solve, HierarchyOptions, MgConfig, MultigridHierarchy};
use crate::numerics::{dot, CholeskyFactor};
use crate::rbspace::{build_level_bases, level_mass_matrix, ElementRbBasis, RbLibrary};
use crate::transfer::{cross_mass, supermesh_area, RbLevel, Restriction, TransferOperator};
use crate::vem::{assemble, energy_error, local_stiffness, DiscreteSystem};
use crate::Result;

/// Outcome of one validation check: `value` must lie in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            value,
            lo: f64::NEG_INFINITY,
            hi,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            value,
            lo,
            hi,
        }
    }

    pub fn passed(&self) -> bool {
        self.value >= self.lo && self.value <= self.hi
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationSummary {
    pub checks: Vec<Check>,
}

impl ValidationSummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("check,value,lower,upper,passed\n");
        for c in &self.checks {
            let _ = writeln!(s, "{},{:.6e},{:e},{:e},{}", c.name, c.value, c.lo, c.hi, c.passed());
        }
        s
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let bound = match (c.lo.is_finite(), c.hi.is_finite()) {
                (true, true) => format!("in [{}, {}]", c.lo, c.hi),
                (false, true) => format!("<= {:e}", c.hi),
                (true, false) => format!(">= {:e}", c.lo),
                (false, false) => String::from("any"),
            };
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{tag}  {:<40} {:>12.4e}  {bound}", c.name, c.value);
        }
        s
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// H¹-seminorm errors of the direct VEM solution for each count; returns `(h, error)` pairs.
pub fn energy_errors(counts: &[usize], seed: u64, lloyd: usize) -> Result<Vec<(f64, f64)>> {
    counts
        .iter()
        .map(|&n| {
            let m = generate_polygonal_mesh(n, seed, lloyd)?;
            let s = assemble(&m, manufactured_source)?;
            let u = CholeskyFactor::new(&s.matrix)?.solve(&s.rhs)?;
            Ok((m.h(), energy_error(&m, &s, &u, manufactured_gradient)?))
        })
        .collect()
}

/// Largest error of `Π∇` applied to the vertex values of random linears, over all cells.
pub fn projector_reproduction(mesh: &PolygonalMesh, system: &DiscreteSystem, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for (c, p) in system.projectors.iter().enumerate() {
        let (a, b, d) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let q = |x: crate::geometry::Point| a + b * x.x + d * x.y;
        let vals: Vec<f64> = mesh.cell_points(c).into_iter().map(q).collect();
        for &v in p.vertices() {
            worst = worst.max((p.eval_projection(&vals, v) - q(v)).abs());
        }
        let centroid = mesh.centroid(c);
        worst = worst.max((p.eval_projection(&vals, centroid) - q(centroid)).abs());
    }
    worst
}

/// `max_K max_node |Σ_i e^rb_i - 1|`.
pub fn partition_of_unity_error(bases: &[ElementRbBasis]) -> f64 {
    bases
        .iter()
        .flat_map(|b| (0..b.values.nrows()).map(move |r| (b.values.row(r).sum() - 1.0).abs()))
        .fold(0.0, f64::max)
}

/// Largest `|(∇ẽ_i, ∇q)_K|` over linear `q ∈ {x, y}` (scaled by the diameter), relative
/// to the largest diagonal entry of the stabilization.
pub fn tilde_orthogonality_error(bases: &[ElementRbBasis]) -> f64 {
    let mut worst = 0.0f64;
    for b in bases {
        let tilde = b.tilde();
        let nodes = &b.sub.nodes;
        let n = tilde.ncols();
        let mut x = DMatrix::zeros(nodes.len(), n + 2);
        x.columns_mut(0, n).copy_from(&tilde);
        for (r, p) in nodes.iter().enumerate() {
            x[(r, n)] = (p.x - b.centroid.x) / b.diameter;
            x[(r, n + 1)] = (p.y - b.centroid.y) / b.diameter;
        }
        let g = b.energy_gram(&x);
        let scale = (0..n).map(|i| g[(i, i)]).fold(1.0, f64::max);
        for i in 0..n {
            for a in n..n + 2 {
                worst = worst.max(g[(i, a)].abs() / scale);
            }
        }
    }
    worst
}

/// Largest entrywise difference between the discrete form evaluated on rb
/// basis pairs and the VEM stiffness, relative to the largest stiffness entry.
pub fn consistency_identity_error(system: &DiscreteSystem, bases: &[ElementRbBasis]) -> f64 {
    bases
        .iter()
        .zip(&system.projectors)
        .map(|(b, p)| {
            let k = local_stiffness(p);
            (b.consistency_matrix(p) - &k).amax() / k.amax()
        })
        .fold(0.0, f64::max)
}

struct Level {
    mesh: PolygonalMesh,
    system: DiscreteSystem,
    bases: Vec<ElementRbBasis>,
    mass: crate::numerics::SparseSymMatrix,
}

impl Level {
    fn build(mesh: PolygonalMesh, lib: &RbLibrary, modes: usize) -> Result<Self> {
        let system = assemble(&mesh, manufactured_source)?;
        let bases = build_level_bases(&mesh, &system.projectors, lib, modes)?;
        let mass = level_mass_matrix(&mesh, &bases, &system.dofs)?;
        Ok(Level {
            mesh,
            system,
            bases,
            mass,
        })
    }

    fn view(&self) -> RbLevel<'_> {
        RbLevel {
            mesh: &self.mesh,
            bases: &self.bases,
            dofs: &self.system.dofs,
        }
    }
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Runs the discretization, rb-space, transfer and multigrid checks.
pub fn run_validation(cfg: &ExperimentConfig, library: &RbLibrary, mut progress: impl FnMut(&str)) -> Result<ValidationSummary> {
    let v = &cfg.validate;
    let lloyd = cfg.mesh.lloyd_iterations;
    let mut checks = Vec::new();

    let errs = energy_errors(&v.counts, v.seed, lloyd)?;
    let (h, e): (Vec<f64>, Vec<f64>) = errs.into_iter().unzip();
    checks.push(Check::within("vem_h1_rate", log_log_slope(&h, &e), 0.85, 1.3));
    progress("manufactured-solution study done");

    let meshes = build_hierarchy_with(v.finest, v.levels, v.seed, lloyd)?;
    let modes = cfg.solver.modes.first().copied().unwrap_or(1);
    let levels: Vec<Level> = meshes
        .levels
        .iter()
        .map(|m| Level::build(m.clone(), library, modes))
        .collect::<Result<_>>()?;
    let violations: usize = meshes.levels.iter().map(|m| validate_mesh(m).violations.len()).sum();
    checks.push(Check::at_most("mesh_violations", violations as f64, 0.0));

    let mut repro = 0.0f64;
    let (mut pou, mut orth, mut cons) = (0.0f64, 0.0f64, 0.0f64);
    for (j, l) in levels.iter().enumerate() {
        repro = repro.max(projector_reproduction(&l.mesh, &l.system, j as u64));
        pou = pou.max(partition_of_unity_error(&l.bases));
        orth = orth.max(tilde_orthogonality_error(&l.bases));
        cons = cons.max(consistency_identity_error(&l.system, &l.bases));
    }
    checks.push(Check::at_most("projector_linear_reproduction", repro, 1e-12));
    checks.push(Check::at_most("rb_partition_of_unity", pou, 1e-8));
    checks.push(Check::at_most("rb_tilde_a_orthogonality", orth, 1e-10));
    checks.push(Check::at_most("rb_consistency_identity", cons, 1e-12));
    progress("rb-space checks done");

    let mut area_err = 0.0f64;
    let mut duality = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
    for k in 1..levels.len() {
        let (c, f) = (&levels[k - 1], &levels[k]);
        area_err = area_err.max((supermesh_area(c.view(), f.view()) - 1.0).abs());
        let b = cross_mass(c.view(), f.view())?;
        let op = TransferOperator::new((k - 1, k), b, f.mass.clone(), c.mass.clone(), Restriction::Algebraic)?;
        let x = random_vec(c.system.num_dofs(), &mut rng);
        let r = random_vec(f.system.num_dofs(), &mut rng);
        let lhs = dot(&op.restrict_residual(&r)?, &x);
        let rhs = dot(&r, &op.prolong(&x)?);
        duality = duality.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    checks.push(Check::at_most("supermesh_area_conservation", area_err, 1e-8));
    checks.push(Check::at_most("prolong_restrict_duality", duality, 1e-10));

    let same = &levels[0];
    let b = cross_mass(same.view(), same.view())?;
    let op = TransferOperator::new((0, 0), b, same.mass.clone(), same.mass.clone(), Restriction::Algebraic)?;
    let x = random_vec(same.system.num_dofs(), &mut rng);
    let px = op.prolong(&x)?;
    let ident = px.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("identical_mesh_prolongation", ident, 1e-10));
    progress("transfer checks done");

    let opts = HierarchyOptions {
        modes,
        restriction: cfg.solver.restriction,
        ..Default::default()
    };
    let hier = MultigridHierarchy::build(&meshes, manufactured_source, opts, library)?;
    let fine = hier.finest();
    let f = fine.system.rhs.clone();
    let direct = CholeskyFactor::new(&fine.system.matrix)?.solve(&f)?;
    let mg_cfg = MgConfig {
        tol: cfg.solver.tol.min(1e-10),
        max_iterations: cfg.solver.max_iterations,
        restriction: cfg.solver.restriction,
        ..MgConfig::with_smoothing(cfg.solver.smoothing[0])
    };
    let (u, _) = solve(&hier, hier.num_levels(), &f, &mg_cfg)?;
    let diff: Vec<f64> = u.iter().zip(&direct).map(|(a, b)| a - b).collect();
    let a = &fine.system.matrix;
    let rel = (dot(&diff, &a.spmv(&diff)?) / dot(&direct, &a.spmv(&direct)?)).sqrt();
    checks.push(Check::at_most("mg_vs_direct_energy", rel, 1e-7));
    progress("multigrid check done");

    Ok(ValidationSummary { checks })
}
