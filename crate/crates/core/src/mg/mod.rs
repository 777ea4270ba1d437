//! Non-nested W-cycle multigrid with Richardson smoothing and rb-based L2
//! transfers.

mod cycle;
mod hierarchy;
mod smoother;

pub use cycle::{convergence_factor, solve, w_cycle, MgConfig, MgReport};
pub use hierarchy::{HierarchyOptions, LoadRule, MgLevel, MultigridHierarchy, Stabilization};
pub use smoother::{estimate_lambda, richardson, DEFAULT_LAMBDA_TOL, LAMBDA_SAFETY};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_hierarchy;
    use crate::numerics::{cholesky_solve, dot, norm2};
    use crate::rbspace::RbLibrary;
    use std::f64::consts::PI;

    fn source(p: crate::geometry::Point) -> f64 {
        2.0 * PI * PI * (PI * p.x).sin() * (PI * p.y).sin()
    }

    fn hierarchy(finest: usize, levels: usize, seed: u64) -> MultigridHierarchy {
        let meshes = build_hierarchy(finest, levels, seed).unwrap();
        MultigridHierarchy::build(&meshes, source, HierarchyOptions::default(), &RbLibrary::default()).unwrap()
    }

    #[test]
    fn convergence_factor_formula() {
        assert!((convergence_factor(&[1.0, 0.01]).unwrap() - 0.01).abs() < 1e-15);
        assert!((convergence_factor(&[1.0, 0.1, 0.01]).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(convergence_factor(&[1.0]), Err(crate::Error::EmptyHistory)));
    }

    #[test]
    fn single_level_is_a_direct_solve() {
        let h = hierarchy(32, 1, 1);
        let f = h.finest().system.rhs.clone();
        let (u, rep) = solve(&h, 1, &f, &MgConfig::default()).unwrap();
        assert_eq!(rep.n_it, 1);
        let r: Vec<f64> = f.iter().zip(h.finest().system.matrix.spmv(&u).unwrap()).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) < 1e-12 * norm2(&f));
    }

    #[test]
    fn zero_source_converges_immediately() {
        let h = hierarchy(128, 2, 2);
        let f = vec![0.0; h.finest().num_dofs()];
        let (u, rep) = solve(&h, 2, &f, &MgConfig::default()).unwrap();
        assert_eq!(rep.n_it, 1);
        assert!(u.iter().all(|&x| x == 0.0));
        assert_eq!(rep.history.len(), 2);
    }

    #[test]
    fn two_level_cycle_reduces_residual_tenfold() {
        let h = hierarchy(128, 2, 3);
        let f = h.finest().system.rhs.clone();
        let cfg = MgConfig::with_smoothing(8);
        let z = w_cycle(&h, 0, 1, &f, &vec![0.0; f.len()], &cfg).unwrap();
        let r: Vec<f64> = f.iter().zip(h.finest().system.matrix.spmv(&z).unwrap()).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) < 0.1 * norm2(&f), "{}", norm2(&r) / norm2(&f));
    }

    #[test]
    fn exact_solution_is_a_fixed_point() {
        let h = hierarchy(128, 2, 4);
        let a = &h.finest().system.matrix;
        let f = h.finest().system.rhs.clone();
        let exact = cholesky_solve(a, &f).unwrap();
        let z = w_cycle(&h, 0, 1, &f, &exact, &MgConfig::with_smoothing(3)).unwrap();
        let r: Vec<f64> = f.iter().zip(a.spmv(&z).unwrap()).map(|(a, b)| a - b).collect();
        let r_in: Vec<f64> = f.iter().zip(a.spmv(&exact).unwrap()).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) <= norm2(&r_in) + 1e-12 * norm2(&f));
    }

    #[test]
    fn multigrid_matches_direct_solve() {
        let h = hierarchy(512, 3, 5);
        let a = &h.finest().system.matrix;
        let f = h.finest().system.rhs.clone();
        let (u, rep) = solve(&h, 3, &f, &MgConfig::with_smoothing(3)).unwrap();
        rep.ensure_converged().unwrap();
        let exact = cholesky_solve(a, &f).unwrap();
        let e: Vec<f64> = u.iter().zip(&exact).map(|(a, b)| a - b).collect();
        let rel = (dot(&e, &a.spmv(&e).unwrap()) / dot(&exact, &a.spmv(&exact).unwrap())).sqrt();
        assert!(rel < 1e-7, "{rel}");
        assert_eq!(rep.history.len(), rep.n_it + 1);
        assert!(rep.rho > 0.0 && rep.rho < 1.0);
    }

    #[test]
    fn invalid_configuration_is_rejected() {
        let h = hierarchy(32, 1, 1);
        let f = h.finest().system.rhs.clone();
        let cfg = MgConfig {
            m1: 0,
            m2: 0,
            ..Default::default()
        };
        assert!(matches!(solve(&h, 1, &f, &cfg), Err(crate::Error::Config(_))));
        assert!(solve(&h, 2, &f, &MgConfig::default()).is_err());
    }
}
