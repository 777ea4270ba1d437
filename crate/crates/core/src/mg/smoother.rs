use crate::numerics::{power_iteration, SparseSymMatrix};
use crate::Result;

/// Margin applied to the power-iteration estimate, which approaches the
/// largest eigenvalue from below.
pub const LAMBDA_SAFETY: f64 = 1.05;
pub const DEFAULT_LAMBDA_TOL: f64 = 1e-3;
const LAMBDA_MAX_ITER: usize = 10_000;
const LAMBDA_SEED: u64 = 0x5eed;

/// Safety-scaled estimate of the largest eigenvalue of `a`.
pub fn estimate_lambda(a: &SparseSymMatrix, tol_rel: f64) -> Result<f64> {
    Ok(LAMBDA_SAFETY * power_iteration(a, tol_rel, LAMBDA_MAX_ITER, LAMBDA_SEED)?)
}

/// `steps` Richardson updates `z <- z + (g - A z) / Λ`.
pub fn richardson(a: &SparseSymMatrix, g: &[f64], z: &mut [f64], lambda: f64, steps: usize) -> Result<()> {
    let mut az = vec![0.0; z.len()];
    let inv = 1.0 / lambda;
    for _ in 0..steps {
        a.spmv_into(z, &mut az)?;
        for i in 0..z.len() {
            z[i] += inv * (g[i] - az[i]);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{cholesky_solve, dot};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        b.transpose() * b + DMatrix::identity(n, n) * 0.1
    }

    #[test]
    fn lambda_of_simple_matrices() {
        let i = SparseSymMatrix::identity(7);
        assert!((estimate_lambda(&i, 1e-3).unwrap() - 1.05).abs() < 1e-12);
        let d = SparseSymMatrix::from_triplets(3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]).unwrap();
        assert!((estimate_lambda(&d, 1e-3).unwrap() / (3.0 * 1.05) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn lambda_matches_dense_eigensolver() {
        let d = random_spd(50, 8);
        let exact = d.clone().symmetric_eigen().eigenvalues.max();
        let est = estimate_lambda(&SparseSymMatrix::from_dense(&d).unwrap(), 1e-3).unwrap() / LAMBDA_SAFETY;
        assert!((est - exact).abs() < 1e-3 * exact, "{est} vs {exact}");
    }

    #[test]
    fn richardson_fixed_point_and_zero_steps() {
        let a = SparseSymMatrix::from_dense(&random_spd(10, 1)).unwrap();
        let z0: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let g = a.spmv(&z0).unwrap();
        let mut z = z0.clone();
        richardson(&a, &g, &mut z, 100.0, 5).unwrap();
        for i in 0..10 {
            assert!((z[i] - z0[i]).abs() < 1e-12);
        }
        let mut z = z0.clone();
        richardson(&a, &[0.0; 10], &mut z, 1.0, 0).unwrap();
        assert_eq!(z, z0);
    }

    #[test]
    fn richardson_error_energy_is_monotone() {
        let a = SparseSymMatrix::from_dense(&random_spd(30, 2)).unwrap();
        let lam = estimate_lambda(&a, 1e-6).unwrap();
        let g: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let exact = cholesky_solve(&a, &g).unwrap();
        let mut z = vec![0.0; 30];
        let energy = |z: &[f64]| {
            let e: Vec<f64> = z.iter().zip(&exact).map(|(a, b)| a - b).collect();
            dot(&e, &a.spmv(&e).unwrap())
        };
        let mut prev = energy(&z);
        for _ in 0..50 {
            richardson(&a, &g, &mut z, lam, 1).unwrap();
            let e = energy(&z);
            assert!(e <= prev * (1.0 + 1e-12));
            prev = e;
        }
    }
}
