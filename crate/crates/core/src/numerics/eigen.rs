use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, norm2, SparseSymMatrix};
use crate::{Error, Result};

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration with a seeded random start.
///
/// Stops once the Rayleigh quotient changes by less than `tol_rel` relative
/// and the remaining change, extrapolated from the observed geometric rate,
/// is below the same bound. A bare step-change test stops far from the limit
/// when the top of the spectrum is clustered.
pub fn power_iteration(
    a: &SparseSymMatrix,
    tol_rel: f64,
    max_iter: usize,
    seed: u64,
) -> Result<f64> {
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut y = vec![0.0; n];
    let mut lambda = 0.0;
    let mut prev_step = f64::INFINITY;
    for it in 0..max_iter {
        a.spmv_into(&x, &mut y)?;
        let new = dot(&x, &y);
        let ny = norm2(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        if it > 0 {
            let step = (new - lambda).abs();
            let q = step / prev_step;
            let tail = if q < 1.0 { step * q / (1.0 - q) } else { f64::INFINITY };
            let bound = tol_rel * new.abs();
            if step <= bound && (tail <= bound || step == 0.0) {
                return Ok(new);
            }
            prev_step = step;
        }
        lambda = new;
        for i in 0..n {
            x[i] = y[i] / ny;
        }
    }
    Err(Error::NonConvergence(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn diagonal_matrix() {
        let a = SparseSymMatrix::from_triplets(3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]).unwrap();
        let l = power_iteration(&a, 1e-6, 10_000, 0).unwrap();
        assert!((l - 3.0).abs() < 3e-3);
    }

    #[test]
    fn random_spd_against_dense_eigensolver() {
        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let d = b.transpose() * &b + DMatrix::identity(n, n);
        let exact = d.clone().symmetric_eigen().eigenvalues.max();
        let a = SparseSymMatrix::from_dense(&d).unwrap();
        let l = power_iteration(&a, 1e-6, 10_000, 0).unwrap();
        assert!(((l - exact) / exact).abs() < 1e-3);
    }
}
