//! Mixed l2/lp norms, block sparsity counting, and the block spectral
//! quantities rho_c / rho_r used by the recovery guarantees.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::types::{BlockMatrix, BlockVector};

/// Outer norm applied to the vector of per-block l2 norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedP {
    One,
    Two,
    Inf,
}

/// Per-block Euclidean norms `v_l = ||x[l]||_2`.
pub fn block_l2_norms(x: &BlockVector) -> Vec<f64> {
    (0..x.shape().num_blocks()).map(|l| x.block(l).norm()).collect()
}

/// Mixed l2/lp norm: the lp norm of the per-block l2 norms.
/// With p=2 this is the plain Euclidean norm of `x`.
pub fn mixed_norm(x: &BlockVector, p: MixedP) -> f64 {
    let v = block_l2_norms(x);
    match p {
        MixedP::One => v.iter().sum(),
        MixedP::Two => v.iter().map(|t| t * t).sum::<f64>().sqrt(),
        MixedP::Inf => v.into_iter().fold(0.0, f64::max),
    }
}

/// Number of blocks with l2 norm strictly above `tol`; at `tol = 0` this is
/// the block-sparsity level `||x||_{2,0}`.
pub fn block_sparsity(x: &BlockVector, tol: f64) -> usize {
    block_l2_norms(x).into_iter().filter(|&v| v > tol).count()
}

/// Largest singular value. Defined for any rectangular matrix; the guarantees
/// only ever need small `d x d` blocks so a full SVD is cheap.
pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

fn rho_c_impl(a: &BlockMatrix) -> Result<f64> {
    let r = a.row_blocks()?;
    let m = a.col_shape().num_blocks();
    let mut best = 0.0f64;
    for l in 0..m {
        let mut col_sum = 0.0;
        for rb in 0..r {
            col_sum += spectral_norm(&a.sub_block(rb, l).into_owned());
        }
        best = best.max(col_sum);
    }
    Ok(best)
}

/// `rho_c(A) = max_l sum_r rho(A[r,l])`: the largest block-column sum of
/// block spectral norms. Upper bound on the mixed operator norm `||A||_{2,1}`.
pub fn rho_c(a: &BlockMatrix) -> Result<f64> {
    rho_c_impl(a)
}

/// `rho_r(A) = rho_c(A^H)`: largest block-row sum, bounding `||A||_{2,inf}`.
pub fn rho_r(a: &BlockMatrix) -> Result<f64> {
    rho_c_impl(&a.adjoint_blocked()?)
}

fn ratio(a: &BlockMatrix, x: &DVector<Complex64>, p: MixedP) -> f64 {
    let row_shape = crate::types::BlockShape::new(
        a.col_shape().block_len(),
        a.nrows() / a.col_shape().block_len(),
    )
    .expect("row shape");
    let xv = BlockVector::new(a.col_shape(), x.clone()).expect("shape");
    let denom = mixed_norm(&xv, p);
    if denom == 0.0 {
        return 0.0;
    }
    let ax = BlockVector::new(row_shape, a.entries() * x).expect("shape");
    mixed_norm(&ax, p) / denom
}

/// Certified lower bound on the mixed operator norm `||A||_{2,p}` for
/// p in {1, inf}: the best ratio `||Ax||_{2,p} / ||x||_{2,p}` found over
/// `trials` random starts, each refined by random local ascent. Every value
/// returned is attained by some `x`, so the estimate never exceeds the true
/// norm. Deterministic for a fixed seed.
pub fn mixed_operator_norm_lower_bound(
    a: &BlockMatrix,
    p: MixedP,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    a.row_blocks()?;
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be >= 1".into()));
    }
    let n = a.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..trials {
        let mut x = DVector::from_fn(n, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let mut val = ratio(a, &x, p);
        let mut step = 0.5;
        for _ in 0..60 {
            let cand = DVector::from_fn(n, |i, _| {
                x[i] + step * Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let cv = ratio(a, &cand, p);
            if cv > val {
                val = cv;
                x = cand;
            } else {
                step *= 0.8;
            }
        }
        best = best.max(val);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::BlockShape;
    use approx::assert_relative_eq;

    fn bv(d: usize, m: usize, re: &[f64]) -> BlockVector {
        let shape = BlockShape::new(d, m).unwrap();
        BlockVector::new(
            shape,
            DVector::from_iterator(re.len(), re.iter().map(|&t| Complex64::new(t, 0.0))),
        )
        .unwrap()
    }

    #[test]
    fn block_norms_zero_and_triangle() {
        let z = BlockVector::zeros(BlockShape::new(3, 4).unwrap());
        assert_eq!(block_l2_norms(&z), vec![0.0; 4]);

        let x = bv(2, 2, &[3.0, 4.0, 0.0, 0.0]);
        assert_eq!(block_l2_norms(&x), vec![5.0, 0.0]);
    }

    #[test]
    fn block_norms_scalar_blocks_are_abs() {
        let x = bv(1, 3, &[1.0, -2.0, 0.5]);
        assert_eq!(block_l2_norms(&x), vec![1.0, 2.0, 0.5]);
    }

    #[test]
    fn mixed_norm_single_nonzero_block() {
        let x = bv(2, 2, &[3.0, 4.0, 0.0, 0.0]);
        assert_eq!(mixed_norm(&x, MixedP::One), 5.0);
        assert_eq!(mixed_norm(&x, MixedP::Inf), 5.0);
    }

    #[test]
    fn mixed_norm_d1_is_l1() {
        let x = bv(1, 4, &[1.0, -2.0, 3.0, -4.0]);
        assert_eq!(mixed_norm(&x, MixedP::One), 10.0);
        assert_eq!(mixed_norm(&x, MixedP::Inf), 4.0);
    }

    #[test]
    fn mixed_norm_p2_matches_direct_sum() {
        // direct summation oracle
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shape = BlockShape::new(3, 5).unwrap();
        let x = BlockVector::new(
            shape,
            DVector::from_fn(15, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }),
        )
        .unwrap();
        let direct: f64 = x.values().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert_relative_eq!(mixed_norm(&x, MixedP::Two), direct, epsilon = 1e-12);
    }

    #[test]
    fn sparsity_counts_blocks() {
        assert_eq!(block_sparsity(&BlockVector::zeros(BlockShape::new(2, 3).unwrap()), 0.0), 0);
        let x = bv(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(block_sparsity(&x, 0.0), 2);
        let x = bv(1, 4, &[1.0, 0.0, 3.0, 0.0]);
        assert_eq!(block_sparsity(&x, 0.0), 2); // equals ||x||_0 at d=1
    }

    #[test]
    fn spectral_norm_identity_and_scaled_unitary() {
        let i4 = DMatrix::<Complex64>::identity(4, 4);
        assert_relative_eq!(spectral_norm(&i4), 1.0, epsilon = 1e-12);
        // scaled rotation
        let c = Complex64::new(0.0, -2.5);
        let th: f64 = 0.7;
        let u = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(th.cos(), 0.0),
                Complex64::new(-th.sin(), 0.0),
                Complex64::new(th.sin(), 0.0),
                Complex64::new(th.cos(), 0.0),
            ],
        );
        assert_relative_eq!(spectral_norm(&(u * c)), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn spectral_norm_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(4, 4, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        // power iteration on A^H A
        let g = a.adjoint() * &a;
        let mut v = DVector::from_element(4, Complex64::new(1.0, 0.0));
        v /= Complex64::new(v.norm(), 0.0);
        let mut lam = 0.0;
        for _ in 0..500 {
            let w = &g * &v;
            lam = w.norm();
            v = w / Complex64::new(lam, 0.0);
        }
        assert_relative_eq!(spectral_norm(&a), lam.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn rho_of_identity_blocks() {
        let shape = BlockShape::new(2, 4).unwrap();
        let a = BlockMatrix::new(shape, DMatrix::identity(8, 8)).unwrap();
        assert_relative_eq!(rho_c(&a).unwrap(), 1.0);
        assert_relative_eq!(rho_r(&a).unwrap(), 1.0);

        let z = BlockMatrix::new(shape, DMatrix::zeros(8, 8)).unwrap();
        assert_eq!(rho_c(&z).unwrap(), 0.0);
    }

    #[test]
    fn rho_rejects_unblocked_rows() {
        let shape = BlockShape::new(2, 2).unwrap();
        let a = BlockMatrix::new(shape, DMatrix::zeros(5, 4)).unwrap();
        assert!(rho_c(&a).is_err());
    }

    #[test]
    fn rho_r_is_rho_c_of_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shape = BlockShape::new(2, 4).unwrap();
        let a = BlockMatrix::new(
            shape,
            DMatrix::from_fn(8, 8, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }),
        )
        .unwrap();
        let lhs = rho_r(&a).unwrap();
        let rhs = rho_c(&a.adjoint_blocked().unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn operator_norm_bound_identity() {
        let shape = BlockShape::new(2, 3).unwrap();
        let a = BlockMatrix::new(shape, DMatrix::identity(6, 6)).unwrap();
        for p in [MixedP::One, MixedP::Inf] {
            let v = mixed_operator_norm_lower_bound(&a, p, 5, 42).unwrap();
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn operator_norm_bound_below_rho_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let shape = BlockShape::new(2, 4).unwrap();
        let a = BlockMatrix::new(
            shape,
            DMatrix::from_fn(6, 8, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }),
        )
        .unwrap();
        let est1 = mixed_operator_norm_lower_bound(&a, MixedP::One, 20, 1).unwrap();
        assert!(est1 <= rho_c(&a).unwrap() + 1e-12);
        let esti = mixed_operator_norm_lower_bound(&a, MixedP::Inf, 20, 2).unwrap();
        assert!(esti <= rho_r(&a).unwrap() + 1e-12);
    }

    #[test]
    fn operator_norm_bound_rejects_zero_trials() {
        let shape = BlockShape::new(2, 2).unwrap();
        let a = BlockMatrix::new(shape, DMatrix::zeros(4, 4)).unwrap();
        assert!(mixed_operator_norm_lower_bound(&a, MixedP::One, 0, 0).is_err());
    }
}
