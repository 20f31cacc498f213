//! Property tests for the norm and coherence layers.

use bsk_core::coherence::{block_coherence, coherence};
use bsk_core::dictionary::random_block_dictionary;
use bsk_core::linalg;
use bsk_core::norms::{
    block_l2_norms, block_sparsity, mixed_norm, rho_c, rho_r, spectral_norm, MixedP,
};
use bsk_core::{BlockMatrix, BlockShape, BlockVector, Complex64};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), n)
}

fn to_bv(shape: BlockShape, raw: &[(f64, f64)]) -> BlockVector {
    BlockVector::new(
        shape,
        DVector::from_iterator(raw.len(), raw.iter().map(|&(re, im)| Complex64::new(re, im))),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn mixed_norm_d1_matches_classical(raw in complex_vec(8)) {
        let shape = BlockShape::new(1, 8).unwrap();
        let x = to_bv(shape, &raw);
        let l1: f64 = x.values().iter().map(|z| z.norm()).sum();
        let linf: f64 = x.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!((mixed_norm(&x, MixedP::One) - l1).abs() <= 1e-10 * (1.0 + l1));
        prop_assert!((mixed_norm(&x, MixedP::Inf) - linf).abs() <= 1e-10 * (1.0 + linf));
    }

    #[test]
    fn mixed_norm_axioms(raw in complex_vec(12), raw2 in complex_vec(12),
                         sre in -4.0f64..4.0, sim in -4.0f64..4.0) {
        let shape = BlockShape::new(3, 4).unwrap();
        let x = to_bv(shape, &raw);
        let y = to_bv(shape, &raw2);
        let alpha = Complex64::new(sre, sim);
        for p in [MixedP::One, MixedP::Two, MixedP::Inf] {
            let scaled = BlockVector::new(shape, x.values() * alpha).unwrap();
            prop_assert!(
                (mixed_norm(&scaled, p) - alpha.norm() * mixed_norm(&x, p)).abs()
                    <= 1e-10 * (1.0 + mixed_norm(&x, p))
            );
            let sum = BlockVector::new(shape, x.values() + y.values()).unwrap();
            prop_assert!(
                mixed_norm(&sum, p) <= mixed_norm(&x, p) + mixed_norm(&y, p) + 1e-10
            );
        }
    }

    #[test]
    fn spectral_norm_entry_bound(raw in complex_vec(16)) {
        // rho(A) <= d * max |A_ij| for d x d A
        let a = DMatrix::from_iterator(4, 4, raw.iter().map(|&(re, im)| Complex64::new(re, im)));
        let max_entry = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(spectral_norm(&a) <= 4.0 * max_entry + 1e-10);
    }

    #[test]
    fn block_sparsity_counts_match_norms(raw in complex_vec(12), tol in 0.0f64..5.0) {
        let shape = BlockShape::new(2, 6).unwrap();
        let x = to_bv(shape, &raw);
        let expected = block_l2_norms(&x).into_iter().filter(|&v| v > tol).count();
        prop_assert_eq!(block_sparsity(&x, tol), expected);
    }

    #[test]
    fn rho_c_bounds_block_column_gain(a_raw in complex_vec(48), v_raw in complex_vec(8)) {
        // ||A v||_{2,1} <= rho_c(A) ||v||_{2,1}
        let shape = BlockShape::new(2, 4).unwrap();
        let a = BlockMatrix::new(
            shape,
            DMatrix::from_iterator(6, 8, a_raw.iter().map(|&(re, im)| Complex64::new(re, im))),
        )
        .unwrap();
        let v = to_bv(shape, &v_raw);
        prop_assume!(block_l2_norms(&v).into_iter().all(|t| t > 1e-6));
        let av = BlockVector::new(
            BlockShape::new(2, 3).unwrap(),
            a.entries() * v.values(),
        )
        .unwrap();
        let lhs = mixed_norm(&av, MixedP::One);
        let rhs = rho_c(&a).unwrap() * mixed_norm(&v, MixedP::One);
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn rho_r_equals_rho_c_of_adjoint(raw in complex_vec(64)) {
        let shape = BlockShape::new(2, 4).unwrap();
        let a = BlockMatrix::new(
            shape,
            DMatrix::from_iterator(8, 8, raw.iter().map(|&(re, im)| Complex64::new(re, im))),
        )
        .unwrap();
        prop_assert_eq!(
            rho_r(&a).unwrap(),
            rho_c(&a.adjoint_blocked().unwrap()).unwrap()
        );
    }
}

#[test]
fn coherence_bounds_on_random_dictionaries() {
    // 0 <= mu_B <= 1 and mu_B <= mu
    for seed in 0..50 {
        let d = random_block_dictionary(12, 6, 2, seed).unwrap();
        let mu_b = block_coherence(&d).unwrap();
        let mu = coherence(&d).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&mu_b), "seed {seed}");
        assert!(mu_b <= mu + 1e-12, "seed {seed}");
    }
}

#[test]
fn scalar_l0_bounded_by_block_count() {
    // ||a||_0 <= d ||a||_{2,0}
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let shape = BlockShape::new(3, 5).unwrap();
    for _ in 0..50 {
        let x = BlockVector::new(
            shape,
            linalg::complex_gaussian(15, 1, &mut rng).column(0).into_owned(),
        )
        .unwrap();
        let l0 = x.values().iter().filter(|z| z.norm() > 0.0).count();
        assert!(l0 <= 3 * block_sparsity(&x, 0.0));
    }
}
