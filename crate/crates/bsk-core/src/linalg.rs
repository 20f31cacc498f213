//! Small dense complex linear-algebra helpers shared by the solvers:
//! SVD-based pseudo-inverse, rank detection, and least squares.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Numerical rank: number of singular values above `tol * s_max`.
pub fn rank(a: &DMatrix<Complex64>, tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Moore–Penrose pseudo-inverse, rejecting rank-deficient input.
/// The guarantees assume full column rank, so near-singularity is an error
/// rather than something to regularize away.
pub fn pseudo_inverse(a: &DMatrix<Complex64>, tol: f64) -> Result<DMatrix<Complex64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin <= tol * smax {
        return Err(Error::RankDeficient { what: "matrix".into(), smin, smax });
    }
    svd.pseudo_inverse(tol * smax)
        .map_err(|m| Error::InvalidParam(m.to_string()))
}

/// Minimum-norm least-squares solution of `A c = y` for full-column-rank `A`.
pub fn least_squares(a: &DMatrix<Complex64>, y: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    let pinv = pseudo_inverse(a, RANK_TOL)?;
    Ok(pinv * y)
}

/// Complex standard Gaussian matrix (real and imaginary parts i.i.d. N(0,1)).
pub fn complex_gaussian(
    rows: usize,
    cols: usize,
    rng: &mut impl rand::Rng,
) -> DMatrix<Complex64> {
    use rand_distr::StandardNormal;
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Thin QR with the phase convention "diagonal of R real positive", making
/// the factorization unique for full-rank input. Returns (Q, R) with Q of
/// size rows x cols and R cols x cols.
pub fn thin_qr_positive(a: &DMatrix<Complex64>) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    let k = r.nrows().min(r.ncols());
    for i in 0..k {
        let rii = r[(i, i)];
        if rii.norm() > 0.0 {
            let phase = rii / rii.norm();
            // scale row i of R by conj(phase)/|.| factor, column i of Q by phase
            for j in 0..r.ncols() {
                r[(i, j)] *= phase.conj();
            }
            for j in 0..q.nrows() {
                q[(j, i)] *= phase;
            }
        }
    }
    (q, r)
}

/// Random unitary matrix via QR of a complex Gaussian sample.
pub fn random_unitary(n: usize, rng: &mut impl rand::Rng) -> DMatrix<Complex64> {
    let g = complex_gaussian(n, n, rng);
    thin_qr_positive(&g).0
}
