//! Dictionary construction: per-block orthonormalization `D = A W`, the
//! maximally block-incoherent basis pair `(I, F (x) U)`, uniqueness
//! certification by exhaustive rank checks, and seeded random generators
//! for experiments.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::types::{BlockMatrix, BlockShape, BlockVector, SupportSet};

/// Result of writing `D = A W` with orthonormal blocks `A[l]` and an
/// invertible block-diagonal `W`.
#[derive(Debug, Clone)]
pub struct OrthonormalizedDictionary {
    /// Dictionary with orthonormal blocks spanning the same block subspaces.
    pub a: BlockMatrix,
    /// Block-diagonal N x N factor; `A * W` reconstructs the original.
    pub w: DMatrix<Complex64>,
}

impl OrthonormalizedDictionary {
    /// Transport coefficients: `c = W x` has the same block support as `x`.
    pub fn transport(&self, x: &BlockVector) -> Result<BlockVector> {
        if x.shape() != self.a.col_shape() {
            return Err(Error::DimensionMismatch("coefficient shape mismatch".into()));
        }
        BlockVector::new(x.shape(), &self.w * x.values())
    }
}

/// Factor each block as `D[l] = A[l] W_l` via QR with real-positive diagonal,
/// so the output is unique. Rank-deficient blocks are rejected: even a single
/// dependent block breaks the uniqueness premise.
pub fn orthonormalize_blocks(d: &BlockMatrix) -> Result<OrthonormalizedDictionary> {
    let shape = d.col_shape();
    let dd = shape.block_len();
    let n = shape.dim();
    let mut a = DMatrix::zeros(d.nrows(), n);
    let mut w = DMatrix::zeros(n, n);
    for l in 0..shape.num_blocks() {
        let (q, r) = linalg::thin_qr_positive(&d.block(l).into_owned());
        let diag_max = (0..dd).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
        let diag_min = (0..dd).map(|i| r[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if diag_max == 0.0 || diag_min <= linalg::RANK_TOL * diag_max {
            return Err(Error::RankDeficient {
                what: format!("dictionary block {}", l + 1),
                smin: diag_min,
                smax: diag_max,
            });
        }
        a.columns_mut(l * dd, dd).copy_from(&q);
        w.view_mut((l * dd, l * dd), (dd, dd)).copy_from(&r);
    }
    Ok(OrthonormalizedDictionary { a: BlockMatrix::new(shape, a)?, w })
}

/// The unitary M-point DFT matrix `F_{l,r} = (1/sqrt(M)) exp(+j 2 pi l r / M)`
/// with 0-based indices.
pub fn dft_matrix(m: usize) -> DMatrix<Complex64> {
    let scale = 1.0 / (m as f64).sqrt();
    DMatrix::from_fn(m, m, |l, r| {
        let angle = 2.0 * std::f64::consts::PI * (l as f64) * (r as f64) / (m as f64);
        Complex64::from_polar(scale, angle)
    })
}

/// Kronecker product (small operands only).
pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Build the maximally block-incoherent pair `Phi = I_N`, `Psi = F (x) U`
/// with `F` the M-point unitary DFT and `U` an arbitrary d x d unitary
/// (identity by default). The pair attains `mu_B = 1/sqrt(dN)`.
pub fn build_incoherent_pair(
    m: usize,
    d: usize,
    u: Option<&DMatrix<Complex64>>,
) -> Result<(BlockMatrix, BlockMatrix)> {
    let shape = BlockShape::new(d, m)?;
    let n = shape.dim();
    let u_owned;
    let u = match u {
        Some(u) => {
            if u.nrows() != d || u.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "U must be {d} x {d}, got {} x {}",
                    u.nrows(),
                    u.ncols()
                )));
            }
            let deviation = (u.adjoint() * u - DMatrix::<Complex64>::identity(d, d)).norm();
            if deviation > 1e-10 * (d as f64).sqrt() {
                return Err(Error::NotUnitary { deviation });
            }
            u
        }
        None => {
            u_owned = DMatrix::<Complex64>::identity(d, d);
            &u_owned
        }
    };
    let phi = BlockMatrix::new(shape, DMatrix::identity(n, n))?;
    let psi = BlockMatrix::new(shape, kron(&dft_matrix(m), u))?;
    Ok((phi, psi))
}

/// Concatenate two bases into the two-basis dictionary `D = [Phi  Psi]`.
pub fn concat_pair(phi: &BlockMatrix, psi: &BlockMatrix) -> Result<BlockMatrix> {
    if phi.col_shape() != psi.col_shape() || phi.nrows() != psi.nrows() {
        return Err(Error::DimensionMismatch("pair dimensions differ".into()));
    }
    let d = phi.col_shape().block_len();
    let shape = BlockShape::new(d, 2 * phi.col_shape().num_blocks())?;
    let mut entries = DMatrix::zeros(phi.nrows(), shape.dim());
    entries.columns_mut(0, phi.ncols()).copy_from(phi.entries());
    entries
        .columns_mut(phi.ncols(), psi.ncols())
        .copy_from(psi.entries());
    BlockMatrix::new(shape, entries)
}

/// Outcome of the exhaustive uniqueness certification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Uniqueness {
    /// Every candidate support of min(2k, M) blocks has full column rank.
    Unique,
    /// A rank-deficient support exists; the lexicographically first witness.
    NotUnique(SupportSet),
}

/// Decide whether every block k-sparse representation in `D` is unique by
/// checking full column rank on every support of `min(2k, M)` blocks.
/// Refuses (rather than silently passing) when the subset count exceeds
/// `budget`.
pub fn uniqueness_check(d: &BlockMatrix, k: usize, budget: u64) -> Result<Uniqueness> {
    if k == 0 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    let m = d.col_shape().num_blocks();
    let dd = d.col_shape().block_len();
    let t = (2 * k).min(m);
    let subsets = binomial(m as u128, t as u128);
    if subsets > budget as u128 {
        return Err(Error::BudgetExceeded { subsets, budget });
    }
    if t * dd > d.nrows() {
        // more columns than rows: every such support is rank deficient
        let witness = SupportSet::from_indices(0..t, m)?;
        return Ok(Uniqueness::NotUnique(witness));
    }
    for combo in (0..m).combinations(t) {
        let support = SupportSet::from_indices(combo, m)?;
        let cols = d.columns_for_support(&support);
        if linalg::rank(&cols, linalg::RANK_TOL) < t * dd {
            return Ok(Uniqueness::NotUnique(support));
        }
    }
    Ok(Uniqueness::Unique)
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Random dictionary: i.i.d. complex Gaussian entries, then each block
/// orthonormalized. Deterministic for a fixed seed.
pub fn random_block_dictionary(l: usize, m: usize, d: usize, seed: u64) -> Result<BlockMatrix> {
    if l < d {
        return Err(Error::InvalidParam(format!("need L >= d, got L={l}, d={d}")));
    }
    let shape = BlockShape::new(d, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = linalg::complex_gaussian(l, shape.dim(), &mut rng);
    let raw = BlockMatrix::new(shape, g)?;
    Ok(orthonormalize_blocks(&raw)?.a)
}

/// How the nonzero blocks of a generated signal are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeModel {
    /// i.i.d. standard complex Gaussian entries.
    #[default]
    Gaussian,
    /// Gaussian direction normalized to a unit-norm block.
    UnitNormBlocks,
}

/// Random block k-sparse vector: uniformly random k-subset of blocks, each
/// filled per the amplitude model. Deterministic for a fixed seed.
pub fn random_block_sparse_vector(
    shape: BlockShape,
    k: usize,
    seed: u64,
    model: AmplitudeModel,
) -> Result<BlockVector> {
    let m = shape.num_blocks();
    if k > m {
        return Err(Error::InvalidParam(format!("k={k} exceeds M={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks: Vec<usize> = (0..m).collect();
    blocks.shuffle(&mut rng);
    let mut chosen: Vec<usize> = blocks.into_iter().take(k).collect();
    chosen.sort_unstable();
    let d = shape.block_len();
    let mut values = DVector::zeros(shape.dim());
    for &l in &chosen {
        let mut b = DVector::from_fn(d, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        if model == AmplitudeModel::UnitNormBlocks {
            let norm = b.norm();
            if norm > 0.0 {
                b /= Complex64::new(norm, 0.0);
            }
        }
        values.rows_mut(l * d, d).copy_from(&b);
    }
    BlockVector::new(shape, values)
}

/// The block support a generator with this seed produces (for harness truth).
pub fn support_of(x: &BlockVector, rel_tol: f64) -> SupportSet {
    let norms = crate::norms::block_l2_norms(x);
    let max = norms.iter().cloned().fold(0.0, f64::max);
    let mut s = SupportSet::new();
    for (l, &v) in norms.iter().enumerate() {
        if v > rel_tol * max {
            s.insert(l);
        }
    }
    s
}
