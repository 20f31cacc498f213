//! Coherence and block-coherence measures, and the recovery-guarantee
//! predicates behind them.
//!
//! Block-coherence of a dictionary with orthonormal blocks:
//! `mu_B = max_{l != r} (1/d) rho(D[l]^H D[r])`. The conventional coherence
//! `mu = max_{l != r} |d_l^H d_r|` is the d=1 special case.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::norms::{rho_c, spectral_norm};
use crate::types::{BlockMatrix, BlockShape, SupportSet};

pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Reject unless every column of `d` has unit Euclidean norm.
pub fn validate_unit_columns(d: &BlockMatrix) -> Result<()> {
    for j in 0..d.ncols() {
        let norm = d.entries().column(j).norm();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::ColumnNotNormalized { col: j + 1, norm });
        }
    }
    Ok(())
}

/// Reject unless every column-block satisfies `D[l]^H D[l] = I_d`.
pub fn validate_orthonormal_blocks(d: &BlockMatrix) -> Result<()> {
    let dd = d.col_shape().block_len();
    for l in 0..d.col_shape().num_blocks() {
        let b = d.block(l);
        let gram = b.adjoint() * b;
        let deviation = (gram - DMatrix::<Complex64>::identity(dd, dd)).norm();
        if deviation > NORMALIZATION_TOL {
            return Err(Error::BlockNotOrthonormal { block: l + 1, deviation });
        }
    }
    Ok(())
}

/// Reject unless `a` is square with `A^H A = I`.
pub fn validate_unitary(a: &BlockMatrix) -> Result<()> {
    let n = a.ncols();
    if a.nrows() != n {
        return Err(Error::NotUnitary { deviation: f64::INFINITY });
    }
    let gram = a.entries().adjoint() * a.entries();
    let deviation = (gram - DMatrix::<Complex64>::identity(n, n)).norm();
    // Frobenius deviation grows with sqrt(N); scale the tolerance accordingly.
    if deviation > NORMALIZATION_TOL * (n as f64).sqrt() {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Conventional coherence: `max_{l != r} |d_l^H d_r|` over unit-norm columns.
pub fn coherence(d: &BlockMatrix) -> Result<f64> {
    validate_unit_columns(d)?;
    let g = d.entries().adjoint() * d.entries();
    let n = d.ncols();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                best = best.max(g[(i, j)].norm());
            }
        }
    }
    Ok(best)
}

/// Block-coherence `mu_B` over off-diagonal block pairs of `D^H D`.
pub fn block_coherence(d: &BlockMatrix) -> Result<f64> {
    validate_orthonormal_blocks(d)?;
    Ok(block_coherence_grid(d)?.off_diagonal_max())
}

/// The full `M x M` grid of `(1/d) rho(D^H[l] D[r])` values.
pub struct CoherenceGrid {
    pub values: DMatrix<f64>,
}

impl CoherenceGrid {
    pub fn off_diagonal_max(&self) -> f64 {
        let m = self.values.nrows();
        let mut best = 0.0f64;
        for l in 0..m {
            for r in 0..m {
                if l != r {
                    best = best.max(self.values[(l, r)]);
                }
            }
        }
        best
    }
}

pub fn block_coherence_grid(d: &BlockMatrix) -> Result<CoherenceGrid> {
    let dd = d.col_shape().block_len() as f64;
    let m = d.col_shape().num_blocks();
    let mut grid = DMatrix::zeros(m, m);
    for l in 0..m {
        for r in 0..m {
            let cross = d.block(l).adjoint() * d.block(r);
            grid[(l, r)] = spectral_norm(&cross) / dd;
        }
    }
    Ok(CoherenceGrid { values: grid })
}

/// Mutual block-coherence of two unitary bases with a common block shape:
/// max over ALL pairs (l, r), diagonal included, of `(1/d) rho(Phi^H[l] Psi[r])`.
pub fn mutual_block_coherence(phi: &BlockMatrix, psi: &BlockMatrix) -> Result<f64> {
    validate_unitary(phi)?;
    validate_unitary(psi)?;
    if phi.col_shape() != psi.col_shape() {
        return Err(Error::DimensionMismatch(
            "bases must share the same block shape".into(),
        ));
    }
    let dd = phi.col_shape().block_len() as f64;
    let m = phi.col_shape().num_blocks();
    let mut best = 0.0f64;
    for l in 0..m {
        for r in 0..m {
            let cross = phi.block(l).adjoint() * psi.block(r);
            best = best.max(spectral_norm(&cross) / dd);
        }
    }
    Ok(best)
}

/// Mutual (conventional) coherence of two unitary bases: `max |phi_l^H psi_r|`.
pub fn mutual_coherence(phi: &BlockMatrix, psi: &BlockMatrix) -> Result<f64> {
    validate_unitary(phi)?;
    validate_unitary(psi)?;
    let g = phi.entries().adjoint() * psi.entries();
    Ok(g.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Outcome of the exact-recovery certificate `rho_c(D0^+ Dbar0) < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErcCertificate {
    pub value: f64,
    pub holds: bool,
}

/// Evaluate the exact-recovery condition for a candidate support: the
/// certificate value is `rho_c(D0^+ Dbar0)` where `D0` gathers the support
/// blocks and `Dbar0` the rest. `holds` iff the value is below 1.
///
/// An empty complement yields value 0.
pub fn exact_recovery_condition(d: &BlockMatrix, support: &SupportSet) -> Result<ErcCertificate> {
    let dd = d.col_shape().block_len();
    let m = d.col_shape().num_blocks();
    let k = support.len();
    if k == 0 {
        return Err(Error::InvalidParam("support must be non-empty".into()));
    }
    if k * dd > d.nrows() {
        return Err(Error::InvalidParam(format!(
            "support of {k} blocks needs k*d={} <= L={}",
            k * dd,
            d.nrows()
        )));
    }
    let sorted = SupportSet::from_indices(support.sorted(), m)?;
    let d0 = d.columns_for_support(&sorted);
    let pinv = linalg::pseudo_inverse(&d0, linalg::RANK_TOL)
        .map_err(|e| match e {
            Error::RankDeficient { smin, smax, .. } => Error::RankDeficient {
                what: "support blocks D0 (uniqueness premise violated)".into(),
                smin,
                smax,
            },
            other => other,
        })?;
    let comp = sorted.complement(m);
    if comp.is_empty() {
        return Ok(ErcCertificate { value: 0.0, holds: true });
    }
    let dbar = {
        let comp_set = SupportSet::from_indices(comp, m)?;
        d.columns_for_support(&comp_set)
    };
    let prod = &pinv * &dbar;
    let shape = BlockShape::new(dd, prod.ncols() / dd)?;
    let value = rho_c(&BlockMatrix::new(shape, prod)?)?;
    Ok(ErcCertificate { value, holds: value < 1.0 })
}

/// Guaranteed recoverable sparsity levels from the coherence bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GuaranteedSparsity {
    /// Largest k with `k*d < (mu_B^-1 + d)/2`.
    pub k_block: usize,
    /// Largest scalar sparsity s with `s < (mu^-1 + 1)/2`.
    pub k_conventional: usize,
    /// False when mu_B = 0 and k_block is capped by the uniqueness bound
    /// floor(M/2) instead of the coherence bound.
    pub coherence_limited: bool,
}

fn largest_below(bound: f64, step: usize) -> usize {
    // largest k with k*step < bound
    let q = (bound / step as f64).ceil();
    if q < 1.0 {
        0
    } else {
        q as usize - 1
    }
}

/// Largest block-sparsity k guaranteed recoverable by BOMP and mixed l2/l1
/// (`kd < (mu_B^-1 + d)/2`), alongside the conventional-coherence guarantee
/// expressed in scalar nonzeros (`s < (mu^-1 + 1)/2`).
pub fn max_guaranteed_block_sparsity(d: &BlockMatrix) -> Result<GuaranteedSparsity> {
    let mu_b = block_coherence(d)?;
    let mu = coherence(d)?;
    let dd = d.col_shape().block_len();
    let m = d.col_shape().num_blocks();

    // numerically orthogonal blocks: the coherence bound is vacuous and the
    // uniqueness bound floor(M/2) governs instead
    let (k_block, coherence_limited) = if mu_b <= NORMALIZATION_TOL {
        (m / 2, false)
    } else {
        (largest_below((1.0 / mu_b + dd as f64) / 2.0, dd), true)
    };
    let k_conventional = if mu <= NORMALIZATION_TOL {
        d.ncols() / 2
    } else {
        largest_below((1.0 / mu + 1.0) / 2.0, 1)
    };
    Ok(GuaranteedSparsity { k_block, k_conventional, coherence_limited })
}

/// Full coherence diagnostics for a dictionary.
#[derive(Debug, Clone)]
pub struct CoherenceReport {
    pub mu: f64,
    pub mu_block: f64,
    pub d: usize,
    pub k_max_block: usize,
    pub k_max_conventional: usize,
    pub coherence_limited: bool,
    /// Pairwise `(1/d) rho(D^H[l] D[r])`; the diagonal is excluded from mu_block.
    pub grid: DMatrix<f64>,
}

pub fn coherence_report(dict: &BlockMatrix) -> Result<CoherenceReport> {
    let mu = coherence(dict)?;
    validate_orthonormal_blocks(dict)?;
    let grid = block_coherence_grid(dict)?;
    let mu_block = grid.off_diagonal_max();
    let g = max_guaranteed_block_sparsity(dict)?;
    Ok(CoherenceReport {
        mu,
        mu_block,
        d: dict.col_shape().block_len(),
        k_max_block: g.k_block,
        k_max_conventional: g.k_conventional,
        coherence_limited: g.coherence_limited,
        grid: grid.values,
    })
}
