//! Verifier for the block-sparse uncertainty relation: the block-sparsity
//! levels of one signal's expansions in two unitary bases obey
//! `(A+B)/2 >= sqrt(AB) >= 1/(d mu_B(Phi, Psi))`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::coherence::{mutual_block_coherence, mutual_coherence, validate_unitary};
use crate::error::{Error, Result};
use crate::norms::{block_l2_norms, block_sparsity};
use crate::types::{BlockMatrix, BlockVector};

/// Result of checking the uncertainty chain on one signal and basis pair.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyReport {
    /// Block-sparsity of the expansion in Phi.
    pub a_sparsity: usize,
    /// Block-sparsity of the expansion in Psi.
    pub b_sparsity: usize,
    pub geometric_mean: f64,
    pub arithmetic_mean: f64,
    /// `1 / (d mu_B(Phi, Psi))`.
    pub block_bound: f64,
    /// `1 / (d mu(Phi, Psi))`, the bound derived from conventional coherence.
    pub conventional_bound: f64,
    pub holds: bool,
}

/// Expansion coefficients of `x` in the unitary basis `phi`: `a[l] = Phi^H[l] x`.
pub fn expand_in_basis(x: &DVector<Complex64>, phi: &BlockMatrix) -> Result<BlockVector> {
    validate_unitary(phi)?;
    if x.len() != phi.nrows() {
        return Err(Error::DimensionMismatch("x length != basis dimension".into()));
    }
    BlockVector::new(phi.col_shape(), phi.entries().adjoint() * x)
}

fn counting_threshold(a: &BlockVector, tol: f64) -> f64 {
    // relative to the largest block norm; exact expansions leak ~1e-15
    tol * block_l2_norms(a).into_iter().fold(0.0, f64::max)
}

/// Expand `x` in both bases, count block sparsities at the relative
/// tolerance `tol`, and evaluate the uncertainty chain.
pub fn uncertainty_check(
    x: &DVector<Complex64>,
    phi: &BlockMatrix,
    psi: &BlockMatrix,
    tol: f64,
) -> Result<UncertaintyReport> {
    if x.norm() == 0.0 {
        return Err(Error::ZeroVector(
            "uncertainty relation is vacuous for x = 0".into(),
        ));
    }
    if phi.col_shape() != psi.col_shape() {
        return Err(Error::DimensionMismatch("bases must share a block shape".into()));
    }
    let a = expand_in_basis(x, phi)?;
    let b = expand_in_basis(x, psi)?;
    let a_sparsity = block_sparsity(&a, counting_threshold(&a, tol));
    let b_sparsity = block_sparsity(&b, counting_threshold(&b, tol));
    let d = phi.col_shape().block_len() as f64;
    let mu_b = mutual_block_coherence(phi, psi)?;
    let mu = mutual_coherence(phi, psi)?;
    let geometric_mean = ((a_sparsity * b_sparsity) as f64).sqrt();
    let arithmetic_mean = (a_sparsity + b_sparsity) as f64 / 2.0;
    let block_bound = 1.0 / (d * mu_b);
    let conventional_bound = 1.0 / (d * mu);
    let holds = geometric_mean >= block_bound - 1e-9;
    Ok(UncertaintyReport {
        a_sparsity,
        b_sparsity,
        geometric_mean,
        arithmetic_mean,
        block_bound,
        conventional_bound,
        holds,
    })
}

/// The two lower bounds side by side: the block bound `1/(d mu_B)` is never
/// below the bound `1/(d mu)` implied by conventional coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundComparison {
    pub block_bound: f64,
    pub conventional_derived_bound: f64,
}

pub fn conventional_uncertainty_comparison(
    x: &DVector<Complex64>,
    phi: &BlockMatrix,
    psi: &BlockMatrix,
    tol: f64,
) -> Result<BoundComparison> {
    let report = uncertainty_check(x, phi, psi, tol)?;
    Ok(BoundComparison {
        block_bound: report.block_bound,
        conventional_derived_bound: report.conventional_bound,
    })
}
