//! Recovery algorithms: block orthogonal matching pursuit, the constrained
//! mixed l2/l1 program solved by operator splitting, their d=1 reductions,
//! and an exhaustive support-search oracle for verification.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::types::{BlockMatrix, BlockShape, BlockVector, SupportSet};

/// Which solver produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Bomp,
    L21,
    Omp,
    Oracle,
}

impl Algorithm {
    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::Bomp => "bomp",
            Algorithm::L21 => "l21",
            Algorithm::Omp => "omp",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bomp" => Ok(Algorithm::Bomp),
            "l21" => Ok(Algorithm::L21),
            "omp" => Ok(Algorithm::Omp),
            "oracle" => Ok(Algorithm::Oracle),
            other => Err(Error::InvalidParam(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Solver tuning knobs. The recovery programs themselves are parameter-free;
/// these control the iterative methods and support extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub max_iterations: usize,
    /// Stopping residual for BOMP when k is unknown, relative to ||y||.
    pub residual_tol: f64,
    /// Splitting penalty rho.
    pub penalty: f64,
    pub primal_tol: f64,
    pub dual_tol: f64,
    /// Block-norm cutoff for support extraction, relative to the largest block.
    pub support_threshold: f64,
    /// Re-fit least squares on the detected support after the convex solve.
    pub debias: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            residual_tol: 1e-8,
            penalty: 1.0,
            primal_tol: 1e-8,
            dual_tol: 1e-8,
            support_threshold: 1e-6,
            debias: true,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParam("maxIterations must be >= 1".into()));
        }
        if self.penalty <= 0.0 {
            return Err(Error::InvalidParam("penalty must be > 0".into()));
        }
        for (name, v) in [
            ("residualTol", self.residual_tol),
            ("primalTol", self.primal_tol),
            ("dualTol", self.dual_tol),
            ("supportThreshold", self.support_threshold),
        ] {
            if !(v >= 0.0) {
                return Err(Error::InvalidParam(format!("{name} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Output of a recovery solve.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub x_hat: BlockVector,
    /// Block support; for BOMP the iteration order is the selection order.
    pub support: SupportSet,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub algorithm: Algorithm,
}

/// Joint least squares restricted to the given blocks; zero outside the
/// support, residual orthogonal to every selected column.
pub fn least_squares_on_support(
    d: &BlockMatrix,
    support: &SupportSet,
    y: &DVector<Complex64>,
) -> Result<BlockVector> {
    let shape = d.col_shape();
    if y.len() != d.nrows() {
        return Err(Error::DimensionMismatch("y length != dictionary rows".into()));
    }
    let mut x = BlockVector::zeros(shape);
    if support.is_empty() {
        return Ok(x);
    }
    let cols = d.columns_for_support(support);
    let c = linalg::least_squares(&cols, y).map_err(|e| match e {
        Error::RankDeficient { smin, smax, .. } => Error::RankDeficient {
            what: "selected support blocks".into(),
            smin,
            smax,
        },
        other => other,
    })?;
    let dd = shape.block_len();
    let mut values = x.into_values();
    for (j, &l) in support.iter().enumerate() {
        values.rows_mut(l * dd, dd).copy_from(&c.rows(j * dd, dd));
    }
    x = BlockVector::new(shape, values)?;
    Ok(x)
}

/// One recorded BOMP stage: the residual entering the stage and the block
/// selected from it. Used by instrumented tests to verify selection ratios.
#[derive(Debug, Clone)]
pub struct BompStage {
    pub residual_before: DVector<Complex64>,
    pub selected: usize,
}

/// Block OMP. Starting from `r_0 = y`, each stage selects the not-yet-chosen
/// block maximizing `||D^H[i] r||_2` (ties break to the lowest index), refits
/// all chosen blocks jointly by least squares, and updates the residual.
/// Runs `k` stages when `k` is given, otherwise until the relative residual
/// drops below `params.residual_tol` or `M` stages have run.
pub fn bomp(
    d: &BlockMatrix,
    y: &DVector<Complex64>,
    k: Option<usize>,
    params: &SolverParams,
) -> Result<RecoveryResult> {
    Ok(bomp_traced(d, y, k, params)?.0)
}

/// As [`bomp`], additionally returning the per-stage trace.
pub fn bomp_traced(
    d: &BlockMatrix,
    y: &DVector<Complex64>,
    k: Option<usize>,
    params: &SolverParams,
) -> Result<(RecoveryResult, Vec<BompStage>)> {
    params.validate()?;
    crate::coherence::validate_orthonormal_blocks(d)?;
    let shape = d.col_shape();
    let m = shape.num_blocks();
    let dd = shape.block_len();
    if y.len() != d.nrows() {
        return Err(Error::DimensionMismatch("y length != dictionary rows".into()));
    }
    if let Some(k) = k {
        if k == 0 {
            return Err(Error::InvalidParam("k must be >= 1 when given".into()));
        }
        if k * dd > d.nrows() {
            return Err(Error::InvalidParam(format!(
                "k*d = {} exceeds L = {}",
                k * dd,
                d.nrows()
            )));
        }
    }
    let y_norm = y.norm();
    let max_stages = k.unwrap_or(m).min(m);
    let tol = params.residual_tol * y_norm;

    let mut support = SupportSet::new();
    let mut x_hat = BlockVector::zeros(shape);
    let mut residual = y.clone();
    let mut trace = Vec::new();
    let mut stages = 0usize;

    while stages < max_stages && residual.norm() > tol {
        let mut best = (0usize, -1.0f64);
        for i in 0..m {
            if support.contains(i) {
                continue;
            }
            let corr = (d.block(i).adjoint() * &residual).norm();
            if corr > best.1 {
                best = (i, corr);
            }
        }
        trace.push(BompStage { residual_before: residual.clone(), selected: best.0 });
        support.insert(best.0);
        x_hat = least_squares_on_support(d, &support, y)?;
        residual = y - d.mul_vector(&x_hat)?;
        stages += 1;
    }

    let residual_norm = residual.norm();
    let converged = match k {
        Some(_) => true,
        None => residual_norm <= tol || y_norm == 0.0,
    };
    Ok((
        RecoveryResult {
            x_hat,
            support,
            residual_norm,
            iterations: stages,
            converged,
            algorithm: Algorithm::Bomp,
        },
        trace,
    ))
}

/// Conventional OMP: BOMP on the same matrix under the d=1 partition.
pub fn omp(
    d: &BlockMatrix,
    y: &DVector<Complex64>,
    k: Option<usize>,
    params: &SolverParams,
) -> Result<RecoveryResult> {
    let scalar = d.as_scalar_blocks();
    let mut r = bomp(&scalar, y, k, params)?;
    r.algorithm = Algorithm::Omp;
    Ok(r)
}

fn block_soft_threshold(v: &DVector<Complex64>, shape: BlockShape, thresh: f64) -> DVector<Complex64> {
    let dd = shape.block_len();
    let mut out = v.clone();
    for l in 0..shape.num_blocks() {
        let norm = v.rows(l * dd, dd).norm();
        let scale = if norm > thresh { 1.0 - thresh / norm } else { 0.0 };
        for i in l * dd..(l + 1) * dd {
            out[i] *= Complex64::new(scale, 0.0);
        }
    }
    out
}

/// Solve `min sum_l ||x[l]||_2  s.t.  y = D x` by operator splitting:
/// alternating exact projection onto the affine constraint with the block
/// soft-thresholding proximal step. Non-convergence returns the best iterate
/// with `converged = false`; a `y` outside the range of `D` is an error.
///
/// When `params.debias` is set, the detected support is refit by least
/// squares, which restores exact feasibility and sharpens coefficients to
/// well below first-order solver accuracy.
pub fn l21_minimize(
    d: &BlockMatrix,
    y: &DVector<Complex64>,
    params: &SolverParams,
) -> Result<RecoveryResult> {
    params.validate()?;
    let shape = d.col_shape();
    let n = shape.dim();
    if y.len() != d.nrows() {
        return Err(Error::DimensionMismatch("y length != dictionary rows".into()));
    }
    let y_norm = y.norm();
    if y_norm == 0.0 {
        return Ok(RecoveryResult {
            x_hat: BlockVector::zeros(shape),
            support: SupportSet::new(),
            residual_norm: 0.0,
            iterations: 0,
            converged: true,
            algorithm: Algorithm::L21,
        });
    }

    // Rank-truncated SVD of D for the projection x -> x - D^+(Dx - y).
    let svd = d.entries().clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd u");
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let smax = svd.singular_values.max();
    let rank: usize = svd
        .singular_values
        .iter()
        .filter(|&&s| s > linalg::RANK_TOL * smax)
        .count();
    let ur = u.columns(0, rank).into_owned();
    let vr = vt.rows(0, rank).adjoint();
    let sinv = DVector::from_iterator(rank, svd.singular_values.iter().take(rank).map(|s| 1.0 / s));
    // D^+ = Vr diag(sinv) Ur^H
    let pinv_apply = |w: &DVector<Complex64>| -> DVector<Complex64> {
        let mut t = ur.adjoint() * w;
        for i in 0..rank {
            t[i] *= Complex64::new(sinv[i], 0.0);
        }
        &vr * t
    };

    // Feasibility: y must lie in the range of D.
    let dy = pinv_apply(y);
    let proj_residual = (y - d.entries() * &dy).norm() / y_norm;
    if proj_residual > 1e-8 {
        return Err(Error::Infeasible { residual: proj_residual });
    }

    let rho = params.penalty;
    let project = |z: &DVector<Complex64>| -> DVector<Complex64> {
        let miss = d.entries() * z - y;
        z - pinv_apply(&miss)
    };

    let mut z = DVector::<Complex64>::zeros(n);
    let mut dual = DVector::<Complex64>::zeros(n);
    let mut x = project(&z);
    let mut converged = false;
    let mut iterations = 0usize;
    for it in 1..=params.max_iterations {
        x = project(&(&z - &dual));
        let z_prev = z.clone();
        z = block_soft_threshold(&(&x + &dual), shape, 1.0 / rho);
        dual += &x - &z;
        iterations = it;

        let primal = (&x - &z).norm();
        let dual_res = rho * (&z - &z_prev).norm();
        let scale = x.norm().max(z.norm()).max(1.0);
        if primal <= params.primal_tol * scale && dual_res <= params.dual_tol * scale {
            converged = true;
            break;
        }
    }

    // Support from the sparse iterate, then optional debias.
    let z_bv = BlockVector::new(shape, z)?;
    let support = crate::dictionary::support_of(&z_bv, params.support_threshold);
    let x_hat = if params.debias && !support.is_empty() {
        least_squares_on_support(d, &support, y)?
    } else {
        // zero out off-support blocks of the feasible iterate
        let dd = shape.block_len();
        let mut values = x.clone();
        for l in 0..shape.num_blocks() {
            if !support.contains(l) {
                for i in l * dd..(l + 1) * dd {
                    values[i] = Complex64::new(0.0, 0.0);
                }
            }
        }
        BlockVector::new(shape, values)?
    };
    let residual_norm = (y - d.mul_vector(&x_hat)?).norm();
    Ok(RecoveryResult {
        x_hat,
        support,
        residual_norm,
        iterations,
        converged,
        algorithm: Algorithm::L21,
    })
}

/// Exhaustive search over all k-block supports: least squares on each,
/// returning the support with minimum residual (ties break to the
/// lexicographically smallest support). Refuses when `C(M,k)` exceeds
/// `budget`.
pub fn oracle_support_search(
    d: &BlockMatrix,
    y: &DVector<Complex64>,
    k: usize,
    budget: u64,
) -> Result<RecoveryResult> {
    use itertools::Itertools;
    let m = d.col_shape().num_blocks();
    if k == 0 || k > m {
        return Err(Error::InvalidParam(format!("k={k} out of range [1, {m}]")));
    }
    let count = (0..m).combinations(k).count() as u128;
    if count > budget as u128 {
        return Err(Error::BudgetExceeded { subsets: count, budget });
    }
    let mut best: Option<(f64, SupportSet, BlockVector)> = None;
    for combo in (0..m).combinations(k) {
        let support = SupportSet::from_indices(combo, m)?;
        let x = match least_squares_on_support(d, &support, y) {
            Ok(x) => x,
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        };
        let res = (y - d.mul_vector(&x)?).norm();
        // strict improvement keeps the lexicographically first tie winner
        let better = match &best {
            None => true,
            Some((b, _, _)) => res < *b - 1e-14 * y.norm().max(1.0),
        };
        if better {
            best = Some((res, support, x));
        }
    }
    let (residual_norm, support, x_hat) =
        best.ok_or_else(|| Error::InvalidParam("no feasible support found".into()))?;
    Ok(RecoveryResult {
        x_hat,
        support,
        residual_norm,
        iterations: 0,
        converged: true,
        algorithm: Algorithm::Oracle,
    })
}
