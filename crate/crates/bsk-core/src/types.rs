//! Block-partitioned vectors and matrices.
//!
//! A vector of length `N = M*d` is viewed as `M` consecutive blocks of
//! length `d`; a matrix with `N` columns is viewed as `M` column-blocks of
//! width `d`. Block indices are 0-based internally and 1-based in CLI
//! output and reports.

use nalgebra::{DMatrix, DMatrixView, DVector, DVectorView};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform block partition: `M` blocks of length `d`, total dimension `N = M*d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockShape {
    d: usize,
    m: usize,
}

impl BlockShape {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidParam(format!(
                "block shape needs d >= 1 and M >= 1, got d={d}, M={m}"
            )));
        }
        Ok(Self { d, m })
    }

    /// Block length `d`.
    pub fn block_len(&self) -> usize {
        self.d
    }

    /// Number of blocks `M`.
    pub fn num_blocks(&self) -> usize {
        self.m
    }

    /// Total dimension `N = M*d`.
    pub fn dim(&self) -> usize {
        self.m * self.d
    }

    /// Column range of block `l` (0-based).
    pub fn block_range(&self, l: usize) -> std::ops::Range<usize> {
        debug_assert!(l < self.m);
        l * self.d..(l + 1) * self.d
    }

    /// The d=1 partition of the same dimension.
    pub fn scalar(&self) -> BlockShape {
        BlockShape { d: 1, m: self.dim() }
    }
}

/// Complex coefficient vector partitioned into `M` length-`d` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    shape: BlockShape,
    values: DVector<Complex64>,
}

impl BlockVector {
    pub fn new(shape: BlockShape, values: DVector<Complex64>) -> Result<Self> {
        if values.len() != shape.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} does not match shape N={}",
                values.len(),
                shape.dim()
            )));
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: BlockShape) -> Self {
        let n = shape.dim();
        Self { shape, values: DVector::zeros(n) }
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn values(&self) -> &DVector<Complex64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<Complex64> {
        self.values
    }

    /// View of block `l` (0-based).
    pub fn block(&self, l: usize) -> DVectorView<'_, Complex64> {
        self.values.rows(l * self.shape.d, self.shape.d)
    }

    /// Same coefficients under the d=1 partition.
    pub fn as_scalar_blocks(&self) -> BlockVector {
        BlockVector { shape: self.shape.scalar(), values: self.values.clone() }
    }
}

/// Dense complex `L x N` matrix whose columns carry a uniform block partition.
///
/// Used both for dictionaries (`L <= N`, unit-norm or orthonormal-block
/// columns) and for square unitary bases. Row count `L` need not be a
/// multiple of `d` unless an operation partitions rows as well.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    col_shape: BlockShape,
    entries: DMatrix<Complex64>,
}

impl BlockMatrix {
    pub fn new(col_shape: BlockShape, entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.ncols() != col_shape.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns but shape requires N={}",
                entries.ncols(),
                col_shape.dim()
            )));
        }
        Ok(Self { col_shape, entries })
    }

    pub fn col_shape(&self) -> BlockShape {
        self.col_shape
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    /// View of column-block `l` (0-based), an `L x d` slab.
    pub fn block(&self, l: usize) -> DMatrixView<'_, Complex64> {
        let d = self.col_shape.block_len();
        self.entries.columns(l * d, d)
    }

    /// Number of row-blocks `R = L/d`; errors when `L` is not a multiple of `d`.
    pub fn row_blocks(&self) -> Result<usize> {
        let d = self.col_shape.block_len();
        if self.nrows() % d != 0 {
            return Err(Error::RowsNotBlocked { rows: self.nrows(), d });
        }
        Ok(self.nrows() / d)
    }

    /// The `d x d` sub-block at row-block `r`, column-block `l`.
    pub fn sub_block(&self, r: usize, l: usize) -> DMatrixView<'_, Complex64> {
        let d = self.col_shape.block_len();
        self.entries.view((r * d, l * d), (d, d))
    }

    /// Conjugate transpose with the induced column partition (rows must be blocked).
    pub fn adjoint_blocked(&self) -> Result<BlockMatrix> {
        let r = self.row_blocks()?;
        let shape = BlockShape::new(self.col_shape.block_len(), r)?;
        BlockMatrix::new(shape, self.entries.adjoint())
    }

    /// Same entries under the d=1 column partition.
    pub fn as_scalar_blocks(&self) -> BlockMatrix {
        BlockMatrix { col_shape: self.col_shape.scalar(), entries: self.entries.clone() }
    }

    /// Columns belonging to the given blocks, in support order.
    pub fn columns_for_support(&self, support: &SupportSet) -> DMatrix<Complex64> {
        let d = self.col_shape.block_len();
        let mut out = DMatrix::zeros(self.nrows(), support.len() * d);
        for (j, &l) in support.iter().enumerate() {
            out.columns_mut(j * d, d).copy_from(&self.block(l));
        }
        out
    }

    /// Apply `x` block-wise: `y = D x` for a coefficient vector on this partition.
    pub fn mul_vector(&self, x: &BlockVector) -> Result<DVector<Complex64>> {
        if x.shape() != self.col_shape {
            return Err(Error::DimensionMismatch(
                "coefficient vector shape does not match dictionary columns".into(),
            ));
        }
        Ok(self.entries() * x.values())
    }
}

/// Ordered set of distinct block indices; iteration order is insertion order,
/// which records the selection order of greedy algorithms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from indices, rejecting duplicates and out-of-range entries.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>, m: usize) -> Result<Self> {
        let mut s = Self::new();
        for i in indices {
            if i >= m {
                return Err(Error::InvalidParam(format!(
                    "block index {i} out of range for M={m}"
                )));
            }
            if !s.insert(i) {
                return Err(Error::InvalidParam(format!("duplicate block index {i}")));
            }
        }
        Ok(s)
    }

    /// Insert an index; returns false if already present.
    pub fn insert(&mut self, i: usize) -> bool {
        if self.indices.contains(&i) {
            false
        } else {
            self.indices.push(i);
            true
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.indices.iter()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Indices in ascending order (for set comparison and column extraction).
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v
    }

    /// Equal as sets, ignoring insertion order.
    pub fn same_set(&self, other: &SupportSet) -> bool {
        self.sorted() == other.sorted()
    }

    /// Complement within `[0, m)`, ascending.
    pub fn complement(&self, m: usize) -> Vec<usize> {
        (0..m).filter(|i| !self.contains(*i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn shape_rejects_zero() {
        assert!(BlockShape::new(0, 3).is_err());
        assert!(BlockShape::new(2, 0).is_err());
        let s = BlockShape::new(2, 3).unwrap();
        assert_eq!(s.dim(), 6);
        assert_eq!(s.block_range(1), 2..4);
    }

    #[test]
    fn vector_block_views() {
        let s = BlockShape::new(2, 2).unwrap();
        let x = BlockVector::new(
            s,
            dvector![
                Complex64::new(3.0, 0.0),
                Complex64::new(4.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0)
            ],
        )
        .unwrap();
        assert_eq!(x.block(0)[1], Complex64::new(4.0, 0.0));
        assert_eq!(x.block(1).norm(), 0.0);
    }

    #[test]
    fn vector_length_mismatch() {
        let s = BlockShape::new(2, 2).unwrap();
        assert!(BlockVector::new(s, DVector::zeros(3)).is_err());
    }

    #[test]
    fn support_rejects_duplicates_and_range() {
        assert!(SupportSet::from_indices([0, 1, 1], 4).is_err());
        assert!(SupportSet::from_indices([5], 4).is_err());
        let s = SupportSet::from_indices([2, 0], 4).unwrap();
        assert_eq!(s.indices(), &[2, 0]);
        assert_eq!(s.sorted(), vec![0, 2]);
        assert_eq!(s.complement(4), vec![1, 3]);
    }

    #[test]
    fn row_blocks_requires_divisibility() {
        let s = BlockShape::new(2, 2).unwrap();
        let m = BlockMatrix::new(s, DMatrix::zeros(5, 4)).unwrap();
        assert!(m.row_blocks().is_err());
        let m = BlockMatrix::new(s, DMatrix::zeros(6, 4)).unwrap();
        assert_eq!(m.row_blocks().unwrap(), 3);
    }
}
