//! Cell-blocked matrix storage.
//!
//! Every operator of the discretization couples whole cells, so matrices are
//! stored as maps from `(row cell, column cell)` to dense blocks of the local
//! space dimension.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVectorView, DVectorViewMut};

use crate::{Error, Result};

fn gemv_block(y: &mut [f64], a: &DMatrix<f64>, x: &[f64], alpha: f64) {
    let mut yv = DVectorViewMut::from_slice(y, a.nrows());
    yv.gemv(alpha, a, &DVectorView::from_slice(x, a.ncols()), 1.0);
}

fn gemv_block_tr(y: &mut [f64], a: &DMatrix<f64>, x: &[f64], alpha: f64) {
    let mut yv = DVectorViewMut::from_slice(y, a.ncols());
    yv.gemv_tr(alpha, a, &DVectorView::from_slice(x, a.nrows()), 1.0);
}

/// Block diagonal matrix with one dense block per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiagMatrix {
    pub block_dim: usize,
    pub blocks: Vec<DMatrix<f64>>,
}

impl BlockDiagMatrix {
    pub fn identity(nblocks: usize, block_dim: usize) -> Self {
        Self {
            block_dim,
            blocks: vec![DMatrix::identity(block_dim, block_dim); nblocks],
        }
    }

    pub fn dim(&self) -> usize {
        self.block_dim * self.blocks.len()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        let d = self.block_dim;
        for (k, b) in self.blocks.iter().enumerate() {
            let r = k * d..(k + 1) * d;
            y[r.clone()].fill(0.0);
            gemv_block(&mut y[r.clone()], b, &x[r], 1.0);
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let d = self.block_dim;
        let mut m = DMatrix::zeros(n, n);
        for (k, b) in self.blocks.iter().enumerate() {
            m.view_mut((k * d, k * d), (d, d)).copy_from(b);
        }
        m
    }

    /// Inverse of every block through a Cholesky factorization.
    pub fn inverse(&self) -> Result<BlockDiagMatrix> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                b.clone()
                    .cholesky()
                    .map(|c| c.inverse())
                    .ok_or(Error::NotSpd { block: k })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            block_dim: self.block_dim,
            blocks,
        })
    }

    /// Symmetric matrix function `f` applied blockwise via an eigen
    /// decomposition; every eigenvalue must be positive.
    fn spd_map(&self, f: impl Fn(f64) -> f64) -> Result<BlockDiagMatrix> {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                if is_diagonal(b) {
                    let mut out = DMatrix::zeros(b.nrows(), b.ncols());
                    for i in 0..b.nrows() {
                        if !(b[(i, i)] > 0.0) {
                            return Err(Error::NotSpd { block: k });
                        }
                        out[(i, i)] = f(b[(i, i)]);
                    }
                    return Ok(out);
                }
                let eig = b.clone().symmetric_eigen();
                if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
                    return Err(Error::NotSpd { block: k });
                }
                let q = &eig.eigenvectors;
                let mut scaled = q.clone();
                for (j, &l) in eig.eigenvalues.iter().enumerate() {
                    scaled.column_mut(j).scale_mut(f(l));
                }
                Ok(&scaled * q.transpose())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            block_dim: self.block_dim,
            blocks,
        })
    }

    pub fn sqrt(&self) -> Result<BlockDiagMatrix> {
        self.spd_map(f64::sqrt)
    }

    pub fn inv_sqrt(&self) -> Result<BlockDiagMatrix> {
        self.spd_map(|l| 1.0 / l.sqrt())
    }
}

fn is_diagonal(b: &DMatrix<f64>) -> bool {
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            if i != j && b[(i, j)] != 0.0 {
                return false;
            }
        }
    }
    true
}

/// General block sparse matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSparseMatrix {
    pub block_dim: usize,
    pub nblocks: usize,
    pub blocks: BTreeMap<(usize, usize), DMatrix<f64>>,
}

impl BlockSparseMatrix {
    pub fn zeros(nblocks: usize, block_dim: usize) -> Self {
        Self {
            block_dim,
            nblocks,
            blocks: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.block_dim * self.nblocks
    }

    pub fn block_mut(&mut self, r: usize, c: usize) -> &mut DMatrix<f64> {
        let d = self.block_dim;
        self.blocks
            .entry((r, c))
            .or_insert_with(|| DMatrix::zeros(d, d))
    }

    pub fn add_block(&mut self, r: usize, c: usize, m: &DMatrix<f64>) {
        *self.block_mut(r, c) += m;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let d = self.block_dim;
        self.blocks
            .get(&(i / d, j / d))
            .map_or(0.0, |b| b[(i % d, j % d)])
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        let d = self.block_dim;
        y.fill(0.0);
        for (&(r, c), b) in &self.blocks {
            gemv_block(&mut y[r * d..(r + 1) * d], b, &x[c * d..(c + 1) * d], 1.0);
        }
    }

    pub fn transpose(&self) -> BlockSparseMatrix {
        Self {
            block_dim: self.block_dim,
            nblocks: self.nblocks,
            blocks: self
                .blocks
                .iter()
                .map(|(&(r, c), b)| ((c, r), b.transpose()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &BlockSparseMatrix) -> BlockSparseMatrix {
        let mut out = self.clone();
        for (&(r, c), b) in &other.blocks {
            *out.block_mut(r, c) -= b;
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let d = self.block_dim;
        let mut m = DMatrix::zeros(n, n);
        for (&(r, c), b) in &self.blocks {
            m.view_mut((r * d, c * d), (d, d)).copy_from(b);
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(|b| b.amax()).fold(0.0, f64::max)
    }
}

/// Symmetric block sparse matrix; only blocks `(r, c)` with `r >= c` are
/// stored and diagonal blocks are kept exactly symmetric, so `A = A^T` holds
/// bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix {
    block_dim: usize,
    nblocks: usize,
    blocks: BTreeMap<(usize, usize), DMatrix<f64>>,
}

impl SparseSymMatrix {
    /// Builds from lower blocks (`r >= c`); the strictly upper triangle of
    /// each diagonal block is overwritten by its lower triangle.
    pub fn from_lower_blocks(
        nblocks: usize,
        block_dim: usize,
        blocks: BTreeMap<(usize, usize), DMatrix<f64>>,
    ) -> Self {
        let mut blocks = blocks;
        blocks.retain(|&(r, c), _| r >= c);
        for (&(r, c), b) in blocks.iter_mut() {
            if r == c {
                mirror_lower(b);
            }
        }
        Self {
            block_dim,
            nblocks,
            blocks,
        }
    }

    pub fn from_dense(block_dim: usize, a: &DMatrix<f64>) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        assert_eq!(a.nrows() % block_dim, 0);
        let nb = a.nrows() / block_dim;
        let mut blocks = BTreeMap::new();
        for r in 0..nb {
            for c in 0..=r {
                let b = a
                    .view((r * block_dim, c * block_dim), (block_dim, block_dim))
                    .into_owned();
                if b.iter().any(|&v| v != 0.0) || r == c {
                    blocks.insert((r, c), b);
                }
            }
        }
        Self::from_lower_blocks(nb, block_dim, blocks)
    }

    pub fn from_block_diag(m: &BlockDiagMatrix) -> Self {
        let blocks = m
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| ((k, k), b.clone()))
            .collect();
        Self::from_lower_blocks(m.blocks.len(), m.block_dim, blocks)
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn nblocks(&self) -> usize {
        self.nblocks
    }

    pub fn dim(&self) -> usize {
        self.block_dim * self.nblocks
    }

    pub fn blocks(&self) -> &BTreeMap<(usize, usize), DMatrix<f64>> {
        &self.blocks
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = self.block_dim;
        self.blocks
            .get(&(i / d, j / d))
            .map_or(0.0, |b| b[(i % d, j % d)])
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        let d = self.block_dim;
        y.fill(0.0);
        for (&(r, c), b) in &self.blocks {
            gemv_block(&mut y[r * d..(r + 1) * d], b, &x[c * d..(c + 1) * d], 1.0);
            if r != c {
                gemv_block_tr(&mut y[c * d..(c + 1) * d], b, &x[r * d..(r + 1) * d], 1.0);
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let d = self.block_dim;
        let mut m = DMatrix::zeros(n, n);
        for (&(r, c), b) in &self.blocks {
            m.view_mut((r * d, c * d), (d, d)).copy_from(b);
            if r != c {
                m.view_mut((c * d, r * d), (d, d)).copy_from(&b.transpose());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(|b| b.amax()).fold(0.0, f64::max)
    }

    /// Infinity norm (equal to the 1-norm by symmetry).
    pub fn norm_inf(&self) -> f64 {
        let d = self.block_dim;
        let mut rows = vec![0.0; self.dim()];
        for (&(r, c), b) in &self.blocks {
            for i in 0..d {
                for j in 0..d {
                    let v = b[(i, j)].abs();
                    rows[r * d + i] += v;
                    if r != c {
                        rows[c * d + j] += v;
                    }
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Sets entries with `|a_ij| <= rel * max|a|` to zero and drops blocks
    /// that become empty.
    pub fn drop_small(&mut self, rel: f64) {
        let tol = rel * self.max_abs();
        for b in self.blocks.values_mut() {
            b.apply(|v| {
                if v.abs() <= tol {
                    *v = 0.0
                }
            });
        }
        self.blocks
            .retain(|&(r, c), b| r == c || b.iter().any(|&v| v != 0.0));
    }

    /// Structural nonzeros of the full matrix (both triangles).
    pub fn nnz(&self) -> usize {
        self.blocks
            .iter()
            .map(|(&(r, c), b)| {
                let k = b.iter().filter(|&&v| v != 0.0).count();
                if r == c {
                    k
                } else {
                    2 * k
                }
            })
            .sum()
    }

    /// Nonzeros of the full matrix as a percentage of `n^2`.
    pub fn density_percent(&self) -> f64 {
        let n = self.dim() as f64;
        100.0 * self.nnz() as f64 / (n * n)
    }

    /// `self - sigma * m` for a block diagonal `m` of matching layout.
    pub fn shifted(&self, sigma: f64, m: &BlockDiagMatrix) -> SparseSymMatrix {
        let mut out = self.clone();
        for (k, mb) in m.blocks.iter().enumerate() {
            let d = self.block_dim;
            let b = out
                .blocks
                .entry((k, k))
                .or_insert_with(|| DMatrix::zeros(d, d));
            *b -= mb * sigma;
            mirror_lower(b);
        }
        out
    }

    /// `D A D` for block diagonal `D` (symmetric blocks).
    pub fn congruence(&self, dmat: &BlockDiagMatrix) -> SparseSymMatrix {
        let blocks = self
            .blocks
            .iter()
            .map(|(&(r, c), b)| ((r, c), &dmat.blocks[r] * b * &dmat.blocks[c]))
            .collect();
        Self::from_lower_blocks(self.nblocks, self.block_dim, blocks)
    }

    /// Coordinate text dump of the lower triangle, `row col value`, 1-based.
    pub fn write_coo<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.block_dim;
        writeln!(w, "% {} {} {}", self.dim(), self.dim(), self.lower_nnz())?;
        for (&(r, c), b) in &self.blocks {
            for i in 0..d {
                for j in 0..d {
                    let (gi, gj) = (r * d + i, c * d + j);
                    let v = b[(i, j)];
                    if gi >= gj && v != 0.0 {
                        writeln!(w, "{} {} {:.16e}", gi + 1, gj + 1, v)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn lower_nnz(&self) -> usize {
        (self.nnz() + self.diag_nnz()) / 2
    }

    fn diag_nnz(&self) -> usize {
        (0..self.dim()).filter(|&i| self.get(i, i) != 0.0).count()
    }
}

fn mirror_lower(b: &mut DMatrix<f64>) {
    let n = b.nrows();
    for j in 0..n {
        for i in 0..j {
            b[(i, j)] = b[(j, i)];
        }
    }
}
