//! Cell-block `L D L^T` factorization of a symmetric (possibly indefinite)
//! matrix.
//!
//! Block columns are eliminated in minimum-degree order on the cell graph.
//! Each pivot block is diagonalized, which gives the inertia of `D` (and by
//! Sylvester's law of inertia that of the matrix) and a stable pivot inverse.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::linalg::SparseSymMatrix;
use crate::{Error, Result};

/// Relative tolerance below which a pivot eigenvalue counts as zero.
pub const ZERO_PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl Inertia {
    pub fn as_tuple(&self) -> (usize, usize, usize) {
        (self.negative, self.zero, self.positive)
    }
}

/// Minimum-degree elimination order of the block graph of `a`, ties broken by
/// the smaller block index.
pub fn minimum_degree_order(a: &SparseSymMatrix) -> Vec<usize> {
    let nb = a.nblocks();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nb];
    for &(r, c) in a.blocks().keys() {
        if r != c {
            adj[r].insert(c);
            adj[c].insert(r);
        }
    }
    let mut alive = vec![true; nb];
    let mut by_degree: BTreeSet<(usize, usize)> = (0..nb).map(|v| (adj[v].len(), v)).collect();
    let mut order = Vec::with_capacity(nb);
    while let Some(&(deg, v)) = by_degree.iter().next() {
        by_degree.remove(&(deg, v));
        alive[v] = false;
        order.push(v);
        let nbrs: Vec<usize> = adj[v].iter().copied().filter(|&u| alive[u]).collect();
        for &u in &nbrs {
            by_degree.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
            for &w in &nbrs {
                if w != u {
                    adj[u].insert(w);
                }
            }
        }
        for &u in &nbrs {
            by_degree.insert((adj[u].len(), u));
        }
        adj[v].clear();
    }
    order
}

/// `P S P^T = L D L^T` with unit block lower `L` and block diagonal `D`.
#[derive(Clone, Debug)]
pub struct BlockLdl {
    block_dim: usize,
    /// Elimination position -> original block index.
    order: Vec<usize>,
    /// Pseudo-inverse of every pivot block (zero pivots dropped).
    pivot_inv: Vec<DMatrix<f64>>,
    /// For every position `k`, the blocks `L_ik` with `i > k`.
    lower: Vec<Vec<(usize, DMatrix<f64>)>>,
    inertia: Inertia,
}

impl BlockLdl {
    pub fn factorize(s: &SparseSymMatrix) -> Result<Self> {
        Self::factorize_ordered(s, minimum_degree_order(s))
    }

    pub fn factorize_ordered(s: &SparseSymMatrix, order: Vec<usize>) -> Result<Self> {
        let d = s.block_dim();
        let nb = s.nblocks();
        if order.len() != nb {
            return Err(Error::DimensionMismatch {
                expected: nb,
                got: order.len(),
            });
        }
        let mut position = vec![0; nb];
        for (k, &b) in order.iter().enumerate() {
            position[b] = k;
        }
        let tol = ZERO_PIVOT_TOL * s.norm_inf();

        let mut diag: Vec<DMatrix<f64>> = vec![DMatrix::zeros(d, d); nb];
        let mut cols: Vec<BTreeMap<usize, DMatrix<f64>>> = vec![BTreeMap::new(); nb];
        for (&(r, c), b) in s.blocks() {
            let (pr, pc) = (position[r], position[c]);
            if pr == pc {
                diag[pr] = b.clone();
            } else if pr > pc {
                cols[pc].insert(pr, b.clone());
            } else {
                cols[pr].insert(pc, b.transpose());
            }
        }

        let mut inertia = Inertia::default();
        let mut pivot_inv = Vec::with_capacity(nb);
        let mut lower = Vec::with_capacity(nb);
        for k in 0..nb {
            let pivot = std::mem::replace(&mut diag[k], DMatrix::zeros(0, 0));
            let pivot = (&pivot + pivot.transpose()) * 0.5;
            let eig = pivot.symmetric_eigen();
            let entries: Vec<(usize, DMatrix<f64>)> = std::mem::take(&mut cols[k]).into_iter().collect();

            let mut scaled = eig.eigenvectors.clone();
            for (j, &l) in eig.eigenvalues.iter().enumerate() {
                if l.abs() <= tol {
                    inertia.zero += 1;
                    let q = eig.eigenvectors.column(j);
                    let coupling = entries
                        .iter()
                        .map(|(_, b)| (b * q).amax())
                        .fold(0.0, f64::max);
                    if coupling > tol.sqrt().max(1e3 * tol) {
                        return Err(Error::Breakdown {
                            block: order[k],
                            pivot: l.abs(),
                        });
                    }
                    scaled.column_mut(j).fill(0.0);
                } else {
                    if l < 0.0 {
                        inertia.negative += 1;
                    } else {
                        inertia.positive += 1;
                    }
                    scaled.column_mut(j).scale_mut(1.0 / l);
                }
            }
            let dinv = &scaled * eig.eigenvectors.transpose();

            let lk: Vec<(usize, DMatrix<f64>)> = entries.iter().map(|(i, b)| (*i, b * &dinv)).collect();
            let st: Vec<DMatrix<f64>> = entries.iter().map(|(_, b)| b.transpose()).collect();
            for (i, l_ik) in &lk {
                for (b, (j, _)) in entries.iter().enumerate() {
                    if j > i {
                        continue;
                    }
                    if i == j {
                        diag[*i].gemm(-1.0, l_ik, &st[b], 1.0);
                    } else {
                        let blk = cols[*j]
                            .entry(*i)
                            .or_insert_with(|| DMatrix::zeros(d, d));
                        blk.gemm(-1.0, l_ik, &st[b], 1.0);
                    }
                }
            }
            pivot_inv.push(dinv);
            lower.push(lk);
        }
        Ok(Self {
            block_dim: d,
            order,
            pivot_inv,
            lower,
            inertia,
        })
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    pub fn dim(&self) -> usize {
        self.block_dim * self.order.len()
    }

    /// Number of stored entries of `L` (strictly lower blocks).
    pub fn fill(&self) -> usize {
        let d2 = self.block_dim * self.block_dim;
        self.lower.iter().map(|c| c.len() * d2).sum()
    }

    /// Solves `S X = B` for every column of `B` in place.
    pub fn solve_in_place(&self, b: &mut DMatrix<f64>) {
        let d = self.block_dim;
        let nb = self.order.len();
        let ncols = b.ncols();
        let mut y = DMatrix::zeros(self.dim(), ncols);
        for (k, &blk) in self.order.iter().enumerate() {
            y.rows_mut(k * d, d).copy_from(&b.rows(blk * d, d));
        }
        for k in 0..nb {
            let yk = y.rows(k * d, d).into_owned();
            for (i, l_ik) in &self.lower[k] {
                y.rows_mut(i * d, d).gemm(-1.0, l_ik, &yk, 1.0);
            }
        }
        for k in 0..nb {
            let yk = y.rows(k * d, d).into_owned();
            y.rows_mut(k * d, d).gemm(1.0, &self.pivot_inv[k], &yk, 0.0);
        }
        for k in (0..nb).rev() {
            let mut xk = y.rows(k * d, d).into_owned();
            for (i, l_ik) in &self.lower[k] {
                xk.gemm_tr(-1.0, l_ik, &y.rows(i * d, d), 1.0);
            }
            y.rows_mut(k * d, d).copy_from(&xk);
        }
        for (k, &blk) in self.order.iter().enumerate() {
            b.rows_mut(blk * d, d).copy_from(&y.rows(k * d, d));
        }
    }
}

/// Signature `(negative, zero, positive)` of a symmetric matrix.
pub fn ldl_inertia(s: &SparseSymMatrix) -> Result<Inertia> {
    Ok(BlockLdl::factorize(s)?.inertia())
}
