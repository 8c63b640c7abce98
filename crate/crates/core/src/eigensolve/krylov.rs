//! Shift-invert block Krylov band solver.
//!
//! The operator `(A - sigma M)^{-1} M` is self-adjoint in the `M` inner
//! product and maps the band `[0, lambda_max]` onto the eigenvalues
//! `|theta| >= 1 / sigma` for `sigma = lambda_max / 2`, i.e. the dominant part
//! of its spectrum. An `M`-orthonormal block Arnoldi basis with full
//! reorthogonalization is grown until the Ritz pairs inside the band pass the
//! residual test and their number matches the inertia count.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::dense_generalized_eig;
use super::ldl::BlockLdl;
use super::{BandRequest, EigenSolution};
use crate::linalg::{BlockDiagMatrix, SparseSymMatrix};
use crate::{Error, Result};

/// Problems up to this size go straight to the dense solver.
const SMALL_DENSE: usize = 128;

fn apply_mass(m: &BlockDiagMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.block_dim;
    let mut y = DMatrix::zeros(x.nrows(), x.ncols());
    for (k, b) in m.blocks.iter().enumerate() {
        y.rows_mut(k * d, d).gemm(1.0, b, &x.rows(k * d, d), 0.0);
    }
    y
}

/// All eigenpairs of `A x = lambda M x` with `lambda <= lambda_max`.
pub fn band_eig(a: &SparseSymMatrix, m: &BlockDiagMatrix, req: &BandRequest) -> Result<EigenSolution> {
    req.validate()?;
    let n = a.dim();
    if m.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.dim(),
        });
    }
    let count = BlockLdl::factorize(&a.shifted(req.lambda_max, m))?
        .inertia()
        .negative;
    log::debug!("inertia count at lambda_max = {}: {count}", req.lambda_max);

    let solution = if count == 0 {
        EigenSolution {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(n, 0),
            residuals: Vec::new(),
            inertia_count: None,
        }
    } else if n <= SMALL_DENSE {
        dense_generalized_eig(&a.to_dense(), &m.to_dense())?.band(req.lambda_max)
    } else {
        krylov(a, m, req, count)?
    };
    if solution.len() != count {
        return Err(Error::Incomplete {
            expected: count,
            found: solution.len(),
            subspace: n.min(req.max_subspace),
        });
    }
    if let Some(&lo) = solution.eigenvalues.first() {
        if lo < -req.tolerance * a.norm_inf() {
            log::warn!("negative eigenvalue {lo:e}: operator is not positive semidefinite");
        }
    }
    Ok(EigenSolution {
        inertia_count: Some(count),
        ..solution
    })
}

struct Basis {
    v: DMatrix<f64>,
    h: DMatrix<f64>,
    len: usize,
}

impl Basis {
    fn ensure(&mut self, cols: usize) {
        if cols > self.v.ncols() {
            let cap = cols.max(2 * self.v.ncols());
            let n = self.v.nrows();
            self.v.resize_mut(n, cap, 0.0);
            self.h.resize_mut(cap, cap, 0.0);
        }
    }

    /// Orthogonalizes the columns of `w` against the basis and appends them.
    /// Coefficients go to column `source + c` of `H` when `source` is set.
    fn append(
        &mut self,
        m: &BlockDiagMatrix,
        mut w: DMatrix<f64>,
        source: Option<usize>,
        rng: &mut ChaCha8Rng,
    ) {
        let bs = w.ncols();
        let n = w.nrows();
        self.ensure(self.len + bs);
        let k = self.len;
        for _ in 0..2 {
            if k == 0 {
                break;
            }
            let mw = apply_mass(m, &w);
            let c = self.v.columns(0, k).tr_mul(&mw);
            w.gemm(-1.0, &self.v.columns(0, k), &c, 1.0);
            if let Some(j0) = source {
                let mut hv = self.h.view_mut((0, j0), (k, bs));
                hv += &c;
            }
        }
        for c in 0..bs {
            let mut col = w.column(c).into_owned();
            let before = m_norm(m, &col);
            // classical Gram-Schmidt, twice, against columns `from..k + c`
            let orth = |col: &mut DVector<f64>, h: &mut DMatrix<f64>, from: usize, record: bool| {
                let len = k + c - from;
                if len == 0 {
                    return;
                }
                for _ in 0..2 {
                    let vs = self.v.columns(from, len);
                    let r = vs.tr_mul(&mass_vec(m, col));
                    col.gemv(-1.0, &vs, &r, 1.0);
                    if let (true, Some(j0)) = (record, source) {
                        for (i, ri) in r.iter().enumerate() {
                            h[(from + i, j0 + c)] += ri;
                        }
                    }
                }
            };
            let mut h = std::mem::replace(&mut self.h, DMatrix::zeros(0, 0));
            orth(&mut col, &mut h, k, true);
            let mut norm = m_norm(m, &col);
            let mut subdiag = norm;
            if !(norm > 1e-10 * before) || before == 0.0 {
                // invariant subspace found: continue with a fresh direction
                col = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                orth(&mut col, &mut h, 0, false);
                norm = m_norm(m, &col);
                subdiag = 0.0;
            }
            self.h = h;
            col /= norm;
            self.v.set_column(k + c, &col);
            if let Some(j0) = source {
                self.h[(k + c, j0 + c)] = subdiag;
            }
        }
        self.len = k + bs;
    }
}

fn mass_vec(m: &BlockDiagMatrix, x: &DVector<f64>) -> DVector<f64> {
    let mut y = DVector::zeros(x.len());
    m.mul_vec(x.as_slice(), y.as_mut_slice());
    y
}

fn m_norm(m: &BlockDiagMatrix, x: &DVector<f64>) -> f64 {
    x.dot(&mass_vec(m, x)).max(0.0).sqrt()
}

fn krylov(a: &SparseSymMatrix, m: &BlockDiagMatrix, req: &BandRequest, count: usize) -> Result<EigenSolution> {
    let n = a.dim();
    let bs = req.block_size.min(n);
    let sigma = req.shift.unwrap_or(0.5 * req.lambda_max);
    let fact = BlockLdl::factorize(&a.shifted(sigma, m))?;
    log::debug!("shift {sigma}: factor fill {} entries", fact.fill());
    let a_norm = a.norm_inf().max(f64::MIN_POSITIVE);
    let cap = req.max_subspace.min(n);

    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut basis = Basis {
        v: DMatrix::zeros(n, (4 * count + 8 * bs).min(cap + bs)),
        h: DMatrix::zeros(0, 0),
        len: 0,
    };
    basis.h = DMatrix::zeros(basis.v.ncols(), basis.v.ncols());
    let start = DMatrix::from_fn(n, bs, |_, _| rng.gen_range(-1.0..1.0));
    basis.append(m, start, None, &mut rng);

    let mut processed = 0;
    let mut next_check = count;
    loop {
        let block = basis.v.columns(processed, bs).into_owned();
        let mut w = apply_mass(m, &block);
        fact.solve_in_place(&mut w);
        basis.append(m, w, Some(processed), &mut rng);
        processed += bs;

        let exhausted = processed + bs > cap;
        if processed < next_check && !exhausted {
            continue;
        }
        next_check = (processed + bs).max(processed * 23 / 20);

        let k = processed;
        let t = basis.h.view((0, 0), (k, k));
        let t = (t + t.transpose()) * 0.5;
        let eig = t.symmetric_eigen();
        let tail = basis.h.view((k, 0), (bs, k)).into_owned();
        let mut pairs = Vec::new();
        for (j, &theta) in eig.eigenvalues.iter().enumerate() {
            if theta.abs() < 0.5 / sigma {
                continue;
            }
            let s = eig.eigenvectors.column(j);
            let arnoldi_res = (&tail * s).norm() / theta.abs();
            if arnoldi_res > 1e-6 {
                continue;
            }
            let y = basis.v.columns(0, k) * s;
            let mut ay = DVector::zeros(n);
            a.mul_vec(y.as_slice(), ay.as_mut_slice());
            let my = mass_vec(m, &y);
            let norm2 = y.dot(&my);
            let lambda = y.dot(&ay) / norm2;
            if lambda > req.lambda_max {
                continue;
            }
            let y = y / norm2.sqrt();
            let res = (ay / norm2.sqrt() - my / norm2.sqrt() * lambda).norm();
            if res <= req.tolerance * a_norm {
                pairs.push((lambda, y, res));
            }
        }
        let found = pairs.len();
        log::debug!("krylov dimension {k}: {found}/{count} band pairs converged");
        if found == count {
            pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut vectors = DMatrix::zeros(n, count);
            for (c, p) in pairs.iter().enumerate() {
                vectors.set_column(c, &p.1);
            }
            return Ok(EigenSolution {
                eigenvalues: pairs.iter().map(|p| p.0).collect(),
                eigenvectors: vectors,
                residuals: pairs.iter().map(|p| p.2).collect(),
                inertia_count: None,
            });
        }
        if exhausted {
            return Err(Error::Incomplete {
                expected: count,
                found,
                subspace: processed,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::dense_generalized_eig;

    fn diag_system(values: &[f64]) -> (SparseSymMatrix, BlockDiagMatrix) {
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(values));
        (
            SparseSymMatrix::from_dense(1, &a),
            BlockDiagMatrix::identity(values.len(), 1),
        )
    }

    #[test]
    fn diagonal_band() {
        let (a, m) = diag_system(&[1.0, 2.0, 3.0]);
        let s = band_eig(&a, &m, &BandRequest::new(2.5)).unwrap();
        assert_eq!(s.inertia_count, Some(2));
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12 && (s.eigenvalues[1] - 2.0).abs() < 1e-12);
        let s = band_eig(&a, &m, &BandRequest::new(0.5)).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.inertia_count, Some(0));
    }

    #[test]
    fn krylov_matches_dense_on_laplacian() {
        // periodic 1D second difference with a variable mass: clustered,
        // doubly degenerate low spectrum
        let nb = 100;
        let d = 3;
        let n = nb * d;
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 2.0;
            a[(i, (i + 1) % n)] = -1.0;
            a[((i + 1) % n, i)] = -1.0;
        }
        let blocks = (0..nb)
            .map(|k| DMatrix::from_diagonal_element(d, d, 1.0 + 0.1 * (k % 3) as f64))
            .collect();
        let m = BlockDiagMatrix { block_dim: d, blocks };
        let sa = SparseSymMatrix::from_dense(d, &a);
        let req = BandRequest::new(0.05);
        let s = band_eig(&sa, &m, &req).unwrap();
        let full = dense_generalized_eig(&a, &m.to_dense()).unwrap().band(0.05);
        assert_eq!(s.len(), full.len());
        assert_eq!(s.inertia_count, Some(full.len()));
        for (x, y) in s.eigenvalues.iter().zip(&full.eigenvalues) {
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1e-3), "{x} vs {y}");
        }
        let gram = s.eigenvectors.transpose() * m.to_dense() * &s.eigenvectors;
        assert!((gram - DMatrix::identity(s.len(), s.len())).amax() < 1e-10);
    }
}
