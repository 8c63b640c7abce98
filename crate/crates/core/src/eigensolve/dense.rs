//! Dense reference solver for small generalized symmetric problems.

use nalgebra::{DMatrix, DVector};

use super::{residual_norms, EigenSolution};
use crate::{Error, Result};

/// Largest dimension accepted by [`dense_generalized_eig`].
pub const DENSE_CAP: usize = 8192;

/// Full spectrum of `A x = lambda M x` through `M = L L^T` and the standard
/// problem `L^{-1} A L^{-T}`.
pub fn dense_generalized_eig(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<EigenSolution> {
    let n = a.nrows();
    if a.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.nrows(),
        });
    }
    if n > DENSE_CAP {
        return Err(Error::Solver(format!(
            "dense solve of dimension {n} exceeds the cap {DENSE_CAP}"
        )));
    }
    let chol = m.clone().cholesky().ok_or(Error::NotSpd { block: 0 })?;
    let l = chol.l();
    let lt = l.transpose();
    // C = L^{-1} A L^{-T}
    let mut c = a.clone();
    l.solve_lower_triangular_mut(&mut c);
    let mut ct = c.transpose();
    l.solve_lower_triangular_mut(&mut ct);
    let c = (&ct + ct.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    lt.solve_upper_triangular_mut(&mut vectors);
    let residuals = residual_norms(
        |x: &DVector<f64>| a * x,
        |x: &DVector<f64>| m * x,
        &eigenvalues,
        &vectors,
    );
    Ok(EigenSolution {
        eigenvalues,
        eigenvectors: vectors,
        residuals,
        inertia_count: None,
    })
}
