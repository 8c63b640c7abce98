//! Generalized symmetric eigensolvers for `A x = lambda M x`.
//!
//! [`band_eig`] returns every eigenpair with `lambda <= lambda_max` and
//! certifies the count with the inertia of `A - lambda_max M`.

mod dense;
mod krylov;
mod ldl;

use nalgebra::{DMatrix, DVector};

pub use dense::{dense_generalized_eig, DENSE_CAP};
pub use krylov::band_eig;
pub use ldl::{ldl_inertia, minimum_degree_order, BlockLdl, Inertia, ZERO_PIVOT_TOL};

/// Default relative residual tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct BandRequest {
    pub lambda_max: f64,
    /// Accepted residual `||A x - lambda M x|| / ||A||` for `x^T M x = 1`.
    pub tolerance: f64,
    /// Largest Krylov subspace before giving up.
    pub max_subspace: usize,
    pub block_size: usize,
    /// Shift of the shift-invert operator, `lambda_max / 2` when unset.
    pub shift: Option<f64>,
    pub seed: u64,
}

impl BandRequest {
    pub fn new(lambda_max: f64) -> Self {
        Self {
            lambda_max,
            tolerance: DEFAULT_TOLERANCE,
            max_subspace: 1500,
            block_size: 4,
            shift: None,
            seed: 0x5eed,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.lambda_max.is_finite() && self.lambda_max > 0.0) {
            return Err(crate::Error::Config(format!(
                "lambda_max must be finite and positive, got {}",
                self.lambda_max
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(crate::Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.block_size == 0 || self.max_subspace < self.block_size {
            return Err(crate::Error::Config("invalid block size / subspace cap".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EigenSolution {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// One `M`-normalized column per eigenvalue.
    pub eigenvectors: DMatrix<f64>,
    /// `||A x - lambda M x||_2` per pair.
    pub residuals: Vec<f64>,
    /// Negative inertia of `A - lambda_max M` when the run was certified.
    pub inertia_count: Option<usize>,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }

    /// Keeps only the pairs with `lambda <= lambda_max`.
    pub fn band(&self, lambda_max: f64) -> EigenSolution {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&k| self.eigenvalues[k] <= lambda_max)
            .collect();
        let mut vectors = DMatrix::zeros(self.eigenvectors.nrows(), keep.len());
        for (c, &k) in keep.iter().enumerate() {
            vectors.set_column(c, &self.eigenvectors.column(k));
        }
        EigenSolution {
            eigenvalues: keep.iter().map(|&k| self.eigenvalues[k]).collect(),
            eigenvectors: vectors,
            residuals: keep.iter().map(|&k| self.residuals[k]).collect(),
            inertia_count: self.inertia_count,
        }
    }
}

pub(crate) fn residual_norms(
    a: impl Fn(&DVector<f64>) -> DVector<f64>,
    m: impl Fn(&DVector<f64>) -> DVector<f64>,
    values: &[f64],
    vectors: &DMatrix<f64>,
) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let x = vectors.column(k).into_owned();
            (a(&x) - m(&x) * l).norm()
        })
        .collect()
}
