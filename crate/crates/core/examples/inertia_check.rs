//! Sylvester's law of inertia as an eigenvalue counter: the number of
//! negative pivots of `A - lambda M` equals the number of eigenvalues below
//! `lambda`. Compares the count with a dense solve on a small DG operator.
//!
//! ```text
//! cargo run --release --example inertia_check
//! ```

use fadg::assembly::discretize;
use fadg::basis::BasisSpec;
use fadg::eigensolve::{band_eig, dense_generalized_eig, ldl_inertia, BandRequest};
use fadg::fields::{CoefficientField, MagneticField};
use fadg::geometry::{build_mesh, Alignment, FieldDirection, MeshConfig};

fn main() -> fadg::Result<()> {
    let b = FieldDirection::new(1.165939761, 1.0)?;
    let mesh = build_mesh(MeshConfig::new(4, 6, Alignment::AlignedBottomTop, b))?;
    let sys = discretize(&mesh, BasisSpec::new(3, 3), &CoefficientField::constant(1.0), &MagneticField::uniform(b), 6.0)?;
    println!("DoF {}, nnz(A) {:.2}%", sys.dim(), sys.nnz_percent());
    let dense = dense_generalized_eig(&sys.a.to_dense(), &sys.m.to_dense())?;
    println!("{:>8} {:>9} {:>7} {:>6}", "lambda", "inertia", "dense", "band");
    for lambda in [0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
        let inertia = ldl_inertia(&sys.a.shifted(lambda, &sys.m))?;
        let below = dense.eigenvalues.iter().filter(|&&w| w < lambda).count();
        let band = band_eig(&sys.a, &sys.m, &BandRequest::new(lambda))?;
        println!("{lambda:>8} {:>9} {below:>7} {:>6}", inertia.negative, band.len());
    }
    Ok(())
}
