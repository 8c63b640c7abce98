//! Band spectrum of the constant-coefficient reference case on the aligned
//! 8x8 mesh with p = 7, compared against the analytic eigenvalues.
//!
//! ```text
//! cargo run --release --example reference_case
//! ```

use fadg::basis::BasisSpec;
use fadg::geometry::{Alignment, FieldDirection, MeshConfig};
use fadg::spectrum::{exact_spectrum, solve_case, Case};

fn main() -> fadg::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let b = FieldDirection::new(1.165939761, 1.0)?;
    let case = Case::new(MeshConfig::new(8, 8, Alignment::AlignedBottomTop, b), BasisSpec::new(7, 7));
    let start = std::time::Instant::now();
    let result = solve_case(&case)?;
    let exact = exact_spectrum(b, 20, 20)?;
    println!(
        "DoF {}  nnz(A) {:.2}%  band count {} (analytic {})  [{:.1?}]",
        result.dof,
        result.nnz_percent,
        result.solution.len(),
        exact.band_count(case.omega_max_sq),
        start.elapsed()
    );
    println!("{:>4} {:>10} {:>22} {:>22} {:>10}", "k", "mode", "omega2", "exact", "error");
    for row in &result.spectrum.rows {
        println!(
            "{:>4} {:>10} {:>22.15e} {:>22.15e} {:>10.2e}",
            row.index,
            row.mode.map(|m| m.to_string()).unwrap_or_default(),
            row.omega2_computed,
            row.omega2_exact.unwrap_or(f64::NAN),
            row.error.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
