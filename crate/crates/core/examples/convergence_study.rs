//! Max band error under simultaneous doubling of Nx and Ny with
//! p = (3, 3) and DoF_perp / DoF_par = 4.
//!
//! The max band error is set by the worst resolved high band mode, and the
//! discrete problem is self-similar under doubling mesh and mode numbers
//! together, so the observed order only settles once that mode is resolved.
//! The default levels stop at 16x64; pass `32` to add the 32x128 level
//! (about 65k DoF, a minute or two).
//!
//! ```text
//! cargo run --release --example convergence_study [32]
//! ```

use fadg::basis::BasisSpec;
use fadg::geometry::{Alignment, FieldDirection, MeshConfig};
use fadg::spectrum::{convergence_study, least_squares_slope, Case};

fn main() -> fadg::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let b = FieldDirection::new(1.165939761, 1.0)?;
    let template = Case::new(MeshConfig::new(4, 16, Alignment::AlignedBottomTop, b), BasisSpec::new(3, 3));
    let mut levels = vec![(4, 16), (8, 32), (16, 64)];
    if std::env::args().nth(1).as_deref() == Some("32") {
        levels.push((32, 128));
    }
    let rows = convergence_study(&template, &levels)?;
    println!("{:>5} {:>4} {:>4} {:>7} {:>14} {:>7}", "level", "Nx", "Ny", "DoF", "max error", "order");
    for r in &rows {
        println!(
            "{:>5} {:>4} {:>4} {:>7} {:>14.4e} {:>7}",
            r.level,
            r.nx,
            r.ny,
            r.dof,
            r.max_band_error,
            r.slope.map_or("-".into(), |s| format!("{s:.2}"))
        );
    }
    if let Some(s) = least_squares_slope(&rows[rows.len() - 2..]) {
        println!("order over the last two levels: {s:.2}");
    }
    Ok(())
}
