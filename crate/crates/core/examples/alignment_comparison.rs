//! Locally aligned versus cartesian mesh at equal DoF (8x8 cells, p = 7):
//! per-mode band errors and the improvement in decades.
//!
//! ```text
//! cargo run --release --example alignment_comparison
//! ```

use fadg::basis::BasisSpec;
use fadg::geometry::{Alignment, FieldDirection, MeshConfig};
use fadg::spectrum::{compare_cases, median, Case};

fn main() -> fadg::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let b = FieldDirection::new(1.165939761, 1.0)?;
    let case = |alignment| {
        let mut c = Case::new(MeshConfig::new(8, 8, alignment, b), BasisSpec::new(7, 7));
        // the cartesian mesh pushes high band modes far above the band
        c.window = Some(1.0);
        c
    };
    let rows = compare_cases(&case(Alignment::AlignedBottomTop), &case(Alignment::Cartesian))?;
    println!("{:>10} {:>12} {:>12} {:>12} {:>8}", "mode", "exact", "aligned", "cartesian", "decades");
    let fmt = |e: Option<f64>| e.map_or("-".to_string(), |v| format!("{v:.3e}"));
    for r in &rows {
        println!(
            "{:>10} {:>12.5e} {:>12} {:>12} {:>8}",
            r.mode.to_string(),
            r.omega2_exact,
            fmt(r.error_a),
            fmt(r.error_b),
            r.improvement().map_or("-".into(), |g| format!("{g:.2}"))
        );
    }
    let high: Vec<f64> = rows
        .iter()
        .filter(|r| r.mode.order() >= 10)
        .filter_map(|r| r.improvement())
        .collect();
    if let Some(m) = median(&high) {
        println!("median improvement for max(|m|, |n|) >= 10: {m:.2} decades");
    }
    Ok(())
}
