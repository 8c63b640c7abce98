//! Moving resolution from the field direction to the perpendicular one at
//! fixed DoF: aligned 4x16 cells against aligned 8x8 cells, both p = 7.
//!
//! ```text
//! cargo run --release --example resolution_redistribution
//! ```

use fadg::basis::BasisSpec;
use fadg::geometry::{Alignment, FieldDirection, MeshConfig};
use fadg::spectrum::{compare_cases, median, Case};

fn main() -> fadg::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let b = FieldDirection::new(1.165939761, 1.0)?;
    let case = |nx, ny| {
        let mut c = Case::new(MeshConfig::new(nx, ny, Alignment::AlignedBottomTop, b), BasisSpec::new(7, 7));
        c.window = Some(1.0);
        c
    };
    let (stretched, uniform) = (case(4, 16), case(8, 8));
    println!("DoF {} vs {}", stretched.dof(), uniform.dof());
    let rows = compare_cases(&stretched, &uniform)?;
    println!("{:>10} {:>12} {:>12} {:>8}", "mode", "4x16", "8x8", "decades");
    let mut gains = Vec::new();
    for r in &rows {
        let (Some(a), Some(u), Some(g)) = (r.error_a, r.error_b, r.improvement()) else {
            continue;
        };
        println!("{:>10} {a:>12.3e} {u:>12.3e} {g:>8.2}", r.mode.to_string());
        if r.mode.order() > 4 {
            gains.push(g);
        }
    }
    if let Some(m) = median(&gains) {
        println!("median improvement for mode numbers > 4: {m:.2} decades");
    }
    Ok(())
}
