//! Analytic band of the constant-coefficient problem: every `(m, n)` with
//! `(b1 m + b2 n)^2 <= omega_max^2`, including high mode numbers nearly
//! perpendicular to `b`.
//!
//! ```text
//! cargo run --example exact_spectrum [b1 b2 omega_max_sq]
//! ```

use fadg::geometry::FieldDirection;
use fadg::spectrum::exact_spectrum;

fn main() -> fadg::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let (b1, b2, band) = match args.as_slice() {
        [b1, b2, w] => (*b1, *b2, *w),
        [] => (1.165939761, 1.0, 0.2),
        _ => panic!("usage: exact_spectrum [b1 b2 omega_max_sq]"),
    };
    let spectrum = exact_spectrum(FieldDirection::new(b1, b2)?, 20, 20)?;
    println!("b = ({b1}, {b2}), |m|, |n| <= 20");
    println!("{:>10} {:>24} {:>5}", "mode", "omega^2", "mult");
    for (mode, w) in spectrum.band(band) {
        println!("{:>10} {:>24.16e} {:>5}", mode.to_string(), w, mode.multiplicity());
    }
    println!("{} eigenvalues <= {band} counted with multiplicity", spectrum.band_count(band));
    Ok(())
}
