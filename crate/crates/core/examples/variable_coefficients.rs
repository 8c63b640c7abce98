//! Flux-surface sweep with variable coefficients: `b = (iota(s), 1)` from the
//! rotational transform profile, `alpha = 1 + 0.2 cos x cos y`,
//! `beta = 1 + 0.1 cos y`. Prints the lowest band eigenvalues per surface
//! with their dominant Fourier mode; the association may change from one
//! surface to the next.
//!
//! ```text
//! FADG_THREADS=4 cargo run --release --example variable_coefficients
//! ```

use fadg::cli::commands::{sweep_runs, thread_count};
use fadg::cli::RunConfig;

fn main() -> fadg::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let dir = std::env::temp_dir().join("fadg-variable-coefficients");
    std::fs::create_dir_all(&dir)?;
    let alpha = dir.join("alpha.txt");
    let beta = dir.join("beta.txt");
    // cos x cos y = (cos(x + y) + cos(x - y)) / 2
    std::fs::write(&alpha, "mean 1\n1 1 0.1 0\n1 -1 0.1 0\n")?;
    std::fs::write(&beta, "mean 1\n0 1 0.1 0\n")?;

    let mut cfg = RunConfig::default();
    for (k, v) in [
        ("nx", "4"),
        ("ny", "16"),
        ("p_xi", "3"),
        ("p_eta", "5"),
        ("omega_max_sq", "0.05"),
        ("surfaces", "0, 0.25, 0.5, 0.75, 1"),
    ] {
        cfg.set(k, v).map_err(fadg::Error::Config)?;
    }
    cfg.alpha_file = Some(alpha);
    cfg.beta_file = Some(beta);

    for (s, spectrum) in sweep_runs(&cfg, thread_count()?)? {
        let lowest: Vec<String> = spectrum
            .rows
            .iter()
            .take(7)
            .map(|r| {
                format!(
                    "{:.5e} {}",
                    r.omega2_computed,
                    r.mode.map_or("?".to_string(), |m| m.to_string())
                )
            })
            .collect();
        println!("s = {s:<4}  {}", lowest.join(" | "));
    }
    Ok(())
}
