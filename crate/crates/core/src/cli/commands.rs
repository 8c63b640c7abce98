//! The five subcommands and their CSV outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::config::RunConfig;
use crate::assembly::discretize;
use crate::fields::MagneticField;
use crate::geometry::build_mesh;
use crate::linalg::SparseSymMatrix;
use crate::spectrum::{
    compare_cases, convergence_study, exact_spectrum, least_squares_slope, median, solve_case,
    AssociatedSpectrum, ConvergenceRow, ModeComparison, ModeIndex,
};
use crate::{Error, Result};

/// Environment variable bounding the worker threads of a sweep.
pub const THREADS_ENV: &str = "FADG_THREADS";

fn e16(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_e16(v: Option<f64>) -> String {
    v.map(e16).unwrap_or_default()
}

fn mode_fields(mode: Option<ModeIndex>) -> (String, String) {
    mode.map_or((String::new(), String::new()), |m| (m.m.to_string(), m.n.to_string()))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    log::info!("writing {}", path.display());
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_spectrum_csv<W: Write>(mut w: W, spectrum: &AssociatedSpectrum) -> Result<()> {
    writeln!(w, "index,omega2_computed,m,n,amplitude,omega2_exact,error,error_kind")?;
    for r in &spectrum.rows {
        let (m, n) = mode_fields(r.mode);
        writeln!(
            w,
            "{},{},{m},{n},{},{},{},{}",
            r.index,
            e16(r.omega2_computed),
            e16(r.amplitude),
            opt_e16(r.omega2_exact),
            opt_e16(r.error),
            r.error_kind.name()
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence_csv<W: Write>(mut w: W, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(w, "level,Nx,Ny,DoF,max_band_error,slope")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.level,
            r.nx,
            r.ny,
            r.dof,
            e16(r.max_band_error),
            opt_e16(r.slope)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_compare_csv<W: Write>(mut w: W, rows: &[ModeComparison]) -> Result<()> {
    writeln!(w, "m,n,omega2_exact,error_a,error_b,improvement")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.mode.m,
            r.mode.n,
            e16(r.omega2_exact),
            opt_e16(r.error_a),
            opt_e16(r.error_b),
            opt_e16(r.improvement())
        )?;
    }
    w.flush()?;
    Ok(())
}

/// One row per eigenvalue of every surface: `s,omega2,m,n`.
pub fn write_sweep_csv<W: Write>(mut w: W, runs: &[(f64, AssociatedSpectrum)]) -> Result<()> {
    writeln!(w, "s,omega2,m,n")?;
    for (s, spectrum) in runs {
        for r in &spectrum.rows {
            let (m, n) = mode_fields(r.mode);
            writeln!(w, "{},{},{m},{n}", e16(*s), e16(r.omega2_computed))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn dump_matrices(cfg: &RunConfig) -> Result<()> {
    let case = cfg.case()?;
    let mesh = build_mesh(case.mesh)?;
    let field = MagneticField::new(case.mesh.b, case.beta.clone());
    let system = discretize(&mesh, case.basis, &case.alpha, &field, case.eta_s)?;
    system.a.write_coo(create(&cfg.output_dir, "A.coo")?)?;
    SparseSymMatrix::from_block_diag(&system.m).write_coo(create(&cfg.output_dir, "M.coo")?)?;
    Ok(())
}

pub fn solve(cfg: &RunConfig) -> Result<PathBuf> {
    let case = cfg.case()?;
    let result = solve_case(&case)?;
    if let Some(band) = &result.band {
        let analytic = exact_spectrum(case.exact_direction().unwrap(), case.m_max, case.n_max)?
            .band_count(case.omega_max_sq);
        let in_band = result
            .solution
            .eigenvalues
            .iter()
            .filter(|&&w| w <= case.omega_max_sq)
            .count();
        log::info!(
            "{in_band} eigenvalues <= {} (analytic {analytic}), max band error {:e}",
            case.omega_max_sq,
            band.max_error
        );
    }
    if cfg.dump_matrix {
        dump_matrices(cfg)?;
    }
    write_spectrum_csv(create(&cfg.output_dir, "spectrum.csv")?, &result.spectrum)?;
    Ok(cfg.output_dir.join("spectrum.csv"))
}

pub fn convergence(cfg: &RunConfig) -> Result<PathBuf> {
    let rows = convergence_study(&cfg.case()?, &cfg.convergence_levels())?;
    if let Some(s) = least_squares_slope(&rows) {
        log::info!("least-squares order {s:.3}");
    }
    write_convergence_csv(create(&cfg.output_dir, "convergence.csv")?, &rows)?;
    Ok(cfg.output_dir.join("convergence.csv"))
}

pub fn compare(cfg: &RunConfig) -> Result<PathBuf> {
    let a = cfg.case()?;
    let b = cfg.compare_case()?;
    if a.dof() != b.dof() {
        return Err(Error::Config(format!(
            "compared meshes differ in size: DoF {} vs {}",
            a.dof(),
            b.dof()
        )));
    }
    let rows = compare_cases(&a, &b)?;
    let gains: Vec<f64> = rows.iter().filter_map(ModeComparison::improvement).collect();
    if let Some(m) = median(&gains) {
        log::info!(
            "{} vs {}: median improvement {m:.3} decades over {} modes",
            a.mesh.alignment,
            b.mesh.alignment,
            gains.len()
        );
    }
    write_compare_csv(create(&cfg.output_dir, "compare.csv")?, &rows)?;
    Ok(cfg.output_dir.join("compare.csv"))
}

/// Worker count from [`THREADS_ENV`], else the available parallelism.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Solves every surface of the sweep; results are ordered by `s`.
pub fn sweep_runs(cfg: &RunConfig, threads: usize) -> Result<Vec<(f64, AssociatedSpectrum)>> {
    if cfg.surfaces.is_empty() {
        return Err(Error::Config("sweep needs a nonempty 'surfaces' list".into()));
    }
    let cases = cfg
        .surfaces
        .iter()
        .map(|&s| {
            let mut c = cfg.clone();
            c.s = Some(s);
            c.case()
        })
        .collect::<Result<Vec<_>>>()?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<AssociatedSpectrum>>>> =
        Mutex::new((0..cases.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, cases.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(case) = cases.get(k) else { break };
                let r = solve_case(case).map(|r| r.spectrum);
                results.lock().unwrap()[k] = Some(r);
            });
        }
    });
    let mut runs = cfg
        .surfaces
        .iter()
        .zip(results.into_inner().unwrap())
        .map(|(&s, r)| Ok((s, r.expect("every surface is solved")?)))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|x, y| x.0.total_cmp(&y.0));
    for pair in runs.windows(2) {
        let (s0, a) = (&pair[0].0, &pair[0].1);
        let (s1, b) = (&pair[1].0, &pair[1].1);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            if ra.mode != rb.mode {
                log::info!(
                    "eigenvalue {} changes mode between s={s0} and s={s1}: {:?} -> {:?}",
                    ra.index,
                    ra.mode.map(|m| m.to_string()),
                    rb.mode.map(|m| m.to_string())
                );
            }
        }
    }
    Ok(runs)
}

pub fn sweep(cfg: &RunConfig) -> Result<PathBuf> {
    let threads = thread_count()?;
    log::info!("sweeping {} surfaces on {threads} threads", cfg.surfaces.len());
    let runs = sweep_runs(cfg, threads)?;
    write_sweep_csv(create(&cfg.output_dir, "sweep.csv")?, &runs)?;
    Ok(cfg.output_dir.join("sweep.csv"))
}

pub fn exact(cfg: &RunConfig) -> Result<PathBuf> {
    let spectrum = exact_spectrum(cfg.direction()?, cfg.m_max, cfg.n_max)?;
    log::info!(
        "{} eigenvalues <= {} with |m| <= {}, |n| <= {}",
        spectrum.band_count(cfg.omega_max_sq),
        cfg.omega_max_sq,
        cfg.m_max,
        cfg.n_max
    );
    let mut w = create(&cfg.output_dir, "exact_spectrum.csv")?;
    writeln!(w, "m,n,omega2,multiplicity")?;
    for (mode, omega2) in &spectrum.entries {
        writeln!(w, "{},{},{},{}", mode.m, mode.n, e16(*omega2), mode.multiplicity())?;
    }
    w.flush()?;
    Ok(cfg.output_dir.join("exact_spectrum.csv"))
}
