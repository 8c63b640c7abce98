//! Analytic spectrum, Fourier association of discrete eigenvectors, error
//! tables and the solve/convergence drivers built on them.
//!
//! For constant coefficients the eigenfunctions are `exp(i (m x + n y))` with
//! `omega^2 = (b1 m + b2 n)^2`. Real discrete eigenvectors mix `(m, n)` and
//! `(-m, -n)`, so modes are reported through the canonical representative
//! of the pair (`m > 0`, or `m = 0` and `n >= 0`) with summed magnitudes.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::assembly::{discretize, DofMap};
use crate::basis::{gauss_rule, legendre_norm_sq, BasisSpec, QuadratureRule};
use crate::eigensolve::{band_eig, BandRequest, EigenSolution};
use crate::fields::{CoefficientField, MagneticField};
use crate::geometry::{build_mesh, FieldDirection, Mesh, MeshConfig};
use crate::{Error, Result, TWO_PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub m: i32,
    pub n: i32,
}

impl ModeIndex {
    /// Canonical representative of `{(m, n), (-m, -n)}`.
    pub fn canonical(m: i32, n: i32) -> Self {
        if m > 0 || (m == 0 && n >= 0) {
            Self { m, n }
        } else {
            Self { m: -m, n: -n }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0 && self.n == 0
    }

    /// `max(|m|, |n|)`.
    pub fn order(&self) -> i32 {
        self.m.abs().max(self.n.abs())
    }

    pub fn multiplicity(&self) -> usize {
        if self.is_zero() {
            1
        } else {
            2
        }
    }

    fn tie_key(&self) -> (i32, i32) {
        (self.m.abs() + self.n.abs(), self.m)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

pub fn omega2_exact(b: FieldDirection, mode: ModeIndex) -> f64 {
    let k = b.b1 * mode.m as f64 + b.b2 * mode.n as f64;
    k * k
}

/// Canonical modes with `|m| <= m_max`, `|n| <= n_max`, in ascending order.
pub fn canonical_modes(m_max: i32, n_max: i32) -> Vec<ModeIndex> {
    let mut out = Vec::new();
    for m in 0..=m_max {
        for n in -n_max..=n_max {
            if m > 0 || n >= 0 {
                out.push(ModeIndex { m, n });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSpectrum {
    pub b: FieldDirection,
    pub m_max: i32,
    pub n_max: i32,
    /// Sorted by `omega^2`, then by mode.
    pub entries: Vec<(ModeIndex, f64)>,
}

impl ExactSpectrum {
    pub fn omega2(&self, mode: ModeIndex) -> f64 {
        omega2_exact(self.b, mode)
    }

    pub fn band(&self, omega_max_sq: f64) -> Vec<(ModeIndex, f64)> {
        self.entries
            .iter()
            .copied()
            .filter(|&(_, w)| w <= omega_max_sq)
            .collect()
    }

    /// Number of eigenvalues `<= omega_max_sq` counted with multiplicity.
    pub fn band_count(&self, omega_max_sq: f64) -> usize {
        self.band(omega_max_sq)
            .iter()
            .map(|(mode, _)| mode.multiplicity())
            .sum()
    }
}

pub fn exact_spectrum(b: FieldDirection, m_max: i32, n_max: i32) -> Result<ExactSpectrum> {
    if m_max < 0 || n_max < 0 {
        return Err(Error::Config(format!(
            "mode bounds must be nonnegative, got ({m_max}, {n_max})"
        )));
    }
    let mut entries: Vec<(ModeIndex, f64)> = canonical_modes(m_max, n_max)
        .into_iter()
        .map(|mode| (mode, omega2_exact(b, mode)))
        .collect();
    entries.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.tie_key().cmp(&y.0.tie_key())));
    Ok(ExactSpectrum {
        b,
        m_max,
        n_max,
        entries,
    })
}

/// Fourier moments `int_K P_a(xi) P_b(eta) exp(i (m x + n y))` of every
/// basis function, precomputed per cell shape.
pub struct FourierProjector {
    basis: BasisSpec,
    m_max: i32,
    n_max: i32,
    modes: Vec<ModeIndex>,
    ncells: usize,
    /// Per cell: `exp(i (m, n) . x0)` for every mode.
    phase: Vec<Vec<Complex64>>,
    /// Per cell: index into `moments`.
    shape_of: Vec<usize>,
    /// Per shape and mode: `|det J| I_a(k_xi)` and `I_b(k_eta)`.
    moments: Vec<Vec<(Vec<Complex64>, Vec<Complex64>)>>,
    det: Vec<f64>,
}

/// `int_{-1}^{1} P_a(t) exp(i w (t + 1) / 2) dt` for `a = 0..=p`.
fn legendre_moments(p: usize, w: f64, rules: &mut HashMap<usize, QuadratureRule>) -> Result<Vec<Complex64>> {
    let npts = ((p as f64 + w.abs()) / 2.0).ceil() as usize + 10;
    let rule = match rules.entry(npts) {
        Entry::Occupied(e) => e.into_mut(),
        Entry::Vacant(e) => e.insert(gauss_rule(npts)?),
    };
    let mut out = vec![Complex64::new(0.0, 0.0); p + 1];
    let mut v = vec![0.0; p + 1];
    let mut d = vec![0.0; p + 1];
    for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
        crate::basis::legendre_into(t, &mut v, &mut d);
        let e = Complex64::from_polar(wt, 0.5 * w * (t + 1.0));
        for a in 0..=p {
            out[a] += e * v[a];
        }
    }
    Ok(out)
}

impl FourierProjector {
    pub fn new(mesh: &Mesh, basis: BasisSpec, m_max: i32, n_max: i32) -> Result<Self> {
        if m_max < 0 || n_max < 0 {
            return Err(Error::Config("mode bounds must be nonnegative".into()));
        }
        let modes = canonical_modes(m_max, n_max);
        let mut rules = HashMap::new();
        let mut shapes: Vec<([f64; 2], [f64; 2])> = Vec::new();
        let mut moments = Vec::new();
        let mut shape_of = Vec::with_capacity(mesh.num_cells());
        let mut phase = Vec::with_capacity(mesh.num_cells());
        for cell in &mesh.cells {
            let key = (cell.e_xi, cell.e_eta);
            let s = match shapes.iter().position(|&k| k == key) {
                Some(s) => s,
                None => {
                    let det = cell.det_jacobian();
                    let table = modes
                        .iter()
                        .map(|mode| {
                            let (m, n) = (mode.m as f64, mode.n as f64);
                            let kx = m * cell.e_xi[0] + n * cell.e_xi[1];
                            let ke = m * cell.e_eta[0] + n * cell.e_eta[1];
                            let ix: Vec<Complex64> = legendre_moments(basis.p_xi, kx, &mut rules)?
                                .into_iter()
                                .map(|c| c * det)
                                .collect();
                            let ie = legendre_moments(basis.p_eta, ke, &mut rules)?;
                            Ok((ix, ie))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    shapes.push(key);
                    moments.push(table);
                    shapes.len() - 1
                }
            };
            shape_of.push(s);
            let [x0, y0] = cell.anchor;
            phase.push(
                modes
                    .iter()
                    .map(|mode| Complex64::from_polar(1.0, mode.m as f64 * x0 + mode.n as f64 * y0))
                    .collect(),
            );
        }
        Ok(Self {
            basis,
            m_max,
            n_max,
            modes,
            ncells: mesh.num_cells(),
            phase,
            shape_of,
            moments,
            det: mesh.cells.iter().map(|c| c.det_jacobian()).collect(),
        })
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    /// Complex moments `c(m, n) = int phi exp(i (m x + n y))` over the
    /// canonical modes.
    pub fn moments(&self, coeffs: &[f64]) -> Result<Vec<Complex64>> {
        let d = self.basis.local_dim();
        if coeffs.len() != self.ncells * d {
            return Err(Error::DimensionMismatch {
                expected: self.ncells * d,
                got: coeffs.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.modes.len()];
        let pe = self.basis.p_eta + 1;
        let mut partial = vec![Complex64::new(0.0, 0.0); self.basis.p_xi + 1];
        for c in 0..self.ncells {
            let phi = &coeffs[c * d..(c + 1) * d];
            if phi.iter().all(|&v| v == 0.0) {
                continue;
            }
            let table = &self.moments[self.shape_of[c]];
            for (k, (ix, ie)) in table.iter().enumerate() {
                for (a, pa) in partial.iter_mut().enumerate() {
                    let row = &phi[a * pe..(a + 1) * pe];
                    *pa = row.iter().zip(ie).map(|(&v, &e)| e * v).sum();
                }
                let s: Complex64 = partial.iter().zip(ix).map(|(&p, &x)| p * x).sum();
                out[k] += s * self.phase[c][k];
            }
        }
        Ok(out)
    }

    /// `int phi^2` of the discrete function.
    pub fn l2_norm_sq(&self, coeffs: &[f64]) -> f64 {
        let d = self.basis.local_dim();
        let weights: Vec<f64> = (0..d)
            .map(|k| {
                let (a, b) = self.basis.degrees(k);
                legendre_norm_sq(a) * legendre_norm_sq(b)
            })
            .collect();
        coeffs
            .chunks(d)
            .zip(&self.det)
            .map(|(phi, det)| det * phi.iter().zip(&weights).map(|(v, w)| v * v * w).sum::<f64>())
            .sum()
    }

    /// Amplitudes `|c(m, n)| + |c(-m, -n)|` (just `|c(0, 0)|` for the zero
    /// mode). For real vectors both terms are equal.
    pub fn project(&self, coeffs: &[f64]) -> Result<ProjectionTable> {
        let moments = self.moments(coeffs)?;
        let energy = TWO_PI * TWO_PI * self.l2_norm_sq(coeffs);
        let amplitudes = self
            .modes
            .iter()
            .zip(moments)
            .map(|(mode, c)| {
                let a = if mode.is_zero() { c.norm() } else { 2.0 * c.norm() };
                (*mode, a)
            })
            .collect();
        Ok(ProjectionTable {
            m_max: self.m_max,
            n_max: self.n_max,
            amplitudes,
            energy,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionTable {
    pub m_max: i32,
    pub n_max: i32,
    pub amplitudes: Vec<(ModeIndex, f64)>,
    /// `4 pi^2 int phi^2`, the total of `|c(m, n)|^2` over all modes.
    pub energy: f64,
}

impl ProjectionTable {
    pub fn amplitude(&self, mode: ModeIndex) -> f64 {
        let mode = ModeIndex::canonical(mode.m, mode.n);
        self.amplitudes
            .iter()
            .find(|(m, _)| *m == mode)
            .map_or(0.0, |&(_, a)| a)
    }

    /// Fraction of the total Fourier energy carried by the pair of `mode`.
    pub fn share(&self, mode: ModeIndex) -> f64 {
        let a = self.amplitude(mode);
        let e = if mode.is_zero() { a * a } else { 0.5 * a * a };
        if self.energy > 0.0 {
            e / self.energy
        } else {
            0.0
        }
    }

    /// Mode of maximal amplitude; ties go to the smaller `|m| + |n|`, then
    /// the smaller `m`. `None` when every amplitude vanishes.
    pub fn argmax(&self) -> Option<(ModeIndex, f64)> {
        let top = self.amplitudes.iter().map(|&(_, a)| a).fold(0.0, f64::max);
        if !(top > 0.0) {
            return None;
        }
        let tol = 1e-12 * top;
        self.amplitudes
            .iter()
            .copied()
            .filter(|&(_, a)| a >= top - tol)
            .min_by_key(|(mode, _)| mode.tie_key())
    }
}

pub fn project_to_fourier(
    mesh: &Mesh,
    basis: BasisSpec,
    eigenvector: &[f64],
    m_max: i32,
    n_max: i32,
) -> Result<ProjectionTable> {
    FourierProjector::new(mesh, basis, m_max, n_max)?.project(eigenvector)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Relative,
    Absolute,
    None,
}

impl ErrorKind {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorKind::Relative => "relative",
            ErrorKind::Absolute => "absolute",
            ErrorKind::None => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssociatedEigenvalue {
    pub index: usize,
    pub omega2_computed: f64,
    pub mode: Option<ModeIndex>,
    pub amplitude: f64,
    pub omega2_exact: Option<f64>,
    pub error: Option<f64>,
    pub error_kind: ErrorKind,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct AssociatedSpectrum {
    pub rows: Vec<AssociatedEigenvalue>,
}

/// Relative error, or absolute when the exact value is zero.
pub fn eigenvalue_error(computed: f64, exact: f64) -> (f64, ErrorKind) {
    if exact == 0.0 {
        (computed.abs(), ErrorKind::Absolute)
    } else {
        ((computed - exact).abs() / exact.abs(), ErrorKind::Relative)
    }
}

/// Associations whose mode pair carries less than this fraction of the
/// eigenvector's Fourier energy are rejected: such vectors live on modes
/// outside the search window.
pub const MIN_ENERGY_SHARE: f64 = 0.01;

/// Associates every eigenpair with the Fourier mode of maximal amplitude.
/// When `exact` is given (constant coefficients) the analytic eigenvalue and
/// the error are attached.
pub fn associate_modes(
    solution: &EigenSolution,
    projections: &[ProjectionTable],
    exact: Option<FieldDirection>,
) -> Result<AssociatedSpectrum> {
    if projections.len() != solution.len() {
        return Err(Error::DimensionMismatch {
            expected: solution.len(),
            got: projections.len(),
        });
    }
    let rows = solution
        .eigenvalues
        .iter()
        .zip(projections)
        .enumerate()
        .map(|(index, (&w, proj))| {
            let best = proj.argmax();
            let mode = best
                .map(|(m, _)| m)
                .filter(|&m| proj.share(m) >= MIN_ENERGY_SHARE);
            let amplitude = best.map_or(0.0, |(_, a)| a);
            let (omega2_exact, error, error_kind) = match (mode, exact) {
                (Some(mode), Some(b)) => {
                    let e = omega2_exact(b, mode);
                    let (err, kind) = eigenvalue_error(w, e);
                    (Some(e), Some(err), kind)
                }
                _ => (None, None, ErrorKind::None),
            };
            AssociatedEigenvalue {
                index,
                omega2_computed: w,
                mode,
                amplitude,
                omega2_exact,
                error,
                error_kind,
            }
        })
        .collect();
    Ok(AssociatedSpectrum { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandRow {
    pub mode: ModeIndex,
    pub omega2_exact: f64,
    pub omega2_computed: f64,
    pub error: f64,
    pub max_mode_number: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandReport {
    pub rows: Vec<BandRow>,
    pub max_error: f64,
}

impl BandReport {
    /// Largest error per canonical mode, in order of first appearance.
    pub fn per_mode(&self) -> Vec<(ModeIndex, f64)> {
        let mut out: Vec<(ModeIndex, f64)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(m, _)| *m == r.mode) {
                Some(e) => e.1 = e.1.max(r.error),
                None => out.push((r.mode, r.error)),
            }
        }
        out
    }
}

/// Rows whose associated analytic eigenvalue lies in the band.
pub fn band_error_report(assoc: &AssociatedSpectrum, omega_max_sq: f64) -> Result<BandReport> {
    let mut rows = Vec::new();
    for r in &assoc.rows {
        let (Some(mode), Some(exact), Some(error)) = (r.mode, r.omega2_exact, r.error) else {
            if r.error_kind == ErrorKind::None && r.mode.is_some() {
                return Err(Error::Config(
                    "band error report needs a constant-coefficient run".into(),
                ));
            }
            continue;
        };
        if exact <= omega_max_sq {
            rows.push(BandRow {
                mode,
                omega2_exact: exact,
                omega2_computed: r.omega2_computed,
                error,
                max_mode_number: mode.order(),
            });
        }
    }
    let max_error = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    Ok(BandReport { rows, max_error })
}

/// Everything that defines one discrete eigenvalue computation.
#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub mesh: MeshConfig,
    pub basis: BasisSpec,
    pub alpha: CoefficientField,
    pub beta: CoefficientField,
    pub eta_s: f64,
    pub omega_max_sq: f64,
    /// Upper end of the solved eigenvalue window (at least `omega_max_sq`).
    pub window: Option<f64>,
    pub m_max: i32,
    pub n_max: i32,
    pub tolerance: f64,
    pub max_subspace: usize,
    /// Seed of the Krylov start block.
    pub seed: u64,
}

impl Case {
    /// Constant coefficients, `eta_S = 6`, band `omega^2 <= 0.2`, modes up
    /// to 20.
    pub fn new(mesh: MeshConfig, basis: BasisSpec) -> Self {
        Self {
            mesh,
            basis,
            alpha: CoefficientField::constant(1.0),
            beta: CoefficientField::constant(1.0),
            eta_s: crate::assembly::DEFAULT_ETA_S,
            omega_max_sq: 0.2,
            window: None,
            m_max: 20,
            n_max: 20,
            tolerance: crate::eigensolve::DEFAULT_TOLERANCE,
            max_subspace: BandRequest::new(1.0).max_subspace,
            seed: BandRequest::new(1.0).seed,
        }
    }

    pub fn dof(&self) -> usize {
        self.mesh.nx * self.mesh.ny * self.basis.local_dim()
    }

    pub fn constant_coefficients(&self) -> bool {
        self.alpha.is_constant() && self.beta.is_constant()
    }

    /// Field direction the analytic spectrum applies to, when it applies.
    /// Constant `alpha = a`, `beta = c` scale `omega^2` by `c^2 / a`, which
    /// is absorbed into an equivalent direction.
    pub fn exact_direction(&self) -> Option<FieldDirection> {
        if !self.constant_coefficients() {
            return None;
        }
        let s = self.beta.mean / self.alpha.mean.sqrt();
        FieldDirection::new(s * self.mesh.b.b1, s * self.mesh.b.b2).ok()
    }

    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        self.alpha.check_positive()?;
        self.beta.check_positive()?;
        if !(self.eta_s >= 0.0 && self.eta_s.is_finite()) {
            return Err(Error::Config(format!("eta_S must be >= 0, got {}", self.eta_s)));
        }
        if !(self.omega_max_sq > 0.0 && self.omega_max_sq.is_finite()) {
            return Err(Error::Config(format!(
                "omega_max_sq must be positive, got {}",
                self.omega_max_sq
            )));
        }
        if let Some(w) = self.window {
            if !(w >= self.omega_max_sq && w.is_finite()) {
                return Err(Error::Config(format!("window {w} below omega_max_sq")));
            }
        }
        if self.m_max < 0 || self.n_max < 0 {
            return Err(Error::Config("mode bounds must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub dof: usize,
    pub nnz_percent: f64,
    pub solution: EigenSolution,
    pub spectrum: AssociatedSpectrum,
    /// Present for constant coefficients.
    pub band: Option<BandReport>,
}

/// Mesh, assembly, band solve and mode association for one case.
pub fn solve_case(case: &Case) -> Result<CaseResult> {
    case.validate()?;
    let mesh = build_mesh(case.mesh)?;
    let field = MagneticField::new(case.mesh.b, case.beta.clone());
    let system = discretize(&mesh, case.basis, &case.alpha, &field, case.eta_s)?;
    let dof = DofMap::new(&mesh, case.basis).size();
    let nnz_percent = system.nnz_percent();
    log::info!(
        "{} {}x{} p=({}, {}): DoF {dof}, nnz(A) {nnz_percent:.3}%",
        case.mesh.alignment,
        case.mesh.nx,
        case.mesh.ny,
        case.basis.p_xi,
        case.basis.p_eta
    );
    let mut req = BandRequest::new(case.window.unwrap_or(case.omega_max_sq));
    req.tolerance = case.tolerance;
    req.max_subspace = case.max_subspace;
    req.seed = case.seed;
    let solution = band_eig(&system.a, &system.m, &req)?;
    let projector = FourierProjector::new(&mesh, case.basis, case.m_max, case.n_max)?;
    let projections = (0..solution.len())
        .map(|k| projector.project(solution.eigenvectors.column(k).as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let exact = case.exact_direction();
    let spectrum = associate_modes(&solution, &projections, exact)?;
    let band = match exact {
        Some(_) => Some(band_error_report(&spectrum, case.omega_max_sq)?),
        None => None,
    };
    log::info!(
        "band count {}{}",
        solution.len(),
        band.as_ref()
            .map(|b| format!(", max band error {:e}", b.max_error))
            .unwrap_or_default()
    );
    Ok(CaseResult {
        dof,
        nnz_percent,
        solution,
        spectrum,
        band,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub nx: usize,
    pub ny: usize,
    pub dof: usize,
    pub max_band_error: f64,
    /// Observed order against the previous level, `-d ln(err) / d ln(DoF)`.
    pub slope: Option<f64>,
}

/// Order between two levels; zero when the errors agree.
pub fn pair_slope(dof0: f64, err0: f64, dof1: f64, err1: f64) -> f64 {
    if err0 == err1 {
        return 0.0;
    }
    -(err1 / err0).ln() / (dof1 / dof0).ln()
}

/// Least-squares order `-d ln(err) / d ln(DoF)` over all levels.
pub fn least_squares_slope(rows: &[ConvergenceRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.dof as f64).ln(), r.max_band_error.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Some(0.0);
    }
    Some(-sxy / sxx)
}

/// Runs the template case on every `(Nx, Ny)` level.
pub fn convergence_study(template: &Case, levels: &[(usize, usize)]) -> Result<Vec<ConvergenceRow>> {
    if levels.len() < 2 {
        return Err(Error::Config("a convergence study needs at least two levels".into()));
    }
    if template.exact_direction().is_none() {
        return Err(Error::Config("convergence studies need constant coefficients".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for (level, &(nx, ny)) in levels.iter().enumerate() {
        let mut case = template.clone();
        case.mesh.nx = nx;
        case.mesh.ny = ny;
        let result = solve_case(&case)?;
        let err = result.band.map_or(f64::NAN, |b| b.max_error);
        let slope = rows
            .last()
            .map(|p| pair_slope(p.dof as f64, p.max_band_error, result.dof as f64, err));
        if let Some(s) = slope {
            if s < 0.0 {
                log::warn!("error grew from level {} to {level} (slope {s:.3})", level - 1);
            }
        }
        rows.push(ConvergenceRow {
            level,
            nx,
            ny,
            dof: result.dof,
            max_band_error: err,
            slope,
        });
    }
    Ok(rows)
}

/// Band errors of two discretizations of the same problem, per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeComparison {
    pub mode: ModeIndex,
    pub omega2_exact: f64,
    pub error_a: Option<f64>,
    pub error_b: Option<f64>,
}

impl ModeComparison {
    /// `log10(error_b / error_a)`: decades gained by `a` over `b`.
    pub fn improvement(&self) -> Option<f64> {
        let (a, b) = (self.error_a?, self.error_b?);
        if a == b {
            return Some(0.0);
        }
        Some((b / a).log10())
    }
}

/// Solves both cases and lines up their band errors over the analytic band
/// of `a`. Both must have constant coefficients and the same band.
pub fn compare_cases(a: &Case, b: &Case) -> Result<Vec<ModeComparison>> {
    let dir = a
        .exact_direction()
        .ok_or_else(|| Error::Config("comparisons need constant coefficients".into()))?;
    if b.exact_direction() != Some(dir) || a.omega_max_sq != b.omega_max_sq {
        return Err(Error::Config("compared cases describe different problems".into()));
    }
    let ra = solve_case(a)?;
    let rb = solve_case(b)?;
    let errs = |r: &CaseResult| -> HashMap<ModeIndex, f64> {
        r.band.as_ref().map(|b| b.per_mode().into_iter().collect()).unwrap_or_default()
    };
    let (ea, eb) = (errs(&ra), errs(&rb));
    let exact = exact_spectrum(dir, a.m_max, a.n_max)?;
    Ok(exact
        .band(a.omega_max_sq)
        .into_iter()
        .map(|(mode, w)| ModeComparison {
            mode,
            omega2_exact: w,
            error_a: ea.get(&mode).copied(),
            error_b: eb.get(&mode).copied(),
        })
        .collect())
}

/// Median of the values, `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}
