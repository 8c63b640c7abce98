//! Flat `key = value` run configuration.
//!
//! ```text
//! # reference case
//! nx = 8
//! ny = 8
//! alignment = aligned_bottom_top   # or cartesian, aligned_left_right, auto
//! p_xi = 7
//! p_eta = 7
//! b1 = 1.165939761
//! b2 = 1
//! ```
//!
//! Every key can also be given on the command line as `--key value`, which
//! takes precedence over the file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::basis::BasisSpec;
use crate::fields::{iota_profile, load_field, CoefficientField};
use crate::geometry::{choose_alignment, fmt17, Alignment, FieldDirection, MeshConfig};
use crate::spectrum::Case;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub nx: usize,
    pub ny: usize,
    /// `None` picks the layout from `b`.
    pub alignment: Option<Alignment>,
    pub p_xi: usize,
    pub p_eta: usize,
    pub b1: f64,
    pub b2: f64,
    /// Flux label; when set, `b = (iota(s), 1)` replaces `b1`, `b2`.
    pub s: Option<f64>,
    pub eta_s: f64,
    pub omega_max_sq: f64,
    pub window: Option<f64>,
    pub m_max: i32,
    pub n_max: i32,
    pub alpha_file: Option<PathBuf>,
    pub beta_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub tolerance: f64,
    pub max_subspace: usize,
    pub seed: u64,
    /// Convergence levels `(Nx, Ny)`; empty means three doublings of the
    /// base mesh.
    pub levels: Vec<(usize, usize)>,
    /// Flux labels of a surface sweep.
    pub surfaces: Vec<f64>,
    pub compare_alignment: Alignment,
    pub compare_nx: Option<usize>,
    pub compare_ny: Option<usize>,
    pub compare_p_xi: Option<usize>,
    pub compare_p_eta: Option<usize>,
    pub dump_matrix: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nx: 8,
            ny: 8,
            alignment: Some(Alignment::AlignedBottomTop),
            p_xi: 7,
            p_eta: 7,
            b1: 1.165939761,
            b2: 1.0,
            s: None,
            eta_s: crate::assembly::DEFAULT_ETA_S,
            omega_max_sq: 0.2,
            window: None,
            m_max: 20,
            n_max: 20,
            alpha_file: None,
            beta_file: None,
            output_dir: PathBuf::from("."),
            tolerance: crate::eigensolve::DEFAULT_TOLERANCE,
            max_subspace: crate::eigensolve::BandRequest::new(1.0).max_subspace,
            seed: crate::eigensolve::BandRequest::new(1.0).seed,
            levels: Vec::new(),
            surfaces: Vec::new(),
            compare_alignment: Alignment::Cartesian,
            compare_nx: None,
            compare_ny: None,
            compare_p_xi: None,
            compare_p_eta: None,
            dump_matrix: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value '{value}' for '{key}'"))
}

fn parse_opt<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<Option<T>, String> {
    if value.is_empty() || value == "none" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn parse_levels(value: &str) -> std::result::Result<Vec<(usize, usize)>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (a, b) = t
                .split_once('x')
                .ok_or_else(|| format!("level '{t}' is not of the form NxM"))?;
            Ok((parse_num("levels", a.trim())?, parse_num("levels", b.trim())?))
        })
        .collect()
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_num("surfaces", t))
        .collect()
}

fn opt_text<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_else(|| "none".into())
}

impl RunConfig {
    /// Sets one key; the message of the error names the offending key.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key {
            "nx" => self.nx = parse_num(key, value)?,
            "ny" => self.ny = parse_num(key, value)?,
            "alignment" => {
                self.alignment = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|e: Error| e.to_string())?)
                }
            }
            "p_xi" => self.p_xi = parse_num(key, value)?,
            "p_eta" => self.p_eta = parse_num(key, value)?,
            "p" => {
                self.p_xi = parse_num(key, value)?;
                self.p_eta = self.p_xi;
            }
            "b1" => self.b1 = parse_num(key, value)?,
            "b2" => self.b2 = parse_num(key, value)?,
            "s" => self.s = parse_opt(key, value)?,
            "eta_s" => self.eta_s = parse_num(key, value)?,
            "omega_max_sq" => self.omega_max_sq = parse_num(key, value)?,
            "window" => self.window = parse_opt(key, value)?,
            "m_max" => self.m_max = parse_num(key, value)?,
            "n_max" => self.n_max = parse_num(key, value)?,
            "alpha_file" => self.alpha_file = parse_opt(key, value)?,
            "beta_file" => self.beta_file = parse_opt(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "tolerance" => self.tolerance = parse_num(key, value)?,
            "max_subspace" => self.max_subspace = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "levels" => self.levels = parse_levels(value)?,
            "surfaces" => self.surfaces = parse_list(value)?,
            "compare_alignment" => {
                self.compare_alignment = value.parse().map_err(|e: Error| e.to_string())?
            }
            "compare_nx" => self.compare_nx = parse_opt(key, value)?,
            "compare_ny" => self.compare_ny = parse_opt(key, value)?,
            "compare_p_xi" => self.compare_p_xi = parse_opt(key, value)?,
            "compare_p_eta" => self.compare_p_eta = parse_opt(key, value)?,
            "dump_matrix" => self.dump_matrix = parse_num(key, value)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Parses a configuration file body on top of the defaults.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: origin.to_path_buf(),
                line: no + 1,
                msg,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{content}'")))?;
            cfg.set(key.trim(), value).map_err(err)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }

    /// Applies `--key value` pairs.
    pub fn apply_overrides(&mut self, args: &[String]) -> Result<()> {
        let mut it = args.iter();
        while let Some(flag) = it.next() {
            let key = flag
                .strip_prefix("--")
                .ok_or_else(|| Error::Config(format!("expected --key, got '{flag}'")))?;
            let (key, value) = match key.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| Error::Config(format!("missing value for --{key}")))?;
                    (key.to_string(), v.clone())
                }
            };
            self.set(&key.replace('-', "_"), &value).map_err(Error::Config)?;
        }
        Ok(())
    }

    /// Every effective value, in a form [`RunConfig::parse`] reads back.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "none".into())
        };
        let levels = self
            .levels
            .iter()
            .map(|(a, b)| format!("{a}x{b}"))
            .collect::<Vec<_>>()
            .join(",");
        let surfaces = self.surfaces.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(",");
        let entries: Vec<(&str, String)> = vec![
            ("nx", self.nx.to_string()),
            ("ny", self.ny.to_string()),
            ("alignment", self.alignment.map_or("auto".into(), |a| a.name().into())),
            ("p_xi", self.p_xi.to_string()),
            ("p_eta", self.p_eta.to_string()),
            ("b1", fmt17(self.b1)),
            ("b2", fmt17(self.b2)),
            ("s", self.s.map_or("none".into(), fmt17)),
            ("eta_s", fmt17(self.eta_s)),
            ("omega_max_sq", fmt17(self.omega_max_sq)),
            ("window", self.window.map_or("none".into(), fmt17)),
            ("m_max", self.m_max.to_string()),
            ("n_max", self.n_max.to_string()),
            ("alpha_file", path(&self.alpha_file)),
            ("beta_file", path(&self.beta_file)),
            ("output_dir", self.output_dir.display().to_string()),
            ("tolerance", fmt17(self.tolerance)),
            ("max_subspace", self.max_subspace.to_string()),
            ("seed", self.seed.to_string()),
            ("levels", levels),
            ("surfaces", surfaces),
            ("compare_alignment", self.compare_alignment.name().into()),
            ("compare_nx", opt_text(&self.compare_nx)),
            ("compare_ny", opt_text(&self.compare_ny)),
            ("compare_p_xi", opt_text(&self.compare_p_xi)),
            ("compare_p_eta", opt_text(&self.compare_p_eta)),
            ("dump_matrix", self.dump_matrix.to_string()),
        ];
        for (k, v) in entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn direction(&self) -> Result<FieldDirection> {
        match self.s {
            Some(s) => iota_profile(s),
            None => FieldDirection::new(self.b1, self.b2),
        }
    }

    fn load_coefficient(path: &Option<PathBuf>) -> Result<CoefficientField> {
        match path {
            Some(p) => load_field(p),
            None => Ok(CoefficientField::constant(1.0)),
        }
    }

    /// The single-solve case described by this configuration.
    pub fn case(&self) -> Result<Case> {
        let b = self.direction()?;
        let alignment = self.alignment.unwrap_or_else(|| choose_alignment(b));
        let mesh = MeshConfig::new(self.nx, self.ny, alignment, b);
        let mut case = Case::new(mesh, BasisSpec::new(self.p_xi, self.p_eta));
        case.alpha = Self::load_coefficient(&self.alpha_file)?;
        case.beta = Self::load_coefficient(&self.beta_file)?;
        case.eta_s = self.eta_s;
        case.omega_max_sq = self.omega_max_sq;
        case.window = self.window;
        case.m_max = self.m_max;
        case.n_max = self.n_max;
        case.tolerance = self.tolerance;
        case.max_subspace = self.max_subspace;
        case.seed = self.seed;
        case.validate()?;
        Ok(case)
    }

    /// The second case of a comparison: the base case with the `compare_*`
    /// settings applied.
    pub fn compare_case(&self) -> Result<Case> {
        let mut case = self.case()?;
        case.mesh.alignment = self.compare_alignment;
        case.mesh.nx = self.compare_nx.unwrap_or(self.nx);
        case.mesh.ny = self.compare_ny.unwrap_or(self.ny);
        case.basis = BasisSpec::new(
            self.compare_p_xi.unwrap_or(self.p_xi),
            self.compare_p_eta.unwrap_or(self.p_eta),
        );
        case.validate()?;
        Ok(case)
    }

    pub fn convergence_levels(&self) -> Vec<(usize, usize)> {
        if self.levels.is_empty() {
            (0..3).map(|k| (self.nx << k, self.ny << k)).collect()
        } else {
            self.levels.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_case() {
        let case = RunConfig::default().case().unwrap();
        assert_eq!(case.mesh.nx, 8);
        assert_eq!(case.mesh.alignment, Alignment::AlignedBottomTop);
        assert_eq!(case.basis, BasisSpec::new(7, 7));
        assert_eq!(case.mesh.b.b1, 1.165939761);
        assert_eq!(case.eta_s, 6.0);
        assert_eq!(case.omega_max_sq, 0.2);
        assert_eq!(case.dof(), 4096);
    }

    #[test]
    fn parse_and_override() {
        let text = "nx = 4  # coarse\nny=16\nalignment = cartesian\nlevels = 2x8, 4x16\n";
        let mut cfg = RunConfig::parse(text, Path::new("a.cfg")).unwrap();
        assert_eq!((cfg.nx, cfg.ny), (4, 16));
        assert_eq!(cfg.levels, vec![(2, 8), (4, 16)]);
        cfg.apply_overrides(&["--nx".into(), "6".into(), "--p-eta=3".into()]).unwrap();
        assert_eq!((cfg.nx, cfg.p_eta), (6, 3));
        assert!(cfg.apply_overrides(&["--bogus".into(), "1".into()]).is_err());
        match RunConfig::parse("nx = 4\nny = x\n", Path::new("b.cfg")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn text_round_trip() {
        let cfg = RunConfig {
            s: Some(0.25),
            window: Some(0.5),
            surfaces: vec![0.0, 0.5, 1.0],
            levels: vec![(2, 8), (4, 16)],
            compare_nx: Some(4),
            alpha_file: Some(PathBuf::from("alpha.txt")),
            ..RunConfig::default()
        };
        let back = RunConfig::parse(&cfg.to_text(), Path::new("echo")).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn zero_cells_is_a_config_error() {
        let cfg = RunConfig { nx: 0, ..RunConfig::default() };
        let e = cfg.case().unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
