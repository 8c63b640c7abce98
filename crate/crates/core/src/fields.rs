//! Periodic coefficient fields `alpha(x), beta(x) > 0` as truncated Fourier
//! series, and the magnetic field `B = beta(x) b`.
//!
//! File format (plain text, `#` starts a comment):
//!
//! ```text
//! mean 1.0
//! # m n c_cos c_sin   ->  c_cos cos(m x + n y) + c_sin sin(m x + n y)
//! 1 0 0.3 0.0
//! ```

use std::path::Path;

use crate::geometry::FieldDirection;
use crate::{Error, Result, TWO_PI};

/// Sampling grid used for the positivity check.
pub const POSITIVITY_GRID: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    pub m: i32,
    pub n: i32,
    pub c_cos: f64,
    pub c_sin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    pub mean: f64,
    pub harmonics: Vec<Harmonic>,
}

impl CoefficientField {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            harmonics: Vec::new(),
        }
    }

    pub fn with_harmonic(mut self, m: i32, n: i32, c_cos: f64, c_sin: f64) -> Self {
        self.harmonics.push(Harmonic { m, n, c_cos, c_sin });
        self
    }

    pub fn is_constant(&self) -> bool {
        self.harmonics
            .iter()
            .all(|h| h.c_cos == 0.0 && h.c_sin == 0.0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if self.harmonics.is_empty() {
            return self.mean;
        }
        let (x, y) = (x.rem_euclid(TWO_PI), y.rem_euclid(TWO_PI));
        self.mean
            + self
                .harmonics
                .iter()
                .map(|h| {
                    let ph = h.m as f64 * x + h.n as f64 * y;
                    h.c_cos * ph.cos() + h.c_sin * ph.sin()
                })
                .sum::<f64>()
    }

    /// Minimum over a uniform `n x n` sample grid and its location.
    pub fn sampled_min(&self, n: usize) -> (f64, f64, f64) {
        let h = TWO_PI / n as f64;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                let v = self.eval(x, y);
                if v < best.0 {
                    best = (v, x, y);
                }
            }
        }
        best
    }

    pub fn check_positive(&self) -> Result<()> {
        let (min, x, y) = self.sampled_min(POSITIVITY_GRID);
        if min > 0.0 && min.is_finite() {
            Ok(())
        } else {
            Err(Error::NotPositive { min, x, y })
        }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let mut mean = None;
        let mut harmonics = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if tokens[0] == "mean" {
                if tokens.len() != 2 {
                    return Err(err(line, "expected 'mean <real>'".into()));
                }
                let v: f64 = tokens[1]
                    .parse()
                    .map_err(|_| err(line, format!("invalid number '{}'", tokens[1])))?;
                mean = Some(v);
                continue;
            }
            if tokens.len() != 4 {
                return Err(err(
                    line,
                    format!("expected '<m> <n> <c_cos> <c_sin>', got {} tokens", tokens.len()),
                ));
            }
            let int = |t: &str| {
                t.parse::<i32>()
                    .map_err(|_| err(line, format!("invalid integer '{t}'")))
            };
            let real = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| err(line, format!("invalid number '{t}'")))
            };
            harmonics.push(Harmonic {
                m: int(tokens[0])?,
                n: int(tokens[1])?,
                c_cos: real(tokens[2])?,
                c_sin: real(tokens[3])?,
            });
        }
        let mean = mean.ok_or_else(|| err(0, "missing 'mean' line".into()))?;
        Ok(Self { mean, harmonics })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("mean {}\n", crate::geometry::fmt17(self.mean));
        for h in &self.harmonics {
            s.push_str(&format!(
                "{} {} {} {}\n",
                h.m,
                h.n,
                crate::geometry::fmt17(h.c_cos),
                crate::geometry::fmt17(h.c_sin)
            ));
        }
        s
    }
}

/// Reads a coefficient file and checks positivity on the sample grid.
pub fn load_field(path: impl AsRef<Path>) -> Result<CoefficientField> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let field = CoefficientField::parse(&text, path)?;
    field.check_positive()?;
    Ok(field)
}

pub fn eval_field(f: &CoefficientField, x: f64, y: f64) -> f64 {
    f.eval(x, y)
}

/// `B(x) = beta(x) b`.
#[derive(Clone, Debug, PartialEq)]
pub struct MagneticField {
    pub b: FieldDirection,
    pub beta: CoefficientField,
}

impl MagneticField {
    pub fn new(b: FieldDirection, beta: CoefficientField) -> Self {
        Self { b, beta }
    }

    pub fn uniform(b: FieldDirection) -> Self {
        Self::new(b, CoefficientField::constant(1.0))
    }

    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        let beta = self.beta.eval(x, y);
        [beta * self.b.b1, beta * self.b.b2]
    }
}

/// Rotational transform profile `iota(s) = 0.85931 (1 - s) + 0.93972 s`
/// of the W7-X high-mirror flux surfaces; returns `b = (iota(s), 1)`.
pub fn iota_profile(s: f64) -> Result<FieldDirection> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Config(format!("flux label s={s} outside [0, 1]")));
    }
    FieldDirection::new(0.85931 * (1.0 - s) + 0.93972 * s, 1.0)
}
