//! Tensor-product Legendre bases and Gauss-Legendre rules on `[-1, 1]^2`.
//!
//! Local basis function `k = a (p_eta + 1) + b` is `P_a(xi) P_b(eta)`.

use crate::{Error, Result};

/// Polynomial degrees along the aligned (`xi`) and transverse (`eta`)
/// reference directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisSpec {
    pub p_xi: usize,
    pub p_eta: usize,
}

impl BasisSpec {
    pub fn new(p_xi: usize, p_eta: usize) -> Self {
        Self { p_xi, p_eta }
    }

    pub fn local_dim(&self) -> usize {
        (self.p_xi + 1) * (self.p_eta + 1)
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        a * (self.p_eta + 1) + b
    }

    pub fn degrees(&self, k: usize) -> (usize, usize) {
        (k / (self.p_eta + 1), k % (self.p_eta + 1))
    }

    /// Default Gauss point count per direction for volume and interface
    /// integrals.
    pub fn default_quadrature_points(&self) -> usize {
        self.p_xi.max(self.p_eta) + 3
    }
}

/// Legendre values `P_0..P_p` and derivatives at `t`, by the three-term
/// recurrence.
pub fn legendre_basis_eval(p: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; p + 1];
    let mut d = vec![0.0; p + 1];
    legendre_into(t, &mut v, &mut d);
    (v, d)
}

/// Fills `v` and `d` (equal lengths) with Legendre values and derivatives.
pub fn legendre_into(t: f64, v: &mut [f64], d: &mut [f64]) {
    let n = v.len();
    if n == 0 {
        return;
    }
    v[0] = 1.0;
    d[0] = 0.0;
    if n == 1 {
        return;
    }
    v[1] = t;
    d[1] = 1.0;
    for k in 1..n - 1 {
        let kf = k as f64;
        v[k + 1] = ((2.0 * kf + 1.0) * t * v[k] - kf * v[k - 1]) / (kf + 1.0);
        // P'_{k+1} = P'_{k-1} + (2k + 1) P_k
        d[k + 1] = d[k - 1] + (2.0 * kf + 1.0) * v[k];
    }
}

/// `int_{-1}^{1} P_a^2 dt`.
pub fn legendre_norm_sq(a: usize) -> f64 {
    2.0 / (2 * a + 1) as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Rule on the sub-interval `[a, b]` of `[-1, 1]`, weights scaled.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        QuadratureRule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }
}

/// `n`-point Gauss-Legendre rule, exact for polynomials up to degree `2n - 1`.
pub fn gauss_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::Config("Gauss rule needs at least one point".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (p, d) = legendre_pair(n, x);
        if !(p.abs() <= 1e-12) {
            return Err(Error::Solver(format!(
                "Gauss-Legendre root {i} of P_{n} did not converge"
            )));
        }
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor Gauss rule on `[-1, 1]^2`: points `(xi, eta)` and weights.
pub fn tensor_rule(n: usize) -> Result<Vec<([f64; 2], f64)>> {
    let g = gauss_rule(n)?;
    let mut out = Vec::with_capacity(n * n);
    for (xi, wx) in g.nodes.iter().zip(&g.weights) {
        for (eta, we) in g.nodes.iter().zip(&g.weights) {
            out.push(([*xi, *eta], wx * we));
        }
    }
    Ok(out)
}

/// Values and reference gradients `(d/dxi, d/deta)` of every local basis
/// function at `(xi, eta)`.
pub fn tensor_basis_eval(spec: BasisSpec, xi: f64, eta: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
    let (px, dpx) = legendre_basis_eval(spec.p_xi, xi);
    let (pe, dpe) = legendre_basis_eval(spec.p_eta, eta);
    let mut vals = Vec::with_capacity(spec.local_dim());
    let mut grads = Vec::with_capacity(spec.local_dim());
    for a in 0..=spec.p_xi {
        for b in 0..=spec.p_eta {
            vals.push(px[a] * pe[b]);
            grads.push([dpx[a] * pe[b], px[a] * dpe[b]]);
        }
    }
    (vals, grads)
}

/// Basis values and gradients tabulated on a tensor rule, reused for every
/// cell.
#[derive(Clone, Debug)]
pub struct VolumeTable {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// `values[q * dim + k]`
    pub values: Vec<f64>,
    /// `grads[q * dim + k]`
    pub grads: Vec<[f64; 2]>,
    pub dim: usize,
}

impl VolumeTable {
    pub fn new(spec: BasisSpec, n: usize) -> Result<Self> {
        let rule = tensor_rule(n)?;
        let dim = spec.local_dim();
        let mut t = VolumeTable {
            points: Vec::with_capacity(rule.len()),
            weights: Vec::with_capacity(rule.len()),
            values: Vec::with_capacity(rule.len() * dim),
            grads: Vec::with_capacity(rule.len() * dim),
            dim,
        };
        for (p, w) in rule {
            let (v, g) = tensor_basis_eval(spec, p[0], p[1]);
            t.points.push(p);
            t.weights.push(w);
            t.values.extend(v);
            t.grads.extend(g);
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
