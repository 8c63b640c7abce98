//! Brute-force reference assembler.
//!
//! Works from cell vertices only: the reference map and its inverse are
//! rebuilt from three corners, interfaces are found by intersecting every
//! pair of cell edges (including periodic images), and every integral is a
//! plain 20-point Gauss sum over raw points. Each face is seen from both
//! sides and counted with weight 1/2.

#![allow(dead_code)]

use fadg::geometry::Mesh;
use nalgebra::DMatrix;
use std::f64::consts::PI;

pub const ORACLE_POINTS: usize = 20;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let step = p1 / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x.push(t);
        w.push(2.0 / ((1.0 - t * t) * dp * dp));
    }
    (x, w)
}

fn legendre(p: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![1.0; p + 1];
    let mut d = vec![0.0; p + 1];
    if p >= 1 {
        v[1] = t;
        d[1] = 1.0;
    }
    for k in 2..=p {
        let kf = k as f64;
        v[k] = ((2.0 * kf - 1.0) * t * v[k - 1] - (kf - 1.0) * v[k - 2]) / kf;
        d[k] = d[k - 2] + (2.0 * kf - 1.0) * v[k - 1];
    }
    (v, d)
}

/// Affine cell rebuilt from its vertices.
#[derive(Clone, Copy, Debug)]
pub struct OracleCell {
    pub v: [[f64; 2]; 4],
    a: [f64; 2],
    b: [f64; 2],
}

impl OracleCell {
    pub fn new(v: [[f64; 2]; 4]) -> Self {
        // x = v0 + (xi + 1)/2 a + (eta + 1)/2 b
        let a = [v[1][0] - v[0][0], v[1][1] - v[0][1]];
        let b = [v[3][0] - v[0][0], v[3][1] - v[0][1]];
        Self { v, a, b }
    }

    pub fn map(&self, xi: f64, eta: f64) -> [f64; 2] {
        let s = 0.5 * (xi + 1.0);
        let t = 0.5 * (eta + 1.0);
        [
            self.v[0][0] + s * self.a[0] + t * self.b[0],
            self.v[0][1] + s * self.a[1] + t * self.b[1],
        ]
    }

    fn det(&self) -> f64 {
        self.a[0] * self.b[1] - self.a[1] * self.b[0]
    }

    /// `(xi, eta)` of a physical point.
    pub fn inverse(&self, x: [f64; 2]) -> [f64; 2] {
        let r = [x[0] - self.v[0][0], x[1] - self.v[0][1]];
        let d = self.det();
        let s = (r[0] * self.b[1] - r[1] * self.b[0]) / d;
        let t = (self.a[0] * r[1] - self.a[1] * r[0]) / d;
        [2.0 * s - 1.0, 2.0 * t - 1.0]
    }

    /// `|d(x, y)/d(xi, eta)|`.
    pub fn volume_element(&self) -> f64 {
        0.25 * self.det().abs()
    }

    /// Physical gradient from reference derivatives, `J^{-T} g`.
    pub fn physical_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        // J = [a b] / 2
        let d = 0.25 * self.det();
        let (j00, j01, j10, j11) = (0.5 * self.a[0], 0.5 * self.b[0], 0.5 * self.a[1], 0.5 * self.b[1]);
        // J^{-T} = 1/d [[j11, -j10], [-j01, j00]]
        [(j11 * g[0] - j10 * g[1]) / d, (-j01 * g[0] + j00 * g[1]) / d]
    }

    fn centroid(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for p in &self.v {
            c[0] += 0.25 * p[0];
            c[1] += 0.25 * p[1];
        }
        c
    }
}

/// Values and reference gradients of all `P_a(xi) P_b(eta)`, index
/// `a (q + 1) + b`.
pub fn basis_at(p: usize, q: usize, xi: f64, eta: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
    let (vx, dx) = legendre(p, xi);
    let (vy, dy) = legendre(q, eta);
    let mut v = Vec::new();
    let mut g = Vec::new();
    for a in 0..=p {
        for b in 0..=q {
            v.push(vx[a] * vy[b]);
            g.push([dx[a] * vy[b], vx[a] * dy[b]]);
        }
    }
    (v, g)
}

pub struct OracleOperators {
    pub m_uv: DMatrix<f64>,
    pub a_upsi: DMatrix<f64>,
    pub b_upsi: DMatrix<f64>,
    pub b_phipsi: DMatrix<f64>,
    pub m_phipsi: DMatrix<f64>,
}

impl OracleOperators {
    /// Largest entry over all blocks; some blocks vanish identically, so
    /// errors are measured against the operator as a whole.
    pub fn scale(&self) -> f64 {
        [&self.m_uv, &self.a_upsi, &self.b_upsi, &self.b_phipsi, &self.m_phipsi]
            .iter()
            .map(|m| m.amax())
            .fold(0.0, f64::max)
    }

    pub fn reduced(&self) -> DMatrix<f64> {
        let d = &self.a_upsi - &self.b_upsi;
        let minv = self.m_uv.clone().try_inverse().expect("invertible mass");
        &d * minv * d.transpose() + &self.b_phipsi
    }
}

type Coef<'a> = &'a dyn Fn(f64, f64) -> f64;

pub fn oracle_operators(
    mesh: &Mesh,
    p: (usize, usize),
    alpha: Coef,
    beta: Coef,
    eta_s: f64,
) -> OracleOperators {
    let b = mesh.config.b.as_array();
    let cells: Vec<OracleCell> = mesh.cells.iter().map(|c| OracleCell::new(c.vertices())).collect();
    let nloc = (p.0 + 1) * (p.1 + 1);
    let n = cells.len() * nloc;
    let (gx, gw) = gauss(ORACLE_POINTS);
    let mut m_uv = DMatrix::zeros(n, n);
    let mut m_phipsi = DMatrix::zeros(n, n);
    let mut a_upsi = DMatrix::zeros(n, n);
    let mut b_upsi = DMatrix::zeros(n, n);
    let mut b_phipsi = DMatrix::zeros(n, n);

    for (c, cell) in cells.iter().enumerate() {
        let o = c * nloc;
        for (i, &xi) in gx.iter().enumerate() {
            for (j, &eta) in gx.iter().enumerate() {
                let w = gw[i] * gw[j] * cell.volume_element();
                let [x, y] = cell.map(xi, eta);
                let (v, g) = basis_at(p.0, p.1, xi, eta);
                let bb = beta(x, y);
                for l in 0..nloc {
                    let gl = cell.physical_gradient(g[l]);
                    let bgrad = bb * (b[0] * gl[0] + b[1] * gl[1]);
                    for k in 0..nloc {
                        m_uv[(o + l, o + k)] += w * v[l] * v[k];
                        m_phipsi[(o + l, o + k)] += w * alpha(x, y) * v[l] * v[k];
                        a_upsi[(o + l, o + k)] += w * v[k] * bgrad;
                    }
                }
            }
        }
    }

    let two_pi = 2.0 * PI;
    let edges = |c: &OracleCell| [(c.v[0], c.v[1]), (c.v[1], c.v[2]), (c.v[2], c.v[3]), (c.v[3], c.v[0])];
    for (ck, k) in cells.iter().enumerate() {
        let ck_center = k.centroid();
        for &(p0, p1) in &edges(k) {
            let t = [p1[0] - p0[0], p1[1] - p0[1]];
            let len = t[0].hypot(t[1]);
            let t = [t[0] / len, t[1] / len];
            let mut nrm = [t[1], -t[0]];
            let mid = [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])];
            if nrm[0] * (mid[0] - ck_center[0]) + nrm[1] * (mid[1] - ck_center[1]) < 0.0 {
                nrm = [-nrm[0], -nrm[1]];
            }
            let bn = b[0] * nrm[0] + b[1] * nrm[1];
            for (cn, nb) in cells.iter().enumerate() {
                for &(q0, q1) in &edges(nb) {
                    for sx in -1..=1 {
                        for sy in -1..=1 {
                            let shift = [sx as f64 * two_pi, sy as f64 * two_pi];
                            if cn == ck && sx == 0 && sy == 0 {
                                continue;
                            }
                            let q0s = [q0[0] + shift[0], q0[1] + shift[1]];
                            let q1s = [q1[0] + shift[0], q1[1] + shift[1]];
                            let off = |q: [f64; 2]| (q[0] - p0[0]) * nrm[0] + (q[1] - p0[1]) * nrm[1];
                            if off(q0s).abs() > 1e-10 || off(q1s).abs() > 1e-10 {
                                continue;
                            }
                            let along = |q: [f64; 2]| (q[0] - p0[0]) * t[0] + (q[1] - p0[1]) * t[1];
                            let (a0, a1) = (along(q0s), along(q1s));
                            let lo = a0.min(a1).max(0.0);
                            let hi = a0.max(a1).min(len);
                            if hi - lo <= 1e-10 {
                                continue;
                            }
                            let h_f = hi - lo;
                            let (ok, on) = (ck * nloc, cn * nloc);
                            for (g, &s) in gx.iter().enumerate() {
                                let arc = lo + 0.5 * (s + 1.0) * h_f;
                                let w = 0.5 * gw[g] * h_f;
                                let x = [p0[0] + arc * t[0], p0[1] + arc * t[1]];
                                let rk = k.inverse(x);
                                let rn = nb.inverse([x[0] - shift[0], x[1] - shift[1]]);
                                let (vk, _) = basis_at(p.0, p.1, rk[0], rk[1]);
                                let (vn, _) = basis_at(p.0, p.1, rn[0], rn[1]);
                                // half weight: every face is visited from both sides
                                let jump = 0.5 * w * beta(x[0], x[1]) * bn;
                                let pen = 0.5 * w * eta_s / h_f * (beta(x[0], x[1]) * bn).powi(2);
                                for l in 0..nloc {
                                    for kk in 0..nloc {
                                        // {u_k} B.[psi_l]
                                        b_upsi[(ok + l, ok + kk)] += 0.5 * jump * vk[l] * vk[kk];
                                        b_upsi[(ok + l, on + kk)] += 0.5 * jump * vk[l] * vn[kk];
                                        b_upsi[(on + l, ok + kk)] -= 0.5 * jump * vn[l] * vk[kk];
                                        b_upsi[(on + l, on + kk)] -= 0.5 * jump * vn[l] * vn[kk];
                                        b_phipsi[(ok + l, ok + kk)] += pen * vk[l] * vk[kk];
                                        b_phipsi[(ok + l, on + kk)] -= pen * vk[l] * vn[kk];
                                        b_phipsi[(on + l, ok + kk)] -= pen * vn[l] * vk[kk];
                                        b_phipsi[(on + l, on + kk)] += pen * vn[l] * vn[kk];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    OracleOperators {
        m_uv,
        a_upsi,
        b_upsi,
        b_phipsi,
        m_phipsi,
    }
}

/// `max |a - b| / scale`.
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>, scale: f64) -> f64 {
    (a - b).amax() / scale
}
