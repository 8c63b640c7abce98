//! Periodic quadrilateral meshes of `[0, 2 pi)^2`.
//!
//! Three layouts are supported:
//!
//! * `Cartesian`: axis-parallel rectangles, all interfaces conforming.
//! * `AlignedBottomTop`: in every column the bottom and top edges of a cell
//!   follow `b`, so cell `(i, j)` is the parallelogram with vertices
//!   `(x_i, y_j)`, `(x_{i+1}, y_j + d)`, `(x_{i+1}, y_j + d + dy)`,
//!   `(x_i, y_j + dy)` where `d = (b2 / b1) dx`. Consecutive columns are
//!   offset against each other, so the vertical interfaces split whenever
//!   `(b2 / b1)(Ny / Nx)` is not an integer.
//! * `AlignedLeftRight`: the same construction with the roles of `x` and `y`
//!   exchanged.
//!
//! Internally every layout is built in a logical frame `(s, t)` where `s` is
//! the axis along which the aligned edges run. The reference coordinate `xi`
//! always runs along the aligned edges and `eta` along the transverse ones.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::{Error, Result, TWO_PI};

/// Constant field direction `b = (b1, b2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldDirection {
    pub b1: f64,
    pub b2: f64,
}

impl FieldDirection {
    pub fn new(b1: f64, b2: f64) -> Result<Self> {
        if !(b1.is_finite() && b2.is_finite()) {
            return Err(Error::Config(format!("field direction ({b1}, {b2}) is not finite")));
        }
        if b1 == 0.0 && b2 == 0.0 {
            return Err(Error::Config("field direction must be nonzero".into()));
        }
        Ok(Self { b1, b2 })
    }

    pub fn norm(&self) -> f64 {
        self.b1.hypot(self.b2)
    }

    pub fn dot(&self, v: [f64; 2]) -> f64 {
        self.b1 * v[0] + self.b2 * v[1]
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.b1, self.b2]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Alignment {
    Cartesian,
    AlignedBottomTop,
    AlignedLeftRight,
}

impl Alignment {
    pub fn name(&self) -> &'static str {
        match self {
            Alignment::Cartesian => "cartesian",
            Alignment::AlignedBottomTop => "aligned_bottom_top",
            Alignment::AlignedLeftRight => "aligned_left_right",
        }
    }
}

impl FromStr for Alignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cartesian" => Ok(Alignment::Cartesian),
            "aligned_bottom_top" | "bottom_top" => Ok(Alignment::AlignedBottomTop),
            "aligned_left_right" | "left_right" => Ok(Alignment::AlignedLeftRight),
            other => Err(Error::Config(format!("unknown alignment '{other}'"))),
        }
    }
}

impl std::fmt::Display for Alignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    pub alignment: Alignment,
    pub b: FieldDirection,
}

impl MeshConfig {
    pub fn new(nx: usize, ny: usize, alignment: Alignment, b: FieldDirection) -> Self {
        Self { nx, ny, alignment, b }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Config(format!(
                "cell counts must be positive, got Nx={} Ny={}",
                self.nx, self.ny
            )));
        }
        match self.alignment {
            Alignment::AlignedBottomTop if self.b.b1 == 0.0 => Err(Error::Config(
                "aligned_bottom_top requires b1 != 0".into(),
            )),
            Alignment::AlignedLeftRight if self.b.b2 == 0.0 => Err(Error::Config(
                "aligned_left_right requires b2 != 0".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Number of cells along / across the aligned direction.
    pub fn aligned_counts(&self) -> (usize, usize) {
        match self.alignment {
            Alignment::AlignedLeftRight => (self.ny, self.nx),
            _ => (self.nx, self.ny),
        }
    }

    /// Offset of neighbouring columns in units of the transverse cell size,
    /// `(b2 / b1)(Ny / Nx)` for bottom/top alignment. Interfaces conform iff
    /// this is an integer.
    pub fn nonconformity_ratio(&self) -> f64 {
        match self.alignment {
            Alignment::Cartesian => 0.0,
            Alignment::AlignedBottomTop => {
                self.b.b2 / self.b.b1 * (self.ny as f64 / self.nx as f64)
            }
            Alignment::AlignedLeftRight => {
                self.b.b1 / self.b.b2 * (self.nx as f64 / self.ny as f64)
            }
        }
    }
}

/// Edges of the reference square: `Left`/`Right` are `xi = -1/+1`,
/// `Bottom`/`Top` are `eta = -1/+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub fn name(&self) -> &'static str {
        match self {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Bottom => "bottom",
            Edge::Top => "top",
        }
    }

    /// Reference point on this edge for edge coordinate `s` in `[-1, 1]`.
    pub fn point(&self, s: f64) -> (f64, f64) {
        match self {
            Edge::Left => (-1.0, s),
            Edge::Right => (1.0, s),
            Edge::Bottom => (s, -1.0),
            Edge::Top => (s, 1.0),
        }
    }
}

/// A parallelogram cell with affine reference map
/// `x = anchor + (xi + 1)/2 e_xi + (eta + 1)/2 e_eta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub index: (usize, usize),
    pub anchor: [f64; 2],
    pub dx: f64,
    pub dy: f64,
    /// Offset of the aligned edge across one cell (0 for cartesian cells).
    pub shear: f64,
    pub e_xi: [f64; 2],
    pub e_eta: [f64; 2],
}

impl Cell {
    pub fn map(&self, xi: f64, eta: f64) -> [f64; 2] {
        let a = 0.5 * (xi + 1.0);
        let c = 0.5 * (eta + 1.0);
        [
            self.anchor[0] + a * self.e_xi[0] + c * self.e_eta[0],
            self.anchor[1] + a * self.e_xi[1] + c * self.e_eta[1],
        ]
    }

    /// Jacobian matrix `d(x, y) / d(xi, eta)` stored row major.
    pub fn jacobian(&self) -> [[f64; 2]; 2] {
        [
            [0.5 * self.e_xi[0], 0.5 * self.e_eta[0]],
            [0.5 * self.e_xi[1], 0.5 * self.e_eta[1]],
        ]
    }

    /// Volume element `|det J|`, equal to `dx dy / 4` for every layout.
    pub fn det_jacobian(&self) -> f64 {
        let j = self.jacobian();
        (j[0][0] * j[1][1] - j[0][1] * j[1][0]).abs()
    }

    /// Inverse Jacobian `d(xi, eta) / d(x, y)`.
    pub fn inverse_jacobian(&self) -> [[f64; 2]; 2] {
        let j = self.jacobian();
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ]
    }

    /// Reference components of a physical vector, `J^{-1} v`.
    pub fn to_reference(&self, v: [f64; 2]) -> [f64; 2] {
        let ij = self.inverse_jacobian();
        [
            ij[0][0] * v[0] + ij[0][1] * v[1],
            ij[1][0] * v[0] + ij[1][1] * v[1],
        ]
    }

    pub fn vertices(&self) -> [[f64; 2]; 4] {
        [
            self.map(-1.0, -1.0),
            self.map(1.0, -1.0),
            self.map(1.0, 1.0),
            self.map(-1.0, 1.0),
        ]
    }

    pub fn area(&self) -> f64 {
        4.0 * self.det_jacobian()
    }

    /// Physical length of a reference edge.
    pub fn edge_length(&self, edge: Edge) -> f64 {
        let e = match edge {
            Edge::Left | Edge::Right => self.e_eta,
            Edge::Bottom | Edge::Top => self.e_xi,
        };
        e[0].hypot(e[1])
    }
}

/// Physical point of a cell's reference coordinates (before periodic wrap).
pub fn reference_map(cell: &Cell, xi: f64, eta: f64) -> [f64; 2] {
    cell.map(xi, eta)
}

/// One (sub-)segment shared by two cell edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interface {
    pub owner: usize,
    pub neighbor: usize,
    pub owner_edge: Edge,
    pub neighbor_edge: Edge,
    /// Sub-interval of the owner's edge coordinate.
    pub owner_range: [f64; 2],
    /// Sub-interval of the neighbour's edge coordinate; traversed in the same
    /// physical direction as `owner_range`.
    pub neighbor_range: [f64; 2],
    /// Unit outward normal of the owner.
    pub normal: [f64; 2],
    pub h_f: f64,
    pub periodic_wrap: (bool, bool),
    /// The segment runs along `b`, so `b . n` vanishes identically.
    pub aligned: bool,
}

impl Interface {
    pub fn is_conforming(&self) -> bool {
        self.owner_range == [-1.0, 1.0] && self.neighbor_range == [-1.0, 1.0]
    }

    /// Neighbour edge coordinate of the owner edge coordinate `s`.
    pub fn neighbor_coord(&self, s: f64) -> f64 {
        let [a, b] = self.owner_range;
        let [c, d] = self.neighbor_range;
        c + (s - a) / (b - a) * (d - c)
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub config: MeshConfig,
    pub cells: Vec<Cell>,
    pub interfaces: Vec<Interface>,
}

impl Mesh {
    pub fn cell_id(&self, i: usize, j: usize) -> usize {
        j * self.config.nx + i
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(Cell::area).sum()
    }

    pub fn total_interface_length(&self) -> f64 {
        self.interfaces.iter().map(|f| f.h_f).sum()
    }

    /// Cells whose anchors are translated by `offset`; the interface list is
    /// unchanged.
    pub fn shifted(&self, offset: [f64; 2]) -> Mesh {
        let mut out = self.clone();
        for c in &mut out.cells {
            c.anchor[0] += offset[0];
            c.anchor[1] += offset[1];
        }
        out
    }

    /// Text dump: one line per cell and per interface.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# mesh nx={} ny={} alignment={} b=({}, {}) cells={} interfaces={}",
            self.config.nx,
            self.config.ny,
            self.config.alignment,
            fmt17(self.config.b.b1),
            fmt17(self.config.b.b2),
            self.cells.len(),
            self.interfaces.len()
        );
        for (id, c) in self.cells.iter().enumerate() {
            let _ = writeln!(
                s,
                "cell {} {} {} {} {} {}",
                id,
                c.index.0,
                c.index.1,
                fmt17(c.anchor[0]),
                fmt17(c.anchor[1]),
                fmt17(c.shear)
            );
        }
        for (id, f) in self.interfaces.iter().enumerate() {
            let _ = writeln!(
                s,
                "iface {} {} {} {} {} {} {} {} {} {} {} {}",
                id,
                f.owner,
                f.neighbor,
                f.owner_edge.name(),
                f.neighbor_edge.name(),
                fmt17(f.owner_range[0]),
                fmt17(f.owner_range[1]),
                fmt17(f.neighbor_range[0]),
                fmt17(f.neighbor_range[1]),
                fmt17(f.h_f),
                f.periodic_wrap.0 as u8,
                f.periodic_wrap.1 as u8
            );
        }
        s
    }
}

/// 17 significant digits.
pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Builds the mesh and resolves every interface.
pub fn build_mesh(config: MeshConfig) -> Result<Mesh> {
    config.validate()?;
    let lr = config.alignment == Alignment::AlignedLeftRight;
    let (ns, nt) = config.aligned_counts();
    let slope = match config.alignment {
        Alignment::Cartesian => 0.0,
        Alignment::AlignedBottomTop => config.b.b2 / config.b.b1,
        Alignment::AlignedLeftRight => config.b.b1 / config.b.b2,
    };
    let ds = TWO_PI / ns as f64;
    let dt = TWO_PI / nt as f64;
    let delta = slope * ds;
    let phys = |v: [f64; 2]| if lr { [v[1], v[0]] } else { v };
    // logical (is, jt) -> physical cell id
    let id_of = |is: usize, jt: usize| {
        let (i, j) = if lr { (jt, is) } else { (is, jt) };
        j * config.nx + i
    };

    let (dx, dy) = (TWO_PI / config.nx as f64, TWO_PI / config.ny as f64);
    let mut cells = Vec::with_capacity(config.nx * config.ny);
    for j in 0..config.ny {
        for i in 0..config.nx {
            let (is, jt) = if lr { (j, i) } else { (i, j) };
            cells.push(Cell {
                index: (i, j),
                anchor: phys([is as f64 * ds, jt as f64 * dt]),
                dx,
                dy,
                shear: delta,
                e_xi: phys([ds, delta]),
                e_eta: phys([0.0, dt]),
            });
        }
    }

    let aligned = config.alignment != Alignment::Cartesian;
    let top_len = ds.hypot(delta);
    let top_normal = phys([-delta / top_len, ds / top_len]);
    let right_normal = phys([1.0, 0.0]);
    let wrap = |ws: bool, wt: bool| if lr { (wt, ws) } else { (ws, wt) };

    // Column offset in units of dt, split into integer and fractional part.
    let r = slope * nt as f64 / ns as f64;
    let shift = r.floor();
    let frac = r - shift;
    let tol = 1e-12 * nt as f64;
    let shift = shift as i64;

    let mut interfaces = Vec::new();
    for j in 0..config.ny {
        for i in 0..config.nx {
            let (is, jt) = if lr { (j, i) } else { (i, j) };
            let owner = id_of(is, jt);

            interfaces.push(Interface {
                owner,
                neighbor: id_of(is, (jt + 1) % nt),
                owner_edge: Edge::Top,
                neighbor_edge: Edge::Bottom,
                owner_range: [-1.0, 1.0],
                neighbor_range: [-1.0, 1.0],
                normal: top_normal,
                h_f: top_len,
                periodic_wrap: wrap(false, jt + 1 == nt),
                aligned,
            });

            let next_col = (is + 1) % ns;
            let wrap_s = is + 1 == ns;
            let mut push_right = |k: i64, owner_range: [f64; 2], neighbor_range: [f64; 2], len: f64| {
                let row = k.rem_euclid(nt as i64) as usize;
                let wrap_t = k < 0 || k >= nt as i64;
                interfaces.push(Interface {
                    owner,
                    neighbor: id_of(next_col, row),
                    owner_edge: Edge::Right,
                    neighbor_edge: Edge::Left,
                    owner_range,
                    neighbor_range,
                    normal: right_normal,
                    h_f: len,
                    periodic_wrap: wrap(wrap_s, wrap_t),
                    aligned: false,
                });
            };
            let k0 = jt as i64 + shift;
            if frac <= tol {
                push_right(k0, [-1.0, 1.0], [-1.0, 1.0], dt);
            } else if 1.0 - frac <= tol {
                push_right(k0 + 1, [-1.0, 1.0], [-1.0, 1.0], dt);
            } else {
                let split = -1.0 + 2.0 * (1.0 - frac);
                let cut = -1.0 + 2.0 * frac;
                push_right(k0, [-1.0, split], [cut, 1.0], (1.0 - frac) * dt);
                push_right(k0 + 1, [split, 1.0], [-1.0, cut], frac * dt);
            }
        }
    }

    Ok(Mesh {
        config,
        cells,
        interfaces,
    })
}

/// Aspect ratios of the two aligned layouts, `sqrt(1 + (b2/b1)^2)` and
/// `sqrt(1 + (b1/b2)^2)`; infinite when the slope is undefined.
pub fn aspect_ratios(b: FieldDirection) -> (f64, f64) {
    let bt = if b.b1 == 0.0 {
        f64::INFINITY
    } else {
        (1.0 + (b.b2 / b.b1).powi(2)).sqrt()
    };
    let lr = if b.b2 == 0.0 {
        f64::INFINITY
    } else {
        (1.0 + (b.b1 / b.b2).powi(2)).sqrt()
    };
    (bt, lr)
}

/// Aligned layout with the smaller aspect ratio; ties go to bottom/top.
pub fn choose_alignment(b: FieldDirection) -> Alignment {
    let (bt, lr) = aspect_ratios(b);
    if bt <= lr {
        Alignment::AlignedBottomTop
    } else {
        Alignment::AlignedLeftRight
    }
}
