//! Truncated L-shaped domain and its structured quadrilateral mesh.
//!
//! The full domain is `((-1,inf) x (0,1)) union ((-1,0) x (-inf,1))`, two
//! unit-width arms meeting in the square `(-1,0) x (0,1)` with a reentrant
//! corner at the origin. Truncating both arms at distance `T` gives the
//! hexagonal computational domain
//! `((-1,T) x (0,1)) union ((-1,0) x (-T,1))`.
//!
//! The domain is invariant under the reflection `(x,y) -> (-y,-x)`. The mesh
//! always covers the full truncated domain with axis-aligned squares; symmetry
//! reduction is applied algebraically on degrees of freedom (see the FE
//! space), not by meshing a half domain, so the reflection maps mesh nodes to
//! mesh nodes exactly.

use std::collections::HashMap;

use thiserror::Error;

use crate::interval::Interval;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("truncation parameter must exceed 1, got {0}")]
    InvalidTruncation(f64),
    #[error("mesh size {h} must divide the unit arm width")]
    BadMeshSize { h: f64 },
    #[error("truncation length {t} must be a multiple of the mesh size {h}")]
    IncommensurateTruncation { t: f64, h: f64 },
}

/// Description of the truncated domain.
#[derive(Debug, Clone)]
pub struct LDomainSpec {
    /// Arm truncation distance (> 1).
    pub t: f64,
    /// Whether downstream spaces should be restricted to the symmetric class.
    pub symmetry_reduced: bool,
    /// Breakpoints along the arm coordinate for piecewise-constant
    /// coefficients of the spectral base problem.
    pub xi_breaks: Vec<f64>,
}

pub fn build_domain(t: f64, symmetry_reduced: bool) -> Result<LDomainSpec, GeometryError> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(GeometryError::InvalidTruncation(t));
    }
    let mut xi_breaks = vec![0.0, 1.0];
    if t > 3.0 {
        xi_breaks.push(3.0);
    }
    xi_breaks.push(t);
    Ok(LDomainSpec {
        t,
        symmetry_reduced,
        xi_breaks,
    })
}

impl LDomainSpec {
    /// Vertices of the computational polygon, counterclockwise.
    pub fn polygon(&self) -> Vec<(f64, f64)> {
        let t = self.t;
        if self.symmetry_reduced {
            // half domain on one side of the symmetry line through (0,0), (-1,1)
            vec![(0.0, 0.0), (t, 0.0), (t, 1.0), (-1.0, 1.0)]
        } else {
            vec![
                (-1.0, -t),
                (0.0, -t),
                (0.0, 0.0),
                (t, 0.0),
                (t, 1.0),
                (-1.0, 1.0),
            ]
        }
    }

    /// Enclosure of the polygon area (shoelace formula).
    pub fn area(&self) -> Interval {
        let v = self.polygon();
        let mut acc = Interval::ZERO;
        for i in 0..v.len() {
            let (x0, y0) = v[i];
            let (x1, y1) = v[(i + 1) % v.len()];
            let a = Interval::point(x0).mul(&Interval::point(y1));
            let b = Interval::point(x1).mul(&Interval::point(y0));
            acc += a.sub(&b);
        }
        acc.scale(0.5)
    }
}

/// Mesh node. Coordinates are exact dyadic multiples of `h/2`; `hx`, `hy`
/// are the integer coordinates in units of `h/2`.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub hx: i64,
    pub hy: i64,
    pub x: f64,
    pub y: f64,
    pub dirichlet: bool,
}

/// Square cell with lower-left corner at `(cx*h, cy*h)`. The eight node ids
/// are ordered corners counterclockwise from lower-left, then edge midpoints
/// bottom, right, top, left.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub cx: i64,
    pub cy: i64,
    pub nodes: [usize; 8],
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub spec: LDomainSpec,
    pub h: f64,
    /// Cells per unit length (`h = 1/m`).
    pub m: i64,
    /// Truncation distance in units of `h`.
    pub t_cells: i64,
    pub cells: Vec<Cell>,
    pub nodes: Vec<Node>,
    node_index: HashMap<(i64, i64), usize>,
    cell_index: HashMap<(i64, i64), usize>,
}

/// Offsets of the eight serendipity nodes in units of `h/2`, matching the
/// reference ordering of [`Cell::nodes`].
pub const NODE_OFFSETS: [(i64, i64); 8] = [
    (0, 0),
    (2, 0),
    (2, 2),
    (0, 2),
    (1, 0),
    (2, 1),
    (1, 2),
    (0, 1),
];

pub fn generate_mesh(spec: &LDomainSpec, h: f64) -> Result<Mesh, GeometryError> {
    let m_f = 1.0 / h;
    if !(h > 0.0) || (m_f - m_f.round()).abs() > 1e-9 {
        return Err(GeometryError::BadMeshSize { h });
    }
    let m = m_f.round() as i64;
    let t_f = spec.t * m as f64;
    if (t_f - t_f.round()).abs() > 1e-9 {
        return Err(GeometryError::IncommensurateTruncation { t: spec.t, h });
    }
    let t_cells = t_f.round() as i64;

    let mut mesh = Mesh {
        spec: spec.clone(),
        h,
        m,
        t_cells,
        cells: Vec::new(),
        nodes: Vec::new(),
        node_index: HashMap::new(),
        cell_index: HashMap::new(),
    };

    // horizontal arm, including the shared corner square
    for cx in -m..t_cells {
        for cy in 0..m {
            mesh.push_cell(cx, cy);
        }
    }
    // vertical arm below y = 0
    for cx in -m..0 {
        for cy in -t_cells..0 {
            mesh.push_cell(cx, cy);
        }
    }
    Ok(mesh)
}

impl Mesh {
    fn push_cell(&mut self, cx: i64, cy: i64) {
        let mut ids = [0usize; 8];
        for (k, (ox, oy)) in NODE_OFFSETS.iter().enumerate() {
            ids[k] = self.node_id(2 * cx + ox, 2 * cy + oy);
        }
        self.cell_index.insert((cx, cy), self.cells.len());
        self.cells.push(Cell {
            cx,
            cy,
            nodes: ids,
        });
    }

    pub fn cell_at(&self, cx: i64, cy: i64) -> Option<usize> {
        self.cell_index.get(&(cx, cy)).copied()
    }

    fn node_id(&mut self, hx: i64, hy: i64) -> usize {
        if let Some(&id) = self.node_index.get(&(hx, hy)) {
            return id;
        }
        let half = 0.5 * self.h;
        let node = Node {
            hx,
            hy,
            x: hx as f64 * half,
            y: hy as f64 * half,
            dirichlet: self.on_outer_boundary(hx, hy),
        };
        let id = self.nodes.len();
        self.nodes.push(node);
        self.node_index.insert((hx, hy), id);
        id
    }

    /// Whether the half-unit lattice point lies on the boundary of the
    /// truncated domain (true boundary or truncation line).
    fn on_outer_boundary(&self, hx: i64, hy: i64) -> bool {
        let u = 2 * self.m; // one unit length in half-h units
        let tt = 2 * self.t_cells;
        hx == -u
            || hy == u
            || (hy == -tt && hx <= 0)
            || (hx == tt && hy >= 0)
            || (hx == 0 && hy <= 0)
            || (hy == 0 && hx >= 0)
    }

    pub fn lookup(&self, hx: i64, hy: i64) -> Option<usize> {
        self.node_index.get(&(hx, hy)).copied()
    }

    /// Image of a node under the symmetry reflection `(x,y) -> (-y,-x)`.
    /// Every node has an image because the mesh covers the full domain.
    pub fn reflect(&self, id: usize) -> usize {
        let n = &self.nodes[id];
        self.lookup(-n.hy, -n.hx)
            .expect("mesh is closed under the symmetry reflection")
    }

    /// Lower-left corner of a cell in exact coordinates.
    pub fn cell_origin(&self, c: &Cell) -> (f64, f64) {
        (c.cx as f64 * self.h, c.cy as f64 * self.h)
    }

    /// Whether the point lies in the closed cell.
    pub fn cell_contains(&self, c: &Cell, x: f64, y: f64) -> bool {
        let (x0, y0) = self.cell_origin(c);
        x >= x0 && x <= x0 + self.h && y >= y0 && y <= y0 + self.h
    }

    /// Cell containing the point, if any.
    pub fn find_cell(&self, x: f64, y: f64) -> Option<usize> {
        let cx = (x / self.h).floor() as i64;
        let cy = (y / self.h).floor() as i64;
        for (dx, dy) in [(0, 0), (-1, 0), (0, -1), (-1, -1)] {
            if let Some(i) = self.cell_at(cx + dx, cy + dy) {
                if self.cell_contains(&self.cells[i], x, y) {
                    return Some(i);
                }
            }
        }
        None
    }

    /// Plain-text dump: one `id x y` line per node, then one
    /// `id node-ids... tags` line per element.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("nodes {}\n", self.nodes.len()));
        for (i, n) in self.nodes.iter().enumerate() {
            out.push_str(&format!("{} {:.17} {:.17}\n", i, n.x, n.y));
        }
        out.push_str(&format!("elements {}\n", self.cells.len()));
        for (i, c) in self.cells.iter().enumerate() {
            let ids: Vec<String> = c.nodes.iter().map(|id| id.to_string()).collect();
            let mut tags = Vec::new();
            for (tag, present) in [
                ("dirichlet_outer", self.cell_touches_outer(c)),
                ("interface", self.cell_touches_interface(c)),
            ] {
                if present {
                    tags.push(tag);
                }
            }
            out.push_str(&format!("{} {} {}\n", i, ids.join(" "), tags.join(",")));
        }
        out
    }

    fn cell_touches_outer(&self, c: &Cell) -> bool {
        c.nodes.iter().any(|&id| self.nodes[id].dirichlet)
    }

    /// Whether a cell edge lies on an internal subdomain interface
    /// (`x = 0` with `0 <= y <= 1`, or `y = 0` with `-1 <= x <= 0`).
    fn cell_touches_interface(&self, c: &Cell) -> bool {
        let m = self.m;
        ((c.cx == -1 || c.cx == 0) && c.cy >= 0 && c.cy < m)
            || ((c.cy == -1 || c.cy == 0) && c.cx >= -m && c.cx < 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_matches_closed_form() {
        // truncated domain area is 2T + 1
        for t in [2.0, 3.0, 5.0] {
            let spec = build_domain(t, false).unwrap();
            let a = spec.area();
            assert!(a.contains(2.0 * t + 1.0), "t={t}: {a}");
            assert!(a.width() < 1e-12);
        }
        let spec = build_domain(2.0, false).unwrap();
        assert!(spec.area().contains(5.0));
    }

    #[test]
    fn half_domain_area() {
        // trapezoid (0,0),(T,0),(T,1),(-1,1) has area T + 1/2
        let spec = build_domain(3.0, true).unwrap();
        let a = spec.area();
        assert!(a.contains(3.5), "{a}");
    }

    #[test]
    fn rejects_bad_truncation() {
        assert!(build_domain(1.0, false).is_err());
        assert!(build_domain(0.5, false).is_err());
        assert!(build_domain(f64::NAN, false).is_err());
    }

    #[test]
    fn mesh_counts() {
        let spec = build_domain(2.0, false).unwrap();
        let mesh = generate_mesh(&spec, 0.5).unwrap();
        // cells: horizontal arm 6x2, vertical arm 2x4
        assert_eq!(mesh.cells.len(), 12 + 8);
        // area = cells * h^2
        let area = mesh.cells.len() as f64 * mesh.h * mesh.h;
        assert!((area - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mesh_rejects_incommensurate() {
        let spec = build_domain(2.0, false).unwrap();
        assert!(generate_mesh(&spec, 0.3).is_err());
        let spec = build_domain(2.25, false).unwrap();
        assert!(generate_mesh(&spec, 0.5).is_err());
        assert!(generate_mesh(&spec, 0.25).is_ok());
    }

    #[test]
    fn boundary_classification() {
        let spec = build_domain(2.0, false).unwrap();
        let mesh = generate_mesh(&spec, 0.25).unwrap();
        let at = |x: f64, y: f64| {
            let id = mesh
                .lookup((x / (0.5 * mesh.h)).round() as i64, (y / (0.5 * mesh.h)).round() as i64)
                .unwrap();
            mesh.nodes[id].dirichlet
        };
        // reentrant corner and outer edges are Dirichlet
        assert!(at(0.0, 0.0));
        assert!(at(-1.0, 0.5));
        assert!(at(0.5, 0.0));
        assert!(at(0.0, -0.5));
        assert!(at(2.0, 0.5));
        assert!(at(-0.5, -2.0));
        assert!(at(0.5, 1.0));
        // interior points are free
        assert!(!at(-0.5, 0.5));
        assert!(!at(0.5, 0.5));
        assert!(!at(-0.5, -0.5));
        assert!(!at(-0.5, 0.0)); // y = 0 with x < 0 is interior
        assert!(!at(0.0, 0.5)); // x = 0 with y > 0 is interior
    }

    #[test]
    fn reflection_is_involution() {
        let spec = build_domain(2.0, false).unwrap();
        let mesh = generate_mesh(&spec, 0.25).unwrap();
        for id in 0..mesh.nodes.len() {
            let r = mesh.reflect(id);
            assert_eq!(mesh.reflect(r), id);
            let a = mesh.nodes[id];
            let b = mesh.nodes[r];
            assert_eq!(a.dirichlet, b.dirichlet);
            assert_eq!((a.hx, a.hy), (-b.hy, -b.hx));
        }
    }

    #[test]
    fn node_count_formula() {
        // serendipity nodes on an a x b cell grid: corners (a+1)(b+1) plus
        // midpoints a(b+1) + b(a+1); the two arms share the corner square
        let spec = build_domain(2.0, false).unwrap();
        let mesh = generate_mesh(&spec, 0.5).unwrap();
        let count = |a: i64, b: i64| (a + 1) * (b + 1) + a * (b + 1) + b * (a + 1);
        // horizontal arm 6x2 grid, vertical extension 2x4 grid, shared edge
        // of the 2-cell interface: corner nodes 3 + midpoints 2
        let expected = count(6, 2) + count(2, 4) - 5;
        assert_eq!(mesh.nodes.len() as i64, expected);
    }

    #[test]
    fn dump_roundtrip_counts() {
        let spec = build_domain(2.0, false).unwrap();
        let mesh = generate_mesh(&spec, 0.5).unwrap();
        let dump = mesh.dump();
        let mut lines = dump.lines();
        let first = lines.next().unwrap();
        assert_eq!(first, format!("nodes {}", mesh.nodes.len()));
        let total = dump.lines().count();
        assert_eq!(total, 2 + mesh.nodes.len() + mesh.cells.len());
        assert!(dump.contains("dirichlet_outer"));
        assert!(dump.contains("interface"));
    }

    #[test]
    fn find_cell_hits() {
        let spec = build_domain(2.0, false).unwrap();
        let mesh = generate_mesh(&spec, 0.25).unwrap();
        let i = mesh.find_cell(-0.9, 0.1).unwrap();
        assert!(mesh.cell_contains(&mesh.cells[i], -0.9, 0.1));
        assert!(mesh.find_cell(1.5, 0.5).is_some());
        assert!(mesh.find_cell(-0.5, -1.5).is_some());
        assert!(mesh.find_cell(1.5, -0.5).is_none());
        assert!(mesh.find_cell(2.5, 0.5).is_none());
    }
}
