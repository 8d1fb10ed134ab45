//! Structured hexahedral meshes of the rectangular body.
//!
//! Nodes are ordered lexicographically in (i, j, k) with i fastest; element
//! corners follow the standard trilinear reference cube
//! (signs (-,-,-), (+,-,-), (+,+,-), (-,+,-), then the same square at the
//! top face). Both orderings are fixed so that mesh-derived files and tests
//! are deterministic.

use std::io::Write;

use crate::error::{Error, Result};

/// Axis-aligned box occupied by the elastic body, in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBounds {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub z_range: (f64, f64),
}

impl Default for DomainBounds {
    fn default() -> Self {
        DomainBounds {
            x_range: (0.0, 0.3),
            y_range: (-0.05, 0.05),
            z_range: (0.0, 0.05),
        }
    }
}

impl DomainBounds {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), z_range: (f64, f64)) -> Result<Self> {
        for (lo, hi) in [x_range, y_range, z_range] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "domain range [{lo}, {hi}] must satisfy lo < hi"
                )));
            }
        }
        Ok(DomainBounds {
            x_range,
            y_range,
            z_range,
        })
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        let [x, y, z] = p;
        x >= self.x_range.0
            && x <= self.x_range.1
            && y >= self.y_range.0
            && y <= self.y_range.1
            && z >= self.z_range.0
            && z <= self.z_range.1
    }

    pub fn volume(&self) -> f64 {
        (self.x_range.1 - self.x_range.0)
            * (self.y_range.1 - self.y_range.0)
            * (self.z_range.1 - self.z_range.0)
    }

    /// Geometric centre of the box.
    pub fn center(&self) -> [f64; 3] {
        [
            0.5 * (self.x_range.0 + self.x_range.1),
            0.5 * (self.y_range.0 + self.y_range.1),
            0.5 * (self.z_range.0 + self.z_range.1),
        ]
    }
}

/// Structured axis-aligned hexahedral mesh. Immutable after construction and
/// safe to share read-only across threads.
#[derive(Debug, Clone)]
pub struct HexMesh {
    bounds: DomainBounds,
    divisions: (usize, usize, usize),
    // Per-axis grid planes; xs.len() == nx + 1 with xs[0] == lo, xs[nx] == hi.
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<f64>,
    nodes: Vec<[f64; 3]>,
    elements: Vec<[usize; 8]>,
}

fn axis_coords(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    // lo + (hi - lo) * i/n hits both endpoints exactly.
    (0..=n)
        .map(|i| lo + (hi - lo) * (i as f64 / n as f64))
        .collect()
}

/// Build a uniform structured mesh with the given division counts.
pub fn build_mesh(divisions: (usize, usize, usize), bounds: DomainBounds) -> Result<HexMesh> {
    let (nx, ny, nz) = divisions;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::InvalidArgument(format!(
            "divisions must all be >= 1, got ({nx}, {ny}, {nz})"
        )));
    }

    let xs = axis_coords(bounds.x_range.0, bounds.x_range.1, nx);
    let ys = axis_coords(bounds.y_range.0, bounds.y_range.1, ny);
    let zs = axis_coords(bounds.z_range.0, bounds.z_range.1, nz);

    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for &z in &zs {
        for &y in &ys {
            for &x in &xs {
                nodes.push([x, y, z]);
            }
        }
    }

    let node_index = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut elements = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                elements.push([
                    node_index(i, j, k),
                    node_index(i + 1, j, k),
                    node_index(i + 1, j + 1, k),
                    node_index(i, j + 1, k),
                    node_index(i, j, k + 1),
                    node_index(i + 1, j, k + 1),
                    node_index(i + 1, j + 1, k + 1),
                    node_index(i, j + 1, k + 1),
                ]);
            }
        }
    }

    Ok(HexMesh {
        bounds,
        divisions,
        xs,
        ys,
        zs,
        nodes,
        elements,
    })
}

impl HexMesh {
    pub fn bounds(&self) -> &DomainBounds {
        &self.bounds
    }

    pub fn divisions(&self) -> (usize, usize, usize) {
        self.divisions
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn node(&self, i: usize) -> [f64; 3] {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn element(&self, e: usize) -> [usize; 8] {
        self.elements[e]
    }

    pub fn elements(&self) -> &[[usize; 8]] {
        &self.elements
    }

    /// Element edge lengths (hx, hy, hz). All elements of a uniform mesh
    /// share them up to the grid-plane rounding, so they are taken from the
    /// element's own corner planes.
    pub fn element_extent(&self, e: usize) -> [f64; 3] {
        let (i, j, k) = self.element_cell(e);
        [
            self.xs[i + 1] - self.xs[i],
            self.ys[j + 1] - self.ys[j],
            self.zs[k + 1] - self.zs[k],
        ]
    }

    pub fn element_volume(&self, e: usize) -> f64 {
        let [hx, hy, hz] = self.element_extent(e);
        hx * hy * hz
    }

    fn element_cell(&self, e: usize) -> (usize, usize, usize) {
        let (nx, ny, _) = self.divisions;
        let i = e % nx;
        let j = (e / nx) % ny;
        let k = e / (nx * ny);
        (i, j, k)
    }

    fn element_index(&self, i: usize, j: usize, k: usize) -> usize {
        let (nx, ny, _) = self.divisions;
        i + nx * (j + ny * k)
    }

    /// Locate the element containing `x` and the local coordinates
    /// xi in [-1, 1]^3 within it.
    ///
    /// A point lying exactly on a shared face belongs to the element with
    /// the lower index (per axis: the cell below the plane).
    pub fn locate_point(&self, x: [f64; 3]) -> Result<(usize, [f64; 3])> {
        if !self.bounds.contains(x) {
            return Err(Error::OutOfDomain(x[0], x[1], x[2]));
        }
        let i = cell_of(&self.xs, x[0]);
        let j = cell_of(&self.ys, x[1]);
        let k = cell_of(&self.zs, x[2]);
        let e = self.element_index(i, j, k);
        let xi = [
            local_coord(self.xs[i], self.xs[i + 1], x[0]),
            local_coord(self.ys[j], self.ys[j + 1], x[1]),
            local_coord(self.zs[k], self.zs[k + 1], x[2]),
        ];
        Ok((e, xi))
    }

    /// Map element-local coordinates xi in [-1, 1]^3 back to a global point.
    pub fn local_to_global(&self, e: usize, xi: [f64; 3]) -> [f64; 3] {
        let (i, j, k) = self.element_cell(e);
        [
            unlocal(self.xs[i], self.xs[i + 1], xi[0]),
            unlocal(self.ys[j], self.ys[j + 1], xi[1]),
            unlocal(self.zs[k], self.zs[k + 1], xi[2]),
        ]
    }

    /// Node indices of the bottom face z = z_lo.
    pub fn bottom_face_nodes(&self) -> Vec<usize> {
        let (nx, ny, _) = self.divisions;
        (0..(nx + 1) * (ny + 1)).collect()
    }

    /// Node indices on any face of the box.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let (nx, ny, nz) = self.divisions;
        let mut out = Vec::new();
        let mut idx = 0usize;
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    if i == 0 || i == nx || j == 0 || j == ny || k == 0 || k == nz {
                        out.push(idx);
                    }
                    idx += 1;
                }
            }
        }
        out
    }

    /// Plain-text node/element listing for debugging.
    pub fn dump(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "hexmesh {}x{}x{} nodes={} elements={}",
            self.divisions.0,
            self.divisions.1,
            self.divisions.2,
            self.node_count(),
            self.element_count()
        )?;
        for (i, n) in self.nodes.iter().enumerate() {
            writeln!(w, "node {i} {} {} {}", n[0], n[1], n[2])?;
        }
        for (e, conn) in self.elements.iter().enumerate() {
            write!(w, "element {e}")?;
            for c in conn {
                write!(w, " {c}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Index of the cell [coords[i], coords[i+1]] containing x, where a point on
/// an interior plane belongs to the lower cell.
fn cell_of(coords: &[f64], x: f64) -> usize {
    let n = coords.len() - 1;
    // First interior plane index with coords[m] >= x, minus one; clamped so
    // x == lo maps to cell 0.
    let m = coords[1..n].partition_point(|&c| c < x);
    m.min(n - 1)
}

fn local_coord(lo: f64, hi: f64, x: f64) -> f64 {
    2.0 * (x - lo) / (hi - lo) - 1.0
}

fn unlocal(lo: f64, hi: f64, xi: f64) -> f64 {
    lo + 0.5 * (xi + 1.0) * (hi - lo)
}
