//! Conforming 1D/2D meshes: intervals, triangles and axis-aligned quads.
//!
//! Local numbering conventions used throughout the crate:
//!
//! * interval `[a, b]` with `x_a < x_b`: local face `0` is vertex `a`,
//!   local face `1` is vertex `b`;
//! * triangle `(v0, v1, v2)` ordered counter-clockwise: local face `j` is
//!   the edge opposite vertex `j`, i.e. `(v1, v2)`, `(v2, v0)`, `(v0, v1)`;
//! * quad `(v0, v1, v2, v3)` counter-clockwise: local face `j` is the edge
//!   `(v_j, v_{j+1})`.
//!
//! Every face carries a unit normal pointing out of its first incident
//! cell (into the second one when the face is interior).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{PmeError, Result};
use crate::math;

/// Shape of the cells of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Interval,
    Triangle,
    Quad,
}

impl CellKind {
    pub fn dim(self) -> usize {
        match self {
            CellKind::Interval => 1,
            CellKind::Triangle | CellKind::Quad => 2,
        }
    }

    pub fn vertices_per_cell(self) -> usize {
        match self {
            CellKind::Interval => 2,
            CellKind::Triangle => 3,
            CellKind::Quad => 4,
        }
    }

    pub fn faces_per_cell(self) -> usize {
        self.vertices_per_cell()
    }

    pub fn is_simplex(self) -> bool {
        matches!(self, CellKind::Interval | CellKind::Triangle)
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Interval => "interval",
            CellKind::Triangle => "triangle",
            CellKind::Quad => "quad",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "interval" => Some(CellKind::Interval),
            "triangle" => Some(CellKind::Triangle),
            "quad" => Some(CellKind::Quad),
            _ => None,
        }
    }
}

/// Generator used by [`build_structured_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// Uniform intervals (1D only).
    Interval,
    /// Right triangles, each grid square split by one diagonal whose
    /// direction alternates from square to square.
    Triangle,
    /// Isosceles triangles on offset rows; every interior edge has a
    /// strictly positive cotangent weight.
    AcuteTriangle,
    /// Axis-aligned rectangles.
    Quad,
}

impl MeshKind {
    pub fn name(self) -> &'static str {
        match self {
            MeshKind::Interval => "interval",
            MeshKind::Triangle => "triangle",
            MeshKind::AcuteTriangle => "acute_triangle",
            MeshKind::Quad => "quad",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "interval" => Some(MeshKind::Interval),
            "triangle" => Some(MeshKind::Triangle),
            "acute_triangle" | "acute" => Some(MeshKind::AcuteTriangle),
            "quad" => Some(MeshKind::Quad),
            _ => None,
        }
    }
}

/// A codimension-one facet: a vertex in 1D, an edge in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Vertex indices; both entries are equal in 1D.
    pub vertices: [usize; 2],
    /// First incident cell and, for interior faces, the second one.
    pub cells: (usize, Option<usize>),
    /// Unit normal, outward from `cells.0`.
    pub normal: [f64; 2],
    /// Length of the edge in 2D, `1` in 1D.
    pub measure: f64,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.cells.1.is_none()
    }
}

/// Conforming mesh with precomputed face connectivity and cell measures.
#[derive(Debug, Clone)]
pub struct Mesh {
    kind: CellKind,
    vertices: Vec<[f64; 2]>,
    cells: Vec<usize>,
    cell_faces: Vec<usize>,
    faces: Vec<Face>,
    volumes: Vec<f64>,
    barycenters: Vec<[f64; 2]>,
}

fn signed_area(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    let mut twice = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * twice
}

impl Mesh {
    /// Builds a mesh from raw connectivity.
    ///
    /// Triangles and quads are reoriented counter-clockwise and intervals
    /// left-to-right; faces are discovered in order of first appearance.
    /// 1D vertices use only the first coordinate.
    pub fn from_cells(kind: CellKind, vertices: Vec<[f64; 2]>, cells: Vec<usize>) -> Result<Self> {
        let nv = kind.vertices_per_cell();
        if cells.len() % nv != 0 || cells.is_empty() {
            return Err(PmeError::NonConforming("cell list length is not a multiple of the cell size"));
        }
        if let Some(&bad) = cells.iter().find(|&&v| v >= vertices.len()) {
            return Err(PmeError::DimensionMismatch { expected: vertices.len(), found: bad + 1 });
        }
        let mut cells = cells;
        let ncells = cells.len() / nv;
        let mut volumes = Vec::with_capacity(ncells);
        let mut barycenters = Vec::with_capacity(ncells);

        for k in 0..ncells {
            let c = &mut cells[k * nv..(k + 1) * nv];
            let pts: Vec<[f64; 2]> = c.iter().map(|&v| vertices[v]).collect();
            let volume = match kind {
                CellKind::Interval => {
                    let len = pts[1][0] - pts[0][0];
                    if len < 0.0 {
                        c.swap(0, 1);
                    }
                    len.abs()
                }
                CellKind::Triangle => {
                    let a = signed_area(&pts);
                    if a < 0.0 {
                        c.swap(1, 2);
                    }
                    a.abs()
                }
                CellKind::Quad => {
                    let a = signed_area(&pts);
                    if a < 0.0 {
                        c.reverse();
                    }
                    for i in 0..4 {
                        let p = pts[i];
                        let q = pts[(i + 1) % 4];
                        if p[0] != q[0] && p[1] != q[1] {
                            return Err(PmeError::UnsupportedCellKind("quads must be axis-aligned rectangles"));
                        }
                    }
                    a.abs()
                }
            };
            if !(volume > 0.0) || c.iter().enumerate().any(|(i, v)| c[..i].contains(v)) {
                return Err(PmeError::DegenerateCell { cell: k });
            }
            let inv = 1.0 / nv as f64;
            let mut b = [0.0; 2];
            for &v in c.iter() {
                b[0] += vertices[v][0] * inv;
                b[1] += vertices[v][1] * inv;
            }
            volumes.push(volume);
            barycenters.push(b);
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut cell_faces = vec![0usize; ncells * nv];
        for k in 0..ncells {
            for j in 0..nv {
                let c = &cells[k * nv..(k + 1) * nv];
                let (a, b, normal, measure) = match kind {
                    CellKind::Interval => {
                        let sign = if j == 0 { -1.0 } else { 1.0 };
                        (c[j], c[j], [sign, 0.0], 1.0)
                    }
                    CellKind::Triangle | CellKind::Quad => {
                        let (a, b) = if kind == CellKind::Triangle {
                            (c[(j + 1) % 3], c[(j + 2) % 3])
                        } else {
                            (c[j], c[(j + 1) % 4])
                        };
                        let pa = vertices[a];
                        let pb = vertices[b];
                        let dx = pb[0] - pa[0];
                        let dy = pb[1] - pa[1];
                        let len = math::sqrt(dx * dx + dy * dy);
                        (a, b, [dy / len, -dx / len], len)
                    }
                };
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.cells.1.is_some() {
                            return Err(PmeError::NonConforming("face shared by more than two cells"));
                        }
                        if kind != CellKind::Interval && face.vertices != [b, a] {
                            return Err(PmeError::NonConforming("inconsistent cell orientation"));
                        }
                        if kind == CellKind::Interval && face.normal[0] == normal[0] {
                            return Err(PmeError::NonConforming("overlapping intervals"));
                        }
                        face.cells.1 = Some(k);
                        cell_faces[k * nv + j] = f;
                    }
                    None => {
                        let f = faces.len();
                        lookup.insert(key, f);
                        faces.push(Face { vertices: [a, b], cells: (k, None), normal, measure });
                        cell_faces[k * nv + j] = f;
                    }
                }
            }
        }
        if faces.iter().any(|f| !(f.measure > 0.0)) {
            return Err(PmeError::NonConforming("zero-length face"));
        }

        Ok(Mesh { kind, vertices, cells, cell_faces, faces, volumes, barycenters })
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.volumes.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex(&self, i: usize) -> [f64; 2] {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Vertex indices of cell `k` in local order.
    pub fn cell(&self, k: usize) -> &[usize] {
        let nv = self.kind.vertices_per_cell();
        &self.cells[k * nv..(k + 1) * nv]
    }

    /// Face indices of cell `k` in local order.
    pub fn cell_faces(&self, k: usize) -> &[usize] {
        let nf = self.kind.faces_per_cell();
        &self.cell_faces[k * nf..(k + 1) * nf]
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Vertices spanning face `f` (one in 1D, two in 2D).
    pub fn face_vertices(&self, f: usize) -> &[usize] {
        let v = &self.faces[f].vertices;
        if self.dim() == 1 {
            &v[..1]
        } else {
            &v[..]
        }
    }

    pub fn cell_volume(&self, k: usize) -> f64 {
        self.volumes[k]
    }

    pub fn cell_volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn barycenter(&self, k: usize) -> [f64; 2] {
        self.barycenters[k]
    }

    /// `n_E · n_K`: `+1` if `cell` is the first cell of `face`, `-1` otherwise.
    pub fn face_orientation(&self, face: usize, cell: usize) -> f64 {
        if self.faces[face].cells.0 == cell {
            1.0
        } else {
            -1.0
        }
    }

    /// Cell across `face` from `cell`, if any.
    pub fn neighbor(&self, face: usize, cell: usize) -> Option<usize> {
        let (a, b) = self.faces[face].cells;
        if a == cell {
            b
        } else {
            Some(a)
        }
    }

    pub fn domain_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    /// Volume of the vertex patch `S_i` (union of cells touching vertex `i`).
    pub fn vertex_patch_volumes(&self) -> Vec<f64> {
        let mut patch = vec![0.0; self.num_vertices()];
        for k in 0..self.num_cells() {
            for &v in self.cell(k) {
                patch[v] += self.volumes[k];
            }
        }
        patch
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    /// Index of the vertex closest to `x`, lowest index on ties.
    pub fn nearest_vertex(&self, x: [f64; 2]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, p) in self.vertices.iter().enumerate() {
            let d = (p[0] - x[0]) * (p[0] - x[0]) + (p[1] - x[1]) * (p[1] - x[1]);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }
}

/// Axis-aligned box: `[lo[0], hi[0]] (× [lo[1], hi[1]])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl BoxDomain {
    pub fn interval(a: f64, b: f64) -> Self {
        BoxDomain { lo: [a, 0.0], hi: [b, 0.0] }
    }

    pub fn square(a: f64, b: f64) -> Self {
        BoxDomain { lo: [a, a], hi: [b, b] }
    }

    /// Closed membership test in the first `dim` coordinates.
    pub fn contains(&self, x: [f64; 2], dim: usize) -> bool {
        (0..dim).all(|d| x[d] >= self.lo[d] && x[d] <= self.hi[d])
    }
}

/// Uniform structured mesh of `domain` with `counts` cells per axis.
pub fn build_structured_mesh(kind: MeshKind, domain: BoxDomain, counts: &[usize]) -> Result<Mesh> {
    let dim = if kind == MeshKind::Interval { 1 } else { 2 };
    if counts.len() != dim {
        return Err(PmeError::InvalidMeshKind(match kind {
            MeshKind::Interval => "interval meshes take one count",
            _ => "2D meshes take two counts",
        }));
    }
    if counts.iter().any(|&n| n == 0) || (0..dim).any(|d| !(domain.hi[d] > domain.lo[d])) {
        return Err(PmeError::InvalidMeshSize);
    }
    let [x0, y0] = domain.lo;
    let [x1, y1] = domain.hi;
    let coord = |lo: f64, hi: f64, i: usize, n: usize| {
        if i == n {
            hi
        } else {
            lo + (hi - lo) * (i as f64) / (n as f64)
        }
    };

    match kind {
        MeshKind::Interval => {
            let n = counts[0];
            let vertices = (0..=n).map(|i| [coord(x0, x1, i, n), 0.0]).collect();
            let cells = (0..n).flat_map(|i| [i, i + 1]).collect();
            Mesh::from_cells(CellKind::Interval, vertices, cells)
        }
        MeshKind::Quad | MeshKind::Triangle => {
            let (nx, ny) = (counts[0], counts[1]);
            let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
            for j in 0..=ny {
                for i in 0..=nx {
                    vertices.push([coord(x0, x1, i, nx), coord(y0, y1, j, ny)]);
                }
            }
            let id = |i: usize, j: usize| j * (nx + 1) + i;
            let mut cells = Vec::new();
            for j in 0..ny {
                for i in 0..nx {
                    let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                    if kind == MeshKind::Quad {
                        cells.extend_from_slice(&[v00, v10, v11, v01]);
                    } else if (i + j) % 2 == 0 {
                        cells.extend_from_slice(&[v00, v10, v11, v00, v11, v01]);
                    } else {
                        cells.extend_from_slice(&[v00, v10, v01, v10, v11, v01]);
                    }
                }
            }
            let cell_kind = if kind == MeshKind::Quad { CellKind::Quad } else { CellKind::Triangle };
            Mesh::from_cells(cell_kind, vertices, cells)
        }
        MeshKind::AcuteTriangle => {
            let (nx, ny) = (counts[0], counts[1]);
            let h = (x1 - x0) / nx as f64;
            if !((y1 - y0) / ny as f64 > 0.5 * h) {
                return Err(PmeError::InvalidMeshKind(
                    "acute_triangle needs row height > half the column width",
                ));
            }
            // Even rows: nx + 1 vertices on the grid columns. Odd rows:
            // both box corners plus the nx column midpoints.
            let mut row_start = Vec::with_capacity(ny + 2);
            let mut vertices = Vec::new();
            for j in 0..=ny {
                row_start.push(vertices.len());
                let y = coord(y0, y1, j, ny);
                if j % 2 == 0 {
                    for i in 0..=nx {
                        vertices.push([coord(x0, x1, i, nx), y]);
                    }
                } else {
                    vertices.push([x0, y]);
                    for i in 0..nx {
                        vertices.push([x0 + (i as f64 + 0.5) * h, y]);
                    }
                    vertices.push([x1, y]);
                }
            }
            let mut cells = Vec::new();
            for j in 0..ny {
                let (even, odd) = if j % 2 == 0 { (j, j + 1) } else { (j + 1, j) };
                let e = |i: usize| row_start[even] + i;
                let o = |i: usize| row_start[odd] + i;
                for i in 0..nx {
                    cells.extend_from_slice(&[e(i), e(i + 1), o(i + 1)]);
                }
                for k in 0..=nx {
                    cells.extend_from_slice(&[o(k), o(k + 1), e(k)]);
                }
            }
            Mesh::from_cells(CellKind::Triangle, vertices, cells)
        }
    }
}
