//! Polygonal meshes and per-cell geometric data.
//!
//! A mesh is a flat vertex list plus cells given as counterclockwise vertex
//! index loops. Cells must be simple polygons and the mesh must be
//! edge-to-edge conforming: an interior edge is traversed exactly twice, once
//! in each direction, with identical endpoints.

mod families;
mod io;
mod triangulate;

pub use families::{make_mesh_family, MeshFamily};
pub use io::{load_mesh, save_mesh};
pub use triangulate::{
    regularity_report, triangulate_polygon, QualityConfig, RegularityReport, VirtualTriangulation,
};

use crate::error::{Result, VemError};
use std::collections::HashMap;

/// 2D point or vector as a plain coordinate pair `[x, y]`.
pub type Point = [f64; 2];

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub(crate) fn scale(s: f64, a: Point) -> Point {
    [s * a[0], s * a[1]]
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub(crate) fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Signed area of a closed vertex loop (positive for counterclockwise).
pub fn signed_area(loop_: &[Point]) -> f64 {
    let n = loop_.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = loop_[i];
        let b = loop_[(i + 1) % n];
        s += cross(a, b);
    }
    0.5 * s
}

/// One edge of a polygon, in traversal (counterclockwise) direction.
#[derive(Debug, Clone)]
pub struct EdgeGeometry {
    /// First endpoint in traversal order.
    pub start: Point,
    /// Second endpoint in traversal order.
    pub end: Point,
    /// Edge length.
    pub length: f64,
    /// Edge midpoint.
    pub midpoint: Point,
    /// Outward unit normal (the polygon is traversed counterclockwise).
    pub normal: Point,
}

/// Geometric data of one polygonal cell.
#[derive(Debug, Clone)]
pub struct PolygonGeometry {
    /// Vertex loop, counterclockwise.
    pub vertices: Vec<Point>,
    /// Polygon area.
    pub area: f64,
    /// Average of the vertex coordinates. All scaled monomials on this
    /// polygon are centered here; note this is in general not the area
    /// centroid.
    pub centroid: Point,
    /// Diameter (largest pairwise vertex distance).
    pub diameter: f64,
    /// Perimeter (sum of edge lengths).
    pub perimeter: f64,
    /// Edges in traversal order; edge `i` runs from vertex `i` to `i+1`.
    pub edges: Vec<EdgeGeometry>,
}

/// Builds [`PolygonGeometry`] from a counterclockwise vertex loop.
///
/// Fails with [`VemError::DegeneratePolygon`] if the loop has fewer than
/// three vertices, repeated coordinates, or non-positive signed area.
pub fn polygon_geometry(loop_: &[Point]) -> Result<PolygonGeometry> {
    if loop_.len() < 3 {
        return Err(VemError::DegeneratePolygon(format!(
            "{} vertices (need at least 3)",
            loop_.len()
        )));
    }
    let n = loop_.len();
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            diameter = diameter.max(dist(loop_[i], loop_[j]));
        }
    }
    if diameter <= 0.0 {
        return Err(VemError::DegeneratePolygon("all vertices coincide".into()));
    }
    let tol = 1e-13 * diameter;
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(loop_[i], loop_[j]) <= tol {
                return Err(VemError::DegeneratePolygon(format!(
                    "vertices {i} and {j} coincide"
                )));
            }
        }
    }
    let area = signed_area(loop_);
    if area <= tol * tol {
        return Err(VemError::DegeneratePolygon(format!(
            "signed area {area:.3e} is not positive (loop must be counterclockwise)"
        )));
    }
    let inv_n = 1.0 / n as f64;
    let mut centroid = [0.0, 0.0];
    for p in loop_ {
        centroid = add(centroid, scale(inv_n, *p));
    }
    let mut edges = Vec::with_capacity(n);
    let mut perimeter = 0.0;
    for i in 0..n {
        let a = loop_[i];
        let b = loop_[(i + 1) % n];
        let d = sub(b, a);
        let length = norm(d);
        perimeter += length;
        edges.push(EdgeGeometry {
            start: a,
            end: b,
            length,
            midpoint: scale(0.5, add(a, b)),
            // For a counterclockwise loop the outward normal is the edge
            // direction rotated clockwise by 90 degrees.
            normal: [d[1] / length, -d[0] / length],
        });
    }
    Ok(PolygonGeometry {
        vertices: loop_.to_vec(),
        area,
        centroid,
        diameter,
        perimeter,
        edges,
    })
}

/// A conforming polygonal mesh.
///
/// Constructed through [`PolygonMesh::new`], which validates and normalizes
/// the input: all cells are stored counterclockwise, every cell is a simple
/// polygon, every vertex is referenced, and interior edges match
/// edge-to-edge.
#[derive(Debug, Clone)]
pub struct PolygonMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    /// Directed boundary edges `(a, b)` in the traversal direction of the
    /// owning cell.
    boundary_edges: Vec<(usize, usize)>,
}

impl PolygonMesh {
    /// Validates the raw vertex/cell data and builds a mesh.
    ///
    /// Cell loops given clockwise are reversed. Returns
    /// [`VemError::ValidationError`] for structural defects (bad indices,
    /// unreferenced vertices, non-conforming interfaces) and
    /// [`VemError::DegeneratePolygon`] / [`VemError::TriangulationFailed`]
    /// style messages wrapped as validation errors for bad cells.
    pub fn new(vertices: Vec<Point>, mut cells: Vec<Vec<usize>>) -> Result<Self> {
        if cells.is_empty() {
            return Err(VemError::ValidationError("mesh has no cells".into()));
        }
        let nv = vertices.len();
        let mut referenced = vec![false; nv];
        for (ci, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(VemError::ValidationError(format!(
                    "cell {ci} has {} vertices (need at least 3)",
                    cell.len()
                )));
            }
            let mut seen = std::collections::HashSet::new();
            for &v in cell {
                if v >= nv {
                    return Err(VemError::ValidationError(format!(
                        "cell {ci} references vertex {v}, but the mesh has {nv} vertices"
                    )));
                }
                if !seen.insert(v) {
                    return Err(VemError::ValidationError(format!(
                        "cell {ci} repeats vertex {v}"
                    )));
                }
                referenced[v] = true;
            }
        }
        if let Some(v) = referenced.iter().position(|r| !r) {
            return Err(VemError::ValidationError(format!(
                "vertex {v} is not referenced by any cell"
            )));
        }

        // Normalize orientation and check each cell is a simple polygon.
        for (ci, cell) in cells.iter_mut().enumerate() {
            let loop_: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&loop_);
            if area < 0.0 {
                cell.reverse();
            }
            let loop_: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            if let Err(e) = check_simple_polygon(&loop_) {
                return Err(VemError::ValidationError(format!("cell {ci}: {e}")));
            }
        }

        // Conformity: every directed edge at most once; interior edges must
        // be traversed once in each direction.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (ci, cell) in cells.iter().enumerate() {
            let m = cell.len();
            for i in 0..m {
                let e = (cell[i], cell[(i + 1) % m]);
                if let Some(other) = directed.insert(e, ci) {
                    return Err(VemError::ValidationError(format!(
                        "edge ({}, {}) traversed in the same direction by cells {other} and {ci}",
                        e.0, e.1
                    )));
                }
            }
        }
        let mut boundary_edges = Vec::new();
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                boundary_edges.push((a, b));
            }
        }
        boundary_edges.sort_unstable();

        // A hanging node shows up as a vertex strictly inside an unmatched
        // (i.e. boundary) edge; genuine boundary edges have none.
        for &(a, b) in &boundary_edges {
            let pa = vertices[a];
            let pb = vertices[b];
            let len = dist(pa, pb);
            for (v, p) in vertices.iter().enumerate() {
                if v == a || v == b {
                    continue;
                }
                let d = sub(pb, pa);
                let t = dot(sub(*p, pa), d) / (len * len);
                if t > 1e-12 && t < 1.0 - 1e-12 {
                    let foot = add(pa, scale(t, d));
                    if dist(foot, *p) <= 1e-12 * len {
                        return Err(VemError::ValidationError(format!(
                            "vertex {v} lies inside edge ({a}, {b}): mesh is not edge-to-edge conforming"
                        )));
                    }
                }
            }
        }

        Ok(PolygonMesh {
            vertices,
            cells,
            boundary_edges,
        })
    }

    /// Vertex coordinates.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Cell loops (counterclockwise vertex indices).
    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Directed boundary edges, sorted; each runs in the traversal direction
    /// of its owning cell.
    pub fn boundary_edges(&self) -> &[(usize, usize)] {
        &self.boundary_edges
    }

    /// Vertex indices on the domain boundary.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut flags = vec![false; self.vertices.len()];
        for &(a, b) in &self.boundary_edges {
            flags[a] = true;
            flags[b] = true;
        }
        (0..self.vertices.len()).filter(|&v| flags[v]).collect()
    }

    /// Geometry of cell `i`.
    pub fn cell_geometry(&self, i: usize) -> Result<PolygonGeometry> {
        let loop_: Vec<Point> = self.cells[i].iter().map(|&v| self.vertices[v]).collect();
        polygon_geometry(&loop_)
    }

    /// Largest cell diameter (the mesh size h).
    pub fn mesh_size(&self) -> f64 {
        let mut h: f64 = 0.0;
        for cell in &self.cells {
            for (i, &a) in cell.iter().enumerate() {
                for &b in cell.iter().skip(i + 1) {
                    h = h.max(dist(self.vertices[a], self.vertices[b]));
                }
            }
        }
        h
    }
}

/// Checks that a vertex loop bounds a simple polygon with positive area.
fn check_simple_polygon(loop_: &[Point]) -> std::result::Result<(), String> {
    let n = loop_.len();
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            diameter = diameter.max(dist(loop_[i], loop_[j]));
        }
    }
    if diameter <= 0.0 {
        return Err("all vertices coincide".into());
    }
    let area = signed_area(loop_);
    if area <= 1e-26 * diameter * diameter {
        return Err(format!("signed area {area:.3e} is not positive"));
    }
    let eps = 1e-13 * diameter;
    for i in 0..n {
        if dist(loop_[i], loop_[(i + 1) % n]) <= eps {
            return Err(format!("edge {i} has zero length"));
        }
    }
    // Non-adjacent edges must not intersect or touch.
    for i in 0..n {
        let (a1, a2) = (loop_[i], loop_[(i + 1) % n]);
        for j in (i + 1)..n {
            // Skip the edge itself and the two neighbors (they share a vertex).
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (b1, b2) = (loop_[j], loop_[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2, eps) {
                return Err(format!("edges {i} and {j} intersect: polygon is not simple"));
            }
        }
    }
    Ok(())
}

/// Closed-segment intersection test with tolerance `eps` (absolute, in
/// coordinate units). Touching counts as intersecting.
fn segments_intersect(a1: Point, a2: Point, b1: Point, b2: Point, eps: f64) -> bool {
    let d1 = sub(a2, a1);
    let d2 = sub(b2, b1);
    let denom = cross(d1, d2);
    let r = sub(b1, a1);
    let len = norm(d1).max(norm(d2));
    if denom.abs() > eps * len {
        let t = cross(r, d2) / denom;
        let u = cross(r, d1) / denom;
        let m = eps / len;
        return t > -m && t < 1.0 + m && u > -m && u < 1.0 + m;
    }
    // Parallel: intersect only if collinear and overlapping.
    if cross(r, d1).abs() > eps * len {
        return false;
    }
    let l1 = dot(d1, d1);
    let t0 = dot(r, d1) / l1;
    let t1 = dot(sub(b2, a1), d1) / l1;
    let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
    lo < 1.0 + eps / len && hi > -(eps / len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_geometry_unit_square() {
        let g = polygon_geometry(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!((g.area - 1.0).abs() < 1e-15);
        assert!((g.centroid[0] - 0.5).abs() < 1e-15);
        assert!((g.centroid[1] - 0.5).abs() < 1e-15);
        assert!((g.diameter - 2f64.sqrt()).abs() < 1e-15);
        assert!((g.perimeter - 4.0).abs() < 1e-15);
        // Bottom edge outward normal points down.
        assert!((g.edges[0].normal[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn polygon_geometry_rejects_clockwise() {
        let r = polygon_geometry(&[[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]);
        assert!(matches!(r, Err(VemError::DegeneratePolygon(_))));
    }

    #[test]
    fn polygon_geometry_rejects_repeated_vertex() {
        let r = polygon_geometry(&[[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(r, Err(VemError::DegeneratePolygon(_))));
    }

    #[test]
    fn l_hexagon_geometry() {
        let g = polygon_geometry(&[
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 2.0],
            [0.0, 2.0],
        ])
        .unwrap();
        assert!((g.area - 3.0).abs() < 1e-14);
        assert!((g.diameter - 8f64.sqrt()).abs() < 1e-14);
        // Vertex average, not the area centroid.
        assert!((g.centroid[0] - 1.0).abs() < 1e-15);
        assert!((g.centroid[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mesh_rejects_bowtie_cell() {
        let vertices = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let r = PolygonMesh::new(vertices, vec![vec![0, 1, 3, 2]]);
        assert!(matches!(r, Err(VemError::ValidationError(_))));
    }

    #[test]
    fn mesh_rejects_unreferenced_vertex() {
        let vertices = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [5.0, 5.0]];
        let r = PolygonMesh::new(vertices, vec![vec![0, 1, 2, 3]]);
        assert!(matches!(r, Err(VemError::ValidationError(_))));
    }

    #[test]
    fn mesh_rejects_hanging_node() {
        // Left cell spans the full edge x=1; right side is split at y=1/2.
        let vertices = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 0.5],
            [1.0, 1.0],
            [0.0, 1.0],
            [2.0, 0.0],
            [2.0, 1.0],
        ];
        let cells = vec![vec![0, 1, 3, 4], vec![1, 5, 6, 3, 2]];
        let r = PolygonMesh::new(vertices, cells);
        assert!(matches!(r, Err(VemError::ValidationError(_))));
    }

    #[test]
    fn mesh_normalizes_orientation() {
        let vertices = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let mesh = PolygonMesh::new(vertices, vec![vec![0, 3, 2, 1]]).unwrap();
        let g = mesh.cell_geometry(0).unwrap();
        assert!(g.area > 0.0);
    }

    #[test]
    fn boundary_edges_of_two_cells() {
        let vertices = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [0.0, 1.0],
        ];
        let mesh =
            PolygonMesh::new(vertices, vec![vec![0, 1, 4, 5], vec![1, 2, 3, 4]]).unwrap();
        assert_eq!(mesh.boundary_edges().len(), 6);
        let bv = mesh.boundary_vertices();
        assert_eq!(bv.len(), 6);
    }
}
