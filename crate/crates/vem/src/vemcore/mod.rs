//! Degrees of freedom and element-level operators of the virtual spaces.
//!
//! An element of degree `k` with cell-moment order `l` carries, in this
//! order: one value per vertex, `k - 1` scaled moments per edge, and one
//! moment per scaled monomial of degree at most `l` (none when `l = -1`).
//! Edge moments are taken against powers of the affine edge coordinate
//! `xi = s/|e| - 1/2`, with `s` measured from the edge endpoint that the
//! layout designates as first; inside a mesh that endpoint is the one with
//! the lower global vertex index, so the two elements sharing an edge agree
//! on every d.o.f. without sign conventions.

mod element;
mod projector;
mod trace;

pub use element::{element_load, element_stiffness, stabilization, LoadKind, StabilizationKind};
pub use projector::ProjectorPack;
pub use trace::edge_trace_matrix;

use crate::error::{Result, VemError};
use crate::geometry::{Point, PolygonGeometry, VirtualTriangulation};
use crate::poly::{integrate_edge, integrate_polygon, poly_dim, MonomialBasis, DATA_DEGREE, EDGE_DATA_POINTS};
use nalgebra::DVector;

/// A vector of d.o.f. values of one element.
pub type DofVector = DVector<f64>;

/// Degree-of-freedom layout of one element.
#[derive(Debug, Clone)]
pub struct DofLayout {
    k: usize,
    l: i32,
    n_vertices: usize,
    /// Per edge: whether the counterclockwise traversal direction is the
    /// reverse of the direction the edge moments are parameterized in.
    edge_reversed: Vec<bool>,
}

impl DofLayout {
    /// Layout with every edge parameterized in traversal direction; the
    /// natural choice for a standalone element.
    pub fn new(k: usize, l: i32, n_vertices: usize) -> Result<Self> {
        Self::with_orientation(k, l, vec![false; n_vertices])
    }

    /// Layout with explicit edge parameterization directions, as dictated by
    /// global edge orientation inside a mesh.
    pub fn with_orientation(k: usize, l: i32, edge_reversed: Vec<bool>) -> Result<Self> {
        if !(1..=4).contains(&k) {
            return Err(VemError::UnsupportedLayout(format!(
                "degree k = {k} is outside the supported range 1..=4"
            )));
        }
        let k_i = k as i32;
        if l != -1 && l != k_i - 2 && l != k_i {
            return Err(VemError::UnsupportedLayout(format!(
                "moment order l = {l} must be -1, k - 2, or k (k = {k})"
            )));
        }
        let n_vertices = edge_reversed.len();
        if n_vertices < 3 {
            return Err(VemError::UnsupportedLayout(format!(
                "an element needs at least 3 vertices, got {n_vertices}"
            )));
        }
        Ok(DofLayout {
            k,
            l,
            n_vertices,
            edge_reversed,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> i32 {
        self.l
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Edge moments per edge.
    pub fn moments_per_edge(&self) -> usize {
        self.k - 1
    }

    /// Cell moments.
    pub fn n_cell_dofs(&self) -> usize {
        poly_dim(self.l)
    }

    /// Total d.o.f. count.
    pub fn n_dofs(&self) -> usize {
        self.n_vertices * self.k + self.n_cell_dofs()
    }

    /// D.o.f. index of the value at vertex `i`.
    pub fn vertex_dof(&self, i: usize) -> usize {
        debug_assert!(i < self.n_vertices);
        i
    }

    /// D.o.f. index of moment `j` on edge `e`.
    pub fn edge_moment_dof(&self, e: usize, j: usize) -> usize {
        debug_assert!(e < self.n_vertices && j + 1 < self.k);
        self.n_vertices + e * (self.k - 1) + j
    }

    /// D.o.f. index of cell moment `beta`.
    pub fn cell_moment_dof(&self, beta: usize) -> usize {
        debug_assert!(beta < self.n_cell_dofs());
        self.n_vertices * self.k + beta
    }

    pub fn edge_is_reversed(&self, e: usize) -> bool {
        self.edge_reversed[e]
    }

    /// Geometric and index data of edge `e` in its moment parameterization.
    pub fn edge_frame(&self, geom: &PolygonGeometry, e: usize) -> EdgeFrame {
        assert_eq!(geom.vertices.len(), self.n_vertices);
        let edge = &geom.edges[e];
        let a = e;
        let b = (e + 1) % self.n_vertices;
        let (p0, p1, v0, v1) = if self.edge_reversed[e] {
            (edge.end, edge.start, b, a)
        } else {
            (edge.start, edge.end, a, b)
        };
        EdgeFrame {
            p0,
            p1,
            value_dofs: [self.vertex_dof(v0), self.vertex_dof(v1)],
            moment_dofs: if self.k > 1 {
                self.edge_moment_dof(e, 0)..self.edge_moment_dof(e, 0) + (self.k - 1)
            } else {
                0..0
            },
            length: edge.length,
            normal: edge.normal,
        }
    }
}

/// One polygon edge, seen in the direction its moments are parameterized in.
#[derive(Debug, Clone)]
pub struct EdgeFrame {
    /// Endpoint at `xi = -1/2`.
    pub p0: Point,
    /// Endpoint at `xi = +1/2`.
    pub p1: Point,
    /// Element d.o.f. of the values at `p0` and `p1`.
    pub value_dofs: [usize; 2],
    /// Element d.o.f. of the edge moments, lowest order first.
    pub moment_dofs: std::ops::Range<usize>,
    pub length: f64,
    /// Outward unit normal of the element.
    pub normal: Point,
}

impl EdgeFrame {
    /// Edge coordinate `xi = s/|e| - 1/2` of the point at arc length `s`
    /// from `p0`.
    pub fn xi(&self, s: f64) -> f64 {
        s / self.length - 0.5
    }

    /// The edge's d.o.f. in trace order: value at `p0`, value at `p1`, then
    /// the moments. This is the column order of [`edge_trace_matrix`].
    pub fn trace_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        self.value_dofs.iter().copied().chain(self.moment_dofs.clone())
    }
}

/// Evaluates all d.o.f. of a smooth function on one element.
pub fn evaluate_dofs(
    layout: &DofLayout,
    geom: &PolygonGeometry,
    tri: &VirtualTriangulation,
    f: impl Fn(Point) -> f64,
) -> Result<DofVector> {
    let mut dofs = DVector::zeros(layout.n_dofs());
    for (i, &v) in geom.vertices.iter().enumerate() {
        dofs[layout.vertex_dof(i)] = f(v);
    }
    for e in 0..layout.n_vertices() {
        let frame = layout.edge_frame(geom, e);
        for j in 0..layout.moments_per_edge() {
            let val = integrate_edge(frame.p0, frame.p1, EDGE_DATA_POINTS, |p, s| {
                f(p) * frame.xi(s).powi(j as i32)
            });
            dofs[layout.edge_moment_dof(e, j)] = val / frame.length;
        }
    }
    if layout.n_cell_dofs() > 0 {
        let cell_basis = MonomialBasis::new(layout.l(), geom.centroid, geom.diameter);
        for beta in 0..layout.n_cell_dofs() {
            let val = integrate_polygon(tri, DATA_DEGREE, |p| f(p) * cell_basis.value(beta, p))?;
            dofs[layout.cell_moment_dof(beta)] = val / geom.area;
        }
    }
    Ok(dofs)
}
