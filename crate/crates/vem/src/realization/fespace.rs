//! Conforming Lagrange finite element space on the (optionally refined)
//! virtual triangulation of a single polygon.
//!
//! Red refinement splits every triangle into four through its edge
//! midpoints. The location class of every mesh point — polygon vertex,
//! point on a polygon edge at parameter `t`, or interior — is propagated
//! combinatorially through the refinement, so boundary detection never
//! relies on floating point comparisons. Lagrange nodes are deduplicated
//! across triangles through shared-entity keys (mesh point, mesh edge with
//! a position index, or cell slot), which makes the space H^1-conforming by
//! construction.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, VemError};
use crate::geometry::{Point, PolygonGeometry, VirtualTriangulation};
use crate::poly::{edge_rule, triangle_rule, MonomialBasis, DATA_DEGREE, EDGE_DATA_POINTS};
use crate::vemcore::{edge_trace_matrix, DofLayout, DofVector};

use super::shapes::{
    barycentric_gradients, lagrange_1d, local_multi_indices, shape_gradient, shape_value,
};

/// Location of a mesh point relative to the polygon boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
enum PointClass {
    /// Polygon vertex `i`.
    Vertex(usize),
    /// On polygon edge `e` at parameter `t` in (0, 1), measured from vertex
    /// `e` toward vertex `e + 1`.
    Edge { e: usize, t: f64 },
    /// Strictly inside the polygon.
    Interior,
}

/// Location of a Lagrange node relative to the polygon boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    /// Coincides with polygon vertex `i`.
    PolygonVertex(usize),
    /// Lies on polygon edge `e` at parameter `t` in (0, 1), measured from
    /// vertex `e` toward vertex `e + 1`.
    PolygonEdge { e: usize, t: f64 },
    /// Strictly inside the polygon.
    Interior,
}

/// Polygon edges a point class lies on (a vertex lies on two, an edge point
/// on one, an interior point on none).
fn edges_of(class: PointClass, n_poly: usize) -> [Option<usize>; 2] {
    match class {
        PointClass::Vertex(i) => [Some((i + n_poly - 1) % n_poly), Some(i)],
        PointClass::Edge { e, .. } => [Some(e), None],
        PointClass::Interior => [None, None],
    }
}

fn common_edge(a: PointClass, b: PointClass, n_poly: usize) -> Option<usize> {
    let ea = edges_of(a, n_poly);
    edges_of(b, n_poly)
        .into_iter()
        .flatten()
        .find(|&e| ea.contains(&Some(e)))
}

/// Parameter of a point class on polygon edge `e` (the class must lie on it).
fn t_on_edge(class: PointClass, e: usize) -> f64 {
    match class {
        PointClass::Vertex(i) => {
            if i == e {
                0.0
            } else {
                1.0
            }
        }
        PointClass::Edge { t, .. } => t,
        PointClass::Interior => unreachable!("interior point has no edge parameter"),
    }
}

/// Splits every triangle into four through its edge midpoints, appending the
/// new points and their propagated classes.
fn refine_once(
    points: &mut Vec<Point>,
    classes: &mut Vec<PointClass>,
    triangles: &[[usize; 3]],
    n_poly: usize,
) -> Vec<[usize; 3]> {
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut out = Vec::with_capacity(4 * triangles.len());
    for &[a, b, c] in triangles {
        let mut mid = |u: usize, v: usize| -> usize {
            let key = (u.min(v), u.max(v));
            if let Some(&id) = midpoint.get(&key) {
                return id;
            }
            let p = [
                (points[u][0] + points[v][0]) / 2.0,
                (points[u][1] + points[v][1]) / 2.0,
            ];
            let class = match common_edge(classes[u], classes[v], n_poly) {
                Some(e) => PointClass::Edge {
                    e,
                    t: (t_on_edge(classes[u], e) + t_on_edge(classes[v], e)) / 2.0,
                },
                None => PointClass::Interior,
            };
            let id = points.len();
            points.push(p);
            classes.push(class);
            midpoint.insert(key, id);
            id
        };
        let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
        out.push([a, ab, ca]);
        out.push([ab, b, bc]);
        out.push([ca, bc, c]);
        out.push([ab, bc, ca]);
    }
    out
}

/// Shared-entity key of a Lagrange node, used for deduplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum NodeKey {
    /// The node at a mesh point.
    Point(usize),
    /// Node `q` (of `k - 1`) on the mesh edge `(lo, hi)`, counted from `lo`.
    Edge { lo: usize, hi: usize, q: usize },
    /// Interior node `slot` of triangle `t`.
    Cell { t: usize, slot: usize },
}

fn kind_of_point(class: PointClass) -> NodeKind {
    match class {
        PointClass::Vertex(i) => NodeKind::PolygonVertex(i),
        PointClass::Edge { e, t } => NodeKind::PolygonEdge { e, t },
        PointClass::Interior => NodeKind::Interior,
    }
}

/// A run of `k + 1` boundary Lagrange nodes on one refined triangle side
/// that lies on a polygon edge, equally spaced in the edge parameter.
#[derive(Debug, Clone)]
pub struct SubEdge {
    /// Node ids ordered from parameter `t0` to `t1`.
    pub nodes: Vec<usize>,
    pub t0: f64,
    pub t1: f64,
}

/// Lagrange finite element space of degree `k` on the `r`-times red-refined
/// virtual triangulation of one polygon.
#[derive(Debug, Clone)]
pub struct FeSpace {
    k: usize,
    r: usize,
    points: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    multis: Vec<[u32; 3]>,
    /// Lagrange node coordinates.
    nodes: Vec<Point>,
    node_kind: Vec<NodeKind>,
    /// Per triangle: node ids in local multi-index order.
    conn: Vec<Vec<usize>>,
    /// Node id at each polygon vertex.
    vertex_node: Vec<usize>,
    /// Per polygon edge: its boundary node runs, sorted by parameter.
    edge_subedges: Vec<Vec<SubEdge>>,
    /// Node ids on the polygon boundary, ascending.
    boundary: Vec<usize>,
    /// Node ids strictly inside, ascending.
    interior: Vec<usize>,
    stiffness: DMatrix<f64>,
    mass: DMatrix<f64>,
    base: VirtualTriangulation,
}

impl FeSpace {
    /// Builds the degree-`k` space (`k` in 1..=4) on `tri` refined `r` times
    /// (`r` in 0..=3).
    pub fn build(tri: &VirtualTriangulation, k: usize, r: usize) -> Result<Self> {
        if !(1..=4).contains(&k) {
            return Err(VemError::UnsupportedLayout(format!(
                "finite element degree k = {k} is outside 1..=4"
            )));
        }
        if r > 3 {
            return Err(VemError::InvalidSize(format!(
                "refinement depth r = {r} exceeds 3"
            )));
        }
        let n_poly = tri.n_polygon_vertices;
        let mut points = tri.points.clone();
        let mut classes: Vec<PointClass> = (0..points.len())
            .map(|i| {
                if i < n_poly {
                    PointClass::Vertex(i)
                } else {
                    PointClass::Interior
                }
            })
            .collect();
        let mut triangles = tri.triangles.clone();
        for _ in 0..r {
            triangles = refine_once(&mut points, &mut classes, &triangles, n_poly);
        }

        let multis = local_multi_indices(k);
        let mut node_ids: HashMap<NodeKey, usize> = HashMap::new();
        let mut nodes: Vec<Point> = Vec::new();
        let mut node_kind: Vec<NodeKind> = Vec::new();
        let mut conn = Vec::with_capacity(triangles.len());
        for (t, &[a, b, c]) in triangles.iter().enumerate() {
            let mut local = Vec::with_capacity(multis.len());
            for (slot, &multi) in multis.iter().enumerate() {
                let (key, kind) = node_identity(t, slot, [a, b, c], multi, k, &classes, n_poly);
                let id = *node_ids.entry(key).or_insert_with(|| {
                    let [i, j, m] = multi;
                    let p = [
                        (i as f64 * points[a][0]
                            + j as f64 * points[b][0]
                            + m as f64 * points[c][0])
                            / k as f64,
                        (i as f64 * points[a][1]
                            + j as f64 * points[b][1]
                            + m as f64 * points[c][1])
                            / k as f64,
                    ];
                    nodes.push(p);
                    node_kind.push(kind);
                    nodes.len() - 1
                });
                local.push(id);
            }
            conn.push(local);
        }

        let mut vertex_node = vec![usize::MAX; n_poly];
        let mut boundary = Vec::new();
        let mut interior = Vec::new();
        for (id, &kind) in node_kind.iter().enumerate() {
            match kind {
                NodeKind::PolygonVertex(i) => {
                    vertex_node[i] = id;
                    boundary.push(id);
                }
                NodeKind::PolygonEdge { .. } => boundary.push(id),
                NodeKind::Interior => interior.push(id),
            }
        }
        debug_assert!(vertex_node.iter().all(|&v| v != usize::MAX));

        let edge_subedges = collect_subedges(&triangles, &conn, &classes, &multis, k, n_poly, r);

        let (stiffness, mass) =
            assemble_forms(&points, &triangles, &conn, &multis, k, nodes.len())?;

        Ok(FeSpace {
            k,
            r,
            points,
            triangles,
            multis,
            nodes,
            node_kind,
            conn,
            vertex_node,
            edge_subedges,
            boundary,
            interior,
            stiffness,
            mass,
            base: tri.clone(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn refinement(&self) -> usize {
        self.r
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node_kinds(&self) -> &[NodeKind] {
        &self.node_kind
    }

    /// Node ids strictly inside the polygon, ascending.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    /// Node ids on the polygon boundary, ascending.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    /// Number of interior nodes; the moment constraints imposed on this
    /// space can be unisolvent only if this is at least their count.
    pub fn interior_capacity(&self) -> usize {
        self.interior.len()
    }

    pub fn vertex_node(&self, i: usize) -> usize {
        self.vertex_node[i]
    }

    /// Corner coordinates of refined triangle `t`.
    pub fn triangle_vertices(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.points[a], self.points[b], self.points[c]]
    }

    /// Node id at local slot `slot` (multi-index order) of triangle `t`.
    pub fn triangle_node(&self, t: usize, slot: usize) -> usize {
        self.conn[t][slot]
    }

    pub fn edge_subedges(&self, e: usize) -> &[SubEdge] {
        &self.edge_subedges[e]
    }

    /// Full stiffness matrix (gradient-gradient form) over all nodes.
    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// Full mass matrix over all nodes.
    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    /// The unrefined triangulation this space was built on.
    pub fn base(&self) -> &VirtualTriangulation {
        &self.base
    }

    /// Value and gradient of the function with nodal values `v` at the
    /// barycentric point `lambda` of refined triangle `t`.
    pub fn eval_with_gradient(
        &self,
        v: &DVector<f64>,
        t: usize,
        lambda: [f64; 3],
    ) -> (f64, [f64; 2]) {
        let [a, b, c] = self.triangles[t];
        let gl = barycentric_gradients(self.points[a], self.points[b], self.points[c]);
        let mut val = 0.0;
        let mut grad = [0.0, 0.0];
        for (slot, &idx) in self.multis.iter().enumerate() {
            let coeff = v[self.conn[t][slot]];
            if coeff == 0.0 {
                continue;
            }
            val += coeff * shape_value(idx, self.k, lambda);
            let g = shape_gradient(idx, self.k, lambda, gl);
            grad[0] += coeff * g[0];
            grad[1] += coeff * g[1];
        }
        (val, grad)
    }

    /// Integrates `f` over the polygon with rules of the given exactness
    /// degree on every refined triangle.
    pub fn integrate(&self, degree: usize, f: &dyn Fn(Point) -> f64) -> Result<f64> {
        let rule = triangle_rule(degree)?;
        let mut total = 0.0;
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangles[t];
            let (pa, pb, pc) = (self.points[a], self.points[b], self.points[c]);
            let two_area =
                (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]);
            for (lam, &w) in rule.points.iter().zip(rule.weights.iter()) {
                let p = [
                    lam[0] * pa[0] + lam[1] * pb[0] + lam[2] * pc[0],
                    lam[0] * pa[1] + lam[1] * pb[1] + lam[2] * pc[1],
                ];
                total += w * two_area * f(p);
            }
        }
        Ok(total)
    }

    /// L2 norm and H1 seminorm of the function with nodal values `v`,
    /// through the assembled mass and stiffness forms.
    pub fn norms(&self, v: &DVector<f64>) -> (f64, f64) {
        let l2 = (&self.mass * v).dot(v).max(0.0).sqrt();
        let h1 = (&self.stiffness * v).dot(v).max(0.0).sqrt();
        (l2, h1)
    }

    /// L2 and H1-seminorm distance between the function with nodal values
    /// `v` and a smooth reference.
    pub fn error_norms(
        &self,
        v: &DVector<f64>,
        u: &dyn Fn(Point) -> f64,
        grad_u: &dyn Fn(Point) -> [f64; 2],
    ) -> Result<(f64, f64)> {
        let rule = triangle_rule(DATA_DEGREE)?;
        let (mut l2, mut h1) = (0.0, 0.0);
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangles[t];
            let (pa, pb, pc) = (self.points[a], self.points[b], self.points[c]);
            let two_area =
                (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]);
            for (&lam, &w) in rule.points.iter().zip(rule.weights.iter()) {
                let p = [
                    lam[0] * pa[0] + lam[1] * pb[0] + lam[2] * pc[0],
                    lam[0] * pa[1] + lam[1] * pb[1] + lam[2] * pc[1],
                ];
                let wt = w * two_area;
                let (val, grad) = self.eval_with_gradient(v, t, lam);
                let dv = u(p) - val;
                let gu = grad_u(p);
                let (gx, gy) = (gu[0] - grad[0], gu[1] - grad[1]);
                l2 += wt * dv * dv;
                h1 += wt * (gx * gx + gy * gy);
            }
        }
        Ok((l2.sqrt(), h1.sqrt()))
    }

    /// Evaluates the element d.o.f. of the function with nodal values `v`,
    /// independently of how `v` was produced: vertex values by lookup, edge
    /// moments by Gauss integration of the one-dimensional Lagrange trace on
    /// every boundary node run, cell moments by triangle quadrature.
    pub fn evaluate_dofs(
        &self,
        layout: &DofLayout,
        geom: &PolygonGeometry,
        v: &DVector<f64>,
    ) -> Result<DofVector> {
        assert_eq!(layout.k(), self.k, "layout degree must match the space");
        assert_eq!(layout.n_vertices(), geom.vertices.len());
        let mut dofs = DVector::zeros(layout.n_dofs());
        for i in 0..layout.n_vertices() {
            dofs[layout.vertex_dof(i)] = v[self.vertex_node[i]];
        }
        if layout.moments_per_edge() > 0 {
            let rule = edge_rule(EDGE_DATA_POINTS);
            for e in 0..layout.n_vertices() {
                let reversed = layout.edge_is_reversed(e);
                for j in 0..layout.moments_per_edge() {
                    let mut moment = 0.0;
                    for sub in &self.edge_subedges[e] {
                        let mut acc = 0.0;
                        for (&tau, &w) in rule.points.iter().zip(rule.weights.iter()) {
                            let val: f64 = sub
                                .nodes
                                .iter()
                                .enumerate()
                                .map(|(q, &n)| v[n] * lagrange_1d(self.k, q, tau))
                                .sum();
                            let t = sub.t0 + (sub.t1 - sub.t0) * tau;
                            let xi = if reversed { 0.5 - t } else { t - 0.5 };
                            acc += w * val * xi.powi(j as i32);
                        }
                        moment += acc * (sub.t1 - sub.t0);
                    }
                    dofs[layout.edge_moment_dof(e, j)] = moment;
                }
            }
        }
        if layout.n_cell_dofs() > 0 {
            let basis = MonomialBasis::new(layout.l(), geom.centroid, geom.diameter);
            let rule = triangle_rule(2 * self.k)?;
            for t in 0..self.triangles.len() {
                let [a, b, c] = self.triangles[t];
                let (pa, pb, pc) = (self.points[a], self.points[b], self.points[c]);
                let two_area =
                    (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]);
                for (&lam, &w) in rule.points.iter().zip(rule.weights.iter()) {
                    let p = [
                        lam[0] * pa[0] + lam[1] * pb[0] + lam[2] * pc[0],
                        lam[0] * pa[1] + lam[1] * pb[1] + lam[2] * pc[1],
                    ];
                    let (val, _) = self.eval_with_gradient(v, t, lam);
                    for beta in 0..layout.n_cell_dofs() {
                        dofs[layout.cell_moment_dof(beta)] +=
                            w * two_area * val * basis.value(beta, p);
                    }
                }
            }
            for beta in 0..layout.n_cell_dofs() {
                dofs[layout.cell_moment_dof(beta)] /= geom.area;
            }
        }
        Ok(dofs)
    }

    /// Matrix expressing the boundary node values through the element
    /// d.o.f.: row `i` gives the value at the `i`-th entry of
    /// [`boundary_nodes`](Self::boundary_nodes) of the member function whose
    /// edge traces are the degree-`k` polynomials determined by the d.o.f.
    pub fn boundary_value_matrix(
        &self,
        layout: &DofLayout,
        geom: &PolygonGeometry,
    ) -> DMatrix<f64> {
        assert_eq!(layout.k(), self.k);
        let trace = edge_trace_matrix(self.k);
        let mut mat = DMatrix::zeros(self.boundary.len(), layout.n_dofs());
        for (row, &node) in self.boundary.iter().enumerate() {
            match self.node_kind[node] {
                NodeKind::PolygonVertex(i) => mat[(row, layout.vertex_dof(i))] = 1.0,
                NodeKind::PolygonEdge { e, t } => {
                    let frame = layout.edge_frame(geom, e);
                    let xi = if layout.edge_is_reversed(e) { 0.5 - t } else { t - 0.5 };
                    for (slot, dof) in frame.trace_dofs().enumerate() {
                        let mut val = 0.0;
                        for r_pow in 0..=self.k {
                            val += trace[(r_pow, slot)] * xi.powi(r_pow as i32);
                        }
                        mat[(row, dof)] += val;
                    }
                }
                NodeKind::Interior => unreachable!("interior node in boundary list"),
            }
        }
        mat
    }
}

/// Key and boundary kind of the Lagrange node with the given barycentric
/// multi-index on triangle `t` with mesh points `verts`.
fn node_identity(
    t: usize,
    slot: usize,
    verts: [usize; 3],
    multi: [u32; 3],
    k: usize,
    classes: &[PointClass],
    n_poly: usize,
) -> (NodeKey, NodeKind) {
    let k32 = k as u32;
    let [i, j, m] = multi;
    let [a, b, c] = verts;
    if i == k32 {
        return (NodeKey::Point(a), kind_of_point(classes[a]));
    }
    if j == k32 {
        return (NodeKey::Point(b), kind_of_point(classes[b]));
    }
    if m == k32 {
        return (NodeKey::Point(c), kind_of_point(classes[c]));
    }
    // Nodes with exactly one vanishing barycentric coordinate sit on a mesh
    // edge, `q` lattice steps from its first endpoint.
    let on_edge = if m == 0 {
        Some((a, b, j as usize))
    } else if i == 0 {
        Some((b, c, m as usize))
    } else if j == 0 {
        Some((a, c, m as usize))
    } else {
        None
    };
    match on_edge {
        Some((u, v, q)) => {
            let key = if u < v {
                NodeKey::Edge { lo: u, hi: v, q }
            } else {
                NodeKey::Edge { lo: v, hi: u, q: k - q }
            };
            let kind = match common_edge(classes[u], classes[v], n_poly) {
                Some(e) => {
                    let tu = t_on_edge(classes[u], e);
                    let tv = t_on_edge(classes[v], e);
                    NodeKind::PolygonEdge {
                        e,
                        t: tu + (tv - tu) * q as f64 / k as f64,
                    }
                }
                None => NodeKind::Interior,
            };
            (key, kind)
        }
        None => (NodeKey::Cell { t, slot }, NodeKind::Interior),
    }
}

/// Gathers, per polygon edge, the runs of boundary nodes lying on it.
fn collect_subedges(
    triangles: &[[usize; 3]],
    conn: &[Vec<usize>],
    classes: &[PointClass],
    multis: &[[u32; 3]],
    k: usize,
    n_poly: usize,
    r: usize,
) -> Vec<Vec<SubEdge>> {
    // Local slots of the three triangle sides, ordered from the side's first
    // vertex: side (a, b) holds the multi-indices with m = 0, and so on.
    let slot_of: HashMap<[u32; 3], usize> = multis
        .iter()
        .enumerate()
        .map(|(slot, &mi)| (mi, slot))
        .collect();
    let k32 = k as u32;
    let side_slots = |side: usize| -> Vec<usize> {
        (0..=k32)
            .map(|q| {
                let multi = match side {
                    0 => [k32 - q, q, 0],
                    1 => [0, k32 - q, q],
                    _ => [k32 - q, 0, q],
                };
                slot_of[&multi]
            })
            .collect()
    };
    let sides: [Vec<usize>; 3] = [side_slots(0), side_slots(1), side_slots(2)];

    let mut out = vec![Vec::new(); n_poly];
    for (t, &[a, b, c]) in triangles.iter().enumerate() {
        for (side, &(u, v)) in [(a, b), (b, c), (a, c)].iter().enumerate() {
            let Some(e) = common_edge(classes[u], classes[v], n_poly) else {
                continue;
            };
            let tu = t_on_edge(classes[u], e);
            let tv = t_on_edge(classes[v], e);
            let mut nodes: Vec<usize> =
                sides[side].iter().map(|&slot| conn[t][slot]).collect();
            let (t0, t1) = if tu < tv {
                (tu, tv)
            } else {
                nodes.reverse();
                (tv, tu)
            };
            out[e].push(SubEdge { nodes, t0, t1 });
        }
    }
    for subs in &mut out {
        subs.sort_by(|x, y| x.t0.partial_cmp(&y.t0).unwrap());
        debug_assert_eq!(subs.len(), 1 << r, "each polygon edge splits dyadically");
    }
    out
}

/// Assembles the dense stiffness and mass matrices over all Lagrange nodes.
fn assemble_forms(
    points: &[Point],
    triangles: &[[usize; 3]],
    conn: &[Vec<usize>],
    multis: &[[u32; 3]],
    k: usize,
    n_nodes: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let rule = triangle_rule(2 * k)?;
    let nloc = multis.len();
    // Shape values at the rule points do not depend on the triangle.
    let vals_at: Vec<Vec<f64>> = rule
        .points
        .iter()
        .map(|&lam| multis.iter().map(|&mi| shape_value(mi, k, lam)).collect())
        .collect();
    let mut stiffness = DMatrix::zeros(n_nodes, n_nodes);
    let mut mass = DMatrix::zeros(n_nodes, n_nodes);
    let mut local_a = DMatrix::zeros(nloc, nloc);
    let mut local_m = DMatrix::zeros(nloc, nloc);
    let mut grads = vec![[0.0; 2]; nloc];
    for (t, &[a, b, c]) in triangles.iter().enumerate() {
        let (pa, pb, pc) = (points[a], points[b], points[c]);
        let two_area = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]);
        let gl = barycentric_gradients(pa, pb, pc);
        local_a.fill(0.0);
        local_m.fill(0.0);
        for (qp, (&lam, &w)) in rule.points.iter().zip(rule.weights.iter()).enumerate() {
            let wt = w * two_area;
            for (slot, &mi) in multis.iter().enumerate() {
                grads[slot] = shape_gradient(mi, k, lam, gl);
            }
            let vals = &vals_at[qp];
            for i in 0..nloc {
                for j in 0..=i {
                    local_a[(i, j)] +=
                        wt * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                    local_m[(i, j)] += wt * vals[i] * vals[j];
                }
            }
        }
        for i in 0..nloc {
            let gi = conn[t][i];
            for j in 0..=i {
                let gj = conn[t][j];
                stiffness[(gi, gj)] += local_a[(i, j)];
                mass[(gi, gj)] += local_m[(i, j)];
                if i != j {
                    stiffness[(gj, gi)] += local_a[(i, j)];
                    mass[(gj, gi)] += local_m[(i, j)];
                }
            }
        }
    }
    Ok((stiffness, mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{polygon_geometry, triangulate_polygon, QualityConfig};
    use crate::vemcore::evaluate_dofs;

    fn space_for(
        loop_: &[Point],
        k: usize,
        r: usize,
    ) -> (PolygonGeometry, VirtualTriangulation, FeSpace) {
        let geom = polygon_geometry(loop_).unwrap();
        let tri = triangulate_polygon(&geom, &QualityConfig::default()).unwrap();
        let space = FeSpace::build(&tri, k, r).unwrap();
        (geom, tri, space)
    }

    const UNIT_SQUARE: [Point; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

    #[test]
    fn square_node_counts() {
        // Two triangles at r = 0: quadratic nodes are 4 corners + 4 edge
        // midpoints + 1 diagonal midpoint.
        let (_, _, space) = space_for(&UNIT_SQUARE, 2, 0);
        assert_eq!(space.n_nodes(), 9);
        assert_eq!(space.boundary_nodes().len(), 8);
        assert_eq!(space.interior_nodes().len(), 1);
        let inner = space.interior_nodes()[0];
        assert_eq!(space.node_kinds()[inner], NodeKind::Interior);
        let n_mid = space.nodes()[inner];
        // The only interior quadratic node is the diagonal midpoint.
        assert!((n_mid[0] - 0.5).abs() < 1e-15 && (n_mid[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn refinement_counts_and_area() {
        let (geom, _, space) = space_for(&UNIT_SQUARE, 1, 2);
        // 4x4 grid of squares cut by diagonals: 25 linear nodes, 16 boundary.
        assert_eq!(space.n_triangles(), 32);
        assert_eq!(space.n_nodes(), 25);
        assert_eq!(space.boundary_nodes().len(), 16);
        assert_eq!(space.interior_capacity(), 9);
        let area = space.integrate(1, &|_| 1.0).unwrap();
        assert!((area - geom.area).abs() < 1e-13);
    }

    #[test]
    fn triangle_interior_capacity_by_refinement() {
        let tri_loop: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for (r, expected) in [(0, 0), (1, 0), (2, 3)] {
            let (_, _, space) = space_for(&tri_loop, 1, r);
            assert_eq!(space.interior_capacity(), expected, "r = {r}");
        }
    }

    #[test]
    fn linear_stiffness_on_reference_triangle() {
        let (_, _, space) = space_for(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 1, 0);
        let a = space.stiffness();
        let oracle = [
            [1.0, -0.5, -0.5],
            [-0.5, 0.5, 0.0],
            [-0.5, 0.0, 0.5],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[(i, j)] - oracle[i][j]).abs() < 1e-14, "({i},{j})");
            }
        }
        let m = space.mass();
        // P1 mass matrix of a triangle: area/12 * (1 + delta_ij).
        for i in 0..3 {
            for j in 0..3 {
                let expect = 0.5 / 12.0 * if i == j { 2.0 } else { 1.0 };
                assert!((m[(i, j)] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        // Nodal interpolation of a degree-k polynomial is exact; any node
        // misidentification across triangles would break this.
        let pentagon: Vec<Point> = (0..5)
            .map(|i| {
                let ang = std::f64::consts::PI / 2.0 + 2.0 * std::f64::consts::PI * i as f64 / 5.0;
                [ang.cos(), ang.sin()]
            })
            .collect();
        for (k, r) in [(1, 1), (2, 1), (3, 2), (4, 1)] {
            let (_, _, space) = space_for(&pentagon, k, r);
            let kf = k as f64;
            let u = |p: Point| (p[0] + 0.3 * p[1]).powi(k as i32) + 0.7 * p[1];
            let gu = move |p: Point| {
                [
                    kf * (p[0] + 0.3 * p[1]).powi(k as i32 - 1),
                    0.3 * kf * (p[0] + 0.3 * p[1]).powi(k as i32 - 1) + 0.7,
                ]
            };
            let v = DVector::from_fn(space.n_nodes(), |n, _| u(space.nodes()[n]));
            let (el2, eh1) = space.error_norms(&v, &u, &gu).unwrap();
            assert!(el2 < 1e-12, "k={k}, r={r}: L2 {el2}");
            assert!(eh1 < 1e-11, "k={k}, r={r}: H1 {eh1}");
        }
    }

    #[test]
    fn subedge_runs_tile_each_edge() {
        let (_, _, space) = space_for(&UNIT_SQUARE, 3, 2);
        for e in 0..4 {
            let subs = space.edge_subedges(e);
            assert_eq!(subs.len(), 4);
            let mut t = 0.0;
            for sub in subs {
                assert!((sub.t0 - t).abs() < 1e-15);
                assert_eq!(sub.nodes.len(), 4);
                t = sub.t1;
            }
            assert!((t - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dof_evaluation_matches_direct_integration() {
        // For a polynomial of degree k the nodal interpolant is the
        // polynomial itself, so its d.o.f. must equal those of the smooth
        // function, including reversed-edge parameterizations.
        let (geom, tri, space) = space_for(&UNIT_SQUARE, 3, 1);
        let u = |p: Point| {
            p[0] * p[0] * p[0] - 3.0 * p[0] * p[1] * p[1] + 0.5 * p[0] * p[1] + 0.25
        };
        let v = DVector::from_fn(space.n_nodes(), |n, _| u(space.nodes()[n]));
        for reversed in [vec![false; 4], vec![true, false, true, true]] {
            let layout = DofLayout::with_orientation(3, 1, reversed).unwrap();
            let direct = evaluate_dofs(&layout, &geom, &tri, u).unwrap();
            let from_fe = space.evaluate_dofs(&layout, &geom, &v).unwrap();
            let err = (&direct - &from_fe).amax();
            assert!(err < 1e-12, "max d.o.f. discrepancy {err}");
        }
    }

    #[test]
    fn boundary_matrix_reproduces_polynomial_traces() {
        let (geom, tri, space) = space_for(&UNIT_SQUARE, 2, 1);
        let layout = DofLayout::new(2, 0, 4).unwrap();
        let u = |p: Point| p[0] * p[0] - p[0] * p[1] + 2.0 * p[1] - 0.5;
        let chi = evaluate_dofs(&layout, &geom, &tri, u).unwrap();
        let mat = space.boundary_value_matrix(&layout, &geom);
        let values = mat * chi;
        for (row, &node) in space.boundary_nodes().iter().enumerate() {
            let expect = u(space.nodes()[node]);
            assert!(
                (values[row] - expect).abs() < 1e-12,
                "node {node}: {} vs {expect}",
                values[row]
            );
        }
    }
}
