//! Auxiliary triangulation of a single polygonal cell.
//!
//! Every cell gets a triangulation whose triangles span the cell exactly and
//! in which each polygon edge is a full side of exactly one triangle; extra
//! points are only ever inserted strictly inside the cell. The triangulation
//! is used for quadrature and as the substrate of the finite element
//! realization, so its quality is reported but a poor cell never aborts the
//! computation.

#[cfg(test)]
use super::polygon_geometry;
use super::{add, cross, dist, dot, norm, scale, sub, Point, PolygonGeometry};
use crate::error::{Result, VemError};
use std::collections::HashMap;

/// Quality target for cell triangulations.
#[derive(Debug, Clone, Copy)]
pub struct QualityConfig {
    /// Minimum triangle angle to aim for, in degrees. Interior points are
    /// inserted until every angle exceeds this or the insertion budget
    /// (twice the polygon vertex count) is exhausted.
    pub min_angle_deg: f64,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig { min_angle_deg: 15.0 }
    }
}

/// Triangulation of one polygon: the polygon vertices first, then any
/// inserted interior points.
#[derive(Debug, Clone)]
pub struct VirtualTriangulation {
    /// Polygon vertices followed by inserted interior points.
    pub points: Vec<Point>,
    /// Number of polygon vertices at the start of `points`.
    pub n_polygon_vertices: usize,
    /// Triangles as counterclockwise index triples into `points`.
    pub triangles: Vec<[usize; 3]>,
}

impl VirtualTriangulation {
    /// Coordinates of triangle `t`.
    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.points[a], self.points[b], self.points[c]]
    }

    /// Sum of triangle areas.
    pub fn total_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| triangle_area(self.points[a], self.points[b], self.points[c]))
            .sum()
    }

    /// Smallest triangle angle in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                min_angle(self.points[a], self.points[b], self.points[c]).to_degrees()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Shape quality summary of a cell triangulation.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    /// Worst triangle diameter/inradius ratio.
    pub kappa_max: f64,
    /// Smallest triangle angle, degrees.
    pub theta_min_deg: f64,
    /// Largest over smallest triangle diameter.
    pub sigma: f64,
    /// Number of triangles.
    pub n_triangles: usize,
    /// Largest triangle inradius divided by the cell diameter: a computable
    /// lower-bound proxy for the radius of the biggest disk the cell is
    /// star-shaped with respect to.
    pub c1_star_radius_ratio: f64,
    /// Smallest pairwise polygon vertex distance divided by the cell
    /// diameter.
    pub c2_min_edge_ratio: f64,
}

impl RegularityReport {
    /// Whether the triangulation misses the quality target.
    pub fn flagged(&self, cfg: &QualityConfig) -> bool {
        self.theta_min_deg < cfg.min_angle_deg - 1e-9
    }
}

fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * cross(sub(b, a), sub(c, a))
}

/// Interior angle at `b` of the triangle `(a, b, c)`, radians.
fn angle_at(a: Point, b: Point, c: Point) -> f64 {
    let u = sub(a, b);
    let v = sub(c, b);
    let c_ = dot(u, v) / (norm(u) * norm(v));
    c_.clamp(-1.0, 1.0).acos()
}

fn min_angle(a: Point, b: Point, c: Point) -> f64 {
    angle_at(c, a, b).min(angle_at(a, b, c)).min(angle_at(b, c, a))
}

fn circumcenter(a: Point, b: Point, c: Point) -> Option<Point> {
    let bp = sub(b, a);
    let cp = sub(c, a);
    let d = 2.0 * cross(bp, cp);
    if d.abs() < 1e-300 {
        return None;
    }
    let b2 = dot(bp, bp);
    let c2 = dot(cp, cp);
    let ux = (c2 * bp[1] - b2 * cp[1]) / -d;
    let uy = (b2 * cp[0] - c2 * bp[0]) / -d;
    Some(add(a, [ux, uy]))
}

/// Angle comparisons treat values within this band as ties so that the
/// deterministic index-based tie-break is stable under uniform scaling of
/// the coordinates.
const ANGLE_TIE: f64 = 1e-12;

/// Triangulates a simple polygon.
///
/// Ear clipping picks, among the valid ears, the one whose triangle has the
/// largest minimum angle (ties go to the lowest ear vertex index). Interior
/// edges are then flipped while a flip improves the local minimum angle.
/// If the smallest angle still misses `cfg.min_angle_deg`, interior points
/// are inserted (circumcenter of the worst triangle when it lies strictly
/// inside the cell, otherwise that triangle's centroid) up to a budget of
/// twice the vertex count. The quality target is best-effort: the function
/// only fails if the polygon cannot be ear-clipped at all.
pub fn triangulate_polygon(
    geom: &PolygonGeometry,
    cfg: &QualityConfig,
) -> Result<VirtualTriangulation> {
    let n = geom.vertices.len();
    let mut points = geom.vertices.clone();
    let mut triangles = ear_clip(&points, geom.diameter)?;
    flip_pass(&points, &mut triangles, n);

    let target = cfg.min_angle_deg.to_radians();
    let budget = 2 * n;
    let mut inserted = 0;
    while inserted < budget {
        let (worst, worst_angle) = worst_triangle(&points, &triangles);
        if worst_angle >= target {
            break;
        }
        let [a, b, c] = triangles[worst];
        let (pa, pb, pc) = (points[a], points[b], points[c]);
        let candidate = circumcenter(pa, pb, pc);
        // Insert the circumcenter if it falls strictly inside some triangle;
        // otherwise clamp to the interior by using the worst triangle's
        // centroid.
        let mut placed = false;
        if let Some(p) = candidate {
            if let Some(t) = containing_triangle(&points, &triangles, p, geom.diameter) {
                split_triangle(&mut points, &mut triangles, t, p);
                placed = true;
            }
        }
        if !placed {
            let centroid = scale(1.0 / 3.0, add(add(pa, pb), pc));
            if containing_triangle(&points, &triangles, centroid, geom.diameter) == Some(worst) {
                split_triangle(&mut points, &mut triangles, worst, centroid);
            } else {
                // The worst triangle is too degenerate even for its own
                // centroid; further insertion cannot help.
                break;
            }
        }
        inserted += 1;
        flip_pass(&points, &mut triangles, n);
    }

    let tri = VirtualTriangulation {
        points,
        n_polygon_vertices: n,
        triangles,
    };
    debug_assert!((tri.total_area() - geom.area).abs() <= 1e-12 * geom.area.max(1.0));
    Ok(tri)
}

/// Ear clipping with max-min-angle ear selection.
fn ear_clip(points: &[Point], diameter: f64) -> Result<Vec<[usize; 3]>> {
    let n = points.len();
    let eps_area = 1e-14 * diameter * diameter;
    let mut active: Vec<usize> = (0..n).collect();
    let mut triangles = Vec::with_capacity(n - 2);
    while active.len() > 3 {
        let m = active.len();
        let mut best: Option<(f64, usize, usize)> = None; // (angle, tip index, position)
        for pos in 0..m {
            let ip = active[(pos + m - 1) % m];
            let it = active[pos];
            let in_ = active[(pos + 1) % m];
            let (a, b, c) = (points[ip], points[it], points[in_]);
            if triangle_area(a, b, c) <= eps_area {
                continue; // reflex or straight tip
            }
            // Any other active vertex inside the closed ear triangle blocks
            // the ear. A vertex exactly on the diagonal must block too:
            // clipping across it would pinch the remaining polygon into a
            // degenerate chain (e.g. a reflex corner collinear with the
            // diagonal).
            let mut blocked = false;
            for &w in &active {
                if w == ip || w == it || w == in_ {
                    continue;
                }
                let p = points[w];
                let s1 = cross(sub(b, a), sub(p, a));
                let s2 = cross(sub(c, b), sub(p, b));
                let s3 = cross(sub(a, c), sub(p, c));
                if s1 >= -eps_area && s2 >= -eps_area && s3 >= -eps_area {
                    blocked = true;
                    break;
                }
            }
            if blocked {
                continue;
            }
            let ang = min_angle(a, b, c);
            let better = match best {
                None => true,
                Some((ba, bt, _)) => {
                    ang > ba + ANGLE_TIE || ((ang - ba).abs() <= ANGLE_TIE && it < bt)
                }
            };
            if better {
                best = Some((ang, it, pos));
            }
        }
        match best {
            Some((_, _, pos)) => {
                let ip = active[(pos + m - 1) % m];
                let it = active[pos];
                let in_ = active[(pos + 1) % m];
                triangles.push([ip, it, in_]);
                active.remove(pos);
            }
            None => {
                return Err(VemError::TriangulationFailed(
                    "no ear found (polygon is not simple or is degenerate)".into(),
                ))
            }
        }
    }
    let [a, b, c] = [active[0], active[1], active[2]];
    if triangle_area(points[a], points[b], points[c]) <= eps_area {
        return Err(VemError::TriangulationFailed(
            "final triangle is degenerate".into(),
        ));
    }
    triangles.push([a, b, c]);
    Ok(triangles)
}

fn worst_triangle(points: &[Point], triangles: &[[usize; 3]]) -> (usize, f64) {
    let mut worst = 0;
    let mut worst_angle = f64::INFINITY;
    for (t, &[a, b, c]) in triangles.iter().enumerate() {
        let ang = min_angle(points[a], points[b], points[c]);
        if ang < worst_angle - ANGLE_TIE {
            worst = t;
            worst_angle = ang;
        }
    }
    (worst, worst_angle)
}

fn containing_triangle(
    points: &[Point],
    triangles: &[[usize; 3]],
    p: Point,
    diameter: f64,
) -> Option<usize> {
    let eps_area = 1e-12 * diameter * diameter;
    for (t, &[a, b, c]) in triangles.iter().enumerate() {
        let (pa, pb, pc) = (points[a], points[b], points[c]);
        let s1 = cross(sub(pb, pa), sub(p, pa));
        let s2 = cross(sub(pc, pb), sub(p, pb));
        let s3 = cross(sub(pa, pc), sub(p, pc));
        if s1 > eps_area && s2 > eps_area && s3 > eps_area {
            return Some(t);
        }
    }
    None
}

fn split_triangle(
    points: &mut Vec<Point>,
    triangles: &mut Vec<[usize; 3]>,
    t: usize,
    p: Point,
) {
    let id = points.len();
    points.push(p);
    let [a, b, c] = triangles[t];
    triangles[t] = [a, b, id];
    triangles.push([b, c, id]);
    triangles.push([c, a, id]);
}

/// Flips interior edges while a flip improves the smaller of the two
/// adjacent minimum angles. Edges between the first `n_polygon` points that
/// lie on the polygon boundary are never touched because boundary edges
/// belong to exactly one triangle.
fn flip_pass(points: &[Point], triangles: &mut [[usize; 3]], _n_polygon: usize) {
    let cap = 20 * triangles.len().max(4) * triangles.len().max(4);
    let mut steps = 0;
    loop {
        let mut adjacency: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (t, &tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let a = tri[i];
                let b = tri[(i + 1) % 3];
                let opp = tri[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                adjacency.entry(key).or_default().push((t, opp));
            }
        }
        let mut keys: Vec<(usize, usize)> = adjacency
            .iter()
            .filter(|(_, v)| v.len() == 2)
            .map(|(k, _)| *k)
            .collect();
        keys.sort_unstable();

        let mut flipped = false;
        for key in keys {
            let pair = &adjacency[&key];
            let ((t1, o1), (t2, o2)) = (pair[0], pair[1]);
            let (a, b) = key;
            let (pa, pb, p1, p2) = (points[a], points[b], points[o1], points[o2]);
            // Flip is only valid if the quad (a, o1, b, o2) is strictly convex,
            // i.e. both new triangles have positive area.
            let new1 = triangle_area(p1, p2, pb);
            let new2 = triangle_area(p2, p1, pa);
            let scale2 = dist(pa, pb).powi(2);
            if new1 <= 1e-14 * scale2 || new2 <= 1e-14 * scale2 {
                continue;
            }
            let current = min_angle(pa, pb, p1).min(min_angle(pb, pa, p2));
            let proposed = min_angle(p1, p2, pb).min(min_angle(p2, p1, pa));
            if proposed > current + ANGLE_TIE {
                triangles[t1] = [o1, o2, b];
                triangles[t2] = [o2, o1, a];
                flipped = true;
                break;
            }
        }
        steps += 1;
        if !flipped || steps > cap {
            break;
        }
    }
}

/// Quality metrics of a cell triangulation.
pub fn regularity_report(
    tri: &VirtualTriangulation,
    geom: &PolygonGeometry,
) -> RegularityReport {
    let mut kappa_max: f64 = 0.0;
    let mut theta_min = f64::INFINITY;
    let mut diam_min = f64::INFINITY;
    let mut diam_max: f64 = 0.0;
    let mut inradius_max: f64 = 0.0;
    for &[a, b, c] in &tri.triangles {
        let (pa, pb, pc) = (tri.points[a], tri.points[b], tri.points[c]);
        let la = dist(pb, pc);
        let lb = dist(pa, pc);
        let lc = dist(pa, pb);
        let diam = la.max(lb).max(lc);
        let semi = 0.5 * (la + lb + lc);
        let area = triangle_area(pa, pb, pc);
        let inradius = area / semi;
        kappa_max = kappa_max.max(diam / inradius);
        theta_min = theta_min.min(min_angle(pa, pb, pc));
        diam_min = diam_min.min(diam);
        diam_max = diam_max.max(diam);
        inradius_max = inradius_max.max(inradius);
    }
    let n = geom.vertices.len();
    let mut min_vertex_dist = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            min_vertex_dist = min_vertex_dist.min(dist(geom.vertices[i], geom.vertices[j]));
        }
    }
    RegularityReport {
        kappa_max,
        theta_min_deg: theta_min.to_degrees(),
        sigma: diam_max / diam_min,
        n_triangles: tri.triangles.len(),
        c1_star_radius_ratio: inradius_max / geom.diameter,
        c2_min_edge_ratio: min_vertex_dist / geom.diameter,
    }
}
