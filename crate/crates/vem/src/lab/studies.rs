//! Patch tests, h-convergence studies on the mesh families, and
//! interpolation studies on shrinking copies of a single element.

use crate::error::{Result, VemError};
use crate::geometry::{
    make_mesh_family, polygon_geometry, triangulate_polygon, MeshFamily, Point, PolygonMesh,
    QualityConfig,
};
use crate::poly::Poly2;
use crate::realization::{ElementInterpolator, FeSpace, InterpolantKind};
use crate::solver::{error_norms, interpolate_dofs, solve_poisson, Problem};
use crate::vemcore::{LoadKind, StabilizationKind};

/// Largest free-d.o.f. error a passing patch test may leave.
pub const PATCH_TOLERANCE: f64 = 1e-8;

/// Error level at or below which a quantity counts as exactly reproduced;
/// adjacent-level rates are then reported as exact instead of as numbers,
/// since the errors sit at the solver tolerance floor.
pub const EXACT_FLOOR: f64 = 1e-8;

/// Fixed point about which interpolation studies shrink their element.
const ANCHOR: Point = [0.31415926, 0.27182818];

/// Manufactured polynomial of total degree `k` with a constant Laplacian,
/// mixing both variables and all orders up to `k`.
pub fn patch_polynomial(k: usize) -> Result<Poly2> {
    let mut p = Poly2::zero();
    match k {
        1 => {
            // 3x - y + 1/2
            p.add_term(1, 0, 3.0);
            p.add_term(0, 1, -1.0);
            p.add_term(0, 0, 0.5);
        }
        2 => {
            // x^2 - xy
            p.add_term(2, 0, 1.0);
            p.add_term(1, 1, -1.0);
        }
        3 => {
            // x^3 - 3xy^2 + x^2 - xy + 1/4
            p.add_term(3, 0, 1.0);
            p.add_term(1, 2, -3.0);
            p.add_term(2, 0, 1.0);
            p.add_term(1, 1, -1.0);
            p.add_term(0, 0, 0.25);
        }
        4 => {
            // x^4 - 6x^2y^2 + y^4 + x^2 + y^2
            p.add_term(4, 0, 1.0);
            p.add_term(2, 2, -6.0);
            p.add_term(0, 4, 1.0);
            p.add_term(2, 0, 1.0);
            p.add_term(0, 2, 1.0);
        }
        other => return Err(VemError::UnsupportedDegree(other)),
    }
    Ok(p)
}

/// Solves the problem whose exact solution is the degree-`k` patch
/// polynomial and returns the largest error over the free (non-Dirichlet)
/// degrees of freedom. Values at or below [`PATCH_TOLERANCE`] pass.
pub fn patch_test(
    mesh: &PolygonMesh,
    k: usize,
    l: i32,
    stab: StabilizationKind,
) -> Result<f64> {
    let poly = patch_polynomial(k)?;
    let problem = Problem::from_polynomial(&poly);
    let solution = solve_poisson(mesh, k, l, stab, LoadKind::PiNabla, &problem)?;
    let exact = interpolate_dofs(&solution.system, |p| poly.eval(p))?;
    let reduced = solution.system.apply_dirichlet(&problem);
    let mut worst = 0.0f64;
    for &dof in &reduced.free {
        worst = worst.max((solution.u[dof] - exact[dof]).abs());
    }
    Ok(worst)
}

/// One refinement level of a convergence or interpolation study.
#[derive(Debug, Clone)]
pub struct StudyRow {
    pub level: usize,
    /// Largest cell diameter (or the element diameter in an interpolation
    /// study).
    pub h: f64,
    pub n_dofs: usize,
    pub err_l2: f64,
    pub err_h1: f64,
}

/// A refinement history with rates fitted by least squares over the last
/// three levels. A fit is `None` when any of those errors sits at the
/// exactness floor, where measured rates stop meaning anything.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<StudyRow>,
    pub fitted_l2: Option<f64>,
    pub fitted_h1: Option<f64>,
}

impl ConvergenceReport {
    fn from_rows(rows: Vec<StudyRow>) -> Result<Self> {
        for pair in rows.windows(2) {
            if pair[1].h >= pair[0].h {
                return Err(VemError::InvalidSize(format!(
                    "mesh size must strictly decrease between levels, got {} then {}",
                    pair[0].h, pair[1].h
                )));
            }
        }
        let fitted_l2 = fitted_rate(&rows, |r| r.err_l2);
        let fitted_h1 = fitted_rate(&rows, |r| r.err_h1);
        Ok(ConvergenceReport {
            rows,
            fitted_l2,
            fitted_h1,
        })
    }
}

/// Least-squares slope of `ln err` against `ln h` over the last three rows.
fn fitted_rate(rows: &[StudyRow], err: impl Fn(&StudyRow) -> f64) -> Option<f64> {
    if rows.len() < 3 {
        return None;
    }
    let tail = &rows[rows.len() - 3..];
    if tail.iter().any(|r| err(r) <= EXACT_FLOOR) {
        return None;
    }
    let points: Vec<(f64, f64)> = tail.iter().map(|r| (r.h.ln(), err(r).ln())).collect();
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    Some(sxy / sxx)
}

/// Solves the problem on family meshes `n = 4, 8, 16, ...` (one per level,
/// at least 3 levels) and reports errors and fitted rates.
pub fn convergence_study(
    family: MeshFamily,
    k: usize,
    l: i32,
    stab: StabilizationKind,
    load: LoadKind,
    levels: usize,
    problem: &Problem,
) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(VemError::InvalidSize(format!(
            "a convergence study needs at least 3 levels, got {levels}"
        )));
    }
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let n = 4usize << level;
        let mesh = make_mesh_family(family, n)?;
        let solution = solve_poisson(&mesh, k, l, stab, load, problem)?;
        let err = error_norms(&solution.system, &solution.u, problem)?;
        rows.push(StudyRow {
            level,
            h: mesh.mesh_size(),
            n_dofs: solution.system.dof_map().n_dofs(),
            err_l2: err.l2,
            err_h1: err.h1,
        });
    }
    ConvergenceReport::from_rows(rows)
}

/// Interpolates `u` on shrinking copies of one polygon (scale `2^-level`
/// about a fixed anchor) and reports the errors of the chosen interpolant.
/// The realization runs at refinement depth 2.
///
/// Errors are reported per unit area (divided by the square root of the
/// element's area). The raw norms over a shrinking element pick up an extra
/// power of `h` from the domain itself; the normalization removes it, so
/// the fitted exponents are those of the per-element error estimates.
pub fn interpolation_study(
    loop_: &[Point],
    k: usize,
    kind: InterpolantKind,
    u: &dyn Fn(Point) -> f64,
    grad_u: &dyn Fn(Point) -> [f64; 2],
    levels: usize,
) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(VemError::InvalidSize(format!(
            "an interpolation study needs at least 3 levels, got {levels}"
        )));
    }
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let s = 0.5f64.powi(level as i32);
        let scaled: Vec<Point> = loop_
            .iter()
            .map(|v| {
                [
                    ANCHOR[0] + s * (v[0] - ANCHOR[0]),
                    ANCHOR[1] + s * (v[1] - ANCHOR[1]),
                ]
            })
            .collect();
        let geom = polygon_geometry(&scaled)?;
        let tri = triangulate_polygon(&geom, &QualityConfig::default())?;
        let space = FeSpace::build(&tri, k, 2)?;
        let interpolator = ElementInterpolator::new(&space, &geom)?;
        let interpolant = interpolator.interpolate(u, kind)?;
        let (err_l2, err_h1) = interpolator.error(&interpolant, u, grad_u)?;
        let unit = geom.area.sqrt();
        rows.push(StudyRow {
            level,
            h: geom.diameter,
            n_dofs: interpolator.layout().n_dofs(),
            err_l2: err_l2 / unit,
            err_h1: err_h1 / unit,
        });
    }
    ConvergenceReport::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{builtin_shape, ShapeKind};

    #[test]
    fn patch_polynomials_have_the_right_degree_and_constant_laplacian() {
        for k in 1..=4usize {
            let p = patch_polynomial(k).unwrap();
            assert_eq!(p.degree(), Some(k as u32));
            let lap = p.laplacian();
            assert!(
                lap.degree().is_none_or(|d| d == 0),
                "degree {k}: laplacian must be constant"
            );
        }
        assert!(patch_polynomial(5).is_err());
    }

    #[test]
    fn linear_patch_is_exact_on_distorted_quads() {
        let mesh = make_mesh_family(MeshFamily::DistortedQuads, 2).unwrap();
        let err = patch_test(&mesh, 1, -1, StabilizationKind::DofFull).unwrap();
        assert!(err <= PATCH_TOLERANCE, "patch error {err:.3e}");
    }

    #[test]
    fn cubic_patch_is_exact_on_nonconvex_cells_with_both_stabilizations() {
        let mesh = make_mesh_family(MeshFamily::Ltromino, 2).unwrap();
        for stab in [StabilizationKind::DofFull, StabilizationKind::DofBoundary] {
            let err = patch_test(&mesh, 3, 1, stab).unwrap();
            assert!(err <= PATCH_TOLERANCE, "{stab:?}: patch error {err:.3e}");
        }
    }

    #[test]
    fn smooth_study_rates_track_the_degree() {
        let problem = Problem::sinsin();
        let report = convergence_study(
            MeshFamily::Squares,
            1,
            -1,
            StabilizationKind::DofFull,
            LoadKind::PiNabla,
            3,
            &problem,
        )
        .unwrap();
        let l2 = report.fitted_l2.expect("errors above the floor");
        let h1 = report.fitted_h1.expect("errors above the floor");
        assert!((1.7..=2.3).contains(&l2), "L2 rate {l2}");
        assert!((0.8..=1.2).contains(&h1), "H1 rate {h1}");
        assert!(report.rows[0].h > report.rows[2].h);
    }

    #[test]
    fn polynomial_solutions_sit_at_the_exact_floor() {
        let poly = patch_polynomial(2).unwrap();
        let problem = Problem::from_polynomial(&poly);
        let report = convergence_study(
            MeshFamily::Squares,
            2,
            0,
            StabilizationKind::DofFull,
            LoadKind::PiNabla,
            3,
            &problem,
        )
        .unwrap();
        for row in &report.rows {
            assert!(row.err_l2 <= EXACT_FLOOR, "level {}: {:.3e}", row.level, row.err_l2);
            assert!(row.err_h1 <= EXACT_FLOOR, "level {}: {:.3e}", row.level, row.err_h1);
        }
        assert!(report.fitted_l2.is_none() && report.fitted_h1.is_none());
    }

    #[test]
    fn interpolation_errors_scale_with_the_diameter() {
        use std::f64::consts::PI;
        let u = |p: Point| (PI * p[0]).sin() * (PI * p[1]).sin();
        let grad = |p: Point| {
            [
                PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
                PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
            ]
        };
        let loop_ = builtin_shape(ShapeKind::Square, 1.0).unwrap();
        let report =
            interpolation_study(&loop_, 1, InterpolantKind::Nodal, &u, &grad, 4).unwrap();
        let l2 = report.fitted_l2.expect("smooth function is not reproduced");
        let h1 = report.fitted_h1.expect("smooth function is not reproduced");
        assert!((1.7..=2.3).contains(&l2), "L2 rate {l2}");
        assert!((0.8..=1.2).contains(&h1), "H1 rate {h1}");
        for pair in report.rows.windows(2) {
            assert!((pair[0].h / pair[1].h - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn every_interpolant_reproduces_polynomials_of_its_degree() {
        let poly = patch_polynomial(2).unwrap();
        let u = {
            let p = poly.clone();
            move |x: Point| p.eval(x)
        };
        let grad = {
            let p = poly;
            move |x: Point| p.eval_gradient(x)
        };
        let loop_ = builtin_shape(ShapeKind::Pentagon, 1.0).unwrap();
        for kind in InterpolantKind::ALL {
            let report = interpolation_study(&loop_, 2, kind, &u, &grad, 3).unwrap();
            for row in &report.rows {
                assert!(
                    row.err_l2 <= 1e-9,
                    "{}: level {} error {:.3e}",
                    kind.label(),
                    row.level,
                    row.err_l2
                );
            }
        }
    }

    #[test]
    fn too_few_levels_are_rejected() {
        let problem = Problem::sinsin();
        let err = convergence_study(
            MeshFamily::Squares,
            1,
            -1,
            StabilizationKind::DofFull,
            LoadKind::PiNabla,
            2,
            &problem,
        );
        assert!(matches!(err, Err(VemError::InvalidSize(_))));
    }
}
