//! `vemlab`: command-line front end for the polygonal virtual element
//! solver and its verification laboratory.
//!
//! Subcommands: `check` (mesh quality report), `solve` (Poisson solve with
//! d.o.f. export), `patch` (polynomial reproduction gate), `converge`
//! (smooth-solution rate study), `constants` (inequality-constant
//! measurements), and `interp` (single-element interpolation rates).
//! Everything numeric is written with a fixed 17-significant-digit float
//! format, so repeated runs are byte-identical.

mod expr;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vem::geometry::{
    load_mesh, make_mesh_family, regularity_report, triangulate_polygon, MeshFamily,
    PolygonMesh, QualityConfig, RegularityReport,
};
use vem::lab::{
    builtin_shape, constant_estimate, constants_csv, convergence_csv, convergence_study,
    format_float, interpolation_study, patch_test, shape_label, solution_csv,
    ConstantQuantity, ConvergenceReport, ShapeKind, PATCH_TOLERANCE,
};
use vem::realization::InterpolantKind;
use vem::solver::{error_norms, solve_poisson, Problem};
use vem::vemcore::{LoadKind, StabilizationKind};
use vem::{Result, VemError};

#[derive(Parser)]
#[command(
    name = "vemlab",
    version,
    about = "Polygonal virtual element solver for the Poisson problem, \
             with mesh checks and verification studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a mesh file and report cell-quality metrics.
    Check {
        /// Mesh JSON file (vertices + counterclockwise cell loops).
        #[arg(long)]
        mesh: PathBuf,
        /// Smallest acceptable triangle angle in the cell triangulations,
        /// in degrees; cells whose triangulation misses it are flagged.
        #[arg(long, default_value_t = 15.0)]
        min_angle: f64,
        /// Emit the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Solve a Poisson problem on a mesh and export the solution vector.
    Solve {
        /// Mesh JSON file.
        #[arg(long)]
        mesh: PathBuf,
        /// Polynomial degree of the method.
        #[arg(long)]
        degree: usize,
        /// Discrete space: `vk` pairs the elliptic-projector load with the
        /// full d.o.f. stabilization, `wk` pairs the moment load with the
        /// boundary stabilization.
        #[arg(long, value_enum, default_value_t = SpaceArg::Vk)]
        space: SpaceArg,
        /// Stabilization override (defaults follow --space).
        #[arg(long, value_enum)]
        stab: Option<StabArg>,
        /// `sinsin` (the smooth benchmark) or `poly:EXPR` with a polynomial
        /// in x and y, e.g. `poly:x^2 - x*y + 0.5`.
        #[arg(long)]
        problem: String,
        /// Output CSV path (`dof_id,value` rows).
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduce a degree-k polynomial exactly on a built-in mesh family;
    /// exits nonzero if the worst free-d.o.f. error exceeds 1e-8.
    Patch {
        /// Mesh family: squares, distorted_quads, triangles, or ltromino.
        #[arg(long, value_parser = parse_family)]
        family: MeshFamily,
        /// Family size parameter (n x n blocks).
        #[arg(long)]
        n: usize,
        /// Polynomial degree of the method.
        #[arg(long)]
        degree: usize,
    },
    /// Solve the smooth benchmark on refined family meshes and report
    /// errors and fitted convergence rates.
    Converge {
        /// Mesh family: squares, distorted_quads, triangles, or ltromino.
        #[arg(long, value_parser = parse_family)]
        family: MeshFamily,
        /// Polynomial degree of the method.
        #[arg(long)]
        degree: usize,
        /// Number of refinement levels (n = 4, 8, 16, ...), at least 3.
        #[arg(long)]
        levels: usize,
        /// Output CSV path (`level,h,ndof,errL2,errH1,rateL2,rateH1`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure one inequality constant on a built-in shape.
    Constants {
        /// Shape: triangle, square, pentagon, l_hexagon, or thin_rectangle.
        #[arg(long, value_parser = parse_shape)]
        shape: ShapeKind,
        /// Polynomial degree of the space.
        #[arg(long)]
        degree: usize,
        /// Quantity: inverse, norm_equiv, norm_equiv_w, stab_pi_nabla,
        /// stab_pi_zero, poincare, poly_inverse, poly_norm_equiv,
        /// qk_l2_stability, or pi_nabla_l2_stability.
        #[arg(long, value_parser = parse_quantity)]
        quantity: ConstantQuantity,
        /// Refinement depth of the element realization.
        #[arg(long, default_value_t = 2)]
        refine: usize,
        /// Aspect ratio (>= 1); only the thin rectangle uses it.
        #[arg(long, default_value_t = 1.0)]
        aspect: f64,
        /// Output CSV path
        /// (`quantity,shape,k,l,r,lambda_min,lambda_max,constant`).
        #[arg(long)]
        out: PathBuf,
    },
    /// Interpolate the smooth benchmark on shrinking copies of one shape
    /// and report the interpolation errors and fitted rates.
    Interp {
        /// Shape: triangle, square, pentagon, l_hexagon, or thin_rectangle.
        #[arg(long, value_parser = parse_shape)]
        shape: ShapeKind,
        /// Polynomial degree of the space.
        #[arg(long)]
        degree: usize,
        /// Which interpolant to measure.
        #[arg(long, value_enum)]
        which: WhichArg,
        /// Number of halving levels, at least 3.
        #[arg(long)]
        levels: usize,
        /// Output CSV path (`level,h,ndof,errL2,errH1,rateL2,rateH1`).
        #[arg(long)]
        out: PathBuf,
    },
}

/// Which discrete space the solve uses, fixing the default load and
/// stabilization pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    /// Plain space: elliptic-projector load, full d.o.f. stabilization.
    Vk,
    /// Constrained space: moment load, boundary d.o.f. stabilization.
    Wk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StabArg {
    /// Full d.o.f. inner product on the elliptic-projection complement.
    Dof,
    /// Boundary d.o.f. inner product on the L2-projection complement.
    Boundary,
}

impl StabArg {
    fn kind(self) -> StabilizationKind {
        match self {
            StabArg::Dof => StabilizationKind::DofFull,
            StabArg::Boundary => StabilizationKind::DofBoundary,
        }
    }
}

/// Interpolant names accepted by `interp --which`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichArg {
    /// L2-orthogonal polynomial projection.
    #[value(name = "v_pi")]
    VPi,
    /// Nodal interpolant on the cell triangulation.
    #[value(name = "v_c")]
    VC,
    /// Trace-preserving lift matching the projected Laplacian.
    #[value(name = "v_I")]
    VI,
    /// D.o.f. interpolant into the plain space.
    #[value(name = "I_K")]
    IK,
    /// D.o.f. interpolant into the constrained space.
    #[value(name = "I_K_W")]
    Ikw,
}

impl WhichArg {
    fn kind(self) -> InterpolantKind {
        match self {
            WhichArg::VPi => InterpolantKind::PolyProjection,
            WhichArg::VC => InterpolantKind::Nodal,
            WhichArg::VI => InterpolantKind::PdeMatched,
            WhichArg::IK => InterpolantKind::DofMember,
            WhichArg::Ikw => InterpolantKind::DofMemberConstrained,
        }
    }
}

fn parse_family(s: &str) -> std::result::Result<MeshFamily, String> {
    s.parse().map_err(|e: VemError| e.to_string())
}

fn parse_shape(s: &str) -> std::result::Result<ShapeKind, String> {
    s.parse().map_err(|e: VemError| e.to_string())
}

fn parse_quantity(s: &str) -> std::result::Result<ConstantQuantity, String> {
    s.parse().map_err(|e: VemError| e.to_string())
}

fn parse_problem(s: &str) -> Result<Problem> {
    if s == "sinsin" {
        return Ok(Problem::sinsin());
    }
    if let Some(src) = s.strip_prefix("poly:") {
        return Ok(Problem::from_polynomial(&expr::parse_poly(src)?));
    }
    Err(VemError::ParseError(format!(
        "unknown problem '{s}' (expected 'sinsin' or 'poly:EXPR')"
    )))
}

fn stab_name(kind: StabilizationKind) -> &'static str {
    match kind {
        StabilizationKind::DofFull => "dof",
        StabilizationKind::DofBoundary => "boundary",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Check { mesh, min_angle, json } => run_check(&mesh, min_angle, json),
        Command::Solve { mesh, degree, space, stab, problem, out } => {
            run_solve(&mesh, degree, space, stab, &problem, &out)
        }
        Command::Patch { family, n, degree } => run_patch(family, n, degree),
        Command::Converge { family, degree, levels, out } => {
            run_converge(family, degree, levels, &out)
        }
        Command::Constants { shape, degree, quantity, refine, aspect, out } => {
            run_constants(shape, degree, quantity, refine, aspect, &out)
        }
        Command::Interp { shape, degree, which, levels, out } => {
            run_interp(shape, degree, which, levels, &out)
        }
    }
}

fn run_check(path: &Path, min_angle: f64, json: bool) -> Result<ExitCode> {
    let mesh = load_mesh(path)?;
    let cfg = QualityConfig { min_angle_deg: min_angle };
    let mut reports: Vec<RegularityReport> = Vec::with_capacity(mesh.n_cells());
    let mut flagged: Vec<usize> = Vec::new();
    for c in 0..mesh.n_cells() {
        let geom = mesh.cell_geometry(c)?;
        let tri = triangulate_polygon(&geom, &cfg)?;
        let report = regularity_report(&tri, &geom);
        if report.flagged(&cfg) {
            flagged.push(c);
        }
        reports.push(report);
    }
    if json {
        println!("{}", check_json(&mesh, min_angle, &reports, &flagged));
    } else {
        print_check_text(&mesh, min_angle, &reports, &flagged);
    }
    Ok(ExitCode::SUCCESS)
}

fn check_json(
    mesh: &PolygonMesh,
    min_angle: f64,
    reports: &[RegularityReport],
    flagged: &[usize],
) -> String {
    let cells: Vec<serde_json::Value> = reports
        .iter()
        .enumerate()
        .map(|(c, r)| {
            serde_json::json!({
                "cell": c,
                "n_triangles": r.n_triangles,
                "theta_min_deg": r.theta_min_deg,
                "kappa_max": r.kappa_max,
                "sigma": r.sigma,
                "c1_star_radius_ratio": r.c1_star_radius_ratio,
                "c2_min_edge_ratio": r.c2_min_edge_ratio,
            })
        })
        .collect();
    let value = serde_json::json!({
        "mesh": {
            "n_vertices": mesh.n_vertices(),
            "n_cells": mesh.n_cells(),
            "mesh_size": mesh.mesh_size(),
        },
        "quality": {
            "min_angle_target_deg": min_angle,
            "theta_min_deg": fold_min(reports.iter().map(|r| r.theta_min_deg)),
            "kappa_max": fold_max(reports.iter().map(|r| r.kappa_max)),
            "sigma_max": fold_max(reports.iter().map(|r| r.sigma)),
            "c1_star_radius_ratio_min": fold_min(reports.iter().map(|r| r.c1_star_radius_ratio)),
            "c2_min_edge_ratio_min": fold_min(reports.iter().map(|r| r.c2_min_edge_ratio)),
            "n_triangles": reports.iter().map(|r| r.n_triangles).sum::<usize>(),
        },
        "flagged_cells": flagged,
        "cells": cells,
    });
    serde_json::to_string_pretty(&value).expect("report serializes")
}

fn print_check_text(
    mesh: &PolygonMesh,
    min_angle: f64,
    reports: &[RegularityReport],
    flagged: &[usize],
) {
    println!(
        "mesh: {} cells, {} vertices, h = {}",
        mesh.n_cells(),
        mesh.n_vertices(),
        format_float(mesh.mesh_size())
    );
    println!(
        "triangulation: {} triangles, smallest angle {} deg (target {})",
        reports.iter().map(|r| r.n_triangles).sum::<usize>(),
        format_float(fold_min(reports.iter().map(|r| r.theta_min_deg))),
        min_angle
    );
    println!(
        "worst diameter/inradius {} | worst triangle-size spread {}",
        format_float(fold_max(reports.iter().map(|r| r.kappa_max))),
        format_float(fold_max(reports.iter().map(|r| r.sigma)))
    );
    println!(
        "star radius ratio >= {} | vertex gap ratio >= {}",
        format_float(fold_min(reports.iter().map(|r| r.c1_star_radius_ratio))),
        format_float(fold_min(reports.iter().map(|r| r.c2_min_edge_ratio)))
    );
    if flagged.is_empty() {
        println!("flagged cells: none");
    } else {
        let list: Vec<String> = flagged.iter().map(|c| c.to_string()).collect();
        println!("flagged cells: {} ({})", flagged.len(), list.join(", "));
    }
}

fn fold_min(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::INFINITY, f64::min)
}

fn fold_max(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::NEG_INFINITY, f64::max)
}

fn run_solve(
    path: &Path,
    degree: usize,
    space: SpaceArg,
    stab: Option<StabArg>,
    problem_arg: &str,
    out: &Path,
) -> Result<ExitCode> {
    let mesh = load_mesh(path)?;
    let problem = parse_problem(problem_arg)?;
    let (load, default_stab) = match space {
        SpaceArg::Vk => (LoadKind::PiNabla, StabilizationKind::DofFull),
        SpaceArg::Wk => (LoadKind::Moments, StabilizationKind::DofBoundary),
    };
    let stab = stab.map(StabArg::kind).unwrap_or(default_stab);
    let solution = solve_poisson(&mesh, degree, degree as i32 - 2, stab, load, &problem)?;
    std::fs::write(out, solution_csv(solution.u.as_slice()))?;
    println!(
        "solved: degree {}, {} cells, {} d.o.f., stabilization {}",
        degree,
        mesh.n_cells(),
        solution.u.len(),
        stab_name(stab)
    );
    if problem.exact.is_some() {
        let err = error_norms(&solution.system, &solution.u, &problem)?;
        println!(
            "errors vs exact: L2 {}, H1 {}",
            format_float(err.l2),
            format_float(err.h1)
        );
    }
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn run_patch(family: MeshFamily, n: usize, degree: usize) -> Result<ExitCode> {
    let mesh = make_mesh_family(family, n)?;
    let mut worst = 0.0f64;
    for stab in [StabilizationKind::DofFull, StabilizationKind::DofBoundary] {
        let err = patch_test(&mesh, degree, degree as i32 - 2, stab)?;
        println!(
            "{} n={} degree {} stabilization {}: max free-d.o.f. error {}",
            family,
            n,
            degree,
            stab_name(stab),
            format_float(err)
        );
        worst = worst.max(err);
    }
    if worst > PATCH_TOLERANCE {
        println!("patch test FAILED (tolerance {})", format_float(PATCH_TOLERANCE));
        Ok(ExitCode::FAILURE)
    } else {
        println!("patch test passed (tolerance {})", format_float(PATCH_TOLERANCE));
        Ok(ExitCode::SUCCESS)
    }
}

fn print_fitted_rates(report: &ConvergenceReport) {
    match (report.fitted_l2, report.fitted_h1) {
        (Some(l2), Some(h1)) => println!(
            "fitted rates (last 3 levels): L2 {}, H1 {}",
            format_float(l2),
            format_float(h1)
        ),
        _ => println!("errors at the reproduction floor; rates reported as exact"),
    }
}

fn run_converge(family: MeshFamily, degree: usize, levels: usize, out: &Path) -> Result<ExitCode> {
    let report = convergence_study(
        family,
        degree,
        degree as i32 - 2,
        StabilizationKind::DofFull,
        LoadKind::PiNabla,
        levels,
        &Problem::sinsin(),
    )?;
    std::fs::write(out, convergence_csv(&report))?;
    print_fitted_rates(&report);
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn run_constants(
    shape: ShapeKind,
    degree: usize,
    quantity: ConstantQuantity,
    refine: usize,
    aspect: f64,
    out: &Path,
) -> Result<ExitCode> {
    let loop_ = builtin_shape(shape, aspect)?;
    let label = shape_label(shape, aspect);
    let estimate = constant_estimate(&loop_, &label, degree, degree as i32 - 2, refine, quantity)?;
    std::fs::write(out, constants_csv(std::slice::from_ref(&estimate)))?;
    println!(
        "{} on {} (k={}, r={}): constant {}, eigenvalue range [{}, {}]",
        quantity,
        label,
        degree,
        refine,
        format_float(estimate.constant),
        format_float(estimate.lambda_min),
        format_float(estimate.lambda_max)
    );
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn run_interp(
    shape: ShapeKind,
    degree: usize,
    which: WhichArg,
    levels: usize,
    out: &Path,
) -> Result<ExitCode> {
    let loop_ = builtin_shape(shape, 1.0)?;
    let problem = Problem::sinsin();
    let exact = problem.exact.as_ref().expect("the smooth benchmark carries its solution");
    let report = interpolation_study(
        &loop_,
        degree,
        which.kind(),
        &|p| (exact.u)(p),
        &|p| (exact.grad_u)(p),
        levels,
    )?;
    std::fs::write(out, convergence_csv(&report))?;
    print_fitted_rates(&report);
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}
