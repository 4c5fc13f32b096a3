//! Global assembly and solution of the Poisson problem with Dirichlet
//! boundary conditions on a conforming polygonal mesh.
//!
//! Degrees of freedom are shared across elements by a fixed global
//! convention: every edge moment is taken in the parameterization that runs
//! from the edge's lower-numbered vertex to its higher-numbered one, so the
//! two elements sharing an edge agree on the meaning of each moment without
//! any transformation. Element matrices are built per cell with the matching
//! edge orientations and scattered into a sparse global system.

mod sparse;

pub use sparse::{cg_solve, CsrMatrix};

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Result, VemError};
use crate::geometry::{
    triangulate_polygon, Point, PolygonGeometry, PolygonMesh, QualityConfig, VirtualTriangulation,
};
use crate::poly::{integrate_edge, integrate_polygon, poly_dim, Poly2, EDGE_DATA_POINTS};
use crate::vemcore::{
    element_load, element_stiffness, evaluate_dofs, DofLayout, LoadKind, ProjectorPack,
    StabilizationKind,
};

/// Relative residual target for the conjugate gradient solve.
const CG_TOLERANCE: f64 = 1e-10;
/// Iteration cap; generous because the systems are only Jacobi-preconditioned.
const CG_MAX_ITERATIONS: usize = 50_000;

/// A scalar field given as data (right-hand side, boundary values, ...).
pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
/// A planar vector field (gradients of exact solutions).
pub type VectorField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

/// A known exact solution, used for error reporting only.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarField,
    pub grad_u: VectorField,
}

/// The Poisson problem `-Δu = f` with Dirichlet data `g` on the boundary.
#[derive(Clone)]
pub struct Problem {
    pub f: ScalarField,
    pub dirichlet: ScalarField,
    pub exact: Option<ExactSolution>,
}

impl Problem {
    pub fn new(
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        dirichlet: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Problem {
            f: Arc::new(f),
            dirichlet: Arc::new(dirichlet),
            exact: None,
        }
    }

    pub fn with_exact(
        mut self,
        u: impl Fn(Point) -> f64 + Send + Sync + 'static,
        grad_u: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        self.exact = Some(ExactSolution {
            u: Arc::new(u),
            grad_u: Arc::new(grad_u),
        });
        self
    }

    /// The classical smooth benchmark `u = sin(pi x) sin(pi y)`, with
    /// `f = 2 pi^2 u` and boundary data taken from `u` itself (zero on the
    /// unit square).
    pub fn sinsin() -> Self {
        use std::f64::consts::PI;
        let u = |p: Point| (PI * p[0]).sin() * (PI * p[1]).sin();
        Problem::new(move |p| 2.0 * PI * PI * u(p), u).with_exact(u, move |p| {
            [
                PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
                PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
            ]
        })
    }

    /// Manufactured problem whose exact solution is the polynomial `p`:
    /// `f = -Δp` and the boundary data is `p` itself.
    pub fn from_polynomial(p: &Poly2) -> Self {
        let lap = p.laplacian();
        let u = p.clone();
        let grad = p.clone();
        let bnd = p.clone();
        Problem::new(move |x| -lap.eval(x), move |x| bnd.eval(x))
            .with_exact(move |x| u.eval(x), move |x| grad.eval_gradient(x))
    }
}

/// Global numbering of the degrees of freedom on a mesh: all vertex values
/// first, then `k - 1` moments per undirected edge (edges numbered by sorted
/// endpoint pair), then `dim P_l` cell moments per cell.
#[derive(Debug, Clone)]
pub struct DofMap {
    k: usize,
    l: i32,
    n_vertices: usize,
    n_cells: usize,
    edge_ids: BTreeMap<(usize, usize), usize>,
}

impl DofMap {
    pub fn new(mesh: &PolygonMesh, k: usize, l: i32) -> Result<Self> {
        // Validate the (k, l) pair once, against a dummy element.
        DofLayout::new(k, l, 3)?;
        let mut edge_ids = BTreeMap::new();
        for cell in mesh.cells() {
            for (i, &a) in cell.iter().enumerate() {
                let b = cell[(i + 1) % cell.len()];
                edge_ids.insert((a.min(b), a.max(b)), 0);
            }
        }
        for (next, (_, id)) in edge_ids.iter_mut().enumerate() {
            *id = next;
        }
        Ok(DofMap {
            k,
            l,
            n_vertices: mesh.n_vertices(),
            n_cells: mesh.n_cells(),
            edge_ids,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> i32 {
        self.l
    }

    pub fn n_edges(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn moments_per_edge(&self) -> usize {
        self.k - 1
    }

    pub fn moments_per_cell(&self) -> usize {
        poly_dim(self.l)
    }

    pub fn n_dofs(&self) -> usize {
        self.n_vertices
            + self.n_edges() * self.moments_per_edge()
            + self.n_cells * self.moments_per_cell()
    }

    pub fn vertex_dof(&self, v: usize) -> usize {
        v
    }

    /// Index of the undirected edge `{a, b}`.
    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_ids.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn edge_moment_dof(&self, edge: usize, j: usize) -> usize {
        debug_assert!(j < self.moments_per_edge());
        self.n_vertices + edge * self.moments_per_edge() + j
    }

    pub fn cell_moment_dof(&self, cell: usize, beta: usize) -> usize {
        debug_assert!(beta < self.moments_per_cell());
        self.n_vertices
            + self.n_edges() * self.moments_per_edge()
            + cell * self.moments_per_cell()
            + beta
    }

    /// Element layout for cell `c`, with each edge frame oriented from the
    /// lower-numbered global vertex so local moments equal global moments.
    pub fn cell_layout(&self, mesh: &PolygonMesh, c: usize) -> Result<DofLayout> {
        let cell = &mesh.cells()[c];
        let reversed = (0..cell.len())
            .map(|i| cell[i] > cell[(i + 1) % cell.len()])
            .collect();
        DofLayout::with_orientation(self.k, self.l, reversed)
    }

    /// Global indices of cell `c`'s degrees of freedom, in the element's
    /// local order (vertex values, edge moments, cell moments).
    pub fn cell_global_dofs(&self, mesh: &PolygonMesh, c: usize) -> Vec<usize> {
        let cell = &mesh.cells()[c];
        let n = cell.len();
        let mut dofs = Vec::with_capacity(n * self.k + self.moments_per_cell());
        for &v in cell {
            dofs.push(self.vertex_dof(v));
        }
        for i in 0..n {
            let edge = self
                .edge_id(cell[i], cell[(i + 1) % n])
                .expect("cell edge is present in the map");
            for j in 0..self.moments_per_edge() {
                dofs.push(self.edge_moment_dof(edge, j));
            }
        }
        for beta in 0..self.moments_per_cell() {
            dofs.push(self.cell_moment_dof(c, beta));
        }
        dofs
    }
}

/// Per-element operators kept after assembly: the geometry, its quadrature
/// triangulation, and the projector pack (for error evaluation and tests).
pub struct ElementOps {
    pub geom: PolygonGeometry,
    pub tri: VirtualTriangulation,
    pub pack: ProjectorPack,
}

/// The assembled global system together with everything needed to reduce it,
/// solve it, and evaluate errors afterwards.
pub struct GlobalSystem {
    mesh: PolygonMesh,
    dof_map: DofMap,
    matrix: CsrMatrix,
    rhs: DVector<f64>,
    elements: Vec<ElementOps>,
    cell_dofs: Vec<Vec<usize>>,
}

fn cell_context(cell: usize, err: VemError) -> VemError {
    VemError::ValidationError(format!("cell {cell}: {err}"))
}

/// Assembles the stiffness matrix and load vector of the Poisson problem on
/// `mesh` with the element space of degree `k` and cell-moment degree `l`.
pub fn assemble(
    mesh: &PolygonMesh,
    k: usize,
    l: i32,
    stab: StabilizationKind,
    load: LoadKind,
    problem: &Problem,
) -> Result<GlobalSystem> {
    let dof_map = DofMap::new(mesh, k, l)?;
    let n = dof_map.n_dofs();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs = DVector::zeros(n);
    let mut elements = Vec::with_capacity(mesh.n_cells());
    let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
    for c in 0..mesh.n_cells() {
        let geom = mesh.cell_geometry(c).map_err(|e| cell_context(c, e))?;
        let tri = triangulate_polygon(&geom, &QualityConfig::default())
            .map_err(|e| cell_context(c, e))?;
        let layout = dof_map.cell_layout(mesh, c)?;
        let pack = ProjectorPack::build(layout, &geom, &tri).map_err(|e| cell_context(c, e))?;
        let a = element_stiffness(&pack, stab);
        let b = element_load(&pack, &tri, |p| (problem.f)(p), load)
            .map_err(|e| cell_context(c, e))?;
        let dofs = dof_map.cell_global_dofs(mesh, c);
        debug_assert_eq!(dofs.len(), a.nrows());
        for (i, &gi) in dofs.iter().enumerate() {
            rhs[gi] += b[i];
            for (j, &gj) in dofs.iter().enumerate() {
                let v = a[(i, j)];
                if v != 0.0 {
                    triplets.push((gi, gj, v));
                }
            }
        }
        elements.push(ElementOps { geom, tri, pack });
        cell_dofs.push(dofs);
    }
    let matrix = CsrMatrix::from_triplets(n, &mut triplets);
    Ok(GlobalSystem {
        mesh: mesh.clone(),
        dof_map,
        matrix,
        rhs,
        elements,
        cell_dofs,
    })
}

impl GlobalSystem {
    pub fn mesh(&self) -> &PolygonMesh {
        &self.mesh
    }

    pub fn dof_map(&self) -> &DofMap {
        &self.dof_map
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn elements(&self) -> &[ElementOps] {
        &self.elements
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c]
    }

    /// Global indices of all degrees of freedom fixed by the Dirichlet
    /// condition: boundary vertex values and boundary edge moments.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        let mut fixed = Vec::new();
        for v in self.mesh.boundary_vertices() {
            fixed.push(self.dof_map.vertex_dof(v));
        }
        for &(a, b) in self.mesh.boundary_edges() {
            let edge = self
                .dof_map
                .edge_id(a, b)
                .expect("boundary edge is present in the map");
            for j in 0..self.dof_map.moments_per_edge() {
                fixed.push(self.dof_map.edge_moment_dof(edge, j));
            }
        }
        fixed.sort_unstable();
        fixed.dedup();
        fixed
    }

    /// Eliminates the Dirichlet degrees of freedom. Boundary vertex values
    /// are point evaluations of `g`; boundary edge moments are the moments of
    /// `g` in the global edge parameterization.
    pub fn apply_dirichlet(&self, problem: &Problem) -> ReducedSystem {
        let n = self.dof_map.n_dofs();
        let g = &problem.dirichlet;
        let mut values = DVector::zeros(n);
        let mut is_fixed = vec![false; n];
        for v in self.mesh.boundary_vertices() {
            let dof = self.dof_map.vertex_dof(v);
            values[dof] = g(self.mesh.vertices()[v]);
            is_fixed[dof] = true;
        }
        for &(a, b) in self.mesh.boundary_edges() {
            let edge = self.dof_map.edge_id(a, b).expect("boundary edge mapped");
            let (lo, hi) = (a.min(b), a.max(b));
            let p_lo = self.mesh.vertices()[lo];
            let p_hi = self.mesh.vertices()[hi];
            let length =
                ((p_hi[0] - p_lo[0]).powi(2) + (p_hi[1] - p_lo[1]).powi(2)).sqrt();
            for j in 0..self.dof_map.moments_per_edge() {
                let moment = integrate_edge(p_lo, p_hi, EDGE_DATA_POINTS, |p, s| {
                    g(p) * (s / length - 0.5).powi(j as i32)
                }) / length;
                let dof = self.dof_map.edge_moment_dof(edge, j);
                values[dof] = moment;
                is_fixed[dof] = true;
            }
        }
        let free: Vec<usize> = (0..n).filter(|&i| !is_fixed[i]).collect();
        let mut free_index = vec![usize::MAX; n];
        for (fi, &dof) in free.iter().enumerate() {
            free_index[dof] = fi;
        }
        let mut triplets = Vec::new();
        let mut rhs = DVector::zeros(free.len());
        for (fi, &dof) in free.iter().enumerate() {
            rhs[fi] = self.rhs[dof];
            for (c, v) in self.matrix.row(dof) {
                if is_fixed[c] {
                    rhs[fi] -= v * values[c];
                } else {
                    triplets.push((fi, free_index[c], v));
                }
            }
        }
        ReducedSystem {
            matrix: CsrMatrix::from_triplets(free.len(), &mut triplets),
            rhs,
            free,
            values,
        }
    }
}

/// The linear system restricted to the free (interior) degrees of freedom,
/// with the fixed boundary values stored for reassembling the full solution.
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: DVector<f64>,
    /// Global indices of the free degrees of freedom, ascending.
    pub free: Vec<usize>,
    /// Full-length vector holding the fixed boundary values (zero elsewhere).
    pub values: DVector<f64>,
}

impl ReducedSystem {
    /// Solves for the free unknowns and returns the full d.o.f. vector.
    pub fn solve(&self) -> Result<DVector<f64>> {
        let x = cg_solve(&self.matrix, &self.rhs, CG_TOLERANCE, CG_MAX_ITERATIONS)?;
        let mut full = self.values.clone();
        for (fi, &dof) in self.free.iter().enumerate() {
            full[dof] = x[fi];
        }
        Ok(full)
    }
}

/// A solved problem: the assembled system plus the full d.o.f. vector.
pub struct Solution {
    pub system: GlobalSystem,
    pub u: DVector<f64>,
}

/// Assembles and solves the Poisson problem. The standard space of degree
/// `k` uses cell moments up to degree `l = k - 2`.
pub fn solve_poisson(
    mesh: &PolygonMesh,
    k: usize,
    l: i32,
    stab: StabilizationKind,
    load: LoadKind,
    problem: &Problem,
) -> Result<Solution> {
    let system = assemble(mesh, k, l, stab, load, problem)?;
    let u = system.apply_dirichlet(problem).solve()?;
    Ok(Solution { system, u })
}

/// L2 and H1(seminorm) errors of a discrete solution against an exact one.
#[derive(Debug, Clone, Copy)]
pub struct SolutionError {
    pub l2: f64,
    pub h1: f64,
}

/// Measures `u_exact - Pi u_h` element by element, where `Pi` is each
/// element's elliptic projection onto polynomials: the computable part of
/// the discrete solution. Quadrature of exactness degree `2k + 2`.
pub fn error_norms(system: &GlobalSystem, u: &DVector<f64>, problem: &Problem) -> Result<SolutionError> {
    let exact = problem.exact.as_ref().ok_or_else(|| {
        VemError::MissingExact("error norms need a problem with a known solution".into())
    })?;
    let degree = 2 * system.dof_map.k() + 2;
    let mut l2_sq = 0.0;
    let mut h1_sq = 0.0;
    for (c, ops) in system.elements.iter().enumerate() {
        let dofs = system.cell_dofs(c);
        let local = DVector::from_fn(dofs.len(), |i, _| u[dofs[i]]);
        let coeffs = &ops.pack.pi_star * &local;
        let basis = ops.pack.basis();
        l2_sq += integrate_polygon(&ops.tri, degree, |p| {
            let d = (exact.u)(p) - basis.eval(&coeffs, p);
            d * d
        })?;
        h1_sq += integrate_polygon(&ops.tri, degree, |p| {
            let ge = (exact.grad_u)(p);
            let gh = basis.eval_gradient(&coeffs, p);
            (ge[0] - gh[0]).powi(2) + (ge[1] - gh[1]).powi(2)
        })?;
    }
    Ok(SolutionError {
        l2: l2_sq.sqrt(),
        h1: h1_sq.sqrt(),
    })
}

/// The global d.o.f. vector of a smooth function: every vertex value, edge
/// moment, and cell moment of `f`, shared across elements.
pub fn interpolate_dofs(system: &GlobalSystem, f: impl Fn(Point) -> f64) -> Result<DVector<f64>> {
    let mut global = DVector::zeros(system.dof_map.n_dofs());
    for (c, ops) in system.elements.iter().enumerate() {
        let local = evaluate_dofs(ops.pack.layout(), &ops.geom, &ops.tri, &f)
            .map_err(|e| cell_context(c, e))?;
        for (i, &dof) in system.cell_dofs(c).iter().enumerate() {
            global[dof] = local[i];
        }
    }
    Ok(global)
}
