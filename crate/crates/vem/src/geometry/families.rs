//! Built-in mesh families on the unit square.

use super::{Point, PolygonMesh};
use crate::error::{Result, VemError};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Structured mesh families on the unit square `(0,1)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFamily {
    /// n x n axis-aligned squares.
    Squares,
    /// The square grid with every interior vertex displaced by a smooth,
    /// boundary-vanishing perturbation of amplitude 0.1/n.
    DistortedQuads,
    /// Each grid square split into two triangles along the same diagonal.
    Triangles,
    /// Each 2x2 block of a 2n x 2n sub-square grid becomes one L-shaped
    /// hexagon (three sub-squares) and one square, giving non-convex cells.
    Ltromino,
}

impl std::str::FromStr for MeshFamily {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squares" => Ok(MeshFamily::Squares),
            "distorted_quads" => Ok(MeshFamily::DistortedQuads),
            "triangles" => Ok(MeshFamily::Triangles),
            "ltromino" => Ok(MeshFamily::Ltromino),
            other => Err(VemError::ParseError(format!(
                "unknown mesh family '{other}' (expected squares, distorted_quads, triangles, or ltromino)"
            ))),
        }
    }
}

impl std::fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MeshFamily::Squares => "squares",
            MeshFamily::DistortedQuads => "distorted_quads",
            MeshFamily::Triangles => "triangles",
            MeshFamily::Ltromino => "ltromino",
        };
        f.write_str(s)
    }
}

/// Builds the `n`-th member of a mesh family. `n` must be at least 1 (and
/// at most 1024 to keep accidental huge inputs from exhausting memory).
pub fn make_mesh_family(family: MeshFamily, n: usize) -> Result<PolygonMesh> {
    if n == 0 || n > 1024 {
        return Err(VemError::InvalidSize(format!(
            "family size n = {n} out of range 1..=1024"
        )));
    }
    match family {
        MeshFamily::Squares => grid_mesh(n, false),
        MeshFamily::DistortedQuads => grid_mesh(n, true),
        MeshFamily::Triangles => triangle_mesh(n),
        MeshFamily::Ltromino => ltromino_mesh(n),
    }
}

fn grid_vertices(n: usize, distorted: bool) -> Vec<Point> {
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    let amp = 0.1 / n as f64;
    for j in 0..=n {
        for i in 0..=n {
            let x = i as f64 / n as f64;
            let y = j as f64 / n as f64;
            if distorted {
                // Vanishes on the boundary, so the domain stays the unit square.
                let bump = amp * (PI * x).sin() * (PI * y).sin();
                vertices.push([x + bump, y + bump]);
            } else {
                vertices.push([x, y]);
            }
        }
    }
    vertices
}

fn grid_mesh(n: usize, distorted: bool) -> Result<PolygonMesh> {
    let vertices = grid_vertices(n, distorted);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PolygonMesh::new(vertices, cells)
}

fn triangle_mesh(n: usize) -> Result<PolygonMesh> {
    let vertices = grid_vertices(n, false);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PolygonMesh::new(vertices, cells)
}

/// L-tromino + square tiling. The orientation of the L alternates in a
/// checkerboard pattern so that block interfaces match edge-to-edge: a block
/// side covered by one full L edge always faces a neighboring block side
/// that is also one full edge, and split sides face split sides.
fn ltromino_mesh(n: usize) -> Result<PolygonMesh> {
    let s = 1.0 / (2.0 * n as f64);
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let vid = |index: &mut HashMap<(usize, usize), usize>,
                   vertices: &mut Vec<Point>,
                   ix: usize,
                   iy: usize| {
        *index.entry((ix, iy)).or_insert_with(|| {
            vertices.push([ix as f64 * s, iy as f64 * s]);
            vertices.len() - 1
        })
    };
    let mut cells = Vec::with_capacity(2 * n * n);
    for bj in 0..n {
        for bi in 0..n {
            let (x, y) = (2 * bi, 2 * bj);
            type Loop = Vec<(usize, usize)>;
            let (l_loop, sq_loop): (Loop, Loop) =
                if (bi + bj) % 2 == 0 {
                    // L covers the block minus its top-right sub-square.
                    (
                        vec![
                            (x, y),
                            (x + 2, y),
                            (x + 2, y + 1),
                            (x + 1, y + 1),
                            (x + 1, y + 2),
                            (x, y + 2),
                        ],
                        vec![(x + 1, y + 1), (x + 2, y + 1), (x + 2, y + 2), (x + 1, y + 2)],
                    )
                } else {
                    // L covers the block minus its bottom-left sub-square.
                    (
                        vec![
                            (x + 1, y),
                            (x + 2, y),
                            (x + 2, y + 2),
                            (x, y + 2),
                            (x, y + 1),
                            (x + 1, y + 1),
                        ],
                        vec![(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)],
                    )
                };
            cells.push(
                l_loop
                    .into_iter()
                    .map(|(ix, iy)| vid(&mut index, &mut vertices, ix, iy))
                    .collect(),
            );
            cells.push(
                sq_loop
                    .into_iter()
                    .map(|(ix, iy)| vid(&mut index, &mut vertices, ix, iy))
                    .collect(),
            );
        }
    }
    PolygonMesh::new(vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::signed_area;

    #[test]
    fn squares_counts() {
        let mesh = make_mesh_family(MeshFamily::Squares, 2).unwrap();
        assert_eq!(mesh.n_cells(), 4);
        assert_eq!(mesh.n_vertices(), 9);
    }

    #[test]
    fn rejects_zero_size() {
        assert!(matches!(
            make_mesh_family(MeshFamily::Squares, 0),
            Err(VemError::InvalidSize(_))
        ));
    }

    #[test]
    fn ltromino_n1_has_l_and_square() {
        let mesh = make_mesh_family(MeshFamily::Ltromino, 1).unwrap();
        assert_eq!(mesh.n_cells(), 2);
        let g0 = mesh.cell_geometry(0).unwrap();
        let g1 = mesh.cell_geometry(1).unwrap();
        assert_eq!(g0.vertices.len(), 6);
        assert!((g0.area - 0.75).abs() < 1e-15);
        assert_eq!(g1.vertices.len(), 4);
        assert!((g1.area - 0.25).abs() < 1e-15);
    }

    #[test]
    fn families_cover_unit_square() {
        for family in [
            MeshFamily::Squares,
            MeshFamily::DistortedQuads,
            MeshFamily::Triangles,
            MeshFamily::Ltromino,
        ] {
            for n in [1usize, 2, 3] {
                let mesh = make_mesh_family(family, n).unwrap();
                let total: f64 = (0..mesh.n_cells())
                    .map(|i| mesh.cell_geometry(i).unwrap().area)
                    .sum();
                assert!(
                    (total - 1.0).abs() < 1e-12,
                    "{family} n={n}: total area {total}"
                );
            }
        }
    }

    #[test]
    fn ltromino_is_conforming_for_larger_n() {
        // PolygonMesh::new rejects hanging nodes, so construction succeeding
        // is the conformity check; also verify the boundary is the square.
        for n in [2usize, 3, 4] {
            let mesh = make_mesh_family(MeshFamily::Ltromino, n).unwrap();
            assert_eq!(mesh.n_cells(), 2 * n * n);
            let perimeter: f64 = mesh
                .boundary_edges()
                .iter()
                .map(|&(a, b)| crate::geometry::dist(mesh.vertices()[a], mesh.vertices()[b]))
                .sum();
            assert!((perimeter - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn distorted_quads_stay_positive() {
        let mesh = make_mesh_family(MeshFamily::DistortedQuads, 4).unwrap();
        for cell in mesh.cells() {
            let loop_: Vec<Point> = cell.iter().map(|&v| mesh.vertices()[v]).collect();
            assert!(signed_area(&loop_) > 0.0);
        }
    }
}
