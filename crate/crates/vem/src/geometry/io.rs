//! Mesh file I/O.
//!
//! Format: a JSON object `{"version": 1, "vertices": [[x, y], ...],
//! "cells": [[i0, i1, ...], ...]}`. The writer emits coordinates with 17
//! significant digits so that a save/load round trip reproduces every f64
//! bit-exactly.

use super::{Point, PolygonMesh};
use crate::error::{Result, VemError};
use serde::Deserialize;
use std::path::Path;

#[derive(Deserialize)]
struct MeshFile {
    version: u32,
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
}

/// Reads and validates a mesh file.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolygonMesh> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let file: MeshFile = serde_json::from_str(&text)
        .map_err(|e| VemError::ParseError(format!("{}: {e}", path.as_ref().display())))?;
    if file.version != 1 {
        return Err(VemError::ParseError(format!(
            "unsupported mesh file version {} (expected 1)",
            file.version
        )));
    }
    PolygonMesh::new(file.vertices, file.cells)
}

/// Writes a mesh file readable by [`load_mesh`].
pub fn save_mesh(mesh: &PolygonMesh, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    out.push_str("{\n  \"version\": 1,\n  \"vertices\": [\n");
    let nv = mesh.n_vertices();
    for (i, v) in mesh.vertices().iter().enumerate() {
        out.push_str(&format!(
            "    [{}, {}]{}\n",
            format_coord(v[0]),
            format_coord(v[1]),
            if i + 1 < nv { "," } else { "" }
        ));
    }
    out.push_str("  ],\n  \"cells\": [\n");
    let nc = mesh.n_cells();
    for (i, cell) in mesh.cells().iter().enumerate() {
        let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!(
            "    [{}]{}\n",
            ids.join(", "),
            if i + 1 < nc { "," } else { "" }
        ));
    }
    out.push_str("  ]\n}\n");
    std::fs::write(path.as_ref(), out)?;
    Ok(())
}

/// 17 significant digits: enough to round-trip any f64 exactly.
fn format_coord(x: f64) -> String {
    format!("{x:.16e}")
}
