//! Pixel meshing: a uniform grid of 4-node quadrilaterals clipped to the
//! specimen, with boundary nodes snapped onto cutout circles.
//!
//! The grid exactly tiles the outline bounding box (cell counts are the
//! rounded box-size / target-size ratios), a cell is kept when its center
//! lies in the material domain, and kept nodes that fall inside a cutout
//! are projected radially onto the cutout circle.  The result is
//! deterministic: same geometry and target size, same mesh, bit for bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::geometry::{check_ligaments, GeometryError, SpecimenGeometry};

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("target element size must be finite and positive, got {0}")]
    BadElementSize(f64),
    #[error("meshing produced no elements")]
    Empty,
    #[error("element {0} is degenerate after snapping (non-positive Jacobian)")]
    DegenerateElement(usize),
    #[error("mesh is disconnected ({0} components)")]
    Disconnected(usize),
}

/// Structured-grid quad mesh of a specimen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    /// Node coordinates.
    pub nodes: Vec<[f64; 2]>,
    /// Quads as CCW node indices.
    pub elems: Vec<[usize; 4]>,
    /// Region-of-interest flag per element (all true for these meshes;
    /// consumers may narrow it).
    pub roi_mask: Vec<bool>,
    /// Named boundary node sets keyed `xmin`/`xmax`/`ymin`/`ymax`,
    /// empty sets omitted.
    pub boundary: BTreeMap<String, Vec<usize>>,
    /// Actual cell sizes along x and y (close to the requested size).
    pub dx: f64,
    pub dy: f64,
    /// Sheet thickness carried over from the geometry.
    pub thickness: f64,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elems(&self) -> usize {
        self.elems.len()
    }

    pub fn elem_coords(&self, e: usize) -> [[f64; 2]; 4] {
        let c = self.elems[e];
        [
            self.nodes[c[0]],
            self.nodes[c[1]],
            self.nodes[c[2]],
            self.nodes[c[3]],
        ]
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let xs = self.elem_coords(e);
        let mut c = [0.0, 0.0];
        for p in xs {
            c[0] += 0.25 * p[0];
            c[1] += 0.25 * p[1];
        }
        c
    }

    /// Element area by the shoelace formula (quads here are convex).
    pub fn elem_area(&self, e: usize) -> f64 {
        let p = self.elem_coords(e);
        let mut s = 0.0;
        for i in 0..4 {
            let j = (i + 1) % 4;
            s += p[i][0] * p[j][1] - p[j][0] * p[i][1];
        }
        0.5 * s.abs()
    }

    pub fn area(&self) -> f64 {
        (0..self.n_elems()).map(|e| self.elem_area(e)).sum()
    }

    /// Index of the element whose centroid is nearest to `p`.
    pub fn nearest_elem(&self, p: [f64; 2]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for e in 0..self.n_elems() {
            let c = self.centroid(e);
            let d = (c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = e;
            }
        }
        best
    }
}

/// Mesh `g` with target element size `h`.
pub fn generate_mesh(g: &SpecimenGeometry, h: f64) -> Result<Mesh, MeshError> {
    g.validate()?;
    if !h.is_finite() || h <= 0.0 {
        return Err(MeshError::BadElementSize(h));
    }

    let (lo, hi) = g.bbox();
    let (w, ht) = (hi[0] - lo[0], hi[1] - lo[1]);
    let nx = ((w / h).round() as usize).max(1);
    let ny = ((ht / h).round() as usize).max(1);
    let dx = w / nx as f64;
    let dy = ht / ny as f64;
    check_ligaments(g, dx.max(dy))?;

    // Keep cells whose center is material.
    let mut cell_keep = vec![false; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let cx = lo[0] + (ix as f64 + 0.5) * dx;
            let cy = lo[1] + (iy as f64 + 0.5) * dy;
            cell_keep[iy * nx + ix] = g.inside([cx, cy]);
        }
    }

    // Number used grid nodes row-major (iy, then ix).
    let nnx = nx + 1;
    let mut node_id = vec![usize::MAX; nnx * (ny + 1)];
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut elems: Vec<[usize; 4]> = Vec::new();
    let corner = |ix: usize, iy: usize| iy * nnx + ix;
    for iy in 0..ny {
        for ix in 0..nx {
            if !cell_keep[iy * nx + ix] {
                continue;
            }
            let gids = [
                corner(ix, iy),
                corner(ix + 1, iy),
                corner(ix + 1, iy + 1),
                corner(ix, iy + 1),
            ];
            let mut conn = [0usize; 4];
            for (k, gid) in gids.iter().enumerate() {
                if node_id[*gid] == usize::MAX {
                    node_id[*gid] = nodes.len();
                    let jy = gid / nnx;
                    let jx = gid % nnx;
                    nodes.push([lo[0] + jx as f64 * dx, lo[1] + jy as f64 * dy]);
                }
                conn[k] = node_id[*gid];
            }
            elems.push(conn);
        }
    }
    if elems.is_empty() {
        return Err(MeshError::Empty);
    }

    // Snap nodes that ended up strictly inside a cutout onto its circle.
    for p in nodes.iter_mut() {
        for c in g.cutouts() {
            let vx = p[0] - c.x;
            let vy = p[1] - c.y;
            let d = (vx * vx + vy * vy).sqrt();
            if d < c.r && d > 1e-12 * c.r {
                let s = c.r / d;
                *p = [c.x + vx * s, c.y + vy * s];
            }
        }
    }

    // Every element must stay valid (positive Jacobian at all corners).
    for (e, conn) in elems.iter().enumerate() {
        let p: Vec<[f64; 2]> = conn.iter().map(|&i| nodes[i]).collect();
        for k in 0..4 {
            let a = p[(k + 1) % 4];
            let b = p[(k + 3) % 4];
            let o = p[k];
            let cross = (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
            if cross <= 0.0 {
                return Err(MeshError::DegenerateElement(e));
            }
        }
    }

    let n_comp = count_components(nodes.len(), &elems);
    if n_comp != 1 {
        return Err(MeshError::Disconnected(n_comp));
    }

    // Named boundary sets on the bounding-box edges (pre-snap grid
    // coordinates are exact, so an absolute tolerance scaled by the box
    // is ample; snapped nodes left the grid and must not qualify).
    let tol = 1e-9 * w.max(ht);
    let mut boundary: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut edge = |name: &str, pick: &dyn Fn(&[f64; 2]) -> bool| {
        let set: Vec<usize> = (0..nodes.len()).filter(|&i| pick(&nodes[i])).collect();
        if !set.is_empty() {
            boundary.insert(name.to_string(), set);
        }
    };
    edge("xmin", &|p| (p[0] - lo[0]).abs() <= tol);
    edge("xmax", &|p| (p[0] - hi[0]).abs() <= tol);
    edge("ymin", &|p| (p[1] - lo[1]).abs() <= tol);
    edge("ymax", &|p| (p[1] - hi[1]).abs() <= tol);

    let roi_mask = vec![true; elems.len()];
    Ok(Mesh {
        nodes,
        elems,
        roi_mask,
        boundary,
        dx,
        dy,
        thickness: g.thickness,
    })
}

fn count_components(n_nodes: usize, elems: &[[usize; 4]]) -> usize {
    let mut parent: Vec<usize> = (0..n_nodes).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut used = vec![false; n_nodes];
    for conn in elems {
        for &c in conn {
            used[c] = true;
        }
        for k in 1..4 {
            let (a, b) = (find(&mut parent, conn[0]), find(&mut parent, conn[k]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    (0..n_nodes)
        .filter(|&i| used[i] && find(&mut parent, i) == i)
        .count()
}
