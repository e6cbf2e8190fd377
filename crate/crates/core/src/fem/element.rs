//! Bilinear 4-node quadrilateral: shape functions, strain-displacement
//! matrix, and the 2x2 Gauss rule.

use nalgebra::SMatrix;

/// Local corner coordinates, CCW from (-1, -1).
const XI: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// 2x2 Gauss points (unit weights).
pub fn gauss_points() -> [[f64; 2]; 4] {
    let g = 1.0 / 3.0f64.sqrt();
    [[-g, -g], [g, -g], [g, g], [-g, g]]
}

pub fn shape(xi: f64, eta: f64) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (i, c) in XI.iter().enumerate() {
        n[i] = 0.25 * (1.0 + c[0] * xi) * (1.0 + c[1] * eta);
    }
    n
}

fn shape_grad_local(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    let mut g = [[0.0; 2]; 4];
    for (i, c) in XI.iter().enumerate() {
        g[i][0] = 0.25 * c[0] * (1.0 + c[1] * eta);
        g[i][1] = 0.25 * c[1] * (1.0 + c[0] * xi);
    }
    g
}

/// Strain-displacement matrix (engineering shear row) and Jacobian
/// determinant at one local point.  Returns `None` for a non-positive
/// Jacobian.
pub fn bmat(coords: &[[f64; 2]; 4], xi: f64, eta: f64) -> Option<(SMatrix<f64, 3, 8>, f64)> {
    let gl = shape_grad_local(xi, eta);
    let mut j = [[0.0; 2]; 2];
    for i in 0..4 {
        j[0][0] += gl[i][0] * coords[i][0];
        j[0][1] += gl[i][0] * coords[i][1];
        j[1][0] += gl[i][1] * coords[i][0];
        j[1][1] += gl[i][1] * coords[i][1];
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det <= 0.0 || !det.is_finite() {
        return None;
    }
    let inv = [
        [j[1][1] / det, -j[0][1] / det],
        [-j[1][0] / det, j[0][0] / det],
    ];
    let mut b = SMatrix::<f64, 3, 8>::zeros();
    for i in 0..4 {
        let dx = inv[0][0] * gl[i][0] + inv[0][1] * gl[i][1];
        let dy = inv[1][0] * gl[i][0] + inv[1][1] * gl[i][1];
        b[(0, 2 * i)] = dx;
        b[(1, 2 * i + 1)] = dy;
        b[(2, 2 * i)] = dy;
        b[(2, 2 * i + 1)] = dx;
    }
    Some((b, det))
}
