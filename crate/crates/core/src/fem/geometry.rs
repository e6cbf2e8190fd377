//! Parametric specimen geometries.
//!
//! A specimen is described by an outline (rectangle, cruciform quarter,
//! polygon) plus circular cutouts.  *Holes* must lie fully inside the
//! outline; *notches* may cross it (they carve material away from the
//! edges, as in a notched shear specimen).  All lengths share one unit
//! (mm by convention).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A circular cutout, full disk removed from the sheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl Circle {
    pub fn new(x: f64, y: f64, r: f64) -> Self {
        Circle { x, y, r }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let dx = p[0] - self.x;
        let dy = p[1] - self.y;
        dx * dx + dy * dy < self.r * self.r
    }

    fn center_distance(&self, other: &Circle) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeometryKind {
    /// Plain rectangle `[0, width] x [0, height]`.
    RectangleROI,
    /// Quarter model of a cruciform: union of two arms
    /// `[0, arm_length] x [0, arm_half_width]` and its transpose.
    Cruciform,
    /// Cruciform quarter with 1..=6 interior holes.
    CruciformWithHoles,
    /// Rectangle with edge notches, loaded through ymin/ymax grips.
    ShearNotched,
    /// Arbitrary simple polygon with optional interior holes.
    PolygonWithCutouts,
}

/// Maximum number of interior holes a specimen may carry.
pub const MAX_HOLES: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("missing dimension `{0}`")]
    MissingDim(String),
    #[error("dimension `{0}` must be finite and positive, got {1}")]
    BadDim(String, f64),
    #[error("too many holes: {0} (limit {MAX_HOLES})")]
    TooManyHoles(usize),
    #[error("hole at ({0}, {1}) lies outside the specimen outline")]
    HoleOutsideDomain(f64, f64),
    #[error("ligament narrower than two element sizes near ({0}, {1})")]
    LigamentTooThin(f64, f64),
    #[error("{0}")]
    Invalid(String),
}

/// Parametric specimen: outline kind, named dimensions, cutouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecimenGeometry {
    pub kind: GeometryKind,
    pub dims: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holes: Vec<Circle>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notches: Vec<Circle>,
    /// Outline vertices, `PolygonWithCutouts` only (CCW, not repeated).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<[f64; 2]>,
    #[serde(default = "default_thickness")]
    pub thickness: f64,
}

fn default_thickness() -> f64 {
    1.0
}

fn dims_of(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

impl SpecimenGeometry {
    pub fn rectangle(width: f64, height: f64) -> Self {
        SpecimenGeometry {
            kind: GeometryKind::RectangleROI,
            dims: dims_of(&[("width", width), ("height", height)]),
            holes: Vec::new(),
            notches: Vec::new(),
            vertices: Vec::new(),
            thickness: 1.0,
        }
    }

    /// Quarter cruciform; the full specimen is obtained by mirroring
    /// about both axes.  `arm_half_width` is half the arm width, and
    /// `arm_length` the distance from the specimen center to the arm
    /// end, so the quarter occupies the L-shaped union
    /// `[0,L]x[0,w] ∪ [0,w]x[0,L]`.
    pub fn cruciform(arm_half_width: f64, arm_length: f64) -> Self {
        SpecimenGeometry {
            kind: GeometryKind::Cruciform,
            dims: dims_of(&[
                ("arm_half_width", arm_half_width),
                ("arm_length", arm_length),
            ]),
            holes: Vec::new(),
            notches: Vec::new(),
            vertices: Vec::new(),
            thickness: 1.0,
        }
    }

    pub fn cruciform_with_holes(arm_half_width: f64, arm_length: f64, holes: Vec<Circle>) -> Self {
        let mut g = Self::cruciform(arm_half_width, arm_length);
        g.kind = GeometryKind::CruciformWithHoles;
        g.holes = holes;
        g
    }

    /// Rectangle `[0,width] x [0,height]` with edge notches; the grips
    /// are the `ymin` / `ymax` boundaries.
    pub fn shear_notched(width: f64, height: f64, notches: Vec<Circle>) -> Self {
        SpecimenGeometry {
            kind: GeometryKind::ShearNotched,
            dims: dims_of(&[("width", width), ("height", height)]),
            holes: Vec::new(),
            notches,
            vertices: Vec::new(),
            thickness: 1.0,
        }
    }

    pub fn polygon(vertices: Vec<[f64; 2]>, holes: Vec<Circle>) -> Self {
        SpecimenGeometry {
            kind: GeometryKind::PolygonWithCutouts,
            dims: BTreeMap::new(),
            holes,
            notches: Vec::new(),
            vertices,
            thickness: 1.0,
        }
    }

    /// Double-lap shear specimen on a 20 x 30 blank: a central strip
    /// hangs from the top grip, two outer legs stand on the bottom
    /// grip, and the only connections are two vertical webs of width
    /// `web_width` and height `web_height` centred at mid-height.
    /// Pulling the grips apart shears the webs along their bonded
    /// faces; the mirror symmetry cancels the peel rotation a single
    /// lap would suffer.  All outline coordinates land on multiples of
    /// 0.5 when the web dimensions do.
    pub fn double_lap_shear(web_width: f64, web_height: f64) -> Self {
        let (w, h) = (20.0, 30.0);
        let half_c = 4.0; // center strip half-width
        let x1 = w / 2.0 - half_c - web_width; // left leg inner face
        let x2 = w / 2.0 - half_c; // center strip left face
        let x3 = w / 2.0 + half_c; // center strip right face
        let x4 = w / 2.0 + half_c + web_width; // right leg inner face
        let yb = h / 2.0 - web_height / 2.0; // web bottom end
        let yt = h / 2.0 + web_height / 2.0; // web top end
        let yc = 4.0; // center strip bottom face
        let yl = 26.0; // leg top face
        Self::polygon(
            vec![
                [0.0, 0.0],
                [x1, 0.0],
                [x1, yb],
                [x2, yb],
                [x2, yc],
                [x3, yc],
                [x3, yb],
                [x4, yb],
                [x4, 0.0],
                [w, 0.0],
                [w, yl],
                [x4, yl],
                [x4, yt],
                [x3, yt],
                [x3, h],
                [x2, h],
                [x2, yt],
                [x1, yt],
                [x1, yl],
                [0.0, yl],
            ],
            Vec::new(),
        )
    }

    /// Polygon outline with edge notches instead of interior holes: the
    /// circles may cross the outline, so only grip clearance and mutual
    /// ligaments are enforced for them.
    pub fn polygon_notched(vertices: Vec<[f64; 2]>, notches: Vec<Circle>) -> Self {
        SpecimenGeometry {
            kind: GeometryKind::PolygonWithCutouts,
            dims: BTreeMap::new(),
            holes: Vec::new(),
            notches,
            vertices,
            thickness: 1.0,
        }
    }

    pub fn dim(&self, name: &str) -> Result<f64, GeometryError> {
        let v = *self
            .dims
            .get(name)
            .ok_or_else(|| GeometryError::MissingDim(name.to_string()))?;
        if !v.is_finite() || v <= 0.0 {
            return Err(GeometryError::BadDim(name.to_string(), v));
        }
        Ok(v)
    }

    /// Structural validation (shape parameters only; ligament checks
    /// need an element size and live in mesh generation).
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !self.thickness.is_finite() || self.thickness <= 0.0 {
            return Err(GeometryError::BadDim("thickness".into(), self.thickness));
        }
        if self.holes.len() > MAX_HOLES {
            return Err(GeometryError::TooManyHoles(self.holes.len()));
        }
        for c in self.holes.iter().chain(self.notches.iter()) {
            if !(c.r.is_finite() && c.r > 0.0 && c.x.is_finite() && c.y.is_finite()) {
                return Err(GeometryError::Invalid(format!(
                    "bad cutout ({}, {}, r={})",
                    c.x, c.y, c.r
                )));
            }
        }
        match self.kind {
            GeometryKind::RectangleROI => {
                self.dim("width")?;
                self.dim("height")?;
                if !self.notches.is_empty() {
                    return Err(GeometryError::Invalid(
                        "RectangleROI does not take notches".into(),
                    ));
                }
            }
            GeometryKind::Cruciform | GeometryKind::CruciformWithHoles => {
                let w = self.dim("arm_half_width")?;
                let l = self.dim("arm_length")?;
                if l <= w {
                    return Err(GeometryError::Invalid(format!(
                        "arm_length ({l}) must exceed arm_half_width ({w})"
                    )));
                }
                if self.kind == GeometryKind::Cruciform && !self.holes.is_empty() {
                    return Err(GeometryError::Invalid(
                        "plain Cruciform does not take holes; use CruciformWithHoles".into(),
                    ));
                }
                if self.kind == GeometryKind::CruciformWithHoles && self.holes.is_empty() {
                    return Err(GeometryError::Invalid(
                        "CruciformWithHoles requires at least one hole".into(),
                    ));
                }
                if !self.notches.is_empty() {
                    return Err(GeometryError::Invalid(
                        "cruciform specimens do not take notches".into(),
                    ));
                }
            }
            GeometryKind::ShearNotched => {
                self.dim("width")?;
                self.dim("height")?;
                if self.notches.is_empty() {
                    return Err(GeometryError::Invalid(
                        "ShearNotched requires at least one notch".into(),
                    ));
                }
                if self.notches.len() > MAX_HOLES {
                    return Err(GeometryError::TooManyHoles(self.notches.len()));
                }
            }
            GeometryKind::PolygonWithCutouts => {
                if self.vertices.len() < 3 {
                    return Err(GeometryError::Invalid(format!(
                        "polygon needs >= 3 vertices, got {}",
                        self.vertices.len()
                    )));
                }
                for v in &self.vertices {
                    if !(v[0].is_finite() && v[1].is_finite()) {
                        return Err(GeometryError::Invalid("non-finite polygon vertex".into()));
                    }
                }
                if self.notches.len() > MAX_HOLES {
                    return Err(GeometryError::TooManyHoles(self.notches.len()));
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned bounding box of the outline: `[xmin, ymin], [xmax, ymax]`.
    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        match self.kind {
            GeometryKind::RectangleROI | GeometryKind::ShearNotched => {
                let w = self.dims["width"];
                let h = self.dims["height"];
                ([0.0, 0.0], [w, h])
            }
            GeometryKind::Cruciform | GeometryKind::CruciformWithHoles => {
                let l = self.dims["arm_length"];
                ([0.0, 0.0], [l, l])
            }
            GeometryKind::PolygonWithCutouts => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in &self.vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Is `p` inside the outline, ignoring cutouts?
    pub fn inside_outline(&self, p: [f64; 2]) -> bool {
        let [x, y] = p;
        match self.kind {
            GeometryKind::RectangleROI | GeometryKind::ShearNotched => {
                let w = self.dims["width"];
                let h = self.dims["height"];
                x >= 0.0 && x <= w && y >= 0.0 && y <= h
            }
            GeometryKind::Cruciform | GeometryKind::CruciformWithHoles => {
                let w = self.dims["arm_half_width"];
                let l = self.dims["arm_length"];
                let in_x_arm = x >= 0.0 && x <= l && y >= 0.0 && y <= w;
                let in_y_arm = x >= 0.0 && x <= w && y >= 0.0 && y <= l;
                in_x_arm || in_y_arm
            }
            GeometryKind::PolygonWithCutouts => point_in_polygon(p, &self.vertices),
        }
    }

    /// Is `p` in the meshed domain (outline minus all cutouts)?
    pub fn inside(&self, p: [f64; 2]) -> bool {
        self.inside_outline(p) && !self.cutouts().any(|c| c.contains(p))
    }

    pub fn cutouts(&self) -> impl Iterator<Item = &Circle> {
        self.holes.iter().chain(self.notches.iter())
    }

    /// Exact domain area for outlines without notches (notch/outline
    /// overlap has no closed form worth carrying here).
    pub fn reference_area(&self) -> Option<f64> {
        if !self.notches.is_empty() {
            return None;
        }
        let outline = match self.kind {
            GeometryKind::RectangleROI | GeometryKind::ShearNotched => {
                self.dims["width"] * self.dims["height"]
            }
            GeometryKind::Cruciform | GeometryKind::CruciformWithHoles => {
                let w = self.dims["arm_half_width"];
                let l = self.dims["arm_length"];
                w * (2.0 * l - w)
            }
            GeometryKind::PolygonWithCutouts => shoelace_area(&self.vertices),
        };
        let holes: f64 = self
            .holes
            .iter()
            .map(|c| std::f64::consts::PI * c.r * c.r)
            .sum();
        Some(outline - holes)
    }
}

/// Even-odd ray casting; boundary points are implementation-defined,
/// which is fine for cell centers that never land exactly on an edge.
pub(crate) fn point_in_polygon(p: [f64; 2], verts: &[[f64; 2]]) -> bool {
    let n = verts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (verts[i][0], verts[i][1]);
        let (xj, yj) = (verts[j][0], verts[j][1]);
        if (yi > p[1]) != (yj > p[1]) {
            let x_cross = xi + (p[1] - yi) / (yj - yi) * (xj - xi);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn shoelace_area(verts: &[[f64; 2]]) -> f64 {
    let n = verts.len();
    let mut s = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        s += verts[i][0] * verts[j][1] - verts[j][0] * verts[i][1];
    }
    0.5 * s.abs()
}

/// Minimum clear distance checks between cutouts, and between holes and
/// the outline, against a `2h` ligament rule.  Called by mesh generation
/// with the actual cell size.
pub(crate) fn check_ligaments(g: &SpecimenGeometry, h: f64) -> Result<(), GeometryError> {
    let cuts: Vec<&Circle> = g.cutouts().collect();
    for (i, a) in cuts.iter().enumerate() {
        for b in cuts.iter().skip(i + 1) {
            let gap = a.center_distance(b) - a.r - b.r;
            if gap < 2.0 * h {
                return Err(GeometryError::LigamentTooThin(a.x, a.y));
            }
        }
    }
    // Holes: the disk itself must sit inside the outline, with a 2h
    // margin of material around it.  Probe the circle at r and r+2h.
    const N_PROBE: usize = 72;
    for c in &g.holes {
        if !g.inside_outline([c.x, c.y]) {
            return Err(GeometryError::HoleOutsideDomain(c.x, c.y));
        }
        for k in 0..N_PROBE {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / N_PROBE as f64;
            let (s, co) = phi.sin_cos();
            let on = [c.x + c.r * co, c.y + c.r * s];
            if !g.inside_outline(on) {
                return Err(GeometryError::HoleOutsideDomain(c.x, c.y));
            }
            let margin = [c.x + (c.r + 2.0 * h) * co, c.y + (c.r + 2.0 * h) * s];
            if !g.inside_outline(margin) {
                return Err(GeometryError::LigamentTooThin(c.x, c.y));
            }
        }
    }
    // Notches may cross the outline but must keep clear of the grips
    // (ymin / ymax edges of the bounding box) by the same margin.
    if !g.notches.is_empty() {
        let (lo, hi) = g.bbox();
        for c in &g.notches {
            if c.y - c.r < lo[1] + 2.0 * h || c.y + c.r > hi[1] - 2.0 * h {
                return Err(GeometryError::LigamentTooThin(c.x, c.y));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_basics() {
        let g = SpecimenGeometry::rectangle(10.0, 5.0);
        g.validate().unwrap();
        assert_eq!(g.bbox(), ([0.0, 0.0], [10.0, 5.0]));
        assert!(g.inside([5.0, 2.5]));
        assert!(!g.inside([10.5, 2.5]));
        assert_eq!(g.reference_area(), Some(50.0));
    }

    #[test]
    fn cruciform_region_is_l_shaped_union() {
        let g = SpecimenGeometry::cruciform(10.0, 30.0);
        g.validate().unwrap();
        // Center block, both arms in; the diagonal "outside corner" out.
        assert!(g.inside([5.0, 5.0]));
        assert!(g.inside([25.0, 5.0]));
        assert!(g.inside([5.0, 25.0]));
        assert!(!g.inside([15.0, 15.0]));
        assert_eq!(g.reference_area(), Some(10.0 * (60.0 - 10.0)));
    }

    #[test]
    fn hole_removes_points_and_area() {
        let g = SpecimenGeometry::cruciform_with_holes(
            10.0,
            30.0,
            vec![Circle::new(5.0, 5.0, 2.0)],
        );
        g.validate().unwrap();
        assert!(!g.inside([5.0, 5.0]));
        assert!(g.inside([8.0, 8.0]));
        let area = g.reference_area().unwrap();
        assert!((area - (500.0 - std::f64::consts::PI * 4.0)).abs() < 1e-12);
    }

    #[test]
    fn hole_count_capped() {
        let holes = (0..7)
            .map(|i| Circle::new(3.0 + 3.0 * i as f64, 5.0, 0.5))
            .collect();
        let g = SpecimenGeometry::cruciform_with_holes(10.0, 30.0, holes);
        assert_eq!(g.validate(), Err(GeometryError::TooManyHoles(7)));
    }

    #[test]
    fn hole_outside_outline_is_rejected() {
        let g = SpecimenGeometry::cruciform_with_holes(
            10.0,
            30.0,
            vec![Circle::new(20.0, 20.0, 1.0)],
        );
        g.validate().unwrap();
        // Structurally fine, but the ligament pass must reject it.
        match check_ligaments(&g, 0.5) {
            Err(GeometryError::HoleOutsideDomain(x, y)) => {
                assert_eq!((x, y), (20.0, 20.0));
            }
            other => panic!("expected HoleOutsideDomain, got {other:?}"),
        }
    }

    #[test]
    fn hole_too_close_to_edge_is_a_thin_ligament() {
        // Hole wall 0.8 from the arm edge; needs 2h = 1.0.
        let g = SpecimenGeometry::cruciform_with_holes(
            10.0,
            30.0,
            vec![Circle::new(25.0, 5.0, 4.2)],
        );
        assert!(matches!(
            check_ligaments(&g, 0.5),
            Err(GeometryError::LigamentTooThin(_, _))
        ));
    }

    #[test]
    fn close_hole_pair_is_a_thin_ligament() {
        let g = SpecimenGeometry::cruciform_with_holes(
            10.0,
            30.0,
            vec![Circle::new(4.0, 5.0, 1.5), Circle::new(8.0, 5.0, 1.5)],
        );
        assert!(matches!(
            check_ligaments(&g, 1.0),
            Err(GeometryError::LigamentTooThin(_, _))
        ));
    }

    #[test]
    fn polygon_containment_and_area() {
        // Unit right triangle.
        let g = SpecimenGeometry::polygon(
            vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]],
            Vec::new(),
        );
        g.validate().unwrap();
        assert!(g.inside([0.5, 0.5]));
        assert!(!g.inside([1.5, 1.5]));
        assert_eq!(g.reference_area(), Some(2.0));
    }

    #[test]
    fn geometry_json_round_trip() {
        let g = SpecimenGeometry::shear_notched(
            20.0,
            60.0,
            vec![Circle::new(0.0, 30.0, 6.0), Circle::new(20.0, 30.0, 6.0)],
        );
        let s = serde_json::to_string(&g).unwrap();
        let back: SpecimenGeometry = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
