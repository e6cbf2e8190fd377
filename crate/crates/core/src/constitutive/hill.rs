//! Hill 1948 quadratic yield surface in plane stress.

use super::Voigt;
use nalgebra::Matrix3;

/// Hill48 surface with RD normalisation `H = 1 - G` baked in.
///
/// `sigma_bar(s) = sqrt(s^T P s)` with
///
/// ```text
///     | G+H   -H    0  |
/// P = | -H   F+H    0  |
///     |  0     0   2N  |
/// ```
///
/// in Voigt order `[s11, s22, t12]`.  The von Mises limit is
/// `F = G = H = 0.5`, `N = 1.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hill48 {
    pub f: f64,
    pub g: f64,
    pub n: f64,
}

impl Hill48 {
    pub fn new(f: f64, g: f64, n: f64) -> Self {
        Self { f, g, n }
    }

    pub fn von_mises() -> Self {
        Self::new(0.5, 0.5, 1.5)
    }

    /// Derived coefficient `H = 1 - G`.
    pub fn h(&self) -> f64 {
        1.0 - self.g
    }

    /// Quadratic-form matrix `P`.
    pub fn p_matrix(&self) -> Matrix3<f64> {
        let h = self.h();
        Matrix3::new(
            self.g + h,
            -h,
            0.0,
            -h,
            self.f + h,
            0.0,
            0.0,
            0.0,
            2.0 * self.n,
        )
    }

    /// Equivalent stress; degree-one homogeneous and non-negative for
    /// positive semi-definite `P`.
    pub fn sigma_bar(&self, s: &Voigt) -> f64 {
        (self.p_matrix() * s).dot(s).max(0.0).sqrt()
    }

    /// Gradient `P s / sigma_bar`; the third component is conjugate to the
    /// engineering shear.  Zero stress maps to a zero gradient.
    pub fn grad(&self, s: &Voigt) -> Voigt {
        let sb = self.sigma_bar(s);
        if sb > 0.0 {
            self.p_matrix() * s / sb
        } else {
            Voigt::zeros()
        }
    }

    /// Closed-form normalised uniaxial yield stress at angle `theta` from
    /// RD:
    ///
    /// `sigma_theta / sigma0 =
    ///  [ (F+H) sin^4 + (G+H) cos^4 + (2N - 2H) sin^2 cos^2 ]^(-1/2)`.
    pub fn normalized_yield_stress(&self, theta: f64) -> f64 {
        let h = self.h();
        let (s, c) = theta.sin_cos();
        let (s2, c2) = (s * s, c * c);
        let q = (self.f + h) * s2 * s2
            + (self.g + h) * c2 * c2
            + (2.0 * self.n - 2.0 * h) * s2 * c2;
        q.powf(-0.5)
    }
}
