//! Directional yield stresses and yield-locus sections.

use super::{MaterialModel, Surface, Voigt};
use crate::stress::PlaneStress;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LocusError {
    #[error("model has no yield surface")]
    NotPlastic,
    #[error("yield surface is not positive along ray {0} rad; parameter set not positive definite")]
    NonPositiveDefinite(f64),
}

/// Section plane for [`MaterialModel::yield_locus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocusPlane {
    /// `(s11, s22)` plane at `t12 = 0`.
    S11S22,
    /// `(s22, t12)` plane at `s11 = 0`.
    S22T12,
}

/// One point of a yield-locus section.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LocusPoint {
    /// Ray angle in the section plane, radians in `[0, 2 pi)`.
    pub phi: f64,
    /// First section coordinate (stress units).
    pub a: f64,
    /// Second section coordinate (stress units).
    pub b: f64,
    /// The full plane-stress state on the locus.
    pub stress: PlaneStress,
}

/// Finds the radius `r > 0` with `sigma_bar(r * dir) = flow` by bracketed
/// bisection on the yield value along the ray.
fn ray_radius(surf: &Surface, dir: &Voigt, flow: f64, phi: f64) -> Result<f64, LocusError> {
    let sb = surf.sigma_bar(dir);
    if !(sb.is_finite() && sb > 0.0) {
        return Err(LocusError::NonPositiveDefinite(phi));
    }
    // Homogeneity puts the root near flow / sb; bracket it defensively and
    // bisect so the locus stays correct even for nearly degenerate sets.
    let guess = flow / sb;
    let (mut lo, mut hi) = (0.5 * guess, 2.0 * guess);
    let f = |r: f64| surf.sigma_bar(&(dir * r)) - flow;
    let mut expand = 0;
    while f(lo) > 0.0 {
        lo *= 0.5;
        expand += 1;
        if expand > 60 {
            return Err(LocusError::NonPositiveDefinite(phi));
        }
    }
    expand = 0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        expand += 1;
        if expand > 60 {
            return Err(LocusError::NonPositiveDefinite(phi));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    if r.is_finite() && r > 0.0 {
        Ok(r)
    } else {
        Err(LocusError::NonPositiveDefinite(phi))
    }
}

impl MaterialModel {
    /// Uniaxial yield stress at angle `theta` (radians from RD),
    /// normalised by `sigma0`.
    ///
    /// Hill48 uses the closed-form expression
    /// `[(F+H) sin^4 + (G+H) cos^4 + 2(N-H) sin^2 cos^2]^(-1/2)`;
    /// Yld2000 scales a rotated uniaxial unit stress numerically until the
    /// yield value vanishes.
    pub fn normalized_yield_stress(&self, theta: f64) -> Result<f64, LocusError> {
        match self {
            MaterialModel::Hill48Swift { F, G, N, .. } => {
                Ok(super::Hill48::new(*F, *G, *N).normalized_yield_stress(theta))
            }
            MaterialModel::Yld2000Swift { .. } => {
                let surf = self.surface().ok_or(LocusError::NotPlastic)?;
                let hard = self.swift().ok_or(LocusError::NotPlastic)?;
                let (s, c) = theta.sin_cos();
                let dir = Voigt::new(c * c, s * s, s * c);
                Ok(ray_radius(&surf, &dir, hard.flow_stress(0.0), theta)? / hard.sigma0)
            }
            _ => Err(LocusError::NotPlastic),
        }
    }

    /// Numeric counterpart of [`Self::normalized_yield_stress`] that always
    /// goes through the root-finding path, for cross-checking.
    pub fn normalized_yield_stress_numeric(&self, theta: f64) -> Result<f64, LocusError> {
        let surf = self.surface().ok_or(LocusError::NotPlastic)?;
        let hard = self.swift().ok_or(LocusError::NotPlastic)?;
        let (s, c) = theta.sin_cos();
        let dir = Voigt::new(c * c, s * s, s * c);
        Ok(ray_radius(&surf, &dir, hard.flow_stress(0.0), theta)? / hard.sigma0)
    }

    /// Yield-locus section at accumulated plastic strain `ebar_p`,
    /// sampled on `n_points` rays uniformly covering `[0, 2 pi)`.
    pub fn yield_locus(
        &self,
        plane: LocusPlane,
        n_points: usize,
        ebar_p: f64,
    ) -> Result<Vec<LocusPoint>, LocusError> {
        let surf = self.surface().ok_or(LocusError::NotPlastic)?;
        let hard = self.swift().ok_or(LocusError::NotPlastic)?;
        let flow = hard.flow_stress(ebar_p);
        let mut pts = Vec::with_capacity(n_points);
        for k in 0..n_points {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n_points as f64;
            let (s, c) = phi.sin_cos();
            let dir = match plane {
                LocusPlane::S11S22 => Voigt::new(c, s, 0.0),
                LocusPlane::S22T12 => Voigt::new(0.0, c, s),
            };
            let r = ray_radius(&surf, &dir, flow, phi)?;
            let sv = dir * r;
            pts.push(LocusPoint {
                phi,
                a: r * c,
                b: r * s,
                stress: PlaneStress::new(sv[0], sv[1], sv[2]),
            });
        }
        Ok(pts)
    }
}
