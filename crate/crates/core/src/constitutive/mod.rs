//! Constitutive models for sheet metal in plane stress.
//!
//! Four models are provided:
//!
//! * [`MaterialModel::IsoElastic`] — isotropic linear elasticity `(E, nu)`.
//! * [`MaterialModel::OrthoElastic`] — orthotropic linear elasticity
//!   `(E1, E2, nu12, G12)` with the reciprocal relation
//!   `nu21 = nu12 * E2 / E1`.
//! * [`MaterialModel::Hill48Swift`] — Hill 1948 quadratic anisotropic yield
//!   surface with Swift power-law isotropic hardening,
//!   `sigma_bar^2 = (G+H) s11^2 - 2 H s11 s22 + (F+H) s22^2 + 2 N t12^2`,
//!   `sigma_Y = A (eps0 + ebar_p)^n`.  The RD-normalisation `G + H = 1`
//!   is enforced by deriving `H = 1 - G`; `H` is never a free parameter.
//! * [`MaterialModel::Yld2000Swift`] — Barlat Yld2000-2d non-quadratic
//!   anisotropic yield surface (8 anisotropy coefficients `alpha1..alpha8`,
//!   exponent `a`) with Swift hardening.
//!
//! Stress updates for the plastic models use an implicit backward-Euler
//! return mapping with associative flow (see [`integrate`]); plastic
//! incompressibility and work conjugacy give `d ebar_p = d lambda` because
//! both yield functions are positively homogeneous of degree one.
//!
//! Strain bookkeeping: public strain types carry the tensorial shear
//! `e12`; internally the models work with the engineering shear
//! `gamma = 2 e12`, which is the work conjugate of `t12`.

pub mod hill;
pub mod integrate;
pub mod locus;
pub mod yld2000;

use crate::stress::{PlaneStrain, PlaneStress};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use thiserror::Error;

pub use hill::Hill48;
pub use locus::{LocusPlane, LocusPoint};
pub use yld2000::Yld2000;

/// Stress/strain vectors in Voigt order `[11, 22, 12]`.
///
/// Strain vectors in this order use the engineering shear `gamma`.
pub type Voigt = Vector3<f64>;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid material parameters: {0}")]
    Invalid(String),
    #[error("unknown parameter `{0}` for this model")]
    UnknownParameter(String),
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum StepError {
    /// The implicit stress update did not converge; the caller may retry
    /// with a smaller strain increment.
    #[error("return mapping failed to converge")]
    ReturnMapDiverged,
}

/// Swift isotropic hardening law `sigma_Y = A (eps0 + ebar_p)^n` with
/// `eps0 = (sigma0 / A)^(1/n)` so that `sigma_Y(0) = sigma0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Swift {
    pub a: f64,
    pub sigma0: f64,
    pub n: f64,
}

impl Swift {
    pub fn eps0(&self) -> f64 {
        (self.sigma0 / self.a).powf(1.0 / self.n)
    }

    /// Flow stress at accumulated plastic strain `ebar_p`.
    pub fn flow_stress(&self, ebar_p: f64) -> f64 {
        self.a * (self.eps0() + ebar_p).powf(self.n)
    }

    /// Hardening modulus `d sigma_Y / d ebar_p`.
    pub fn hardening_modulus(&self, ebar_p: f64) -> f64 {
        let e = self.eps0() + ebar_p;
        self.a * self.n * e.powf(self.n - 1.0)
    }
}

/// Internal state of a material point.
///
/// `eps` is the total strain, `eps_p` the plastic strain (both with
/// tensorial shear) and `ebar_p` the accumulated equivalent plastic strain.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MaterialState {
    pub eps: PlaneStrain,
    pub eps_p: PlaneStrain,
    pub ebar_p: f64,
}

/// A constitutive model.
///
/// The JSON form is `{"kind": "...", "params": {...}}` with scalar
/// entries in `params`; key names are `E`, `nu`, `E1`, `E2`, `nu12`,
/// `G12`, `A`, `sigma0`, `n`, `a`, `F`, `G`, `N` and `alpha1`..`alpha8`
/// depending on the kind.  `H` is never a key: it is derived as
/// `1 - G`.  An optional `"bounds"` map is read by [`MaterialFile`].
#[derive(Debug, Clone, PartialEq)]
#[allow(non_snake_case)]
pub enum MaterialModel {
    IsoElastic {
        E: f64,
        nu: f64,
    },
    OrthoElastic {
        E1: f64,
        E2: f64,
        nu12: f64,
        G12: f64,
    },
    Hill48Swift {
        E: f64,
        nu: f64,
        A: f64,
        sigma0: f64,
        n: f64,
        F: f64,
        G: f64,
        N: f64,
    },
    Yld2000Swift {
        E: f64,
        nu: f64,
        A: f64,
        sigma0: f64,
        n: f64,
        /// Yield-surface exponent (8 for FCC, 6 for BCC).  Held fixed
        /// during identification.
        a: f64,
        alpha: [f64; 8],
    },
}

/// Yield surface of a plastic model, exposing the equivalent stress
/// (degree-one homogeneous) and its stress gradient.
#[derive(Debug, Clone)]
pub enum Surface {
    Hill(Hill48),
    Yld(Yld2000),
}

impl Surface {
    /// Equivalent stress `sigma_bar(s)`; degree-one homogeneous.
    pub fn sigma_bar(&self, s: &Voigt) -> f64 {
        match self {
            Surface::Hill(h) => h.sigma_bar(s),
            Surface::Yld(y) => y.sigma_bar(s),
        }
    }

    /// Gradient `d sigma_bar / d s` with the `t12`-derivative in the third
    /// slot (conjugate to the engineering shear increment).
    pub fn grad(&self, s: &Voigt) -> Voigt {
        match self {
            Surface::Hill(h) => h.grad(s),
            Surface::Yld(y) => y.grad(s),
        }
    }
}

impl MaterialModel {
    /// Checks parameter-domain invariants; all public entry points expect a
    /// validated model.
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::Invalid(msg.to_string()));
        match *self {
            MaterialModel::IsoElastic { E, nu } => {
                if !(E > 0.0) {
                    return bad("E must be positive");
                }
                if !(nu >= 0.0 && nu < 0.5) {
                    return bad("nu must lie in [0, 0.5)");
                }
            }
            MaterialModel::OrthoElastic { E1, E2, nu12, G12 } => {
                if !(E1 > 0.0 && E2 > 0.0 && G12 > 0.0) {
                    return bad("E1, E2, G12 must be positive");
                }
                let nu21 = nu12 * E2 / E1;
                if !(1.0 - nu12 * nu21 > 0.0) {
                    return bad("1 - nu12*nu21 must be positive");
                }
            }
            MaterialModel::Hill48Swift {
                E,
                nu,
                A,
                sigma0,
                n,
                F,
                G,
                N,
            } => {
                if !(E > 0.0 && nu >= 0.0 && nu < 0.5) {
                    return bad("elastic constants out of range");
                }
                if !(A > 0.0 && sigma0 > 0.0 && sigma0 < A) {
                    return bad("Swift constants require 0 < sigma0 < A");
                }
                if !(n > 0.0 && n < 1.0) {
                    return bad("Swift exponent n must lie in (0, 1)");
                }
                if !(F > 0.0 && G > 0.0 && N > 0.0) {
                    return bad("Hill coefficients F, G, N must be positive");
                }
                if !(G < 1.0) {
                    return bad("Hill G must be below 1 so that H = 1 - G stays positive");
                }
            }
            MaterialModel::Yld2000Swift {
                E,
                nu,
                A,
                sigma0,
                n,
                a,
                alpha,
            } => {
                if !(E > 0.0 && nu >= 0.0 && nu < 0.5) {
                    return bad("elastic constants out of range");
                }
                if !(A > 0.0 && sigma0 > 0.0 && sigma0 < A) {
                    return bad("Swift constants require 0 < sigma0 < A");
                }
                if !(n > 0.0 && n < 1.0) {
                    return bad("Swift exponent n must lie in (0, 1)");
                }
                if a != 6.0 && a != 8.0 {
                    return bad("Yld2000 exponent a must be 6 (BCC) or 8 (FCC)");
                }
                if alpha.iter().any(|v| !(*v > 0.0)) {
                    return bad("Yld2000 coefficients must be positive");
                }
            }
        }
        Ok(())
    }

    /// Plane-stress elastic stiffness mapping `[e11, e22, gamma]` to
    /// `[s11, s22, t12]`.
    pub fn elastic_matrix(&self) -> Matrix3<f64> {
        let (c11, c22, c12, c66) = match *self {
            MaterialModel::IsoElastic { E, nu }
            | MaterialModel::Hill48Swift { E, nu, .. }
            | MaterialModel::Yld2000Swift { E, nu, .. } => {
                let d = E / (1.0 - nu * nu);
                (d, d, nu * d, 0.5 * E / (1.0 + nu))
            }
            MaterialModel::OrthoElastic { E1, E2, nu12, G12 } => {
                let nu21 = nu12 * E2 / E1;
                let d = 1.0 - nu12 * nu21;
                (E1 / d, E2 / d, nu12 * E2 / d, G12)
            }
        };
        Matrix3::new(c11, c12, 0.0, c12, c22, 0.0, 0.0, 0.0, c66)
    }

    /// Elastic stress for a given total strain (no plasticity).
    pub fn elastic_stress(&self, eps: PlaneStrain) -> PlaneStress {
        let s = self.elastic_matrix() * Voigt::new(eps.e11, eps.e22, 2.0 * eps.e12);
        PlaneStress::new(s[0], s[1], s[2])
    }

    /// Swift hardening law for plastic models, `None` otherwise.
    pub fn swift(&self) -> Option<Swift> {
        match *self {
            MaterialModel::Hill48Swift { A, sigma0, n, .. }
            | MaterialModel::Yld2000Swift { A, sigma0, n, .. } => {
                Some(Swift { a: A, sigma0, n })
            }
            _ => None,
        }
    }

    /// Yield surface for plastic models, `None` otherwise.
    pub fn surface(&self) -> Option<Surface> {
        match *self {
            MaterialModel::Hill48Swift { F, G, N, .. } => Some(Surface::Hill(Hill48::new(F, G, N))),
            MaterialModel::Yld2000Swift {
                sigma0, a, alpha, ..
            } => Some(Surface::Yld(Yld2000::new(alpha, a, sigma0))),
            _ => None,
        }
    }

    /// Yield function value `f = sigma_bar(s) - sigma_Y(ebar_p)`;
    /// `None` for elastic models.
    pub fn yield_value(&self, s: PlaneStress, ebar_p: f64) -> Option<f64> {
        let surf = self.surface()?;
        let hard = self.swift()?;
        let sv = Voigt::new(s.s11, s.s22, s.t12);
        Some(surf.sigma_bar(&sv) - hard.flow_stress(ebar_p))
    }

    /// Names of the identifiable parameters of this model, in canonical
    /// order.
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            MaterialModel::IsoElastic { .. } => &["E", "nu"],
            MaterialModel::OrthoElastic { .. } => &["E1", "E2", "nu12", "G12"],
            MaterialModel::Hill48Swift { .. } => &["A", "sigma0", "n", "F", "G", "N"],
            MaterialModel::Yld2000Swift { .. } => &[
                "A", "sigma0", "n", "alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "alpha6",
                "alpha7", "alpha8",
            ],
        }
    }

    /// Reads a named parameter.
    pub fn get(&self, name: &str) -> Result<f64, ModelError> {
        let unknown = || ModelError::UnknownParameter(name.to_string());
        let v = match (self, name) {
            (MaterialModel::IsoElastic { E, .. }, "E") => *E,
            (MaterialModel::IsoElastic { nu, .. }, "nu") => *nu,
            (MaterialModel::OrthoElastic { E1, .. }, "E1") => *E1,
            (MaterialModel::OrthoElastic { E2, .. }, "E2") => *E2,
            (MaterialModel::OrthoElastic { nu12, .. }, "nu12") => *nu12,
            (MaterialModel::OrthoElastic { G12, .. }, "G12") => *G12,
            (
                MaterialModel::Hill48Swift {
                    E,
                    nu,
                    A,
                    sigma0,
                    n,
                    F,
                    G,
                    N,
                },
                _,
            ) => match name {
                "E" => *E,
                "nu" => *nu,
                "A" => *A,
                "sigma0" => *sigma0,
                "n" => *n,
                "F" => *F,
                "G" => *G,
                "N" => *N,
                _ => return Err(unknown()),
            },
            (
                MaterialModel::Yld2000Swift {
                    E,
                    nu,
                    A,
                    sigma0,
                    n,
                    a,
                    alpha,
                },
                _,
            ) => match name {
                "E" => *E,
                "nu" => *nu,
                "A" => *A,
                "sigma0" => *sigma0,
                "n" => *n,
                "a" => *a,
                _ => match name
                    .strip_prefix("alpha")
                    .and_then(|i| i.parse::<usize>().ok())
                {
                    Some(i @ 1..=8) => alpha[i - 1],
                    _ => return Err(unknown()),
                },
            },
            _ => return Err(unknown()),
        };
        Ok(v)
    }

    /// Writes a named parameter (used by identification and UQ to move
    /// through parameter space).
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ModelError> {
        let unknown = || ModelError::UnknownParameter(name.to_string());
        match self {
            MaterialModel::IsoElastic { E, nu } => match name {
                "E" => *E = value,
                "nu" => *nu = value,
                _ => return Err(unknown()),
            },
            MaterialModel::OrthoElastic { E1, E2, nu12, G12 } => match name {
                "E1" => *E1 = value,
                "E2" => *E2 = value,
                "nu12" => *nu12 = value,
                "G12" => *G12 = value,
                _ => return Err(unknown()),
            },
            MaterialModel::Hill48Swift {
                E,
                nu,
                A,
                sigma0,
                n,
                F,
                G,
                N,
            } => match name {
                "E" => *E = value,
                "nu" => *nu = value,
                "A" => *A = value,
                "sigma0" => *sigma0 = value,
                "n" => *n = value,
                "F" => *F = value,
                "G" => *G = value,
                "N" => *N = value,
                _ => return Err(unknown()),
            },
            MaterialModel::Yld2000Swift {
                E,
                nu,
                A,
                sigma0,
                n,
                a,
                alpha,
            } => match name {
                "E" => *E = value,
                "nu" => *nu = value,
                "A" => *A = value,
                "sigma0" => *sigma0 = value,
                "n" => *n = value,
                "a" => *a = value,
                _ => match name
                    .strip_prefix("alpha")
                    .and_then(|i| i.parse::<usize>().ok())
                {
                    Some(i @ 1..=8) => alpha[i - 1] = value,
                    _ => return Err(unknown()),
                },
            },
        }
        Ok(())
    }

    /// True for models with a yield surface and hardening law.
    pub fn is_plastic(&self) -> bool {
        matches!(
            self,
            MaterialModel::Hill48Swift { .. } | MaterialModel::Yld2000Swift { .. }
        )
    }

    /// Kind tag used in the JSON form.
    pub fn kind(&self) -> &'static str {
        match self {
            MaterialModel::IsoElastic { .. } => "IsoElastic",
            MaterialModel::OrthoElastic { .. } => "OrthoElastic",
            MaterialModel::Hill48Swift { .. } => "Hill48Swift",
            MaterialModel::Yld2000Swift { .. } => "Yld2000Swift",
        }
    }

    /// Every scalar parameter of the model (identifiable ones plus the
    /// fixed elastic constants and exponent), keyed by JSON name.
    pub fn params_map(&self) -> BTreeMap<String, f64> {
        let keys: &[&str] = match self {
            MaterialModel::IsoElastic { .. } => &["E", "nu"],
            MaterialModel::OrthoElastic { .. } => &["E1", "E2", "nu12", "G12"],
            MaterialModel::Hill48Swift { .. } => &["E", "nu", "A", "sigma0", "n", "F", "G", "N"],
            MaterialModel::Yld2000Swift { .. } => &[
                "E", "nu", "A", "sigma0", "n", "a", "alpha1", "alpha2", "alpha3", "alpha4",
                "alpha5", "alpha6", "alpha7", "alpha8",
            ],
        };
        keys.iter()
            .map(|k| (k.to_string(), self.get(k).expect("own key")))
            .collect()
    }

    /// Builds a model of the given kind from a full parameter map.
    /// Missing or extraneous keys are rejected so that typos (or attempts
    /// to set the derived `H`) fail loudly instead of being ignored.
    pub fn from_params(kind: &str, params: &BTreeMap<String, f64>) -> Result<Self, ModelError> {
        let template = match kind {
            "IsoElastic" => MaterialModel::IsoElastic { E: 0.0, nu: 0.0 },
            "OrthoElastic" => MaterialModel::OrthoElastic {
                E1: 0.0,
                E2: 0.0,
                nu12: 0.0,
                G12: 0.0,
            },
            "Hill48Swift" => MaterialModel::Hill48Swift {
                E: 0.0,
                nu: 0.0,
                A: 0.0,
                sigma0: 0.0,
                n: 0.0,
                F: 0.0,
                G: 0.0,
                N: 0.0,
            },
            "Yld2000Swift" => MaterialModel::Yld2000Swift {
                E: 0.0,
                nu: 0.0,
                A: 0.0,
                sigma0: 0.0,
                n: 0.0,
                a: 0.0,
                alpha: [0.0; 8],
            },
            other => {
                return Err(ModelError::Invalid(format!("unknown model kind `{other}`")))
            }
        };
        let mut model = template;
        let expected = model.params_map();
        for key in params.keys() {
            if !expected.contains_key(key) {
                return Err(ModelError::UnknownParameter(key.clone()));
            }
        }
        for key in expected.keys() {
            let value = *params
                .get(key)
                .ok_or_else(|| ModelError::Invalid(format!("missing parameter `{key}`")))?;
            model.set(key, value)?;
        }
        Ok(model)
    }
}

/// On-disk shape shared by [`MaterialModel`] and [`MaterialFile`].
#[derive(Serialize, Deserialize)]
struct RawMaterialDoc {
    kind: String,
    params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    bounds: BTreeMap<String, (f64, f64)>,
}

impl Serialize for MaterialModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RawMaterialDoc {
            kind: self.kind().to_string(),
            params: self.params_map(),
            bounds: BTreeMap::new(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MaterialModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawMaterialDoc::deserialize(deserializer)?;
        MaterialModel::from_params(&raw.kind, &raw.params).map_err(serde::de::Error::custom)
    }
}

/// A material document: the model plus optional per-parameter bounds
/// used as the identification/UQ search box.  JSON form
/// `{"kind": ..., "params": {...}, "bounds": {"A": [lo, hi], ...}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialFile {
    pub model: MaterialModel,
    pub bounds: BTreeMap<String, (f64, f64)>,
}

impl MaterialFile {
    pub fn new(model: MaterialModel) -> Self {
        MaterialFile {
            model,
            bounds: BTreeMap::new(),
        }
    }

    /// Validates the model and checks that each bound refers to an
    /// identifiable parameter and is a finite, non-empty interval.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.model.validate()?;
        for (name, &(lo, hi)) in &self.bounds {
            if !self.model.param_names().contains(&name.as_str()) {
                return Err(ModelError::UnknownParameter(name.clone()));
            }
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ModelError::Invalid(format!(
                    "bounds for `{name}` must be finite with lower < upper"
                )));
            }
        }
        Ok(())
    }
}

impl Serialize for MaterialFile {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RawMaterialDoc {
            kind: self.model.kind().to_string(),
            params: self.model.params_map(),
            bounds: self.bounds.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MaterialFile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawMaterialDoc::deserialize(deserializer)?;
        let model =
            MaterialModel::from_params(&raw.kind, &raw.params).map_err(serde::de::Error::custom)?;
        Ok(MaterialFile {
            model,
            bounds: raw.bounds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Sheet-metal ground truth used throughout the test suite
    /// (Swift + Hill48, RD-normalised).
    pub fn hill_truth() -> MaterialModel {
        MaterialModel::Hill48Swift {
            E: 70_000.0,
            nu: 0.33,
            A: 471.92,
            sigma0: 123.4,
            n: 0.29,
            F: 0.278,
            G: 0.373,
            N: 2.340,
        }
    }

    #[test]
    fn swift_flow_stress_at_zero_is_sigma0() {
        let sw = Swift {
            a: 471.92,
            sigma0: 123.4,
            n: 0.29,
        };
        assert_relative_eq!(sw.flow_stress(0.0), 123.4, max_relative = 1e-12);
        // Monotone increasing, concave.
        assert!(sw.flow_stress(0.05) > sw.flow_stress(0.0));
        assert!(sw.hardening_modulus(0.05) > 0.0);
        assert!(sw.hardening_modulus(0.10) < sw.hardening_modulus(0.05));
    }

    #[test]
    fn swift_hardening_modulus_matches_fd() {
        let sw = Swift {
            a: 600.0,
            sigma0: 90.0,
            n: 0.4,
        };
        let e = 0.03;
        let h = 1e-7;
        let fd = (sw.flow_stress(e + h) - sw.flow_stress(e - h)) / (2.0 * h);
        assert_relative_eq!(sw.hardening_modulus(e), fd, max_relative = 1e-6);
    }

    #[test]
    fn iso_elastic_uniaxial_stress() {
        let m = MaterialModel::IsoElastic { E: 70_000.0, nu: 0.33 };
        // Uniaxial stress requires e22 = -nu * e11 in plane stress.
        let e11 = 1e-3;
        let s = m.elastic_stress(PlaneStrain::new(e11, -0.33 * e11, 0.0));
        assert_relative_eq!(s.s11, 70.0, max_relative = 1e-12);
        assert!(s.s22.abs() < 1e-9);
    }

    #[test]
    fn ortho_elastic_shear_decoupled() {
        let m = MaterialModel::OrthoElastic {
            E1: 210.0,
            E2: 150.0,
            nu12: 0.49,
            G12: 46.0,
        };
        m.validate().unwrap();
        let gamma = 2e-3;
        let s = m.elastic_stress(PlaneStrain::new(0.0, 0.0, 0.5 * gamma));
        assert_relative_eq!(s.t12, 46.0 * gamma, max_relative = 1e-12);
        assert_eq!(s.s11, 0.0);
        assert_eq!(s.s22, 0.0);
    }

    #[test]
    fn ortho_elastic_matrix_entries() {
        let m = MaterialModel::OrthoElastic {
            E1: 210.0,
            E2: 150.0,
            nu12: 0.49,
            G12: 46.0,
        };
        let c = m.elastic_matrix();
        let nu21 = 0.49 * 150.0 / 210.0;
        let d = 1.0 - 0.49 * nu21;
        assert_relative_eq!(c[(0, 0)], 210.0 / d, max_relative = 1e-12);
        assert_relative_eq!(c[(1, 1)], 150.0 / d, max_relative = 1e-12);
        assert_relative_eq!(c[(0, 1)], 0.49 * 150.0 / d, max_relative = 1e-12);
        assert_relative_eq!(c[(2, 2)], 46.0, max_relative = 1e-12);
    }

    #[test]
    fn yield_value_sign_convention() {
        let m = hill_truth();
        // Well inside the elastic domain.
        assert!(m.yield_value(PlaneStress::new(50.0, 0.0, 0.0), 0.0).unwrap() < 0.0);
        // RD yield happens exactly at sigma0 thanks to G + H = 1.
        let f = m.yield_value(PlaneStress::new(123.4, 0.0, 0.0), 0.0).unwrap();
        assert!(f.abs() < 1e-9, "f = {f}");
        assert!(m.yield_value(PlaneStress::new(200.0, 0.0, 0.0), 0.0).unwrap() > 0.0);
    }

    #[test]
    fn elastic_models_have_no_yield() {
        let m = MaterialModel::IsoElastic { E: 1.0, nu: 0.3 };
        assert!(m.yield_value(PlaneStress::new(1.0, 0.0, 0.0), 0.0).is_none());
        assert!(!m.is_plastic());
    }

    #[test]
    fn param_roundtrip_by_name() {
        let mut m = hill_truth();
        for &name in m.param_names() {
            let v = m.get(name).unwrap();
            m.set(name, v * 2.0).unwrap();
            assert_relative_eq!(m.get(name).unwrap(), 2.0 * v);
            m.set(name, v).unwrap();
        }
        assert_eq!(m, hill_truth());
        assert!(m.set("H", 0.5).is_err(), "H is derived, never settable");
        assert!(m.get("bogus").is_err());
    }

    #[test]
    fn model_json_roundtrip() {
        let m = MaterialModel::Yld2000Swift {
            E: 70_000.0,
            nu: 0.33,
            A: 478.95,
            sigma0: 137.93,
            n: 0.268,
            a: 8.0,
            alpha: [0.979, 0.998, 0.885, 1.008, 1.001, 0.965, 0.953, 1.242],
        };
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"kind\":\"Yld2000Swift\""));
        assert!(text.contains("\"params\""));
        let back: MaterialModel = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);

        let doc = r#"{"kind":"Hill48Swift","params":{
                      "E":70000.0,"nu":0.33,
                      "A":471.92,"sigma0":123.4,"n":0.29,
                      "F":0.278,"G":0.373,"N":2.34}}"#;
        let h: MaterialModel = serde_json::from_str(doc).unwrap();
        h.validate().unwrap();

        // Unknown keys (including the derived H) are rejected.
        let bad = r#"{"kind":"Hill48Swift","params":{
                      "E":70000.0,"nu":0.33,
                      "A":471.92,"sigma0":123.4,"n":0.29,
                      "F":0.278,"G":0.373,"H":0.627,"N":2.34}}"#;
        assert!(serde_json::from_str::<MaterialModel>(bad).is_err());
    }

    #[test]
    fn material_file_bounds_roundtrip() {
        let mut file = MaterialFile::new(hill_truth());
        file.bounds.insert("A".to_string(), (200.0, 800.0));
        file.bounds.insert("n".to_string(), (0.05, 0.6));
        file.validate().unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let back: MaterialFile = serde_json::from_str(&text).unwrap();
        assert_eq!(file, back);

        // A bare model document (no bounds key) parses with empty bounds.
        let bare: MaterialFile =
            serde_json::from_str(&serde_json::to_string(&hill_truth()).unwrap()).unwrap();
        assert!(bare.bounds.is_empty());

        // Bounds on the derived H or with lo >= hi are invalid.
        let mut bad = file.clone();
        bad.bounds.insert("H".to_string(), (0.0, 1.0));
        assert!(bad.validate().is_err());
        let mut bad = file;
        bad.bounds.insert("A".to_string(), (800.0, 200.0));
        assert!(bad.validate().is_err());
    }

    #[test]
    fn swift_eps0_and_flow_curve_values() {
        let sw = Swift {
            a: 471.92,
            sigma0: 123.4,
            n: 0.29,
        };
        // eps0 = (123.4 / 471.92)^(1/0.29), evaluated independently.
        assert_relative_eq!(sw.eps0(), 9.7993e-3, max_relative = 1e-4);
        assert_relative_eq!(sw.flow_stress(0.1), 248.68, max_relative = 1e-4);
    }

    #[test]
    fn validation_rejects_bad_domains() {
        let mut m = hill_truth();
        m.set("G", 1.2).unwrap(); // would give H < 0
        assert!(m.validate().is_err());
        let mut m = hill_truth();
        m.set("n", 1.5).unwrap();
        assert!(m.validate().is_err());
        let m = MaterialModel::OrthoElastic {
            E1: 210.0,
            E2: 150.0,
            nu12: 1.3,
            G12: 46.0,
        };
        assert!(m.validate().is_err());
    }

    #[test]
    fn yld_exponent_restricted_to_bcc_fcc() {
        let mut m = MaterialModel::Yld2000Swift {
            E: 70_000.0,
            nu: 0.33,
            A: 478.95,
            sigma0: 137.93,
            n: 0.268,
            a: 8.0,
            alpha: [1.0; 8],
        };
        m.validate().unwrap();
        m.set("a", 6.0).unwrap();
        m.validate().unwrap();
        for bad in [2.0, 4.0, 7.0, 8.5] {
            m.set("a", bad).unwrap();
            assert!(m.validate().is_err(), "a = {bad} must be rejected");
        }
    }
}
