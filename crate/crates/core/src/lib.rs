//! Toolkit for designing and exploiting heterogeneous sheet-metal tests.
//!
//! The crate covers the full pipeline used in inverse material
//! characterisation from full-field (DIC-like) measurements:
//!
//! * [`stress`] — plane-stress descriptors: principal stresses, von Mises
//!   equivalent stress, triaxiality and Lode angle parameter.
//! * [`constitutive`] — material models (isotropic/orthotropic elasticity,
//!   Hill48 and Yld2000-2d yield surfaces with Swift hardening) and the
//!   implicit return-mapping stress update.
//! * [`fem`] — parametric specimen geometries, pixel meshing and an implicit
//!   quasi-static plane-stress FE solver with 4-node quadrilaterals.
//! * [`entropy`] — stress-state classification and the stress-state entropy
//!   of a deformed specimen, plus the optimal-entropy test criterion.
//! * [`synth`] — synthetic measurement generation: strain resolution floor,
//!   Gaussian noise, missing-data masks.
//! * [`inverse`] — full-field identification: least-squares strain objective
//!   and a bound-constrained Nelder–Mead simplex search.
//! * [`design`] — Tree-structured Parzen Estimator (TPE) optimisation of
//!   specimen geometry: entropy maximisation and shear-specimen design.
//! * [`uq`] — random-walk Metropolis–Hastings posterior sampling and
//!   credible bands for identified material behaviour.
//! * [`io`] — CSV/JSON export with full-precision round-tripping floats.
//!
//! All stochastic components are seeded explicitly and bit-reproducible.

pub mod constitutive;
pub mod design;
pub mod entropy;
pub mod fem;
pub mod inverse;
pub mod io;
pub mod stress;
pub mod synth;
pub mod uq;
