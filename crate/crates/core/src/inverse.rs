//! Deterministic parameter identification: strain-mismatch objective and
//! a bound-constrained Nelder–Mead simplex search.
//!
//! The optimizer works in a normalized unit box (each free parameter
//! affinely mapped from its bounds), which keeps the simplex geometry
//! sane when parameters span orders of magnitude.  Out-of-box vertices
//! are projected back onto the box.  Termination: the largest
//! box-relative distance from any vertex to the best vertex drops below
//! `tol`, or the iteration budget runs out (flagged).

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constitutive::{MaterialModel, ModelError};
use crate::fem::{generate_mesh, solve, FieldHistory, LoadProtocol, Mesh, MeshError,
    SpecimenGeometry};

/// Loss reported when the forward solve fails at a candidate point; large
/// enough that the simplex retreats, finite so ordering still works.
pub const FAILURE_SENTINEL: f64 = 1e12;

/// Weight of the quadratic yield-surface normalization penalty used for
/// models with a redundant anisotropy scale (see [`objective`]).
const NORMALIZATION_WEIGHT: f64 = 1e4;

#[derive(Debug, Error)]
pub enum InverseError {
    #[error("unknown free parameter `{0}`")]
    UnknownParameter(String),
    #[error("free parameter `{0}` has no bounds")]
    MissingBounds(String),
    #[error("bounds for `{0}` must be finite with lower < upper")]
    BadBounds(String),
    #[error("start value {1} for `{0}` lies outside its bounds")]
    StartOutOfBounds(String, f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Everything needed to evaluate candidate parameter sets against one
/// synthetic experiment.
#[derive(Debug, Clone)]
pub struct IdentificationProblem {
    /// Model whose named parameters are replaced by candidates.
    pub template: MaterialModel,
    /// Free parameter names, fixing the order of `theta` vectors.
    pub free: Vec<String>,
    /// Box bounds per free parameter, same order.
    pub bounds: Vec<(f64, f64)>,
    /// The synthetic experiment (possibly floored/noised/masked).
    pub reference: FieldHistory,
    pub mesh: Mesh,
    pub protocol: LoadProtocol,
}

impl IdentificationProblem {
    /// Build a problem, meshing `geometry` at size `h`.  Bounds come as
    /// `(name, lo, hi)` triples and must cover every free name.
    pub fn new(
        template: MaterialModel,
        free: Vec<String>,
        bounds: &[(String, f64, f64)],
        reference: FieldHistory,
        geometry: &SpecimenGeometry,
        h: f64,
        protocol: LoadProtocol,
    ) -> Result<Self, InverseError> {
        let names = template.param_names();
        let mut ordered = Vec::with_capacity(free.len());
        for f in &free {
            if !names.iter().any(|n| n == f) {
                return Err(InverseError::UnknownParameter(f.clone()));
            }
            let (_, lo, hi) = bounds
                .iter()
                .find(|(n, _, _)| n == f)
                .ok_or_else(|| InverseError::MissingBounds(f.clone()))?;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(InverseError::BadBounds(f.clone()));
            }
            ordered.push((*lo, *hi));
        }
        let mesh = generate_mesh(geometry, h)?;
        Ok(IdentificationProblem {
            template,
            free,
            bounds: ordered,
            reference,
            mesh,
            protocol,
        })
    }

    /// The template with `theta` written into the free parameters.
    pub fn model_at(&self, theta: &[f64]) -> Result<MaterialModel, InverseError> {
        if theta.len() != self.free.len() {
            return Err(InverseError::DimensionMismatch {
                expected: self.free.len(),
                got: theta.len(),
            });
        }
        let mut m = self.template.clone();
        for (name, &v) in self.free.iter().zip(theta) {
            m.set(name, v)?;
        }
        Ok(m)
    }
}

/// Mean squared strain mismatch between two histories over the valid
/// points: `L = (1/n_valid) Σ_steps Σ_valid ‖ε̂ − ε(θ)‖²`, the shear
/// component entering once, as stored (tensorial).
pub fn strain_mismatch(reference: &FieldHistory, candidate: &FieldHistory) -> f64 {
    assert_eq!(reference.n_points, candidate.n_points);
    assert_eq!(reference.snapshots.len(), candidate.snapshots.len());
    let n_valid = reference.valid.iter().filter(|v| **v).count();
    if n_valid == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (rs, cs) in reference.snapshots.iter().zip(&candidate.snapshots) {
        for (j, (rp, cp)) in rs.points.iter().zip(&cs.points).enumerate() {
            if !reference.valid[j] {
                continue;
            }
            let d = Vector3::new(
                rp.strain.e11 - cp.strain.e11,
                rp.strain.e22 - cp.strain.e22,
                rp.strain.e12 - cp.strain.e12,
            );
            sum += d.norm_squared();
        }
    }
    sum / n_valid as f64
}

/// Forward-solve at `theta` and score against the reference.  Returns
/// the loss and whether the solver succeeded (failures score
/// [`FAILURE_SENTINEL`]).
///
/// Models with a redundant anisotropy scale (the eight-coefficient
/// non-quadratic surface) additionally pay a quadratic penalty
/// `1e4 · σ0² · (σ̄(e1) − 1)²` pinning the uniaxial-RD normalization.
pub fn objective(p: &IdentificationProblem, theta: &[f64]) -> (f64, bool) {
    let Ok(model) = p.model_at(theta) else {
        return (FAILURE_SENTINEL, false);
    };
    if model.validate().is_err() {
        return (FAILURE_SENTINEL, false);
    }
    let penalty = normalization_penalty(&model);
    match solve(&p.mesh, &model, &p.protocol) {
        Ok(candidate) => (strain_mismatch(&p.reference, &candidate) + penalty, true),
        Err(_) => (FAILURE_SENTINEL, false),
    }
}

fn normalization_penalty(model: &MaterialModel) -> f64 {
    let MaterialModel::Yld2000Swift { sigma0, .. } = model else {
        return 0.0;
    };
    let Some(surface) = model.surface() else {
        return 0.0;
    };
    let e1 = Vector3::new(1.0, 0.0, 0.0);
    let dev = surface.sigma_bar(&e1) - 1.0;
    NORMALIZATION_WEIGHT * sigma0 * sigma0 * dev * dev
}

/// Outcome of a Nelder–Mead run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub free: Vec<String>,
    pub theta_hat: Vec<f64>,
    pub loss: f64,
    /// Best loss per iteration as `(L, L / L_first)`.
    pub loss_history: Vec<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective evaluations that hit the failure sentinel.
    pub solver_failures: usize,
    /// Per-parameter |θ̂ − θ*| / |θ*| in percent, when truth was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub errors_pct: Option<Vec<f64>>,
}

/// Bound-constrained Nelder–Mead with standard coefficients
/// (reflect 1, expand 2, contract 0.5, shrink 0.5).
///
/// `f` is evaluated in original coordinates; internally the search runs
/// in the unit box.  The initial simplex offsets each axis by 5% of its
/// range (flipped inward at the upper edge).
pub fn nelder_mead<F>(
    mut f: F,
    theta0: &[f64],
    bounds: &[(f64, f64)],
    tol: f64,
    max_iter: usize,
) -> IdentificationResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = theta0.len();
    assert_eq!(bounds.len(), dim);
    assert!(dim > 0);
    let denorm = |xn: &[f64]| -> Vec<f64> {
        xn.iter()
            .zip(bounds)
            .map(|(x, (lo, hi))| lo + x.clamp(0.0, 1.0) * (hi - lo))
            .collect()
    };
    let norm = |x: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(bounds)
            .map(|(v, (lo, hi))| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect()
    };
    let clamp01 = |x: &mut [f64]| x.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));

    let mut evals = 0usize;
    let mut eval = |xn: &[f64], f: &mut F| -> f64 {
        evals += 1;
        f(&denorm(xn))
    };

    // Initial simplex around the (normalized) start.
    let x0 = norm(theta0);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(&x0, &mut f);
    simplex.push((x0.clone(), f0));
    for i in 0..dim {
        let mut v = x0.clone();
        v[i] = if v[i] + 0.05 <= 1.0 { v[i] + 0.05 } else { v[i] - 0.05 };
        let fv = eval(&v, &mut f);
        simplex.push((v, fv));
    }

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        history.push(simplex[0].1);

        // Spread of the simplex around the best vertex, in box units.
        let spread = simplex[1..]
            .iter()
            .flat_map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
            })
            .fold(0.0f64, f64::max);
        if spread < tol {
            converged = true;
            break;
        }

        let worst = simplex[dim].clone();
        let mut centroid = vec![0.0; dim];
        for (v, _) in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let blend = |a: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + a * (c - w))
                .collect();
            clamp01(&mut x);
            x
        };

        let xr = blend(1.0);
        let fr = eval(&xr, &mut f);
        if fr < simplex[0].1 {
            let xe = blend(2.0);
            let fe = eval(&xe, &mut f);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let xc = if fr < worst.1 { blend(0.5) } else { blend(-0.5) };
            let fc = eval(&xc, &mut f);
            if fc < worst.1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for (v, fv) in simplex.iter_mut().skip(1) {
                    for (x, b) in v.iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    *fv = eval(v, &mut f);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let l_first = history.first().copied().unwrap_or(simplex[0].1);
    let loss_history = history
        .iter()
        .map(|&l| (l, if l_first > 0.0 { l / l_first } else { 1.0 }))
        .collect();
    IdentificationResult {
        free: Vec::new(),
        theta_hat: denorm(&simplex[0].0),
        loss: simplex[0].1,
        loss_history,
        iterations,
        converged,
        solver_failures: 0,
        errors_pct: None,
    }
}

/// Run the full identification: Nelder–Mead on [`objective`] from
/// `theta0`, optionally scoring against a known ground truth.
pub fn identify(
    problem: &IdentificationProblem,
    theta0: &[f64],
    truth: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<IdentificationResult, InverseError> {
    if theta0.len() != problem.free.len() {
        return Err(InverseError::DimensionMismatch {
            expected: problem.free.len(),
            got: theta0.len(),
        });
    }
    for ((name, &v), (lo, hi)) in problem
        .free
        .iter()
        .zip(theta0)
        .zip(&problem.bounds)
    {
        if v < *lo || v > *hi {
            return Err(InverseError::StartOutOfBounds(name.clone(), v));
        }
    }
    let mut failures = 0usize;
    let mut result = nelder_mead(
        |theta| {
            let (l, ok) = objective(problem, theta);
            if !ok {
                failures += 1;
            }
            l
        },
        theta0,
        &problem.bounds,
        tol,
        max_iter,
    );
    result.free = problem.free.clone();
    result.solver_failures = failures;
    if let Some(t) = truth {
        result.errors_pct = Some(
            result
                .theta_hat
                .iter()
                .zip(t)
                .map(|(a, b)| 100.0 * (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
                .collect(),
        );
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::MaterialModel;
    use crate::stress::{PlaneStrain, PlaneStress};

    fn hill_truth() -> MaterialModel {
        MaterialModel::Hill48Swift {
            E: 70000.0,
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
    fn mismatch_definition_on_a_single_point() {
        use crate::fem::solver::{SamplePoint, Snapshot};
        use std::collections::BTreeMap;
        let mk = |e11: f64| FieldHistory {
            snapshots: vec![Snapshot {
                step: 1,
                load_factor: 1.0,
                applied: BTreeMap::new(),
                reactions: BTreeMap::new(),
                points: vec![SamplePoint {
                    elem: 0,
                    x: 0.0,
                    y: 0.0,
                    strain: PlaneStrain::new(e11, 0.0, 0.0),
                    stress: PlaneStress::new(0.0, 0.0, 0.0),
                    ebar_p: 0.0,
                }],
            }],
            valid: vec![true],
            n_points: 1,
        };
        let l = strain_mismatch(&mk(1e-3), &mk(0.0));
        assert!((l - 1e-6).abs() < 1e-20);
        // Duplicating every point leaves L unchanged.
        let mut r2 = mk(1e-3);
        let mut c2 = mk(0.0);
        let rp = r2.snapshots[0].points[0];
        let cp = c2.snapshots[0].points[0];
        r2.snapshots[0].points.push(rp);
        c2.snapshots[0].points.push(cp);
        r2.valid.push(true);
        c2.valid.push(true);
        r2.n_points = 2;
        c2.n_points = 2;
        assert_eq!(strain_mismatch(&r2, &c2), l);
        // Masked points carry no weight.
        r2.valid[1] = false;
        c2.snapshots[0].points[1].strain.e11 = 99.0;
        assert_eq!(strain_mismatch(&r2, &c2), l);
    }

    #[test]
    fn quadratic_minimum_is_found() {
        let r = nelder_mead(|x| (x[0] - 3.0).powi(2), &[0.0], &[(-10.0, 10.0)], 1e-8, 500);
        assert!(r.converged);
        assert!((r.theta_hat[0] - 3.0).abs() < 1e-6, "{}", r.theta_hat[0]);
    }

    #[test]
    fn rosenbrock_is_solved() {
        let rosen =
            |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(
            rosen,
            &[-1.2, 1.0],
            &[(-5.0, 5.0), (-5.0, 5.0)],
            1e-10,
            4000,
        );
        assert!(r.converged);
        assert!((r.theta_hat[0] - 1.0).abs() < 1e-4, "{:?}", r.theta_hat);
        assert!((r.theta_hat[1] - 1.0).abs() < 1e-4, "{:?}", r.theta_hat);
    }

    #[test]
    fn best_loss_is_non_increasing_and_bounds_respected() {
        let r = nelder_mead(
            |x| x[0].sin() * 10.0 + x[1] * x[1],
            &[2.0, 3.0],
            &[(0.0, 4.0), (-4.0, 4.0)],
            1e-9,
            300,
        );
        for w in r.loss_history.windows(2) {
            assert!(w[1].0 <= w[0].0 + 1e-15);
        }
        assert!(r.theta_hat[0] >= 0.0 && r.theta_hat[0] <= 4.0);
        // Relative-loss channel starts at 1.
        assert_eq!(r.loss_history[0].1, 1.0);
    }

    #[test]
    fn iteration_budget_flags_non_convergence() {
        let r = nelder_mead(|x| x[0] * x[0], &[5.0], &[(-10.0, 10.0)], 1e-14, 3);
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    fn small_problem(reference: FieldHistory) -> IdentificationProblem {
        let g = crate::fem::SpecimenGeometry::rectangle(10.0, 10.0);
        IdentificationProblem::new(
            hill_truth(),
            vec!["A".into(), "n".into()],
            &[
                ("A".into(), 300.0, 700.0),
                ("n".into(), 0.1, 0.5),
            ],
            reference,
            &g,
            2.5,
            crate::fem::LoadProtocol::uniaxial_x(0.4, 5),
        )
        .unwrap()
    }

    fn reference_field() -> FieldHistory {
        let g = crate::fem::SpecimenGeometry::rectangle(10.0, 10.0);
        let mesh = crate::fem::generate_mesh(&g, 2.5).unwrap();
        crate::fem::solve(
            &mesh,
            &hill_truth(),
            &crate::fem::LoadProtocol::uniaxial_x(0.4, 5),
        )
        .unwrap()
    }

    #[test]
    fn loss_at_ground_truth_is_zero() {
        let p = small_problem(reference_field());
        let (l, ok) = objective(&p, &[471.92, 0.29]);
        assert!(ok);
        assert!(l < 1e-12, "loss at truth {l}");
    }

    #[test]
    fn hardening_round_trip_recovers_parameters() {
        let p = small_problem(reference_field());
        let r = identify(&p, &[600.0, 0.4], Some(&[471.92, 0.29]), 1e-8, 400).unwrap();
        assert!(r.converged, "iterations {}", r.iterations);
        let errs = r.errors_pct.as_ref().unwrap();
        assert!(errs[0] < 1.0, "A error {}%", errs[0]);
        assert!(errs[1] < 1.0, "n error {}%", errs[1]);
        assert!(r.loss <= 1e-12 + objective(&p, &[471.92, 0.29]).0);
        assert_eq!(r.solver_failures, 0);
    }

    #[test]
    fn problem_validation_catches_mistakes() {
        let g = crate::fem::SpecimenGeometry::rectangle(10.0, 10.0);
        let r = reference_field();
        let e = IdentificationProblem::new(
            hill_truth(),
            vec!["H".into()],
            &[("H".into(), 0.0, 1.0)],
            r.clone(),
            &g,
            2.5,
            crate::fem::LoadProtocol::uniaxial_x(0.4, 5),
        );
        assert!(matches!(e, Err(InverseError::UnknownParameter(_))));
        let e = IdentificationProblem::new(
            hill_truth(),
            vec!["A".into()],
            &[("A".into(), 700.0, 300.0)],
            r.clone(),
            &g,
            2.5,
            crate::fem::LoadProtocol::uniaxial_x(0.4, 5),
        );
        assert!(matches!(e, Err(InverseError::BadBounds(_))));
        let p = small_problem(r);
        let e = identify(&p, &[900.0, 0.3], None, 1e-8, 10);
        assert!(matches!(e, Err(InverseError::StartOutOfBounds(_, _))));
    }
}
