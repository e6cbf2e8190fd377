//! Implicit (backward-Euler) elastoplastic stress update.
//!
//! Given a converged state and a total-strain increment, the update
//! computes the trial elastic stress and, if it violates the yield
//! condition, returns the stress to the hardened yield surface along the
//! associative flow direction (closest-point projection).
//!
//! Both yield functions are positively homogeneous of degree one, so the
//! plastic work identity `s : deps_p = dlam * sigma_bar` makes the
//! equivalent-plastic-strain increment equal the plastic multiplier:
//! `d ebar_p = dlam`.
//!
//! The coupled system solved for `(s, dlam)` is
//!
//! ```text
//! R_s = s - s_trial + dlam * C m(s) = 0      (m = d sigma_bar / d s)
//! R_f = sigma_bar(s) - sigma_Y(ebar_p0 + dlam) = 0
//! ```
//!
//! by a damped Newton iteration (at most [`MAX_NEWTON_ITERATIONS`]); if
//! that fails, a robust fallback brackets `dlam` and bisects on the
//! consistency residual, solving the inner stress equation by its own
//! Newton loop.  If the fallback also fails the step is rejected and the
//! caller may sub-step.

use super::{MaterialModel, MaterialState, StepError, Surface, Voigt};
use crate::stress::{PlaneStrain, PlaneStress};
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

/// Iteration cap of the coupled Newton solve.
pub const MAX_NEWTON_ITERATIONS: usize = 50;

/// Relative tolerance (on the stress scale) for the consistency residual.
const TOL_REL: f64 = 1e-10;

/// Relative tolerance for the stress-equation block.  Its evaluation uses
/// the finite-difference flow direction amplified by `dlam * C`, which
/// leaves noise of order `1e-9 * E * dlam` in the residual; a tighter
/// setting would sit below that floor and never be reached.  The final
/// scalar consistency polish restores a 1e-10-level yield residual on the
/// returned stress.
const TOL_STRESS_REL: f64 = 1e-8;

impl MaterialModel {
    /// Advances a material point by the total-strain increment `deps`
    /// (tensorial shear).  Returns the new state and the end-of-step
    /// stress.
    ///
    /// A zero increment leaves state and stress bit-identical; elastic
    /// models never reject a step.
    pub fn integrate_step(
        &self,
        state: &MaterialState,
        deps: PlaneStrain,
    ) -> Result<(MaterialState, PlaneStress), StepError> {
        let eps_new = PlaneStrain::new(
            state.eps.e11 + deps.e11,
            state.eps.e22 + deps.e22,
            state.eps.e12 + deps.e12,
        );
        let c = self.elastic_matrix();
        // Elastic trial strain in engineering form.
        let e_tr = Voigt::new(
            eps_new.e11 - state.eps_p.e11,
            eps_new.e22 - state.eps_p.e22,
            2.0 * (eps_new.e12 - state.eps_p.e12),
        );
        let s_tr = c * e_tr;

        let (surf, hard) = match (self.surface(), self.swift()) {
            (Some(surf), Some(hard)) => (surf, hard),
            _ => {
                // Purely elastic model.
                let new = MaterialState {
                    eps: eps_new,
                    ..*state
                };
                return Ok((new, PlaneStress::new(s_tr[0], s_tr[1], s_tr[2])));
            }
        };

        let sb_tr = surf.sigma_bar(&s_tr);
        let scale = hard.sigma0.max(sb_tr);
        let f_tr = sb_tr - hard.flow_stress(state.ebar_p);
        if f_tr <= TOL_REL * scale {
            let new = MaterialState {
                eps: eps_new,
                ..*state
            };
            return Ok((new, PlaneStress::new(s_tr[0], s_tr[1], s_tr[2])));
        }

        let (s_end, dlam) = newton_return(&surf, &hard, &c, &s_tr, state.ebar_p, scale)
            .or_else(|_| bisection_return(&surf, &hard, &c, &s_tr, state.ebar_p, scale))?;

        let m = surf.grad(&s_end);
        // Consistency polish: with the flow direction frozen at the
        // converged point, the multiplier solves the noise-free scalar
        // equation sigma_bar(s_tr - d C m) = sigma_Y(ebar0 + d).  A few
        // secant steps push the yield residual of the *returned* stress to
        // the 1e-10 level, well inside the documented drift bound.
        let cm = c * m;
        let ebar0 = state.ebar_p;
        let g = |d: f64| {
            let s = s_tr - cm * d;
            surf.sigma_bar(&s) - hard.flow_stress(ebar0 + d)
        };
        let dlam = {
            let (mut d0, mut d1) = (dlam, dlam * (1.0 + 1e-7) + 1e-16);
            let (mut g0, mut g1) = (g(d0), g(d1));
            for _ in 0..20 {
                if g1.abs() <= 1e-12 * scale || g1 == g0 {
                    break;
                }
                let d2 = (d1 - g1 * (d1 - d0) / (g1 - g0)).max(0.0);
                d0 = d1;
                g0 = g1;
                d1 = d2;
                g1 = g(d1);
            }
            if g1.abs() <= TOL_REL * scale {
                d1
            } else {
                dlam
            }
        };
        let new = MaterialState {
            eps: eps_new,
            eps_p: PlaneStrain::new(
                state.eps_p.e11 + dlam * m[0],
                state.eps_p.e22 + dlam * m[1],
                state.eps_p.e12 + 0.5 * dlam * m[2],
            ),
            ebar_p: state.ebar_p + dlam,
        };
        // Return the stress recomputed from the updated state rather than
        // the Newton iterate: the two agree to the residual tolerance, and
        // this keeps the returned stress an exact function of the state
        // (a zero increment then reproduces it bit for bit).
        let e_el = Voigt::new(
            eps_new.e11 - new.eps_p.e11,
            eps_new.e22 - new.eps_p.e22,
            2.0 * (eps_new.e12 - new.eps_p.e12),
        );
        let s_out = c * e_el;
        Ok((new, PlaneStress::new(s_out[0], s_out[1], s_out[2])))
    }
}

/// Symmetrised central-difference Hessian of `sigma_bar`.
fn hessian_fd(surf: &Surface, s: &Voigt, step: f64) -> Matrix3<f64> {
    let mut h = Matrix3::zeros();
    for k in 0..3 {
        let mut sp = *s;
        let mut sm = *s;
        sp[k] += step;
        sm[k] -= step;
        let col = (surf.grad(&sp) - surf.grad(&sm)) / (2.0 * step);
        h.set_column(k, &col);
    }
    0.5 * (h + h.transpose())
}

fn residual(
    surf: &Surface,
    hard: &super::Swift,
    c: &Matrix3<f64>,
    s_tr: &Voigt,
    ebar0: f64,
    s: &Voigt,
    dlam: f64,
) -> Vector4<f64> {
    let m = surf.grad(s);
    let rs = s - s_tr + c * m * dlam;
    let rf = surf.sigma_bar(s) - hard.flow_stress(ebar0 + dlam);
    Vector4::new(rs[0], rs[1], rs[2], rf)
}

/// Coupled Newton iteration on `(s, dlam)` with step damping.
fn newton_return(
    surf: &Surface,
    hard: &super::Swift,
    c: &Matrix3<f64>,
    s_tr: &Voigt,
    ebar0: f64,
    scale: f64,
) -> Result<(Voigt, f64), StepError> {
    let tol_f = TOL_REL * scale;
    let tol_s = TOL_STRESS_REL * scale;
    let fd_step = 1e-6 * scale;
    let mut s = *s_tr;
    let mut dlam = 0.0_f64;
    let mut r = residual(surf, hard, c, s_tr, ebar0, &s, dlam);

    for _ in 0..MAX_NEWTON_ITERATIONS {
        if r.fixed_rows::<3>(0).norm() <= tol_s && r[3].abs() <= tol_f {
            return Ok((s, dlam));
        }
        let m = surf.grad(&s);
        let hm = hessian_fd(surf, &s, fd_step);
        let jss = Matrix3::identity() + c * hm * dlam;
        let cm = c * m;
        let mut j = Matrix4::zeros();
        j.fixed_view_mut::<3, 3>(0, 0).copy_from(&jss);
        j.fixed_view_mut::<3, 1>(0, 3).copy_from(&cm);
        j.fixed_view_mut::<1, 3>(3, 0).copy_from(&m.transpose());
        j[(3, 3)] = -hard.hardening_modulus(ebar0 + dlam);

        let delta = j
            .lu()
            .solve(&(-r))
            .ok_or(StepError::ReturnMapDiverged)?;

        // Damped update: backtrack until the residual norm decreases.
        let r_norm = r.norm();
        let mut step = 1.0_f64;
        let mut accepted = false;
        for _ in 0..12 {
            let s_try = s + step * Vector3::new(delta[0], delta[1], delta[2]);
            let d_try = (dlam + step * delta[3]).max(0.0);
            let r_try = residual(surf, hard, c, s_tr, ebar0, &s_try, d_try);
            if r_try.norm() < r_norm || r_try.norm() <= tol_s {
                s = s_try;
                dlam = d_try;
                r = r_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(StepError::ReturnMapDiverged);
        }
        if !(r.norm().is_finite()) {
            return Err(StepError::ReturnMapDiverged);
        }
    }
    if r.fixed_rows::<3>(0).norm() <= tol_s && r[3].abs() <= tol_f {
        Ok((s, dlam))
    } else {
        Err(StepError::ReturnMapDiverged)
    }
}

/// Fallback: bisection on the consistency residual
/// `F(dlam) = sigma_bar(s(dlam)) - sigma_Y(ebar0 + dlam)`, which decreases
/// monotonically in `dlam`; the inner stress equation is solved by its
/// own damped Newton loop.
fn bisection_return(
    surf: &Surface,
    hard: &super::Swift,
    c: &Matrix3<f64>,
    s_tr: &Voigt,
    ebar0: f64,
    scale: f64,
) -> Result<(Voigt, f64), StepError> {
    let tol_f = TOL_REL * scale;
    let tol_s = TOL_STRESS_REL * scale;
    let fd_step = 1e-6 * scale;

    let inner_solve = |dlam: f64, s_init: &Voigt| -> Option<Voigt> {
        let mut s = *s_init;
        for _ in 0..60 {
            let m = surf.grad(&s);
            let rs = s - s_tr + c * m * dlam;
            if rs.norm() <= tol_s {
                return Some(s);
            }
            let hm = hessian_fd(surf, &s, fd_step);
            let jss = Matrix3::identity() + c * hm * dlam;
            let delta = jss.lu().solve(&(-rs))?;
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..10 {
                let s_try = s + step * delta;
                let m_try = surf.grad(&s_try);
                let r_try = s_try - s_tr + c * m_try * dlam;
                if r_try.norm() < rs.norm() {
                    s = s_try;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                return None;
            }
        }
        None
    };

    let consistency = |dlam: f64, s_init: &Voigt| -> Option<(f64, Voigt)> {
        let s = inner_solve(dlam, s_init)?;
        Some((surf.sigma_bar(&s) - hard.flow_stress(ebar0 + dlam), s))
    };

    // Bracket the root: F(0) = f_trial > 0; expand hi until F(hi) < 0.
    let m_tr = surf.grad(s_tr);
    let denom = (c * m_tr).dot(&m_tr) + hard.hardening_modulus(ebar0);
    let f_tr = surf.sigma_bar(s_tr) - hard.flow_stress(ebar0);
    let mut lo = 0.0_f64;
    let mut s_lo = *s_tr;
    let mut hi = (f_tr / denom).max(1e-16);
    let mut s_hint = *s_tr;
    let mut f_hi;
    let mut tries = 0;
    loop {
        match consistency(hi, &s_hint) {
            Some((f, s)) => {
                f_hi = f;
                s_hint = s;
                if f_hi < 0.0 {
                    break;
                }
                lo = hi;
                s_lo = s;
                hi *= 2.0;
            }
            None => return Err(StepError::ReturnMapDiverged),
        }
        tries += 1;
        if tries > 100 {
            return Err(StepError::ReturnMapDiverged);
        }
    }

    // Bisect.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (f_mid, s_mid) =
            consistency(mid, &s_lo).ok_or(StepError::ReturnMapDiverged)?;
        if f_mid.abs() <= tol_f {
            return Ok((s_mid, mid));
        }
        if f_mid > 0.0 {
            lo = mid;
            s_lo = s_mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-17 * hi.max(1e-12) {
            return Ok((s_mid, mid));
        }
    }
    Err(StepError::ReturnMapDiverged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn von_mises_swift() -> MaterialModel {
        MaterialModel::Hill48Swift {
            E: 70_000.0,
            nu: 0.33,
            A: 471.92,
            sigma0: 123.4,
            n: 0.29,
            F: 0.5,
            G: 0.5,
            N: 1.5,
        }
    }

    fn hill_sheet() -> MaterialModel {
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

    fn yld_sheet() -> MaterialModel {
        MaterialModel::Yld2000Swift {
            E: 70_000.0,
            nu: 0.33,
            A: 478.95,
            sigma0: 137.93,
            n: 0.268,
            a: 8.0,
            alpha: [0.979, 0.998, 0.885, 1.008, 1.001, 0.965, 0.953, 1.242],
        }
    }

    #[test]
    fn zero_increment_is_identity() {
        let m = hill_sheet();
        let state = MaterialState::default();
        let (s1, stress1) = m.integrate_step(&state, PlaneStrain::zero()).unwrap();
        assert_eq!(s1, state);
        assert_eq!(stress1, PlaneStress::zero());

        // Also after plastic flow has occurred.
        let (s2, stress2) = m
            .integrate_step(&state, PlaneStrain::new(0.01, -0.004, 0.003))
            .unwrap();
        assert!(s2.ebar_p > 0.0);
        let (s3, stress3) = m.integrate_step(&s2, PlaneStrain::zero()).unwrap();
        assert_eq!(s2, s3);
        assert_eq!(stress2, stress3);
    }

    #[test]
    fn elastic_below_yield() {
        let m = hill_sheet();
        let deps = PlaneStrain::new(1e-3, -0.33e-3, 0.0);
        let (state, stress) = m.integrate_step(&MaterialState::default(), deps).unwrap();
        assert_eq!(state.ebar_p, 0.0);
        let elastic = m.elastic_stress(deps);
        assert_abs_diff_eq!(stress.s11, elastic.s11, epsilon = 1e-12);
        assert_abs_diff_eq!(stress.s22, elastic.s22, epsilon = 1e-12);
    }

    /// Independent scalar oracle for monotonic pure shear.
    ///
    /// With sigma = (0, 0, tau) the Hill48 surface reduces to
    /// `sigma_bar = sqrt(2N) tau` and the flow direction stays fixed, so
    /// backward Euler is exact: the cumulative multiplier solves
    /// `sqrt(2N) G_mod (gamma - sqrt(2N) lam) = A (eps0 + lam)^n`.
    fn shear_oracle(model: &MaterialModel, gamma: f64) -> (f64, f64) {
        let (g_mod, hard, k) = match *model {
            MaterialModel::Hill48Swift { E, nu, N, .. } => (
                0.5 * E / (1.0 + nu),
                model.swift().unwrap(),
                (2.0 * N).sqrt(),
            ),
            _ => unreachable!(),
        };
        let tau_y = hard.sigma0 / k;
        if g_mod * gamma <= tau_y {
            return (g_mod * gamma, 0.0);
        }
        // Bisection on lam.
        let fval = |lam: f64| k * g_mod * (gamma - k * lam) - hard.flow_stress(lam);
        let (mut lo, mut hi) = (0.0, gamma / k);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fval(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lam = 0.5 * (lo + hi);
        (g_mod * (gamma - k * lam), lam)
    }

    #[test]
    fn pure_shear_matches_scalar_oracle() {
        for model in [von_mises_swift(), hill_sheet()] {
            let mut state = MaterialState::default();
            let n_steps = 10;
            let gamma_total = 0.05;
            let mut stress = PlaneStress::zero();
            for i in 0..n_steps {
                let dgamma = gamma_total / n_steps as f64;
                let deps = PlaneStrain::new(0.0, 0.0, 0.5 * dgamma);
                let (s, t) = model.integrate_step(&state, deps).unwrap();
                state = s;
                stress = t;
                let gamma = gamma_total * (i + 1) as f64 / n_steps as f64;
                let (tau_ref, lam_ref) = shear_oracle(&model, gamma);
                assert_relative_eq!(stress.t12, tau_ref, max_relative = 1e-7);
                assert_abs_diff_eq!(state.ebar_p, lam_ref, epsilon = 1e-9);
                // The stress state stays pure shear.
                assert!(stress.s11.abs() < 1e-8 && stress.s22.abs() < 1e-8);
            }
            // Backward Euler is exact on this proportional path, so a single
            // large step lands on the same point.
            let (one, tone) = model
                .integrate_step(
                    &MaterialState::default(),
                    PlaneStrain::new(0.0, 0.0, 0.5 * gamma_total),
                )
                .unwrap();
            assert_relative_eq!(tone.t12, stress.t12, max_relative = 1e-7);
            assert_relative_eq!(one.ebar_p, state.ebar_p, max_relative = 1e-6);
        }
    }

    #[test]
    fn elastic_unloading_after_plastic_flow() {
        let m = hill_sheet();
        let (state, stress) = m
            .integrate_step(&MaterialState::default(), PlaneStrain::new(0.012, -0.005, 0.002))
            .unwrap();
        assert!(state.ebar_p > 0.0);
        let deps = PlaneStrain::new(-1e-4, 2e-5, -1e-5);
        let (unloaded, s2) = m.integrate_step(&state, deps).unwrap();
        assert_eq!(unloaded.ebar_p, state.ebar_p, "unloading must be elastic");
        assert_eq!(unloaded.eps_p, state.eps_p);
        let dc = m.elastic_matrix() * Voigt::new(deps.e11, deps.e22, 2.0 * deps.e12);
        assert_abs_diff_eq!(s2.s11 - stress.s11, dc[0], epsilon = 1e-9);
        assert_abs_diff_eq!(s2.s22 - stress.s22, dc[1], epsilon = 1e-9);
        assert_abs_diff_eq!(s2.t12 - stress.t12, dc[2], epsilon = 1e-9);
    }

    #[test]
    fn yld2000_quadratic_isotropic_matches_von_mises_hill() {
        // With a = 2 and unit coefficients, Yld2000 *is* von Mises, so the
        // two implementations must integrate to the same stress.
        let y = MaterialModel::Yld2000Swift {
            E: 70_000.0,
            nu: 0.33,
            A: 471.92,
            sigma0: 123.4,
            n: 0.29,
            a: 2.0,
            alpha: [1.0; 8],
        };
        let h = von_mises_swift();
        let mut sy = MaterialState::default();
        let mut sh = MaterialState::default();
        for _ in 0..6 {
            let deps = PlaneStrain::new(2e-3, -5e-4, 8e-4);
            let (ny, ty) = y.integrate_step(&sy, deps).unwrap();
            let (nh, th) = h.integrate_step(&sh, deps).unwrap();
            sy = ny;
            sh = nh;
            assert_relative_eq!(ty.s11, th.s11, max_relative = 2e-6);
            assert_relative_eq!(ty.s22, th.s22, max_relative = 2e-6);
            assert_relative_eq!(ty.t12, th.t12, max_relative = 2e-6);
            assert_relative_eq!(sy.ebar_p, sh.ebar_p, max_relative = 2e-6);
        }
        assert!(sy.ebar_p > 1e-3);
    }

    /// Strain-driven uniaxial-stress test: at each step the lateral strain
    /// is adjusted (scalar secant) so that s22 = 0, mimicking a tensile
    /// coupon in the rolling direction.  Because G + H = 1 the flow curve
    /// must equal the Swift law exactly on this proportional path.
    #[test]
    fn uniaxial_rd_flow_curve_matches_swift() {
        let m = hill_sheet();
        let hard = m.swift().unwrap();
        let mut state = MaterialState::default();
        let n_steps = 12;
        let e11_total = 0.06;
        for i in 0..n_steps {
            let e11 = e11_total * (i + 1) as f64 / n_steps as f64;
            // Solve s22(e22) = 0 by secant on the lateral strain.
            let run = |e22: f64| {
                let deps = PlaneStrain::new(
                    e11 - state.eps.e11,
                    e22 - state.eps.e22,
                    0.0,
                );
                m.integrate_step(&state, deps).unwrap()
            };
            let (mut a, mut b) = (state.eps.e22 - 0.8 * (e11 - state.eps.e11), state.eps.e22);
            let (mut fa, mut fb) = (run(a).1.s22, run(b).1.s22);
            for _ in 0..60 {
                if (fb - fa).abs() < 1e-14 {
                    break;
                }
                let c = b - fb * (b - a) / (fb - fa);
                let fc = run(c).1.s22;
                a = b;
                fa = fb;
                b = c;
                fb = fc;
                if fb.abs() < 1e-10 {
                    break;
                }
            }
            let (next, stress) = run(b);
            assert!(stress.s22.abs() < 1e-6, "lateral solve failed: {}", stress.s22);
            state = next;
            if state.ebar_p > 1e-6 {
                let sy = hard.flow_stress(state.ebar_p);
                assert_relative_eq!(stress.s11, sy, max_relative = 5e-3);
            }
        }
        assert!(state.ebar_p > 0.04, "test never reached the plastic range");
    }

    /// The converged plastic strain increment must be parallel to the yield
    /// surface normal (associative flow), and the analytic/fd gradients of
    /// sigma_bar must agree closely.
    #[test]
    fn associative_flow_direction_and_gradient_agreement() {
        for model in [hill_sheet(), yld_sheet()] {
            let sigma0 = model.swift().unwrap().sigma0;
            let surf = model.surface().unwrap();
            let (state, stress) = model
                .integrate_step(&MaterialState::default(), PlaneStrain::new(0.012, -0.003, 0.004))
                .unwrap();
            assert!(state.ebar_p > 1e-4);

            let sv = Voigt::new(stress.s11, stress.s22, stress.t12);
            let m_dir = surf.grad(&sv);
            // Plastic increment in engineering-shear components.
            let dp = Voigt::new(state.eps_p.e11, state.eps_p.e22, 2.0 * state.eps_p.e12);
            let angle = (dp.dot(&m_dir) / (dp.norm() * m_dir.norm())).clamp(-1.0, 1.0).acos();
            assert!(angle < 1e-4, "flow direction angle = {angle}");

            // Central finite differences at |delta sigma| = 1e-6 * sigma0.
            let step = 1e-6 * sigma0;
            for k in 0..3 {
                let mut hi = sv;
                let mut lo = sv;
                hi[k] += step;
                lo[k] -= step;
                let fd = (surf.sigma_bar(&hi) - surf.sigma_bar(&lo)) / (2.0 * step);
                assert_relative_eq!(m_dir[k], fd, max_relative = 1e-5);
            }
        }
    }

    fn small_increment() -> impl Strategy<Value = PlaneStrain> {
        (-6e-3..6e-3f64, -6e-3..6e-3f64, -4e-3..4e-3f64)
            .prop_map(|(a, b, c)| PlaneStrain::new(a, b, c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// After any accepted plastic step the stress sits on the hardened
        /// yield surface (consistency), ebar_p never decreases, and the
        /// plastic dissipation increment is non-negative.
        #[test]
        fn consistency_and_monotonicity(
            d1 in small_increment(),
            d2 in small_increment(),
            d3 in small_increment(),
            model_pick in 0..3usize,
        ) {
            let model = [von_mises_swift(), hill_sheet(), yld_sheet()][model_pick].clone();
            let sigma0 = model.swift().unwrap().sigma0;
            let mut state = MaterialState::default();
            for deps in [d1, d2, d3] {
                let prev = state.ebar_p;
                let (next, stress) = model.integrate_step(&state, deps).unwrap();
                prop_assert!(next.ebar_p >= prev);
                let f = model.yield_value(stress, next.ebar_p).unwrap();
                prop_assert!(f <= 1e-8 * sigma0, "consistency violated: f = {f}");
                if next.ebar_p > prev {
                    let w = stress.s11 * (next.eps_p.e11 - state.eps_p.e11)
                        + stress.s22 * (next.eps_p.e22 - state.eps_p.e22)
                        + 2.0 * stress.t12 * (next.eps_p.e12 - state.eps_p.e12);
                    prop_assert!(w >= -1e-10 * sigma0, "negative plastic work {w}");
                }
                state = next;
            }
        }
    }
}

