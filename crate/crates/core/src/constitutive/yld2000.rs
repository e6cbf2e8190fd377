//! Barlat Yld2000-2d non-quadratic anisotropic yield surface.

use super::Voigt;

/// Yld2000-2d surface.
///
/// Two linear transforms of the stress vector,
/// `X' = L' s` and `X'' = L'' s`, feed the isotropic function
///
/// `phi = |X'_1 - X'_2|^a + |2 X''_2 + X''_1|^a + |2 X''_1 + X''_2|^a
///      = 2 sigma_bar^a`,
///
/// where `X_1, X_2` are the principal values of each transformed tensor.
/// The transforms are parameterised by eight anisotropy coefficients:
///
/// ```text
/// L'11 =  2 a1 / 3      L''11 = (-2 a3 + 2 a4 + 8 a5 - 2 a6) / 9
/// L'12 = -  a1 / 3      L''12 = (   a3 - 4 a4 - 4 a5 + 4 a6) / 9
/// L'21 = -  a2 / 3      L''21 = ( 4 a3 - 4 a4 - 4 a5 +   a6) / 9
/// L'22 =  2 a2 / 3      L''22 = (-2 a3 + 8 a4 + 2 a5 - 2 a6) / 9
/// L'66 =    a7          L''66 =    a8
/// ```
///
/// With all coefficients at 1 both transforms reduce to the deviatoric
/// map and the surface becomes the isotropic Hosford surface (von Mises
/// for `a = 2`).  The exponent `a` is 8 for FCC and 6 for BCC sheet and
/// is held fixed during identification.
///
/// The gradient is evaluated by central finite differences on
/// `sigma_bar` with step `1e-7 * sigma0`, which is accurate to well below
/// solver tolerances for this smooth surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Yld2000 {
    pub alpha: [f64; 8],
    pub a: f64,
    /// Stress scale used for the finite-difference gradient step.
    pub sigma0: f64,
}

/// One linear transform in compact form: `X11 = l11 s11 + l12 s22`,
/// `X22 = l21 s11 + l22 s22`, `X12 = l66 t12`.
#[derive(Debug, Clone, Copy)]
struct Transform {
    l11: f64,
    l12: f64,
    l21: f64,
    l22: f64,
    l66: f64,
}

impl Transform {
    /// Principal values of the transformed tensor.
    fn principal(&self, s: &Voigt) -> (f64, f64) {
        let x11 = self.l11 * s[0] + self.l12 * s[1];
        let x22 = self.l21 * s[0] + self.l22 * s[1];
        let x12 = self.l66 * s[2];
        let mean = 0.5 * (x11 + x22);
        let r = (0.5 * (x11 - x22)).hypot(x12);
        (mean + r, mean - r)
    }
}

impl Yld2000 {
    pub fn new(alpha: [f64; 8], a: f64, sigma0: f64) -> Self {
        Self { alpha, a, sigma0 }
    }

    fn l_prime(&self) -> Transform {
        let [a1, a2, ..] = self.alpha;
        Transform {
            l11: 2.0 * a1 / 3.0,
            l12: -a1 / 3.0,
            l21: -a2 / 3.0,
            l22: 2.0 * a2 / 3.0,
            l66: self.alpha[6],
        }
    }

    fn l_second(&self) -> Transform {
        let [_, _, a3, a4, a5, a6, _, _] = self.alpha;
        Transform {
            l11: (-2.0 * a3 + 2.0 * a4 + 8.0 * a5 - 2.0 * a6) / 9.0,
            l12: (a3 - 4.0 * a4 - 4.0 * a5 + 4.0 * a6) / 9.0,
            l21: (4.0 * a3 - 4.0 * a4 - 4.0 * a5 + a6) / 9.0,
            l22: (-2.0 * a3 + 8.0 * a4 + 2.0 * a5 - 2.0 * a6) / 9.0,
            l66: self.alpha[7],
        }
    }

    /// Equivalent stress `(phi / 2)^(1/a)`; degree-one homogeneous.
    pub fn sigma_bar(&self, s: &Voigt) -> f64 {
        let (xp1, xp2) = self.l_prime().principal(s);
        let (xs1, xs2) = self.l_second().principal(s);
        let phi = (xp1 - xp2).abs().powf(self.a)
            + (2.0 * xs2 + xs1).abs().powf(self.a)
            + (2.0 * xs1 + xs2).abs().powf(self.a);
        (0.5 * phi).powf(1.0 / self.a)
    }

    /// Central finite-difference gradient of `sigma_bar`.
    pub fn grad(&self, s: &Voigt) -> Voigt {
        let step = 1e-7 * self.sigma0;
        let mut g = Voigt::zeros();
        for k in 0..3 {
            let mut sp = *s;
            let mut sm = *s;
            sp[k] += step;
            sm[k] -= step;
            g[k] = (self.sigma_bar(&sp) - self.sigma_bar(&sm)) / (2.0 * step);
        }
        g
    }

    /// `phi` evaluated at a unit uniaxial stress along the rolling
    /// direction, written with the transform rows collapsed:
    ///
    /// `|(2a1 + a2)/3|^a + |2(a3 - a4)/3|^a + |(4a5 - a6)/3|^a`
    ///
    /// The calibration convention requires this to equal 2 (so that the
    /// uniaxial RD yield stress is `sigma0`); identification enforces it
    /// with a penalty instead of eliminating a coefficient.
    pub fn rd_normalization_sum(&self) -> f64 {
        let [a1, a2, a3, a4, a5, a6, _, _] = self.alpha;
        let c1 = (2.0 * a1 + a2) / 3.0;
        let c2 = 2.0 * (a3 - a4) / 3.0;
        let c3 = (4.0 * a5 - a6) / 3.0;
        c1.abs().powf(self.a) + c2.abs().powf(self.a) + c3.abs().powf(self.a)
    }
}
