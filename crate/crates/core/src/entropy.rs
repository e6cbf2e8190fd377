//! Stress-state classification and entropy.
//!
//! A *stress-state space* Θ is a small set of named target states
//! (uniaxial tension along RD or TD, shear, ...).  Every sample point of
//! a solved field is assigned to the classes it matches — possibly none,
//! possibly several — and the resulting discrete distribution p gives the
//! specimen's stress-state entropy H = −Σ p ln p measured in nats.  A
//! specimen is deemed *optimal* for an n-class space when
//! ln(n−1) < H ≤ ln(n): it carries more information than any n−1 classes
//! could, which requires all n states to be present with real mass.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::{FieldHistory, SamplePoint};
use crate::io::fmt_f64;
use crate::stress::{axis_distance, StressDescriptor};

/// Plastic gate: points with less accumulated plastic strain than this do
/// not classify in plastic mode.
pub const EPS_P_MIN: f64 = 1e-4;

/// Matching tolerances of a stress-state space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Triaxiality window |η − η*|.
    pub delta_eta: f64,
    /// Lode-parameter window |θ̄ − θ̄*|.
    pub delta_theta: f64,
    /// Principal-axis window (radians, modulo π).
    pub delta_angle: f64,
    /// Principal-stress-ratio window for elastic classes.
    pub delta_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            delta_eta: 0.08,
            delta_theta: 0.15,
            delta_angle: 15.0_f64.to_radians(),
            delta_ratio: 0.15,
        }
    }
}

/// How a class recognizes its stress state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassMode {
    /// Match on (η, θ̄) of a plastically deforming point, optionally
    /// constraining the major principal direction (radians from RD).
    Plastic {
        eta: f64,
        theta_bar: f64,
        axis: Option<f64>,
    },
    /// Match on the principal-stress ratio s2/s1 and the sign of s1
    /// (`tension` = true requires s1 > 0), optionally constraining the
    /// major principal direction.
    Elastic {
        ratio: f64,
        tension: bool,
        axis: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateClass {
    pub id: String,
    pub mode: ClassMode,
}

impl StateClass {
    pub fn plastic(id: &str, eta: f64, theta_bar: f64, axis: Option<f64>) -> Self {
        StateClass {
            id: id.to_string(),
            mode: ClassMode::Plastic {
                eta,
                theta_bar,
                axis,
            },
        }
    }

    pub fn elastic(id: &str, ratio: f64, tension: bool, axis: Option<f64>) -> Self {
        StateClass {
            id: id.to_string(),
            mode: ClassMode::Elastic {
                ratio,
                tension,
                axis,
            },
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error("stress-state space has no classes")]
    EmptySpace,
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
}

/// The discrete stress-state space Θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressStateSpace {
    pub classes: Vec<StateClass>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl StressStateSpace {
    pub fn new(classes: Vec<StateClass>) -> Self {
        StressStateSpace {
            classes,
            tolerances: Tolerances::default(),
        }
    }

    /// The default three-state plastic space: uniaxial tension along the
    /// rolling direction, along the transverse direction, and shear.
    pub fn default_plastic() -> Self {
        Self::new(vec![
            StateClass::plastic("UT-RD", 1.0 / 3.0, 1.0, Some(0.0)),
            StateClass::plastic("UT-TD", 1.0 / 3.0, 1.0, Some(std::f64::consts::FRAC_PI_2)),
            StateClass::plastic("S", 0.0, 0.0, None),
        ])
    }

    /// Elastic counterpart matching on principal-stress ratios.
    pub fn default_elastic() -> Self {
        Self::new(vec![
            StateClass::elastic("UT-RD", 0.0, true, Some(0.0)),
            StateClass::elastic("UT-TD", 0.0, true, Some(std::f64::consts::FRAC_PI_2)),
            StateClass::elastic("S", -1.0, true, None),
        ])
    }

    pub fn n(&self) -> usize {
        self.classes.len()
    }

    pub fn validate(&self) -> Result<(), EntropyError> {
        if self.classes.is_empty() {
            return Err(EntropyError::EmptySpace);
        }
        for (i, c) in self.classes.iter().enumerate() {
            for d in &self.classes[..i] {
                if d.id == c.id || d.mode == c.mode {
                    return Err(EntropyError::DuplicateClass(c.id.clone()));
                }
            }
        }
        Ok(())
    }
}

fn is_uniaxial_plastic(eta: f64, theta_bar: f64) -> bool {
    (eta - 1.0 / 3.0).abs() < 1e-6 && (theta_bar - 1.0).abs() < 1e-6
}

/// Indices of the classes matched by one sample.
///
/// Equibiaxial points are special: a balanced-biaxial stress probes the
/// yield surface at both uniaxial directions at once, so a point with
/// η near 2/3 and θ̄ near −1 (elastic: ratio near +1 in tension) matches
/// every uniaxial-target class irrespective of its axis condition.
pub fn classify(d: &StressDescriptor, ebar_p: f64, space: &StressStateSpace) -> Vec<usize> {
    let t = &space.tolerances;
    let plastic_ok = ebar_p > EPS_P_MIN;
    let eb_plastic = plastic_ok
        && (d.eta - 2.0 / 3.0).abs() <= t.delta_eta
        && (d.theta_bar + 1.0).abs() <= t.delta_theta;
    let ratio = if d.s1 != 0.0 { d.s2 / d.s1 } else { f64::NAN };
    let eb_elastic = d.s1 > 0.0 && (ratio - 1.0).abs() <= t.delta_ratio;

    let mut out = Vec::new();
    for (i, c) in space.classes.iter().enumerate() {
        let hit = match c.mode {
            ClassMode::Plastic {
                eta,
                theta_bar,
                axis,
            } => {
                let direct = plastic_ok
                    && (d.eta - eta).abs() <= t.delta_eta
                    && (d.theta_bar - theta_bar).abs() <= t.delta_theta
                    && axis.is_none_or(|a| axis_distance(d.angle, a) <= t.delta_angle);
                direct || (eb_plastic && is_uniaxial_plastic(eta, theta_bar))
            }
            ClassMode::Elastic {
                ratio: r0,
                tension,
                axis,
            } => {
                let sign_ok = (d.s1 > 0.0) == tension;
                let direct = sign_ok
                    && ratio.is_finite()
                    && (ratio - r0).abs() <= t.delta_ratio
                    && axis.is_none_or(|a| axis_distance(d.angle, a) <= t.delta_angle);
                direct || (eb_elastic && tension && r0.abs() < 1e-6)
            }
        };
        if hit {
            out.push(i);
        }
    }
    out
}

/// Criterion verdict for the optimal-entropy range `ln(n−1) < H ≤ ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Satisfied,
    BelowLowerBound,
    AboveUpperBound,
}

/// Per-class probabilities, entropy, counts, and the criterion verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub class_ids: Vec<String>,
    /// Empty when nothing classified; otherwise sums to 1.
    pub probabilities: Vec<f64>,
    pub h: f64,
    pub n_classified: usize,
    pub n_total: usize,
    pub criterion: Verdict,
}

/// Per-class mass distribution over the samples.  Each eligible point
/// spreads unit mass equally over its matched classes.
pub fn state_probabilities(
    points: &[SamplePoint],
    space: &StressStateSpace,
    plastic_only: bool,
) -> Vec<f64> {
    class_masses(points, space, plastic_only).0
}

fn class_masses(
    points: &[SamplePoint],
    space: &StressStateSpace,
    plastic_only: bool,
) -> (Vec<f64>, usize) {
    let mut mass = vec![0.0; space.n()];
    let mut n_classified = 0;
    for p in points {
        if plastic_only && p.ebar_p <= EPS_P_MIN {
            continue;
        }
        let Some(d) = p.stress.descriptor() else {
            continue;
        };
        let matched = classify(&d, p.ebar_p, space);
        if matched.is_empty() {
            continue;
        }
        n_classified += 1;
        let share = 1.0 / matched.len() as f64;
        for i in matched {
            mass[i] += share;
        }
    }
    let total: f64 = mass.iter().sum();
    if total > 0.0 {
        for m in mass.iter_mut() {
            *m /= total;
        }
    }
    (mass, n_classified)
}

/// Shannon entropy in nats, with 0 · ln 0 := 0.
pub fn stress_state_entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// Optimal-entropy range check: satisfied iff ln(n−1) < H ≤ ln n
/// (strict on the left, closed on the right).
pub fn optimal_range_check(h: f64, n: usize) -> Verdict {
    let lower = ((n - 1) as f64).ln();
    let upper = (n as f64).ln();
    if h > upper {
        Verdict::AboveUpperBound
    } else if h > lower {
        Verdict::Satisfied
    } else {
        Verdict::BelowLowerBound
    }
}

/// Classify a field and assemble the full report.
pub fn entropy_report(
    points: &[SamplePoint],
    space: &StressStateSpace,
    plastic_only: bool,
) -> EntropyReport {
    let (p, n_classified) = class_masses(points, space, plastic_only);
    let (probabilities, h) = if n_classified == 0 {
        (Vec::new(), 0.0)
    } else {
        let h = stress_state_entropy(&p);
        (p, h)
    };
    EntropyReport {
        class_ids: space.classes.iter().map(|c| c.id.clone()).collect(),
        probabilities,
        h,
        n_classified,
        n_total: points.len(),
        criterion: optimal_range_check(h, space.n()),
    }
}

/// (ε̄p, η, θ̄) along the loading history of one sample point; steps
/// without plastic flow are skipped.
///
/// Panics if `point` is out of range.
pub fn loading_path(history: &FieldHistory, point: usize) -> Vec<(f64, f64, f64)> {
    history
        .snapshots
        .iter()
        .filter_map(|s| {
            let p = &s.points[point];
            if p.ebar_p <= 0.0 {
                return None;
            }
            p.stress.descriptor().map(|d| (p.ebar_p, d.eta, d.theta_bar))
        })
        .collect()
}

/// η–θ̄ scatter of a field (degenerate points skipped):
/// elem_id, x, y, eta, theta_bar, ebar_p.
pub fn write_eta_theta_csv<P: AsRef<std::path::Path>>(
    points: &[SamplePoint],
    path: P,
) -> std::io::Result<()> {
    let rows = points.iter().filter_map(|p| {
        p.stress.descriptor().map(|d| {
            vec![
                p.elem.to_string(),
                fmt_f64(p.x),
                fmt_f64(p.y),
                fmt_f64(d.eta),
                fmt_f64(d.theta_bar),
                fmt_f64(p.ebar_p),
            ]
        })
    });
    crate::io::write_csv(
        path,
        &["elem_id", "x", "y", "eta", "theta_bar", "ebar_p"],
        rows,
    )
}

/// Principal-stress scatter for yield-locus plots:
/// elem_id, x, y, s1, s2, angle, sigma_eq.
pub fn write_locus_scatter_csv<P: AsRef<std::path::Path>>(
    points: &[SamplePoint],
    path: P,
) -> std::io::Result<()> {
    let rows = points.iter().filter_map(|p| {
        p.stress.descriptor().map(|d| {
            vec![
                p.elem.to_string(),
                fmt_f64(p.x),
                fmt_f64(p.y),
                fmt_f64(d.s1),
                fmt_f64(d.s2),
                fmt_f64(d.angle),
                fmt_f64(d.sigma_eq),
            ]
        })
    });
    crate::io::write_csv(
        path,
        &["elem_id", "x", "y", "s1", "s2", "angle", "sigma_eq"],
        rows,
    )
}
