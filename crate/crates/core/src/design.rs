//! Sequential model-based specimen design.
//!
//! A Tree-structured Parzen Estimator drives the search: finished trials
//! are split at the γ-quantile of the objective into a "good" and a
//! "bad" set, per-dimension kernel densities `l` and `g` are fitted to
//! the two sets, and the next trial is the candidate maximizing the
//! density ratio `l/g` (equivalent to maximizing expected improvement
//! under this decomposition).  Two drivers sit on top:
//!
//! * [`optimize_entropy`] — maximize the stress-state entropy of a
//!   holed-cruciform family (informative specimen design);
//! * [`optimize_shear`]  — sequentially minimize gage entropy, then the
//!   magnitude of the mean gage triaxiality, over a notched shear
//!   family (uniform-shear specimen design).
//!
//! The hole count is a categorical TPE dimension (0..=max, Laplace
//! smoothed); coordinate slots beyond the sampled count stay in the
//! parameter vector but are ignored when the geometry is built, keeping
//! the search space fixed-dimensional.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

use crate::constitutive::MaterialModel;
use crate::entropy::{
    classify, entropy_report, state_probabilities, stress_state_entropy, StressStateSpace,
    EPS_P_MIN,
};
use crate::fem::{
    generate_mesh, solve, Circle, FieldHistory, GeometryKind, LoadProtocol, SpecimenGeometry,
};

/// Good/bad split fraction of the TPE.
pub const GAMMA: f64 = 0.25;
/// Candidates scored per proposal.
pub const N_CANDIDATES: usize = 24;
/// A gage qualifies as "zero entropy" below this (classification noise).
pub const HBAR_ZERO: f64 = 1e-3;
/// Minimum fraction of gage points that must classify for a shear trial
/// to qualify; guards against trivially empty (elastic) gages.
pub const MIN_CLASSIFIED_FRACTION: f64 = 0.5;

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("design space invalid: {0}")]
    BadSpace(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad trial log line {0}: {1}")]
    BadRecord(usize, serde_json::Error),
}

// ---------------------------------------------------------------------
// Generic TPE core
// ---------------------------------------------------------------------

/// Continuous box (plus optional categorical dimension) the TPE samples.
#[derive(Debug, Clone)]
pub struct TpeSpace {
    pub ranges: Vec<(f64, f64)>,
    /// Number of categories of the extra categorical dimension, if any.
    pub n_categories: Option<usize>,
}

/// One finished trial as seen by the TPE fitter.  `objective = None`
/// marks infeasible/failed trials, which always land in the bad set.
/// Lower objective is better; maximization problems negate first.
#[derive(Debug, Clone)]
pub struct TpeObservation {
    pub category: usize,
    pub x: Vec<f64>,
    pub objective: Option<f64>,
}

/// Indices of the good and bad sets: the `ceil(gamma * n_finite)` best
/// finite-objective observations are good; everything else (including
/// all failures) is bad.
pub(crate) fn good_bad_split(obs: &[TpeObservation], gamma: f64) -> (Vec<usize>, Vec<usize>) {
    let mut finite: Vec<usize> = (0..obs.len())
        .filter(|&i| obs[i].objective.is_some_and(|o| o.is_finite()))
        .collect();
    finite.sort_by(|&a, &b| obs[a].objective.unwrap().total_cmp(&obs[b].objective.unwrap()));
    let n_good = ((gamma * finite.len() as f64).ceil() as usize).min(finite.len());
    let good: Vec<usize> = finite[..n_good].to_vec();
    let mut bad: Vec<usize> = finite[n_good..].to_vec();
    bad.extend((0..obs.len()).filter(|&i| !obs[i].objective.is_some_and(|o| o.is_finite())));
    (good, bad)
}

/// Abramowitz–Stegun 7.1.26 rational erf approximation (|err| < 1.5e-7),
/// plenty for density ratios.
fn erf(x: f64) -> f64 {
    let s = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    s * (1.0 - poly * (-x * x).exp())
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// One-dimensional kernel mixture: a truncated Gaussian per observation,
/// bandwidth from the nearest-neighbor distance clamped to
/// `[0.01, 1.0] * range`.
struct Kde1 {
    mus: Vec<f64>,
    bws: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl Kde1 {
    fn fit(xs: &[f64], lo: f64, hi: f64) -> Kde1 {
        let range = hi - lo;
        let bws = xs
            .iter()
            .map(|&m| {
                let nn = xs
                    .iter()
                    .map(|&o| (o - m).abs())
                    .filter(|&d| d > 0.0)
                    .fold(f64::INFINITY, f64::min);
                if nn.is_finite() {
                    nn.clamp(0.01 * range, range)
                } else {
                    range
                }
            })
            .collect();
        Kde1 { mus: xs.to_vec(), bws, lo, hi }
    }

    fn log_pdf(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .mus
            .iter()
            .zip(&self.bws)
            .map(|(&m, &b)| {
                let z = (x - m) / b;
                let mass = normal_cdf((self.hi - m) / b) - normal_cdf((self.lo - m) / b);
                -0.5 * z * z
                    - b.ln()
                    - 0.5 * (2.0 * std::f64::consts::PI).ln()
                    - mass.max(1e-300).ln()
            })
            .collect();
        log_sum_exp(&terms) - (self.mus.len() as f64).ln()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let j = rng.gen_range(0..self.mus.len());
        let (m, b) = (self.mus[j], self.bws[j]);
        for _ in 0..64 {
            let v: f64 = m + b * rng.sample::<f64, _>(StandardNormal);
            if v >= self.lo && v <= self.hi {
                return v;
            }
        }
        m.clamp(self.lo, self.hi)
    }
}

/// Laplace-smoothed categorical fit.
struct Cat {
    log_p: Vec<f64>,
    cum: Vec<f64>,
}

impl Cat {
    fn fit(counts: &[usize]) -> Cat {
        let n: usize = counts.iter().sum();
        let k = counts.len();
        let p: Vec<f64> = counts
            .iter()
            .map(|&c| (c as f64 + 1.0) / (n as f64 + k as f64))
            .collect();
        let mut cum = Vec::with_capacity(k);
        let mut acc = 0.0;
        for &q in &p {
            acc += q;
            cum.push(acc);
        }
        Cat { log_p: p.iter().map(|q| q.ln()).collect(), cum }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.gen();
        self.cum.iter().position(|&c| u < c).unwrap_or(self.cum.len() - 1)
    }
}

/// Propose the next trial point: split history at the γ-quantile, fit
/// kernel densities on the good and bad sets, draw `n_candidates` from
/// the good-set density and return the candidate maximizing `l/g`.
/// Falls back to a uniform draw while either set is empty (in
/// particular, on an empty history).  Lower objective is better.
pub fn tpe_propose(
    obs: &[TpeObservation],
    space: &TpeSpace,
    gamma: f64,
    n_candidates: usize,
    seed: u64,
) -> (usize, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_cat = space.n_categories.unwrap_or(1);
    let (good, bad) = good_bad_split(obs, gamma);
    if good.is_empty() || bad.is_empty() {
        let cat = if n_cat > 1 { rng.gen_range(0..n_cat) } else { 0 };
        let x = space
            .ranges
            .iter()
            .map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
            .collect();
        return (cat, x);
    }

    let fit_set = |idx: &[usize]| -> (Vec<Kde1>, Cat) {
        let kdes = space
            .ranges
            .iter()
            .enumerate()
            .map(|(d, &(lo, hi))| {
                let xs: Vec<f64> = idx.iter().map(|&i| obs[i].x[d]).collect();
                Kde1::fit(&xs, lo, hi)
            })
            .collect();
        let mut counts = vec![0usize; n_cat];
        for &i in idx {
            counts[obs[i].category.min(n_cat - 1)] += 1;
        }
        (kdes, Cat::fit(&counts))
    };
    let (l_kde, l_cat) = fit_set(&good);
    let (g_kde, g_cat) = fit_set(&bad);

    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for _ in 0..n_candidates.max(1) {
        let cat = if n_cat > 1 { l_cat.sample(&mut rng) } else { 0 };
        let x: Vec<f64> = l_kde.iter().map(|k| k.sample(&mut rng)).collect();
        let mut score = 0.0;
        for (d, v) in x.iter().enumerate() {
            score += l_kde[d].log_pdf(*v) - g_kde[d].log_pdf(*v);
        }
        if n_cat > 1 {
            score += l_cat.log_p[cat] - g_cat.log_p[cat];
        }
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, cat, x));
        }
    }
    let (_, cat, x) = best.unwrap();
    (cat, x)
}

// ---------------------------------------------------------------------
// Specimen design spaces
// ---------------------------------------------------------------------

/// What the variable circular features cut into the base geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// Interior holes (cruciform family).
    Hole,
    /// Edge notches (shear family).
    Notch,
}

/// Feature-count dimension: pinned, or searched categorically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountDim {
    Fixed(usize),
    Variable { max: usize },
}

impl CountDim {
    fn slots(self) -> usize {
        match self {
            CountDim::Fixed(k) => k,
            CountDim::Variable { max } => max,
        }
    }
}

/// Search space over circular features added to a base specimen.
///
/// The parameter vector holds `(x, y[, r])` per feature slot (a shared
/// trailing radius replaces per-slot radii when `shared_radius`), always
/// at full slot count; slots beyond the active feature count are
/// carried but ignored.  With `mirror`, every feature also places its
/// reflection about the base's vertical mid-plane (shear family).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignSpace {
    pub base: SpecimenGeometry,
    pub feature: FeatureKind,
    pub count: CountDim,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub r_range: (f64, f64),
    #[serde(default)]
    pub shared_radius: bool,
    #[serde(default)]
    pub mirror: bool,
    /// Mesh size used when evaluating trials.
    pub h: f64,
}

impl DesignSpace {
    pub fn validate(&self) -> Result<(), DesignError> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !(ok(self.x_range) && ok(self.y_range) && ok(self.r_range)) {
            return Err(DesignError::BadSpace("ranges must be finite with lo < hi".into()));
        }
        if self.r_range.0 <= 0.0 {
            return Err(DesignError::BadSpace("radii must be positive".into()));
        }
        if !(self.h > 0.0) {
            return Err(DesignError::BadSpace("mesh size must be positive".into()));
        }
        let max = self.count.slots();
        if max > crate::fem::geometry::MAX_HOLES {
            return Err(DesignError::BadSpace(format!(
                "feature count {max} exceeds {}",
                crate::fem::geometry::MAX_HOLES
            )));
        }
        if self.mirror && 2 * max > crate::fem::geometry::MAX_HOLES {
            return Err(DesignError::BadSpace(
                "mirrored feature count exceeds the feature limit".into(),
            ));
        }
        match (self.base.kind, self.feature) {
            (GeometryKind::Cruciform, FeatureKind::Hole) => {}
            (GeometryKind::RectangleROI | GeometryKind::PolygonWithCutouts, FeatureKind::Notch) => {
                if matches!(self.count, CountDim::Fixed(0)) {
                    return Err(DesignError::BadSpace(
                        "notched family needs at least one feature".into(),
                    ));
                }
            }
            (k, f) => {
                return Err(DesignError::BadSpace(format!(
                    "unsupported base/feature combination {k:?}/{f:?}"
                )))
            }
        }
        self.base
            .validate()
            .map_err(|e| DesignError::BadSpace(e.to_string()))
    }

    /// Continuous dimensions: per-slot `(x, y[, r])`, plus one trailing
    /// shared radius when `shared_radius`.
    pub fn tpe_space(&self) -> TpeSpace {
        let slots = self.count.slots();
        let mut ranges = Vec::new();
        for _ in 0..slots {
            ranges.push(self.x_range);
            ranges.push(self.y_range);
            if !self.shared_radius {
                ranges.push(self.r_range);
            }
        }
        if self.shared_radius && slots > 0 {
            ranges.push(self.r_range);
        }
        TpeSpace {
            ranges,
            n_categories: match self.count {
                CountDim::Fixed(_) => None,
                CountDim::Variable { max } => Some(max + 1),
            },
        }
    }

    fn count_of(&self, category: usize) -> usize {
        match self.count {
            CountDim::Fixed(k) => k,
            CountDim::Variable { .. } => category,
        }
    }

    /// Circles for the first `count` slots (mirror twins appended).
    pub fn circles(&self, count: usize, x: &[f64]) -> Vec<Circle> {
        let stride = if self.shared_radius { 2 } else { 3 };
        let shared_r = if self.shared_radius { x.last().copied() } else { None };
        let mut out = Vec::new();
        for i in 0..count.min(self.count.slots()) {
            let cx = x[stride * i];
            let cy = x[stride * i + 1];
            let r = shared_r.unwrap_or_else(|| x[stride * i + 2]);
            out.push(Circle { x: cx, y: cy, r });
        }
        if self.mirror {
            let (lo, hi) = self.base.bbox();
            let twins: Vec<Circle> = out
                .iter()
                .map(|c| Circle { x: lo[0] + hi[0] - c.x, y: c.y, r: c.r })
                .collect();
            out.extend(twins);
        }
        out
    }

    /// Build the concrete specimen for one trial.
    pub fn geometry(&self, count: usize, x: &[f64]) -> SpecimenGeometry {
        let circles = self.circles(count, x);
        match self.feature {
            FeatureKind::Hole => {
                let aw = self.base.dim("arm_half_width").unwrap();
                let al = self.base.dim("arm_length").unwrap();
                if circles.is_empty() {
                    SpecimenGeometry::cruciform(aw, al)
                } else {
                    SpecimenGeometry::cruciform_with_holes(aw, al, circles)
                }
            }
            FeatureKind::Notch => {
                if self.base.kind == GeometryKind::PolygonWithCutouts {
                    SpecimenGeometry::polygon_notched(self.base.vertices.clone(), circles)
                } else {
                    let w = self.base.dim("width").unwrap();
                    let h = self.base.dim("height").unwrap();
                    SpecimenGeometry::shear_notched(w, h, circles)
                }
            }
        }
    }
}

// ---------------------------------------------------------------------
// Trial records
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Ok,
    Infeasible,
    SolverFailed,
}

/// One design trial: sampled parameters plus the measured objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub count: usize,
    pub params: Vec<f64>,
    pub status: TrialStatus,
    /// Whole-field stress-state entropy [nats] (entropy maximization).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
    /// Gage entropy [nats] (shear design).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    /// Mean absolute gage triaxiality (shear design).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_bar: Option<f64>,
    /// Fraction of gage points that classified.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classified_fraction: Option<f64>,
}

impl TrialRecord {
    fn observation(&self, objective: Option<f64>) -> TpeObservation {
        TpeObservation { category: self.count, x: self.params.clone(), objective }
    }
}

pub fn write_trials_jsonl<P: AsRef<std::path::Path>>(
    path: P,
    records: &[TrialRecord],
) -> Result<(), DesignError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut f, r).map_err(|e| DesignError::BadRecord(r.trial, e))?;
        writeln!(f)?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_trials_jsonl<P: AsRef<std::path::Path>>(
    path: P,
) -> Result<Vec<TrialRecord>, DesignError> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| DesignError::BadRecord(i, e))?);
    }
    Ok(out)
}

/// Posterior scatter export: one row per finished trial
/// (`params..., H, eta_bar`).
pub fn write_posterior_csv<P: AsRef<std::path::Path>>(
    path: P,
    records: &[TrialRecord],
) -> Result<(), DesignError> {
    let n_params = records.iter().map(|r| r.params.len()).max().unwrap_or(0);
    let mut header: Vec<String> = vec!["trial".into(), "count".into()];
    header.extend((0..n_params).map(|i| format!("p{i}")));
    header.extend(["status", "H", "eta_bar"].map(String::from));
    let headers: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows = records.iter().map(|r| {
        let mut row = vec![r.trial.to_string(), r.count.to_string()];
        for i in 0..n_params {
            row.push(r.params.get(i).map_or(String::new(), |v| crate::io::fmt_f64(*v)));
        }
        row.push(
            match r.status {
                TrialStatus::Ok => "ok",
                TrialStatus::Infeasible => "infeasible",
                TrialStatus::SolverFailed => "solver-failed",
            }
            .to_string(),
        );
        let h = r.entropy.or(r.hbar);
        row.push(h.map_or(String::new(), crate::io::fmt_f64));
        row.push(r.eta_bar.map_or(String::new(), crate::io::fmt_f64));
        row
    });
    crate::io::write_csv(path, &headers, rows).map_err(DesignError::Io)
}

// ---------------------------------------------------------------------
// Entropy-maximizing design
// ---------------------------------------------------------------------

fn run_trial(
    space: &DesignSpace,
    model: &MaterialModel,
    protocol: &LoadProtocol,
    trial: usize,
    count: usize,
    params: Vec<f64>,
) -> (TrialRecord, Option<FieldHistory>) {
    let mut rec = TrialRecord {
        trial,
        count,
        params,
        status: TrialStatus::Infeasible,
        entropy: None,
        hbar: None,
        eta_bar: None,
        classified_fraction: None,
    };
    let geometry = space.geometry(count, &rec.params);
    let mesh = match generate_mesh(&geometry, space.h) {
        Ok(m) => m,
        Err(_) => return (rec, None),
    };
    match solve(&mesh, model, protocol) {
        Ok(history) => {
            rec.status = TrialStatus::Ok;
            (rec, Some(history))
        }
        Err(_) => {
            rec.status = TrialStatus::SolverFailed;
            (rec, None)
        }
    }
}

/// Maximize whole-field stress-state entropy over the design space.
/// Returns every trial, finished ones first, sorted by entropy
/// descending.  Proposal `t` uses sub-seed `seed + t`.
pub fn optimize_entropy(
    space: &DesignSpace,
    model: &MaterialModel,
    theta: &StressStateSpace,
    protocol: &LoadProtocol,
    budget: usize,
    seed: u64,
) -> Result<Vec<TrialRecord>, DesignError> {
    space.validate()?;
    let tpe_space = space.tpe_space();
    let mut records: Vec<TrialRecord> = Vec::with_capacity(budget);
    for t in 0..budget {
        let obs: Vec<TpeObservation> = records
            .iter()
            .map(|r| r.observation(r.entropy.map(|h| -h)))
            .collect();
        let (cat, x) =
            tpe_propose(&obs, &tpe_space, GAMMA, N_CANDIDATES, seed.wrapping_add(t as u64));
        let count = space.count_of(cat);
        let (mut rec, history) = run_trial(space, model, protocol, t, count, x);
        if let Some(h) = history {
            let report = entropy_report(&h.snapshots.last().unwrap().points, theta, true);
            rec.entropy = Some(report.h);
        }
        records.push(rec);
    }
    records.sort_by(|a, b| match (a.entropy, b.entropy) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.trial.cmp(&b.trial),
    });
    Ok(records)
}

// ---------------------------------------------------------------------
// Shear (uniform, minimal-entropy) design
// ---------------------------------------------------------------------

/// Axis-aligned gage window objectives are averaged over.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GageSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl GageSpec {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_range.0 && x <= self.x_range.1 && y >= self.y_range.0 && y <= self.y_range.1
    }
}

/// Gage-window objectives for the shear design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GageObjectives {
    /// Stress-state entropy of the gage points [nats].
    pub hbar: f64,
    /// Mean absolute triaxiality over the plastic gage points.  The
    /// magnitude is averaged rather than the signed value so that a
    /// window straddling tension and compression zones cannot cancel
    /// to a spuriously pure-shear score.
    pub eta_bar: f64,
    /// Fraction of *plastic* gage points classifying into at least one
    /// class (elastically dead material in the window does not dilute
    /// the measure).
    pub classified_fraction: f64,
    pub n_gage: usize,
}

/// Evaluate the gage objectives on the final snapshot; `None` when the
/// gage window holds no sample points.
pub fn gage_objectives(
    history: &FieldHistory,
    gage: &GageSpec,
    theta: &StressStateSpace,
) -> Option<GageObjectives> {
    let pts: Vec<_> = history
        .snapshots
        .last()?
        .points
        .iter()
        .filter(|p| gage.contains(p.x, p.y))
        .copied()
        .collect();
    if pts.is_empty() {
        return None;
    }
    let p = state_probabilities(&pts, theta, true);
    let hbar = stress_state_entropy(&p);
    let n_classified = pts
        .iter()
        .filter(|pt| {
            pt.stress
                .descriptor()
                .is_some_and(|d| !classify(&d, pt.ebar_p, theta).is_empty())
        })
        .count();
    let mut eta_sum = 0.0;
    let mut eta_n = 0usize;
    let mut n_plastic = 0usize;
    for pt in &pts {
        if pt.ebar_p <= EPS_P_MIN {
            continue;
        }
        n_plastic += 1;
        if let Some(d) = pt.stress.descriptor() {
            eta_sum += d.eta.abs();
            eta_n += 1;
        }
    }
    Some(GageObjectives {
        hbar,
        eta_bar: if eta_n > 0 { eta_sum / eta_n as f64 } else { 0.0 },
        classified_fraction: if n_plastic > 0 {
            n_classified as f64 / n_plastic as f64
        } else {
            0.0
        },
        n_gage: pts.len(),
    })
}

/// Sample index (within the final snapshot) of the gage point with the
/// largest accumulated plastic strain — the critical element.
pub fn critical_sample(history: &FieldHistory, gage: &GageSpec) -> Option<usize> {
    let last = history.snapshots.last()?;
    last.points
        .iter()
        .enumerate()
        .filter(|(_, p)| gage.contains(p.x, p.y))
        .max_by(|a, b| a.1.ebar_p.total_cmp(&b.1.ebar_p))
        .map(|(i, _)| i)
}

fn qualifies(r: &TrialRecord) -> bool {
    r.status == TrialStatus::Ok
        && r.hbar.is_some_and(|h| h < HBAR_ZERO)
        && r.classified_fraction.is_some_and(|f| f >= MIN_CLASSIFIED_FRACTION)
}

/// Phase-1 score: gage entropy, pushed above any attainable entropy
/// (ln 3 < 2) when too little of the gage classifies.
fn phase1_score(r: &TrialRecord) -> Option<f64> {
    if r.status != TrialStatus::Ok {
        return None;
    }
    let h = r.hbar?;
    let f = r.classified_fraction?;
    Some(if f >= MIN_CLASSIFIED_FRACTION { h } else { 2.0 + (MIN_CLASSIFIED_FRACTION - f) })
}

fn phase2_score(r: &TrialRecord) -> Option<f64> {
    if qualifies(r) {
        r.eta_bar.map(f64::abs)
    } else {
        phase1_score(r).map(|s| 10.0 + s)
    }
}

pub(crate) fn sort_shear_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        match (qualifies(a), qualifies(b)) {
            (true, false) => return std::cmp::Ordering::Less,
            (false, true) => return std::cmp::Ordering::Greater,
            (true, true) => {
                return a.eta_bar.unwrap().abs().total_cmp(&b.eta_bar.unwrap().abs())
            }
            (false, false) => {}
        }
        match (phase1_score(a), phase1_score(b)) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.trial.cmp(&b.trial),
        }
    });
}

/// Sequential shear-specimen design: the first half of the budget
/// minimizes gage entropy; the second half minimizes the mean
/// absolute gage triaxiality, with non-qualifying trials (gage
/// entropy above [`HBAR_ZERO`] or classified fraction below
/// [`MIN_CLASSIFIED_FRACTION`]) ranked behind all qualifying ones.
/// Returns every trial, qualifying ones first by eta_bar ascending.
pub fn optimize_shear(
    space: &DesignSpace,
    model: &MaterialModel,
    theta: &StressStateSpace,
    protocol: &LoadProtocol,
    gage: &GageSpec,
    budget: usize,
    seed: u64,
) -> Result<Vec<TrialRecord>, DesignError> {
    space.validate()?;
    let tpe_space = space.tpe_space();
    let phase1_budget = budget / 2;
    let mut records: Vec<TrialRecord> = Vec::with_capacity(budget);
    for t in 0..budget {
        let phase2 = t >= phase1_budget;
        let obs: Vec<TpeObservation> = records
            .iter()
            .map(|r| r.observation(if phase2 { phase2_score(r) } else { phase1_score(r) }))
            .collect();
        let (cat, x) =
            tpe_propose(&obs, &tpe_space, GAMMA, N_CANDIDATES, seed.wrapping_add(t as u64));
        let count = space.count_of(cat);
        let (mut rec, history) = run_trial(space, model, protocol, t, count, x);
        if let Some(h) = history {
            match gage_objectives(&h, gage, theta) {
                Some(g) => {
                    rec.hbar = Some(g.hbar);
                    rec.eta_bar = Some(g.eta_bar);
                    rec.classified_fraction = Some(g.classified_fraction);
                }
                None => rec.status = TrialStatus::Infeasible,
            }
        }
        records.push(rec);
    }
    sort_shear_records(&mut records);
    Ok(records)
}
