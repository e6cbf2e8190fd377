//! Bayesian uncertainty quantification for identified material
//! parameters: uniform box priors, a Gaussian likelihood over the
//! masked full-field strains, random-walk Metropolis–Hastings, and
//! empirical credible bands on arbitrary derived quantities.
//!
//! The forward model is the same meshed problem the deterministic
//! identification uses ([`IdentificationProblem`]); the chain caches
//! forward solves on a quantized parameter grid so revisits (rejected
//! moves, near-duplicates) cost nothing.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::fem::solve;
use crate::inverse::{IdentificationProblem, InverseError};
use crate::io::fmt_f64;

/// Default chain length.
pub const DEFAULT_CHAIN_LENGTH: usize = 20_000;
/// Fraction of the chain discarded as burn-in.
pub const BURN_IN_FRACTION: f64 = 0.2;
/// Default proposal standard deviation, as a fraction of each prior
/// range.
pub const PROPOSAL_FRACTION: f64 = 0.02;
/// Forward-solve cache resolution, as a fraction of each prior range.
const CACHE_QUANTUM: f64 = 1e-6;

/// Log-density of the uniform prior over a box: `−Σ ln(b−a)` inside,
/// `−∞` outside.
pub fn log_prior(theta: &[f64], bounds: &[(f64, f64)]) -> f64 {
    assert_eq!(theta.len(), bounds.len());
    let mut lp = 0.0;
    for (&t, &(lo, hi)) in theta.iter().zip(bounds) {
        if t < lo || t > hi {
            return f64::NEG_INFINITY;
        }
        lp -= (hi - lo).ln();
    }
    lp
}

/// Gaussian log-likelihood of the reference strains under the forward
/// model at `theta`, with independent per-component noise of standard
/// deviation `noise_std`.  Masked-invalid points are excluded from the
/// residual count; a failed forward solve (or invalid model) scores
/// `−∞`.
pub fn log_likelihood(p: &IdentificationProblem, theta: &[f64], noise_std: f64) -> f64 {
    assert!(noise_std > 0.0, "noise_std must be positive");
    let Ok(model) = p.model_at(theta) else {
        return f64::NEG_INFINITY;
    };
    if model.validate().is_err() {
        return f64::NEG_INFINITY;
    }
    let Ok(candidate) = solve(&p.mesh, &model, &p.protocol) else {
        return f64::NEG_INFINITY;
    };
    let mut ssr = 0.0;
    let mut n = 0usize;
    for (rs, cs) in p.reference.snapshots.iter().zip(&candidate.snapshots) {
        for (j, (rp, cp)) in rs.points.iter().zip(&cs.points).enumerate() {
            if !p.reference.valid[j] {
                continue;
            }
            let d = [
                rp.strain.e11 - cp.strain.e11,
                rp.strain.e22 - cp.strain.e22,
                rp.strain.e12 - cp.strain.e12,
            ];
            ssr += d.iter().map(|r| r * r).sum::<f64>();
            n += 3;
        }
    }
    let var = noise_std * noise_std;
    -(n as f64 / 2.0) * (2.0 * std::f64::consts::PI * var).ln() - ssr / (2.0 * var)
}

/// A sampled posterior: the full chain (one state per iteration,
/// repeats on rejection), its log-posterior values, per-iteration
/// acceptance flags, the realized acceptance rate, and the burn-in
/// index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub chain: Vec<Vec<f64>>,
    pub log_post: Vec<f64>,
    pub accepted: Vec<bool>,
    pub acceptance_rate: f64,
    pub burn_in: usize,
}

impl Posterior {
    /// Post-burn-in states.
    pub fn samples(&self) -> &[Vec<f64>] {
        &self.chain[self.burn_in..]
    }
}

/// Random-walk Metropolis–Hastings against an arbitrary log-density.
/// The proposal is an axis-aligned Gaussian with per-dimension standard
/// deviations `scales`; the symmetric proposal makes the acceptance
/// ratio the bare posterior ratio.  `chain[0]` is `theta0`; the
/// acceptance rate counts proposed transitions only.  Deterministic per
/// seed.
pub fn run_chain_with<F: FnMut(&[f64]) -> f64>(
    mut log_post: F,
    theta0: &[f64],
    scales: &[f64],
    n_samples: usize,
    seed: u64,
) -> Posterior {
    assert_eq!(theta0.len(), scales.len());
    assert!(n_samples >= 2, "a chain needs at least one transition");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = Vec::with_capacity(n_samples);
    let mut lps = Vec::with_capacity(n_samples);
    let mut flags = Vec::with_capacity(n_samples);
    let mut theta = theta0.to_vec();
    let mut lp = log_post(&theta);
    assert!(
        lp.is_finite(),
        "chain start has zero posterior density (log-posterior {lp})"
    );
    chain.push(theta.clone());
    lps.push(lp);
    flags.push(true);
    let mut n_accept = 0usize;
    for _ in 1..n_samples {
        let proposal: Vec<f64> = theta
            .iter()
            .zip(scales)
            .map(|(&t, &s)| t + s * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let lp_new = log_post(&proposal);
        // Drawn unconditionally so the random stream does not depend on
        // the accept/reject pattern.
        let u: f64 = rng.gen();
        if lp_new - lp > u.ln() {
            theta = proposal;
            lp = lp_new;
            n_accept += 1;
            flags.push(true);
        } else {
            flags.push(false);
        }
        chain.push(theta.clone());
        lps.push(lp);
    }
    let burn_in = (n_samples as f64 * BURN_IN_FRACTION) as usize;
    Posterior {
        chain,
        log_post: lps,
        accepted: flags,
        acceptance_rate: n_accept as f64 / (n_samples - 1) as f64,
        burn_in,
    }
}

/// Default proposal scales: [`PROPOSAL_FRACTION`] of each prior range.
pub fn default_proposal_scales(bounds: &[(f64, f64)]) -> Vec<f64> {
    bounds.iter().map(|(lo, hi)| PROPOSAL_FRACTION * (hi - lo)).collect()
}

/// Sample the posterior of `problem`'s free parameters under the
/// Gaussian strain likelihood.  Forward solves are cached on a grid of
/// 1e-6 of each prior range, and out-of-prior proposals are rejected
/// without solving.
pub fn run_chain(
    problem: &IdentificationProblem,
    noise_std: f64,
    theta0: &[f64],
    scales: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Posterior, InverseError> {
    if theta0.len() != problem.free.len() {
        return Err(InverseError::DimensionMismatch {
            expected: problem.free.len(),
            got: theta0.len(),
        });
    }
    for ((name, &t), &(lo, hi)) in problem.free.iter().zip(theta0).zip(&problem.bounds) {
        if t < lo || t > hi {
            return Err(InverseError::StartOutOfBounds(name.clone(), t));
        }
    }
    let quanta: Vec<f64> = problem
        .bounds
        .iter()
        .map(|(lo, hi)| CACHE_QUANTUM * (hi - lo))
        .collect();
    let mut cache: HashMap<Vec<i64>, f64> = HashMap::new();
    let log_post = |theta: &[f64]| {
        let lp = log_prior(theta, &problem.bounds);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        let key: Vec<i64> = theta
            .iter()
            .zip(&quanta)
            .zip(&problem.bounds)
            .map(|((&t, &q), &(lo, _))| ((t - lo) / q).round() as i64)
            .collect();
        let ll = *cache
            .entry(key)
            .or_insert_with(|| log_likelihood(problem, theta, noise_std));
        lp + ll
    };
    Ok(run_chain_with(log_post, theta0, scales, n_samples, seed))
}

/// Pointwise empirical credible band of a derived quantity over the
/// post-burn-in samples: for `level = 0.90`, the 5% and 95% quantiles
/// at every evaluation point of `quantity`.
pub fn credible_band<F: FnMut(&[f64]) -> Vec<f64>>(
    post: &Posterior,
    mut quantity: F,
    level: f64,
) -> Vec<(f64, f64)> {
    assert!((0.0..1.0).contains(&level) && level > 0.0);
    let samples = post.samples();
    assert!(samples.len() >= 100, "need at least 100 post-burn-in samples");
    let mut per_point: Vec<Vec<f64>> = Vec::new();
    for s in samples {
        let vals = quantity(s);
        if per_point.is_empty() {
            per_point = vec![Vec::with_capacity(samples.len()); vals.len()];
        }
        assert_eq!(vals.len(), per_point.len(), "quantity changed arity");
        for (col, v) in per_point.iter_mut().zip(vals) {
            col.push(v);
        }
    }
    let tail = (1.0 - level) / 2.0;
    per_point
        .iter_mut()
        .map(|col| {
            col.sort_by(f64::total_cmp);
            (quantile_sorted(col, tail), quantile_sorted(col, 1.0 - tail))
        })
        .collect()
}

/// Linear-interpolated empirical quantile of an ascending slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

/// Chain dump: `iter, <free names...>, log_post, accepted`.
pub fn write_chain_csv<P: AsRef<Path>>(
    path: P,
    post: &Posterior,
    names: &[String],
) -> std::io::Result<()> {
    let mut header = vec!["iter".to_string()];
    header.extend(names.iter().cloned());
    header.extend(["log_post", "accepted"].map(String::from));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = post.chain.iter().enumerate().map(|(i, theta)| {
        let mut row = vec![i.to_string()];
        row.extend(theta.iter().map(|&v| fmt_f64(v)));
        row.push(fmt_f64(post.log_post[i]));
        row.push((post.accepted[i] as u8).to_string());
        row
    });
    crate::io::write_csv(path, &header_refs, rows)
}
