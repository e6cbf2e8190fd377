//! Synthetic "experimental" data: resolution floor, additive Gaussian
//! noise, dropout masks, and locally amplified noise, all deterministic
//! per seed.
//!
//! The intended pipeline is solver fields → [`apply_resolution_floor`] →
//! [`corrupt`]: the floor models the strain resolution of the measurement
//! system on otherwise clean fields, the noise and mask model sensor
//! scatter and DIC dropout.  Noise afflicts the strain components only —
//! they are the observable entering the identification objective — and
//! the validity mask is drawn from its own RNG stream, so changing the
//! noise level never changes which points go missing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::geometry::point_in_polygon;
use crate::fem::FieldHistory;
use crate::io::fmt_f64;

/// Default strain resolution: components smaller than this in magnitude
/// read as zero.
pub const RESOLUTION_FLOOR: f64 = 5e-4;

/// Amplified noise restricted to a polygonal region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedNoise {
    /// Region outline (simple polygon, CCW or CW).
    pub region: Vec<[f64; 2]>,
    pub sigma_local: f64,
}

/// Corruption recipe for one synthetic experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation of additive Gaussian strain noise.
    pub sigma: f64,
    pub seed: u64,
    /// Fraction of sample points marked invalid, uniformly at random.
    #[serde(default)]
    pub missing_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localized: Option<LocalizedNoise>,
}

impl NoiseSpec {
    pub fn clean(seed: u64) -> Self {
        NoiseSpec {
            sigma: 0.0,
            seed,
            missing_fraction: 0.0,
            localized: None,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(SynthError::BadSigma(self.sigma));
        }
        if !(0.0..=1.0).contains(&self.missing_fraction) {
            return Err(SynthError::BadMissingFraction(self.missing_fraction));
        }
        if let Some(l) = &self.localized {
            if !l.sigma_local.is_finite() || l.sigma_local < 0.0 {
                return Err(SynthError::BadSigma(l.sigma_local));
            }
            if l.region.len() < 3 {
                return Err(SynthError::BadRegion(l.region.len()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("noise standard deviation must be finite and >= 0, got {0}")]
    BadSigma(f64),
    #[error("missing_fraction must lie in [0, 1], got {0}")]
    BadMissingFraction(f64),
    #[error("localized region needs >= 3 vertices, got {0}")]
    BadRegion(usize),
}

/// Zero out every strain component with magnitude strictly below `floor`
/// (a value exactly at the floor survives).  Stresses are untouched.
pub fn apply_resolution_floor(fields: &mut FieldHistory, floor: f64) {
    for snap in &mut fields.snapshots {
        for p in &mut snap.points {
            for v in [&mut p.strain.e11, &mut p.strain.e22, &mut p.strain.e12] {
                if v.abs() < floor {
                    *v = 0.0;
                }
            }
        }
    }
}

/// Additive Gaussian strain noise plus a random dropout mask.
///
/// Three noise values are drawn per (step, point) in a fixed order
/// whatever the spec says, so the same seed always produces the same
/// field; the mask uses an independent stream of the same generator.
/// Points inside the localized region (tested at the sample position)
/// use `sigma_local` instead of `sigma`.
pub fn corrupt(fields: &FieldHistory, spec: &NoiseSpec) -> Result<FieldHistory, SynthError> {
    spec.validate()?;
    let mut out = fields.clone();

    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    noise_rng.set_stream(0);
    for snap in &mut out.snapshots {
        for p in &mut snap.points {
            let sigma = match &spec.localized {
                Some(l) if point_in_polygon([p.x, p.y], &l.region) => l.sigma_local,
                _ => spec.sigma,
            };
            let dist = Normal::new(0.0, sigma).expect("validated sigma");
            p.strain.e11 += dist.sample(&mut noise_rng);
            p.strain.e22 += dist.sample(&mut noise_rng);
            p.strain.e12 += dist.sample(&mut noise_rng);
        }
    }

    let mut mask_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    mask_rng.set_stream(1);
    for v in &mut out.valid {
        let drop = rand::Rng::gen::<f64>(&mut mask_rng) < spec.missing_fraction;
        *v = *v && !drop;
    }
    Ok(out)
}

/// Field table in the solver CSV schema plus a trailing `valid` column.
pub fn write_corrupted_csv<P: AsRef<std::path::Path>>(
    history: &FieldHistory,
    path: P,
) -> std::io::Result<()> {
    let header = [
        "step", "elem_id", "x", "y", "e11", "e22", "e12", "s11", "s22", "t12", "ebar_p", "valid",
    ];
    let rows = history.snapshots.iter().flat_map(|s| {
        s.points.iter().enumerate().map(move |(j, p)| {
            vec![
                s.step.to_string(),
                p.elem.to_string(),
                fmt_f64(p.x),
                fmt_f64(p.y),
                fmt_f64(p.strain.e11),
                fmt_f64(p.strain.e22),
                fmt_f64(p.strain.e12),
                fmt_f64(p.stress.s11),
                fmt_f64(p.stress.s22),
                fmt_f64(p.stress.t12),
                fmt_f64(p.ebar_p),
                (history.valid[j] as u8).to_string(),
            ]
        })
    });
    crate::io::write_csv(path, &header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::solver::{SamplePoint, Snapshot};
    use crate::stress::{PlaneStrain, PlaneStress};
    use std::collections::BTreeMap;

    /// A fabricated single-snapshot history over an n-point unit row.
    fn flat_history(n: usize, e11: f64) -> FieldHistory {
        let points = (0..n)
            .map(|i| SamplePoint {
                elem: i,
                x: i as f64,
                y: 0.5,
                strain: PlaneStrain::new(e11, 0.0, 0.0),
                stress: PlaneStress::new(1.0, 0.0, 0.0),
                ebar_p: 0.0,
            })
            .collect();
        FieldHistory {
            snapshots: vec![Snapshot {
                step: 1,
                load_factor: 1.0,
                applied: BTreeMap::new(),
                reactions: BTreeMap::new(),
                points,
            }],
            valid: vec![true; n],
            n_points: n,
        }
    }

    #[test]
    fn floor_zeroes_strictly_below_only() {
        let mut h = flat_history(3, 0.0);
        h.snapshots[0].points[0].strain = PlaneStrain::new(4e-4, -4.9e-4, 6e-4);
        h.snapshots[0].points[1].strain = PlaneStrain::new(5e-4, -5e-4, 5.1e-4);
        h.snapshots[0].points[2].strain = PlaneStrain::new(0.0, 1e-2, -6e-4);
        apply_resolution_floor(&mut h, RESOLUTION_FLOOR);
        let p = &h.snapshots[0].points;
        assert_eq!((p[0].strain.e11, p[0].strain.e22, p[0].strain.e12), (0.0, 0.0, 6e-4));
        // Exactly at the floor survives.
        assert_eq!((p[1].strain.e11, p[1].strain.e22), (5e-4, -5e-4));
        assert_eq!((p[2].strain.e22, p[2].strain.e12), (1e-2, -6e-4));
        // Stress untouched.
        assert_eq!(p[0].stress.s11, 1.0);
    }

    #[test]
    fn zero_spec_is_identity() {
        let h = flat_history(50, 2e-3);
        let out = corrupt(&h, &NoiseSpec::clean(7)).unwrap();
        assert_eq!(out, h);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let h = flat_history(200, 1e-3);
        let spec = NoiseSpec {
            sigma: 1e-3,
            seed: 42,
            missing_fraction: 0.3,
            localized: None,
        };
        let a = corrupt(&h, &spec).unwrap();
        let b = corrupt(&h, &spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, h);
    }

    #[test]
    fn noise_statistics_match_the_spec() {
        let n = 100_000;
        let h = flat_history(n, 0.0);
        let spec = NoiseSpec {
            sigma: 1e-3,
            seed: 3,
            missing_fraction: 0.0,
            localized: None,
        };
        let out = corrupt(&h, &spec).unwrap();
        let vals: Vec<f64> = out.snapshots[0]
            .points
            .iter()
            .map(|p| p.strain.e11)
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        assert!(std > 0.98e-3 && std < 1.02e-3, "std {std}");
        // Mean within 3 sigma / sqrt(N).
        assert!(mean.abs() < 3.0 * 1e-3 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn missing_count_is_binomial() {
        let n = 3000;
        let h = flat_history(n, 1e-3);
        let spec = NoiseSpec {
            sigma: 0.0,
            seed: 11,
            missing_fraction: 1.0 / 3.0,
            localized: None,
        };
        let out = corrupt(&h, &spec).unwrap();
        let invalid = out.valid.iter().filter(|v| !**v).count();
        assert!((933..=1067).contains(&invalid), "invalid {invalid}");
    }

    #[test]
    fn mask_is_independent_of_noise_level() {
        let h = flat_history(500, 1e-3);
        let mk = |sigma| NoiseSpec {
            sigma,
            seed: 9,
            missing_fraction: 0.25,
            localized: None,
        };
        let a = corrupt(&h, &mk(1e-3)).unwrap();
        let b = corrupt(&h, &mk(5e-2)).unwrap();
        assert_eq!(a.valid, b.valid);
    }

    #[test]
    fn localized_noise_is_confined_to_the_region() {
        let n = 2000;
        let h = flat_history(n, 0.0); // points at x = 0..n, y = 0.5
        let spec = NoiseSpec {
            sigma: 0.0,
            seed: 5,
            missing_fraction: 0.0,
            localized: Some(LocalizedNoise {
                // Covers the first half of the row.
                region: vec![
                    [-0.5, 0.0],
                    [n as f64 / 2.0, 0.0],
                    [n as f64 / 2.0, 1.0],
                    [-0.5, 1.0],
                ],
                sigma_local: 0.5,
            }),
        };
        let out = corrupt(&h, &spec).unwrap();
        let (mut inside, mut outside) = (0.0f64, 0.0f64);
        for p in &out.snapshots[0].points {
            if p.x < n as f64 / 2.0 {
                inside = inside.max(p.strain.e11.abs());
            } else {
                outside = outside.max(p.strain.e11.abs());
            }
        }
        assert!(inside > 0.05, "inside max {inside}");
        assert_eq!(outside, 0.0);
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert_eq!(
            NoiseSpec { sigma: -1.0, ..NoiseSpec::clean(0) }.validate(),
            Err(SynthError::BadSigma(-1.0))
        );
        assert_eq!(
            NoiseSpec { missing_fraction: 1.5, ..NoiseSpec::clean(0) }.validate(),
            Err(SynthError::BadMissingFraction(1.5))
        );
        let spec = NoiseSpec {
            localized: Some(LocalizedNoise { region: vec![[0.0, 0.0]], sigma_local: 0.1 }),
            ..NoiseSpec::clean(0)
        };
        assert_eq!(spec.validate(), Err(SynthError::BadRegion(1)));
    }

    #[test]
    fn corrupted_csv_appends_valid_column() {
        let h = flat_history(4, 1e-3);
        let spec = NoiseSpec {
            sigma: 0.0,
            seed: 2,
            missing_fraction: 0.5,
            localized: None,
        };
        let out = corrupt(&h, &spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("synthetic.csv");
        write_corrupted_csv(&out, &path).unwrap();
        let (header, rows) = crate::io::read_csv(&path).unwrap();
        assert_eq!(header.last().map(String::as_str), Some("valid"));
        assert_eq!(header.len(), 12);
        assert_eq!(rows.len(), 4);
        for (j, row) in rows.iter().enumerate() {
            assert_eq!(row[11], (out.valid[j] as u8).to_string());
        }
    }
}
