//! Log-scale exponent regression.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mc::median;
use crate::error::EstimatorError;
use crate::rng::stream;

/// Weighted least-squares line with a bootstrap 95% interval on the slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_ci95: (f64, f64),
    /// `(x, y, weight)` in canonical (sorted) order.
    pub points: Vec<(f64, f64, f64)>,
}

const BOOTSTRAP_ROUNDS: usize = 2000;
const BOOTSTRAP_SEED: u64 = 0xF17_0000;

fn wls(points: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    let sw: f64 = points.iter().map(|p| p.2).sum();
    if !(sw > 0.0) {
        return None;
    }
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    // Relative threshold: all x equal up to rounding means no slope.
    if sxx <= 1e-24 * sw * (1.0 + mx * mx) {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn distinct_x(points: &[(f64, f64, f64)]) -> usize {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_unstable_by(f64::total_cmp);
    xs.dedup();
    xs.len()
}

fn percentile_interval(mut slopes: Vec<f64>) -> (f64, f64) {
    slopes.sort_unstable_by(f64::total_cmp);
    let at = |q: f64| slopes[((slopes.len() - 1) as f64 * q).round() as usize];
    (at(0.025), at(0.975))
}

fn canonical(points: &[(f64, f64, f64)]) -> Vec<(f64, f64, f64)> {
    let mut p = points.to_vec();
    p.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    p
}

/// Fit `y = slope x + intercept` to `(x, y, weight)` points. The interval
/// comes from a pairs bootstrap over the points; the input is sorted first
/// so the result does not depend on the order points are given in.
pub fn exponent_fit(points: &[(f64, f64, f64)]) -> Result<SlopeFit, EstimatorError> {
    if points
        .iter()
        .any(|p| !(p.0.is_finite() && p.1.is_finite() && p.2 >= 0.0))
    {
        return Err(EstimatorError::InvalidInput(
            "points must be finite with non-negative weights".into(),
        ));
    }
    if distinct_x(points) < 2 {
        return Err(EstimatorError::DegenerateDesign(
            "need at least two distinct scales".into(),
        ));
    }
    let points = canonical(points);
    let (slope, intercept) =
        wls(&points).ok_or_else(|| EstimatorError::DegenerateDesign("zero total weight or zero spread".into()))?;

    let mut rng = stream(BOOTSTRAP_SEED);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_ROUNDS);
    let mut attempts = 0;
    while slopes.len() < BOOTSTRAP_ROUNDS && attempts < 50 * BOOTSTRAP_ROUNDS {
        attempts += 1;
        let resample: Vec<_> = (0..points.len())
            .map(|_| points[rng.random_range(0..points.len())])
            .collect();
        if distinct_x(&resample) < 2 {
            continue;
        }
        if let Some((s, _)) = wls(&resample) {
            slopes.push(s);
        }
    }
    let slope_ci95 = if slopes.is_empty() {
        (slope, slope)
    } else {
        percentile_interval(slopes)
    };
    Ok(SlopeFit {
        slope,
        intercept,
        slope_ci95,
        points,
    })
}

/// Replicate values of `log(first-passage time)` at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSample {
    pub scale: f64,
    pub log_times: Vec<f64>,
    /// Log lower bounds of censored replicates.
    pub censored: Vec<f64>,
}

/// Regress the per-scale median of the log times on the scale.
///
/// Censored replicates are left out unless `include_censored`, in which case
/// their lower bounds enter the median as if observed. Each point is
/// weighted by its replicate count. The interval comes from resampling
/// replicates within each scale and refitting the medians.
pub fn fit_medians(samples: &[ScaleSample], include_censored: bool) -> Result<SlopeFit, EstimatorError> {
    let mut groups: Vec<(f64, Vec<f64>)> = samples
        .iter()
        .map(|s| {
            let mut v = s.log_times.clone();
            if include_censored {
                v.extend_from_slice(&s.censored);
            }
            (s.scale, v)
        })
        .filter(|(_, v)| !v.is_empty())
        .collect();
    groups.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    for (_, v) in &mut groups {
        v.sort_unstable_by(f64::total_cmp);
    }
    let point = |scale: f64, v: &[f64]| (scale, median(v), v.len() as f64);
    let points: Vec<_> = groups.iter().map(|(s, v)| point(*s, v)).collect();
    let fit = exponent_fit(&points)?;

    let mut rng = stream(BOOTSTRAP_SEED ^ 1);
    let slopes: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
        .filter_map(|_| {
            let resampled: Vec<_> = groups
                .iter()
                .map(|(s, v)| {
                    let draw: Vec<f64> = (0..v.len()).map(|_| v[rng.random_range(0..v.len())]).collect();
                    point(*s, &draw)
                })
                .collect();
            wls(&resampled).map(|(s, _)| s)
        })
        .collect();
    Ok(SlopeFit {
        slope_ci95: percentile_interval(slopes),
        ..fit
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::SQRT_2;

    #[test]
    fn exact_line_has_zero_width_interval() {
        let pts: Vec<_> = (0..6).map(|i| (i as f64 * 0.5, SQRT_2 * i as f64 * 0.5, 1.0)).collect();
        let fit = exponent_fit(&pts).unwrap();
        assert!((fit.slope - SQRT_2).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-9);
        assert!((fit.slope_ci95.0 - SQRT_2).abs() < 1e-9 && (fit.slope_ci95.1 - SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn noisy_line_recovers_slope() {
        let mut rng = stream(99);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let pts: Vec<_> = (0..50)
            .map(|i| {
                let x = i as f64 / 49.0 * 2.0;
                (x, 4.0 * x + noise.sample(&mut rng), 1.0)
            })
            .collect();
        let fit = exponent_fit(&pts).unwrap();
        assert!((3.8..=4.2).contains(&fit.slope), "{}", fit.slope);
        assert!(fit.slope_ci95.0 <= fit.slope && fit.slope <= fit.slope_ci95.1);
    }

    #[test]
    fn shuffled_input_gives_identical_fit() {
        let pts = vec![(0.5, 1.0, 2.0), (1.0, 1.9, 1.0), (1.5, 2.2, 3.0), (1.0, 1.5, 1.0)];
        let mut rev = pts.clone();
        rev.reverse();
        rev.swap(0, 2);
        assert_eq!(exponent_fit(&pts).unwrap(), exponent_fit(&rev).unwrap());
    }

    #[test]
    fn scaling_y_scales_slope() {
        let pts = vec![(0.5, 1.0, 1.0), (1.0, 1.9, 1.0), (1.5, 2.2, 2.0)];
        let c = 2.5;
        let scaled: Vec<_> = pts.iter().map(|&(x, y, w)| (x, c * y, w)).collect();
        let (a, b) = (exponent_fit(&pts).unwrap(), exponent_fit(&scaled).unwrap());
        assert!((b.slope - c * a.slope).abs() < 1e-12);
    }

    #[test]
    fn degenerate_designs_are_rejected() {
        assert!(matches!(
            exponent_fit(&[(1.0, 2.0, 1.0), (1.0, 3.0, 1.0)]),
            Err(EstimatorError::DegenerateDesign(_))
        ));
        assert!(matches!(
            exponent_fit(&[(1.0, 2.0, 1.0)]),
            Err(EstimatorError::DegenerateDesign(_))
        ));
        assert!(exponent_fit(&[(1.0, f64::NAN, 1.0), (2.0, 1.0, 1.0)]).is_err());
    }

    #[test]
    fn median_fit_on_exact_groups() {
        let samples: Vec<ScaleSample> = [0.5, 1.0, 1.5]
            .iter()
            .map(|&s| ScaleSample {
                scale: s,
                log_times: vec![SQRT_2 * s - 0.1, SQRT_2 * s, SQRT_2 * s + 0.1],
                censored: vec![],
            })
            .collect();
        let fit = fit_medians(&samples, false).unwrap();
        assert!((fit.slope - SQRT_2).abs() < 1e-12);
        assert!(fit.slope_ci95.0 <= fit.slope && fit.slope <= fit.slope_ci95.1);
        assert_eq!(fit.points.iter().map(|p| p.2).collect::<Vec<_>>(), vec![3.0; 3]);
    }

    #[test]
    fn censored_values_only_enter_when_requested() {
        let samples = vec![
            ScaleSample {
                scale: 0.0,
                log_times: vec![0.0],
                censored: vec![],
            },
            ScaleSample {
                scale: 1.0,
                log_times: vec![1.0],
                censored: vec![5.0, 5.0],
            },
        ];
        assert!((fit_medians(&samples, false).unwrap().slope - 1.0).abs() < 1e-12);
        assert!((fit_medians(&samples, true).unwrap().slope - 5.0).abs() < 1e-12);
    }
}
