//! Goodness-of-fit tests used by the statistical checks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// Sample size (KS) or degrees of freedom (chi-square).
    pub size: f64,
}

impl TestOutcome {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// Survival function of the Kolmogorov distribution,
/// `P[K > x] = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // Jacobi-transformed series, fast for small x.
        let w = (2.0 * PI).sqrt() / x;
        let f = -PI * PI / (8.0 * x * x);
        let cdf: f64 = (1..=20)
            .map(|k| ((2 * k - 1) as f64).powi(2) * f)
            .map(f64::exp)
            .sum::<f64>()
            * w;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let term = (-2.0 * (k * k) as f64 * x * x).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let sn = effective_n.sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// One-sample Kolmogorov-Smirnov test of `samples` against `cdf`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> TestOutcome {
    assert!(!samples.is_empty());
    let mut v = samples.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    TestOutcome {
        statistic: d,
        p_value: ks_p_value(d, n),
        size: n,
    }
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestOutcome {
    assert!(!a.is_empty() && !b.is_empty());
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable_by(f64::total_cmp);
    y.sort_unstable_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    TestOutcome {
        statistic: d,
        p_value: ks_p_value(d, n * m / (n + m)),
        size: n + m,
    }
}

/// Pearson chi-square test of `observed` counts against category
/// probabilities `probs` (which must sum to one).
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> TestOutcome {
    assert_eq!(observed.len(), probs.len());
    assert!(observed.len() >= 2);
    let n: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let df = (observed.len() - 1) as f64;
    TestOutcome {
        statistic: stat,
        p_value: statrs::function::gamma::gamma_ur(df / 2.0, stat / 2.0),
        size: df,
    }
}

/// Chi-square test of positive integer samples against a discrete law on
/// `{1, 2, ...}` given by `pmf`. Categories `1..K-1` are kept separate and
/// `K..` is pooled, with `K` the first category whose pooled tail would
/// expect fewer than `min_expected` observations.
pub fn chi_square_discrete(samples: &[u64], pmf: impl Fn(u64) -> f64, min_expected: f64) -> TestOutcome {
    let n = samples.len() as f64;
    let mut probs = Vec::new();
    let mut tail = 1.0;
    let mut k = 1u64;
    loop {
        let p = pmf(k);
        if (tail - p) * n < min_expected {
            probs.push(tail);
            break;
        }
        probs.push(p);
        tail -= p;
        k += 1;
    }
    let last = probs.len() as u64;
    let mut observed = vec![0u64; probs.len()];
    for &s in samples {
        assert!(s >= 1, "support starts at 1");
        observed[(s.min(last) - 1) as usize] += 1;
    }
    chi_square_gof(&observed, &probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn kolmogorov_reference_points() {
        // Classic critical values: P[K > 1.3581] = 0.05, P[K > 1.6276] = 0.01.
        assert!((kolmogorov_sf(1.358_1) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.627_6) - 0.01).abs() < 1e-4);
        // Both series branches agree where they meet.
        let lo = kolmogorov_sf(1.18 - 1e-12);
        let hi = kolmogorov_sf(1.18);
        assert!((lo - hi).abs() < 1e-10);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_accepts_uniforms_and_rejects_shifted() {
        let mut rng = stream(1);
        let u: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
        assert!(ks_one_sample(&u, |x| x.clamp(0.0, 1.0)).passes(0.001));
        let shifted: Vec<f64> = u.iter().map(|x| x * 0.97).collect();
        assert!(!ks_one_sample(&shifted, |x| x.clamp(0.0, 1.0)).passes(0.001));
        let v: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
        assert!(ks_two_sample(&u, &v).passes(0.001));
        assert!(!ks_two_sample(&u, &shifted).passes(0.001));
    }

    #[test]
    fn chi_square_reference() {
        // 1 df, statistic 3.841 sits at the 5% point.
        let t = chi_square_gof(&[60, 40], &[0.5, 0.5]);
        assert!((t.statistic - 4.0).abs() < 1e-12);
        assert!((t.p_value - 0.045_500_263_896_358).abs() < 1e-9);
    }

    #[test]
    fn chi_square_discrete_pools_the_tail() {
        let mut rng = stream(3);
        let p = 0.3;
        let samples: Vec<u64> = (0..50_000)
            .map(|_| {
                let mut k = 1;
                while rng.random::<f64>() > p {
                    k += 1;
                }
                k
            })
            .collect();
        let pmf = |k: u64| p * (1.0 - p).powi(k as i32 - 1);
        assert!(chi_square_discrete(&samples, pmf, 5.0).passes(0.001));
        let wrong = |k: u64| 0.33 * 0.67f64.powi(k as i32 - 1);
        assert!(!chi_square_discrete(&samples, wrong, 5.0).passes(0.001));
    }
}
