//! Closed-form laws, bounds and reference constants for binary BBM.
//!
//! These are the oracle layer for the statistical checks elsewhere in the
//! crate. Bounds carrying unknown multiplicative constants take them from a
//! [`BoundSpec`] so that tests can compare decay rates only.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Multiplicative constants of the front-tail and small-deviation bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    /// Constant of `P[R(t) > m(t) + y] <= c1 (1 + y+)^2 exp(-sqrt2 y)`.
    pub c1: f64,
    /// Constant of the small-deviation bound `C1 exp(-beta z / (6 sqrt2))`.
    pub big_c1: f64,
}

impl Default for BoundSpec {
    fn default() -> Self {
        Self { c1: 1.0, big_c1: 1.0 }
    }
}

impl BoundSpec {
    pub fn new(c1: f64, big_c1: f64) -> Result<Self, DomainError> {
        if !(c1 > 0.0) || !(big_c1 > 0.0) {
            return Err(DomainError::new(
                "BoundSpec::new",
                "constants must be strictly positive",
            ));
        }
        Ok(Self { c1, big_c1 })
    }
}

/// Asymptotic exponents and reference constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub sqrt2: f64,
    /// `log T(y) / y`.
    pub t_exponent: f64,
    /// `log tau_{l(s)} / s`.
    pub tau_leftmost_exponent: f64,
    /// `log Theta_s / s`.
    pub theta_exponent: f64,
    /// The extremal particle sits near `-(2 - sqrt2) s`.
    pub extremal_slope: f64,
    /// `liminf (R(t) - sqrt2 t) / log t`.
    pub liminf_const: f64,
    /// `limsup (R(t) - sqrt2 t) / log t`.
    pub limsup_const: f64,
}

pub const CONSTANTS: Constants = Constants {
    sqrt2: SQRT_2,
    t_exponent: SQRT_2,
    tau_leftmost_exponent: 4.0,
    theta_exponent: 2.0 + 2.0 * SQRT_2,
    extremal_slope: 2.0 - SQRT_2,
    liminf_const: -3.0 / (2.0 * SQRT_2),
    limsup_const: -1.0 / (2.0 * SQRT_2),
};

/// Median centering of the rightmost particle, `sqrt2 t - 3/(2 sqrt2) log t`.
pub fn m_of_t(t: f64) -> Result<f64, DomainError> {
    if !(t > 0.0) {
        return Err(DomainError::new("m_of_t", format!("t must be positive, got {t}")));
    }
    Ok(SQRT_2 * t - 3.0 / (2.0 * SQRT_2) * t.ln())
}

/// `c1 (1 + y+)^2 e^{-sqrt2 y}`. The bound is only claimed for
/// `2 <= y <= sqrt t`; callers flag that domain themselves.
pub fn bramson_upper(y: f64, spec: &BoundSpec) -> f64 {
    let yp = y.max(0.0);
    spec.c1 * (1.0 + yp).powi(2) * (-SQRT_2 * y).exp()
}

/// Lower and upper bounds on `P[B_s >= a]` for `s >= 1`, `a > 0`.
/// The lower bound is negative (hence vacuous) when `a^2 < s`.
pub fn gauss_tail_bounds(s: f64, a: f64) -> Result<(f64, f64), DomainError> {
    if !(s >= 1.0) {
        return Err(DomainError::new("gauss_tail_bounds", format!("need s >= 1, got {s}")));
    }
    if !(a > 0.0) {
        return Err(DomainError::new("gauss_tail_bounds", format!("need a > 0, got {a}")));
    }
    let upper = (s / (2.0 * PI)).sqrt() / a * (-a * a / (2.0 * s)).exp();
    let lower = (1.0 - s / (a * a)) * upper;
    Ok((lower, upper))
}

/// `P[B_s >= a]` for a standard Brownian motion, via the complementary
/// error function. Equal to `P[B_s <= -a]`.
pub fn gauss_tail_exact(s: f64, a: f64) -> Result<f64, DomainError> {
    if !(s > 0.0) {
        return Err(DomainError::new("gauss_tail_exact", format!("need s > 0, got {s}")));
    }
    Ok(0.5 * libm::erfc(a / (2.0 * s).sqrt()))
}

/// `mu^{-1} (2 pi s)^{-1/2} exp(-s (mu^2/2 - 1))`, bounding
/// `P[L(s) <= -mu s] = P[R(s) >= mu s]` for `mu >= sqrt2`.
pub fn lalley_sellke_bound(s: f64, mu: f64) -> Result<f64, DomainError> {
    if !(s > 0.0) {
        return Err(DomainError::new("lalley_sellke_bound", format!("need s > 0, got {s}")));
    }
    // Tolerate mu rounded from sqrt(2) computations.
    if !(mu >= SQRT_2 * (1.0 - 4.0 * f64::EPSILON)) {
        return Err(DomainError::new(
            "lalley_sellke_bound",
            format!("need mu >= sqrt2, got {mu}"),
        ));
    }
    let exponent = -s * (mu * mu / 2.0 - 1.0);
    Ok((2.0 * PI * s).sqrt().recip() / mu * exponent.min(0.0).exp())
}

/// `P[N(t) = k] = e^{-t} (1 - e^{-t})^{k-1}`.
pub fn geometric_pmf(t: f64, k: u64) -> Result<f64, DomainError> {
    if !(t > 0.0) || k < 1 {
        return Err(DomainError::new(
            "geometric_pmf",
            format!("need t > 0, k >= 1, got t={t}, k={k}"),
        ));
    }
    let q = -(-t).exp_m1();
    Ok((-t).exp() * q.powf((k - 1) as f64))
}

/// `P[N(t) >= k] = (1 - e^{-t})^{k-1}`.
pub fn geometric_tail(t: f64, k: u64) -> Result<f64, DomainError> {
    if !(t > 0.0) || k < 1 {
        return Err(DomainError::new(
            "geometric_tail",
            format!("need t > 0, k >= 1, got t={t}, k={k}"),
        ));
    }
    Ok((-(-t).exp_m1()).powf((k - 1) as f64))
}

/// Density of the `M`-th branching time, `M e^{-s} (1 - e^{-s})^{M-1}` on `s >= 0`.
pub fn sigma_density(m: u64, s: f64) -> Result<f64, DomainError> {
    if m < 1 {
        return Err(DomainError::new("sigma_density", "M must be at least 1"));
    }
    if s < 0.0 {
        return Ok(0.0);
    }
    Ok(m as f64 * (-s).exp() * (-(-s).exp_m1()).powf((m - 1) as f64))
}

/// `P[sigma_M <= s] = (1 - e^{-s})^M`.
pub fn sigma_cdf(m: u64, s: f64) -> Result<f64, DomainError> {
    if m < 1 {
        return Err(DomainError::new("sigma_cdf", "M must be at least 1"));
    }
    if s <= 0.0 {
        return Ok(0.0);
    }
    Ok((-(-s).exp_m1()).powf(m as f64))
}

/// Probability that the root has not split by `s` and sits at or below
/// `-beta s`: `e^{-s} P[B_s <= -beta s]`.
pub fn gamma_prob(s: f64, beta: f64) -> Result<f64, DomainError> {
    if !(s > 0.0) {
        return Err(DomainError::new("gamma_prob", format!("need s > 0, got {s}")));
    }
    if !(beta >= 0.0) {
        return Err(DomainError::new("gamma_prob", format!("need beta >= 0, got {beta}")));
    }
    Ok((-s).exp() * gauss_tail_exact(s, beta * s)?)
}

/// `C1 exp(-beta z / (6 sqrt2))`.
pub fn smalldev_bound(z: f64, alpha: f64, beta: f64, spec: &BoundSpec) -> Result<f64, DomainError> {
    if !(z > 0.0 && alpha > 0.0 && beta > 0.0) {
        return Err(DomainError::new(
            "smalldev_bound",
            format!("need z, alpha, beta > 0, got ({z}, {alpha}, {beta})"),
        ));
    }
    Ok(spec.big_c1 * (-beta * z / (6.0 * SQRT_2)).exp())
}

/// Growth rate `1 - a^2/2` of the cohort below `-a k`.
pub fn biggins_rate(a: f64) -> Result<f64, DomainError> {
    if !(0.0..SQRT_2).contains(&a) {
        return Err(DomainError::new(
            "biggins_rate",
            format!("need 0 <= a < sqrt2, got {a}"),
        ));
    }
    Ok(1.0 - a * a / 2.0)
}

/// `E[exp(sqrt2 b_s)]` for a Brownian bridge `b` from 0 to `x` over `[0, k]`:
/// `exp(s (k - s + sqrt2 x) / k)`.
pub fn bridge_exp_moment(k: f64, s: f64, x: f64) -> Result<f64, DomainError> {
    if !(k > 0.0) || !(0.0..=k).contains(&s) {
        return Err(DomainError::new(
            "bridge_exp_moment",
            format!("need k > 0 and 0 <= s <= k, got k={k}, s={s}"),
        ));
    }
    Ok((s * (k - s + SQRT_2 * x) / k).exp())
}
