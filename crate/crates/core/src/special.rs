//! Scalar special functions used by the feature definitions.

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function `1 - erf(x)`, accurate in the tails.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal CDF `Φ(z) = ½(1 + erf(z/√2))`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / core::f64::consts::SQRT_2)
}

/// Upper tail `P(X ≥ t)` of `N(mean, std²)`.
///
/// A zero standard deviation is the step limit: 1 when `mean ≥ t`, else 0.
pub fn normal_exceedance(mean: f64, std: f64, t: f64) -> f64 {
    if std == 0.0 {
        return if mean >= t { 1.0 } else { 0.0 };
    }
    let z = (t - mean) / std;
    // 1 - Φ(z) = ½·erfc(z/√2)
    (0.5 * erfc(z / core::f64::consts::SQRT_2)).clamp(0.0, 1.0)
}

/// modeTube displacement factor `2 / (1 + e^(-2d))`, in (0, 2) with `f(0) = 1`.
pub fn tube_displacement_factor(d: f64) -> f64 {
    2.0 / (1.0 + libm::exp(-2.0 * d))
}
