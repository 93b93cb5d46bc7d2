//! Scalar math routed through `libm` so the crate stays `no_std` and results
//! are bit-identical across platforms and feature sets.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn max(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

#[inline]
pub fn min(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}

/// Logistic function `1 / (1 + e^{-z})`, evaluated without overflow for
/// large `|z|`.
#[inline]
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// `x` rounded to the nearest integer when it is within `tol` of one.
pub fn nearest_integer(x: f64, tol: f64) -> Option<i64> {
    let r = round(x);
    if abs(x - r) <= tol {
        Some(r as i64)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_is_stable_and_symmetric() {
        assert_eq!(logistic(0.0), 0.5);
        assert!(logistic(800.0) <= 1.0 && logistic(800.0) > 0.999);
        assert!(logistic(-800.0) >= 0.0 && logistic(-800.0) < 1e-300);
        let z = 1.3;
        assert!(abs(logistic(z) + logistic(-z) - 1.0) < 1e-15);
    }

    #[test]
    fn nearest_integer_tolerates_roundoff() {
        assert_eq!(nearest_integer(64.00000000001, 1e-9), Some(64));
        assert_eq!(nearest_integer(64.3, 1e-9), None);
    }
}
