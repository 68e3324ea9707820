//! Float kernels routed through `libm` so the crate builds without `std`
//! and produces identical results either way.

#![allow(dead_code)]

pub(crate) use libm::{acos, atan2, cos, cosh, exp, expm1, log1p as ln_1p, sin, sinh, sqrt};

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// ln(sinh x) for x > 0 without overflow or underflow-to-zero issues.
pub(crate) fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        // sinh x = e^x (1 - e^{-2x}) / 2
        x - core::f64::consts::LN_2 + ln_1p(-exp(-2.0 * x))
    } else {
        ln(sinh(x))
    }
}

/// ln(cosh x) for x >= 0.
pub(crate) fn ln_cosh(x: f64) -> f64 {
    if x > 20.0 {
        x - core::f64::consts::LN_2 + ln_1p(exp(-2.0 * x))
    } else {
        ln(cosh(x))
    }
}

/// acosh(1 + y) for y >= 0, accurate down to y -> 0.
pub(crate) fn acosh_1p(y: f64) -> f64 {
    ln_1p(y + sqrt(y * (y + 2.0)))
}

/// ln(1 - e^{-s}) for s > 0, accurate at both ends.
pub(crate) fn ln_one_minus_exp_neg(s: f64) -> f64 {
    if s < core::f64::consts::LN_2 {
        ln(-expm1(-s))
    } else {
        ln_1p(-exp(-s))
    }
}

/// ln(coth t) for t > 0.
pub(crate) fn ln_coth(t: f64) -> f64 {
    ln_1p(exp(-2.0 * t)) - ln_one_minus_exp_neg(2.0 * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_sinh_matches_naive_in_overlap() {
        for &x in &[1e-8f64, 1e-3, 0.5, 1.0, 5.0, 19.0, 21.0, 50.0] {
            let naive = x.sinh().ln();
            if naive.is_finite() {
                assert!((ln_sinh(x) - naive).abs() <= 1e-12 * naive.abs().max(1.0), "x={x}");
            }
        }
        // far beyond overflow of sinh itself
        let v = ln_sinh(5000.0);
        assert!((v - (5000.0 - core::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn acosh_1p_accurate_near_one() {
        let y = 1e-14f64;
        // acosh(1+y) ~ sqrt(2y)
        let expect = (2.0 * y).sqrt();
        assert!((acosh_1p(y) - expect).abs() < 1e-18);
        assert!((acosh_1p(ln_cosh(3.0).exp() - 1.0) - 3.0).abs() < 1e-12);
    }
}
