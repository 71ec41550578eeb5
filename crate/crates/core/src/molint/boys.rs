
use crate::error::{Error, Result};

const SERIES_SWITCH: f64 = 12.0;

/// Zeroth-order Boys function `F0(t) = ∫_0^1 exp(-t u²) du`.
///
/// Power series `e^{-t} Σ (2t)^k / (2k+1)!!` below `t = 12`, the error-function
/// closed form above it.
pub fn boys_f0(t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::InvalidArgument(alloc::format!(
            "Boys argument must be non-negative, got {t}"
        )));
    }
    Ok(boys_f0_unchecked(t))
}

pub(crate) fn boys_f0_unchecked(t: f64) -> f64 {
    if t < SERIES_SWITCH {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= 2.0 * t / (2.0 * k + 1.0);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        libm::exp(-t) * sum
    } else {
        0.5 * libm::sqrt(core::f64::consts::PI / t) * libm::erf(libm::sqrt(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson quadrature of the defining integral.
    fn quadrature(t: f64) -> f64 {
        let n = 4000;
        let h = 1.0 / n as f64;
        let f = |u: f64| (-t * u * u).exp();
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn origin_is_one() {
        assert_eq!(boys_f0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn matches_independent_oracles() {
        let erf_form = 0.5 * core::f64::consts::PI.sqrt() * libm::erf(1.0);
        assert!((boys_f0(1.0).unwrap() - erf_form).abs() < 1e-12);
        for &t in &[1e-6, 0.3, 1.0, 5.0, 11.99, 12.0, 20.0] {
            assert!((boys_f0(t).unwrap() - quadrature(t)).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn asymptote() {
        let t = 40.0;
        let asym = 0.5 * (core::f64::consts::PI / t).sqrt();
        assert!(((boys_f0(t).unwrap() - asym) / asym).abs() < 1e-10);
    }

    #[test]
    fn continuous_at_switch_and_decreasing() {
        let below = boys_f0(SERIES_SWITCH - 1e-12).unwrap();
        let above = boys_f0(SERIES_SWITCH).unwrap();
        assert!((below - above).abs() < 1e-13);
        let mut prev = boys_f0(0.0).unwrap();
        for i in 1..400 {
            let v = boys_f0(i as f64 * 0.1).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn negative_rejected() {
        assert!(matches!(boys_f0(-0.1), Err(Error::InvalidArgument(_))));
    }
}
