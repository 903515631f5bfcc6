//! Modified Bessel function of the second kind, order one.
//!
//! The closed-form SOP needs `a K1(a)` for `a = sqrt(4 m (rho - 1) / ...)`,
//! which runs from exactly zero (zero rate threshold) to a few hundred
//! (weak keyhole, low SNR). Two regimes cover the whole half-line:
//!
//! * `z < 2`: the ascending series with its logarithmic term, summed for
//!   `z K1(z)` directly so that nothing of order `1/z` is ever formed;
//! * `z >= 2`: Steed's continued fraction for the exponentially scaled pair
//!   `e^z K0(z)`, `e^z K1(z)`, with the `e^{-z}` factor applied last.
//!
//! Both reach close to full double precision; the crossover at `z = 2`
//! is where the continued fraction still converges in a few dozen steps and
//! the series has not yet started to cancel.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const MAX_TERMS: usize = 500;

/// `K1(z)` for finite `z > 0`.
///
/// Returns `+inf` when `1/z` itself overflows and `0` once the true value
/// underflows (beyond `z ~ 705`).
pub fn bessel_k1(z: f64) -> Result<f64> {
    if !(z.is_finite() && z > 0.0) {
        return Err(domain("z", z, "finite and > 0"));
    }
    if z < SERIES_LIMIT {
        Ok(z_k1_series(z) / z)
    } else {
        Ok(apply_decay(k1_scaled_cf(z), z))
    }
}

/// `z K1(z)` for finite `z >= 0`, equal to exactly 1 at the origin.
///
/// The product is bounded by 1 and strictly decreasing, so it is the form
/// callers should use whenever `z` may approach zero.
pub fn z_times_k1(z: f64) -> Result<f64> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(domain("z", z, "finite and >= 0"));
    }
    if z == 0.0 {
        Ok(1.0)
    } else if z < SERIES_LIMIT {
        Ok(z_k1_series(z))
    } else {
        Ok(apply_decay(z * k1_scaled_cf(z), z))
    }
}

/// Ascending series
/// `z K1(z) = 1 + t * sum_k c_k (2 ln(z/2) + 2 gamma - H_k - H_{k+1})`,
/// with `t = z^2 / 4` and `c_k = t^k / (k! (k+1)!)`.
fn z_k1_series(z: f64) -> f64 {
    let t = 0.25 * z * z;
    let log_term = 2.0 * ((0.5 * z).ln() + EULER_GAMMA);
    let mut coeff = 1.0;
    let mut harmonic_k = 0.0;
    let mut harmonic_k1 = 1.0;
    let mut sum = 0.0;
    for k in 0..MAX_TERMS {
        let term = coeff * (log_term - harmonic_k - harmonic_k1);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        let kf = k as f64;
        coeff *= t / ((kf + 1.0) * (kf + 2.0));
        harmonic_k = harmonic_k1;
        harmonic_k1 += 1.0 / (kf + 2.0);
    }
    1.0 + t * sum
}

/// `e^z K1(z)` for `z >= 2` from Steed's method (Temme's CF2 with order 0).
fn k1_scaled_cf(x: f64) -> f64 {
    const EPS: f64 = 1e-17;
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k0_scaled = (PI / (2.0 * x)).sqrt() / s;
    k0_scaled * (x + 0.5 - h) / x
}

/// `scaled * e^{-z}`, splitting the exponential once it would go subnormal
/// on its own.
fn apply_decay(scaled: f64, z: f64) -> f64 {
    if z < 700.0 {
        scaled * (-z).exp()
    } else {
        let half = (-0.5 * z).exp();
        scaled * half * half
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // 40-digit reference values
    const REFERENCE: [(f64, f64); 8] = [
        (1e-8, 99_999_999.999_999_904_817),
        (1e-6, 999_999.999_992_784_278_96),
        (0.5, 1.656_441_120_003_300_893_7),
        (2.0, 0.139_865_881_816_522_427_28),
        (5.0, 0.004_044_613_445_452_164_208_4),
        (20.0, 5.883_057_969_557_038_177_7e-10),
        (100.0, 4.679_853_735_636_909_286_6e-45),
        (700.0, 4.673_110_796_707_966_109_1e-306),
    ];

    #[test]
    fn known_values() {
        assert_relative_eq!(bessel_k1(1.0).unwrap(), 0.601_907_230_197_234_6, max_relative = 1e-12);
        assert_relative_eq!(bessel_k1(10.0).unwrap(), 1.864_877_345_382_558_4e-5, max_relative = 1e-12);
        for (z, k1) in REFERENCE {
            assert_relative_eq!(bessel_k1(z).unwrap(), k1, max_relative = 1e-12);
        }
    }

    #[test]
    fn product_limits() {
        assert_eq!(z_times_k1(0.0).unwrap(), 1.0);
        assert_relative_eq!(z_times_k1(1.0).unwrap(), 0.601_907_230_197_234_6, max_relative = 1e-12);
        assert!((z_times_k1(1e-6).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn regimes_meet_at_crossover() {
        let below = z_k1_series(SERIES_LIMIT);
        let above = SERIES_LIMIT * k1_scaled_cf(SERIES_LIMIT) * (-SERIES_LIMIT).exp();
        assert_relative_eq!(below, above, max_relative = 1e-14);
    }

    #[test]
    fn underflow_and_overflow() {
        assert_eq!(bessel_k1(800.0).unwrap(), 0.0);
        assert_eq!(z_times_k1(800.0).unwrap(), 0.0);
        assert!(bessel_k1(710.0).unwrap() > 0.0);
        assert_eq!(bessel_k1(1e-310).unwrap(), f64::INFINITY);
    }

    #[test]
    fn domain_errors() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(bessel_k1(bad).is_err(), "{bad}");
        }
        for bad in [-1e-300, f64::NAN, f64::INFINITY, f64::NEG_INFINITY] {
            assert!(z_times_k1(bad).is_err(), "{bad}");
        }
    }
}
