//! Closed-form, asymptotic and quadrature evaluation of the secrecy outage
//! probability.
//!
//! With `X = gamma_bar_d max_m |h_d|^2`, `Y = gamma_bar_e max_n |h_e|^2` and
//! `Z = |g|^2`, an outage is the event `X < (rho - 1) / (delta^2 Z) + rho Y`.
//! Averaging the binomial expansion of `F_X` over `Y` and then `Z` gives
//!
//! ```text
//! P_out = 1 - sum_{m=1}^{M} sum_{n=1}^{N} C(M,m) C(N,n) (-1)^{m+n}
//!             * n A / (m rho B + n A) * a_m K1(a_m),
//! a_m   = sqrt(4 m (rho - 1) / (delta^2 zeta_g A)),
//! ```
//!
//! where `A = zeta_hd gamma_bar_d` and `B = zeta_he gamma_bar_e`. Letting the
//! transmit power grow sends every `a_m` to zero and `a_m K1(a_m)` to one,
//! which leaves a saturation level that no longer involves `delta` or
//! `zeta_g`.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::model::SystemParams;
use crate::quad::{integrate_partitioned, unit_breakpoints, Tolerance};
use crate::specfun::z_times_k1;
use crate::sum::CompensatedSum;

/// Largest `M` or `N` accepted by the alternating-sum formulas. `C(60, 30)`
/// is about `1.2e17`, already past exact integer representation in `f64`.
pub const MAX_CLOSED_FORM_ORDER: u32 = 60;

/// Raw closed-form values this far outside `[0, 1]` are rounding and get
/// clamped; anything further is reported as a summation failure.
pub const CLAMP_ALLOWANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    ClosedForm,
    Asymptotic,
    Quadrature,
    MonteCarlo,
}

impl Method {
    /// In CSV column order.
    pub const ALL: [Method; 4] = [
        Method::ClosedForm,
        Method::Asymptotic,
        Method::Quadrature,
        Method::MonteCarlo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Asymptotic => "asymptotic",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Sweep(format!("unknown method `{s}`")))
    }
}

/// A secrecy outage probability tagged with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SopValue {
    pub value: f64,
    pub method: Method,
}

/// `C(n, k)` as `f64`, exact in integer arithmetic before the final rounding.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as f64
}

fn order_statistic_cdf(x: f64, count: u32, scale: f64) -> f64 {
    (-(-x / scale).exp_m1()).powi(count as i32)
}

fn check_cdf_args(x: f64, count: u32, mean: f64, snr: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(domain("x", x, ">= 0"));
    }
    if count == 0 {
        return Err(Error::InvalidParam {
            name: "count",
            reason: "the maximum of zero variables is undefined".into(),
        });
    }
    for (name, v) in [("zeta", mean), ("gamma_bar", snr)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(domain(name, v, "finite and > 0"));
        }
    }
    Ok(())
}

/// CDF of `gamma_bar_d max_m |h_d^(m)|^2`: `[1 - exp(-x / (zeta_hd gamma_bar_d))]^M`.
pub fn best_user_cdf(x: f64, num_users: u32, zeta_hd: f64, gamma_bar_d: f64) -> Result<f64> {
    check_cdf_args(x, num_users, zeta_hd, gamma_bar_d)?;
    Ok(order_statistic_cdf(x, num_users, zeta_hd * gamma_bar_d))
}

/// CDF of `gamma_bar_e max_n |h_e^(n)|^2`.
pub fn best_eve_cdf(y: f64, num_eves: u32, zeta_he: f64, gamma_bar_e: f64) -> Result<f64> {
    check_cdf_args(y, num_eves, zeta_he, gamma_bar_e)?;
    Ok(order_statistic_cdf(y, num_eves, zeta_he * gamma_bar_e))
}

/// The best-user CDF in binomial-expansion form,
/// `1 + sum_m (-1)^m C(M, m) exp(-m x / (zeta_hd gamma_bar_d))`.
/// This is the form the closed-form SOP integrates term by term.
pub fn best_user_cdf_expanded(
    x: f64,
    num_users: u32,
    zeta_hd: f64,
    gamma_bar_d: f64,
) -> Result<f64> {
    check_cdf_args(x, num_users, zeta_hd, gamma_bar_d)?;
    let scale = zeta_hd * gamma_bar_d;
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for m in 1..=num_users {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * binomial(num_users, m) * (-(m as f64) * x / scale).exp());
    }
    Ok(acc.value())
}

fn check_order_cap(params: &SystemParams) -> Result<()> {
    if params.num_users > MAX_CLOSED_FORM_ORDER || params.num_eves > MAX_CLOSED_FORM_ORDER {
        return Err(Error::BinomialCap {
            m: params.num_users,
            n: params.num_eves,
            cap: MAX_CLOSED_FORM_ORDER,
        });
    }
    Ok(())
}

fn finish(raw: f64, method: Method) -> Result<SopValue> {
    if !(-CLAMP_ALLOWANCE..=1.0 + CLAMP_ALLOWANCE).contains(&raw) {
        return Err(Error::OutOfRange { raw });
    }
    Ok(SopValue {
        value: raw.clamp(0.0, 1.0),
        method,
    })
}

/// `1 - sum_m sum_n C(M,m) C(N,n) (-1)^{m+n} w(m, n) k(m)` with
/// `w = n r / (m rho + n r)` and `r = A / B`.
fn alternating_double_sum(
    params: &SystemParams,
    ratio: f64,
    mut keyhole_factor: impl FnMut(u32) -> Result<f64>,
) -> Result<f64> {
    let (num_users, num_eves) = (params.num_users, params.num_eves);
    let rho = params.rho();
    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    for m in 1..=num_users {
        let keyhole = keyhole_factor(m)?;
        let user_weight = binomial(num_users, m);
        for n in 1..=num_eves {
            let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
            let nr = f64::from(n) * ratio;
            let weight = nr / (f64::from(m) * rho + nr);
            acc.add(-sign * user_weight * binomial(num_eves, n) * weight * keyhole);
        }
    }
    Ok(acc.value())
}

/// Exact closed-form SOP.
///
/// `a K1(a)` is evaluated through [`z_times_k1`], so a zero rate threshold
/// (`a = 0`) takes the analytic limit 1 instead of `0 * inf`.
pub fn sop_closed_form(params: &SystemParams) -> Result<SopValue> {
    params.validate()?;
    check_order_cap(params)?;
    let user_scale = params.user_scale();
    let ratio = user_scale / params.eve_scale();
    let bessel_scale = 4.0 * (params.rho() - 1.0)
        / (params.delta * params.delta * params.zeta_g * user_scale);
    let raw = alternating_double_sum(params, ratio, |m| {
        let arg = (f64::from(m) * bessel_scale).sqrt();
        if arg.is_finite() {
            z_times_k1(arg)
        } else {
            Ok(0.0)
        }
    })?;
    finish(raw, Method::ClosedForm)
}

/// High-SNR saturation level of the SOP.
///
/// Depends on the SNRs only through `gamma_bar_d / gamma_bar_e`, i.e. the
/// noise ratio `sigma_e^2 / sigma_d^2`.
pub fn sop_asymptotic(params: &SystemParams) -> Result<SopValue> {
    params.validate()?;
    check_order_cap(params)?;
    let ratio = (params.zeta_hd / params.zeta_he) * (params.gamma_bar_d / params.gamma_bar_e);
    let raw = alternating_double_sum(params, ratio, |_| Ok(1.0))?;
    finish(raw, Method::Asymptotic)
}

pub const MIN_QUAD_TOL: f64 = 1e-10;
pub const MAX_QUAD_TOL: f64 = 1e-3;

/// SOP by adaptive quadrature of its double-integral definition.
///
/// Uses only the product forms of the order-statistic CDFs, never the
/// alternating expansions, so it is independent of [`sop_closed_form`].
///
/// * outer: `z = -zeta_g ln u`, so `f_Z(z) dz = du` on `u in (0, 1)`;
/// * inner: `v = F_Y(y)`, so `f_Y(y) dy = dv` with
///   `y = -B ln(1 - v^{1/N})`, again on `(0, 1)` and without truncation.
///
/// Both axes start from breakpoints geometric toward each end, since the
/// keyhole transition sits at `1 - u ~ (rho - 1) / (delta^2 zeta_g A)` and
/// moves toward `u = 1` as the SNR grows.
pub fn sop_quadrature(params: &SystemParams, rel_tol: f64) -> Result<SopValue> {
    params.validate()?;
    if !(MIN_QUAD_TOL..=MAX_QUAD_TOL).contains(&rel_tol) {
        return Err(domain("rel_tol", rel_tol, "within [1e-10, 1e-3]"));
    }
    let rho = params.rho();
    let threshold = (rho - 1.0) / (params.delta * params.delta);
    let user_scale = params.user_scale();
    let eve_scale = params.eve_scale();
    let num_users = params.num_users;
    let inv_eves = 1.0 / f64::from(params.num_eves);
    let zeta_g = params.zeta_g;

    let user_cdf = |x: f64| order_statistic_cdf(x, num_users, user_scale);
    let eve_quantile = |v: f64| -eve_scale * (-(v.ln() * inv_eves).exp_m1()).ln();

    let inner_breaks = unit_breakpoints(10);
    let outer_breaks = unit_breakpoints(14);
    let inner_tol = Tolerance::relative(rel_tol / 20.0).with_abs(1e-16);
    let outer_tol = Tolerance::relative(rel_tol).with_abs(1e-15);

    let mut inner_failure = None;
    let outer = integrate_partitioned(
        |u| {
            let z = -zeta_g * u.ln();
            // u rounds to 1 inside the last segments, where z = -0
            let offset = if threshold == 0.0 {
                0.0
            } else if z > 0.0 {
                threshold / z
            } else {
                f64::INFINITY
            };
            if user_cdf(offset) == 1.0 {
                return 1.0;
            }
            match integrate_partitioned(
                |v| user_cdf(offset + rho * eve_quantile(v)),
                &inner_breaks,
                inner_tol,
            ) {
                Ok(inner) => inner.value,
                Err(e) => {
                    inner_failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        &outer_breaks,
        outer_tol,
    );
    if let Some(e) = inner_failure {
        return Err(e);
    }
    finish(outer?.value, Method::Quadrature)
}
