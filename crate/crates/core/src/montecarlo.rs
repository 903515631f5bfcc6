//! Monte Carlo estimation of the secrecy outage probability.
//!
//! Random numbers come from the ChaCha8 keystream keyed by the seed. Sample
//! `k` owns the fixed word range starting at `k * 2 (1 + M + N)`, so the
//! outcome of every sample depends only on `(seed, k)`. Stream `i` is that
//! keystream positioned at the start of its static quota
//! `ceil(num_samples / num_streams)`; the last stream takes the remainder.
//! Outage counts are integers, so the estimate is bit-identical for any
//! number of streams and any thread schedule.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{sop_closed_form, SopValue};
use crate::error::{Error, Result};
use crate::model::{capacity_difference, snrs_unchecked, ChannelRealization, SystemParams};

pub const MIN_SAMPLES: u64 = 1_000;

/// Two-sided 95% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Largest `|z|` still counted as agreement with the analytic value.
pub const Z_SCORE_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub sop_hat: f64,
    pub outages: u64,
    pub num_samples: u64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub seed: u64,
    pub num_streams: usize,
}

/// `sqrt(p (1 - p) / n)`.
pub fn binomial_std_error(p: f64, num_samples: u64) -> f64 {
    (p * (1.0 - p) / num_samples as f64).sqrt()
}

pub fn default_streams() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// 32-bit keystream words consumed per sample.
fn words_per_sample(params: &SystemParams) -> u128 {
    2 * (1 + u128::from(params.num_users) + u128::from(params.num_eves))
}

/// The generator for samples starting at `first_sample`.
pub fn stream_at(seed: u64, params: &SystemParams, first_sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(u128::from(first_sample) * words_per_sample(params));
    rng
}

fn count_outages(params: &SystemParams, seed: u64, first: u64, count: u64) -> u64 {
    if count == 0 {
        return 0;
    }
    let mut rng = stream_at(seed, params, first);
    let mut real = ChannelRealization {
        g_power: 0.0,
        d_powers: Vec::with_capacity(params.num_users as usize),
        e_powers: Vec::with_capacity(params.num_eves as usize),
    };
    let mut outages = 0;
    for _ in 0..count {
        real.resample(params, &mut rng);
        // Unclamped log ratio: with R_th = 0 the outage event is
        // gamma_d < gamma_e, which the positive part would hide.
        if capacity_difference(snrs_unchecked(params, &real)) < params.r_th {
            outages += 1;
        }
    }
    outages
}

pub fn estimate_sop(
    params: &SystemParams,
    num_samples: u64,
    seed: u64,
    num_streams: usize,
) -> Result<MonteCarloEstimate> {
    params.validate()?;
    if num_samples < MIN_SAMPLES {
        return Err(Error::InvalidParam {
            name: "num_samples",
            reason: format!("{num_samples} is below the minimum of {MIN_SAMPLES}"),
        });
    }
    if num_streams == 0 {
        return Err(Error::InvalidParam {
            name: "num_streams",
            reason: "at least one stream is required".into(),
        });
    }
    let quota = num_samples.div_ceil(num_streams as u64);
    let outages: u64 = (0..num_streams as u64)
        .into_par_iter()
        .map(|stream| {
            let first = (stream * quota).min(num_samples);
            let last = (first + quota).min(num_samples);
            count_outages(params, seed, first, last - first)
        })
        .sum();

    let sop_hat = outages as f64 / num_samples as f64;
    let std_error = binomial_std_error(sop_hat, num_samples);
    Ok(MonteCarloEstimate {
        sop_hat,
        outages,
        num_samples,
        std_error,
        ci95_low: (sop_hat - Z_95 * std_error).max(0.0),
        ci95_high: (sop_hat + Z_95 * std_error).min(1.0),
        seed,
        num_streams,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub mc: MonteCarloEstimate,
    pub cf: SopValue,
    pub z_score: f64,
    pub pass: bool,
}

/// `(sop_hat - cf) / std_error`. When no (or only) outages were observed the
/// empirical error is zero and the null-hypothesis error `sqrt(cf (1 - cf) / n)`
/// is used instead.
pub fn z_score(mc: &MonteCarloEstimate, cf: f64) -> f64 {
    let diff = mc.sop_hat - cf;
    let se = if mc.std_error > 0.0 {
        mc.std_error
    } else {
        binomial_std_error(cf, mc.num_samples)
    };
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

pub fn compare(mc: MonteCarloEstimate, cf: SopValue) -> ValidationReport {
    let z = z_score(&mc, cf.value);
    ValidationReport {
        mc,
        cf,
        z_score: z,
        pass: z.abs() <= Z_SCORE_LIMIT,
    }
}

pub fn validate_against_analytic(
    params: &SystemParams,
    num_samples: u64,
    seed: u64,
) -> Result<ValidationReport> {
    let cf = sop_closed_form(params)?;
    let mc = estimate_sop(params, num_samples, seed, default_streams())?;
    Ok(compare(mc, cf))
}
