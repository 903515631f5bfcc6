//! System parameters, channel draws, instantaneous SNRs and secrecy rate.
//!
//! Every channel power is exponentially distributed and is parameterized by
//! its MEAN `zeta`, i.e. `F(z) = 1 - exp(-z / zeta)`. Libraries that take a
//! rate `1 / zeta` are deliberately not used here.

use std::path::Path;
use std::str::FromStr;

use rand_chacha::rand_core::RngCore;

use crate::error::{domain, Error, Result};

/// `10^(x/10)`.
pub fn db_to_linear(x_db: f64) -> Result<f64> {
    if !x_db.is_finite() {
        return Err(domain("x_db", x_db, "finite"));
    }
    Ok(10f64.powf(x_db / 10.0))
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Full parameterization of the keyhole network. Continuous quantities are
/// linear (not dB).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Number of legitimate users `M`.
    pub num_users: u32,
    /// Number of passive eavesdroppers `N`.
    pub num_eves: u32,
    /// Mean of the source-to-keyhole power `|g|^2`.
    pub zeta_g: f64,
    /// Mean of each keyhole-to-user power `|h_d|^2`.
    pub zeta_hd: f64,
    /// Mean of each keyhole-to-eavesdropper power `|h_e|^2`.
    pub zeta_he: f64,
    /// Keyhole scattering cross-section.
    pub delta: f64,
    /// Average user-side SNR `P / sigma_d^2`.
    pub gamma_bar_d: f64,
    /// Average eavesdropper-side SNR `P / sigma_e^2`.
    pub gamma_bar_e: f64,
    /// Threshold secrecy rate in bits per channel use.
    pub r_th: f64,
}

impl SystemParams {
    pub const DEFAULT_ZETA_G_DB: f64 = 3.0;
    pub const DEFAULT_ZETA_HD_DB: f64 = 6.0;
    pub const DEFAULT_ZETA_HE_DB: f64 = -3.0;
    pub const DEFAULT_DELTA: f64 = 0.5;
    pub const DEFAULT_R_TH: f64 = 1.0;

    /// Reference scenario: `zeta_g = 3 dB`, `zeta_hd = 6 dB`,
    /// `zeta_he = -3 dB`, `delta = 0.5`, `R_th = 1` bpcu, and equal noise
    /// powers at users and eavesdroppers so `gamma_bar_e = gamma_bar_d`.
    pub fn reference(num_users: u32, num_eves: u32, snr_db: f64) -> Self {
        let snr = 10f64.powf(snr_db / 10.0);
        Self {
            num_users,
            num_eves,
            zeta_g: 10f64.powf(Self::DEFAULT_ZETA_G_DB / 10.0),
            zeta_hd: 10f64.powf(Self::DEFAULT_ZETA_HD_DB / 10.0),
            zeta_he: 10f64.powf(Self::DEFAULT_ZETA_HE_DB / 10.0),
            delta: Self::DEFAULT_DELTA,
            gamma_bar_d: snr,
            gamma_bar_e: snr,
            r_th: Self::DEFAULT_R_TH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 {
            return Err(Error::InvalidParam {
                name: "M",
                reason: "at least one user is required".into(),
            });
        }
        if self.num_eves == 0 {
            return Err(Error::InvalidParam {
                name: "N",
                reason: "at least one eavesdropper is required".into(),
            });
        }
        for (name, value) in [
            ("zeta_g", self.zeta_g),
            ("zeta_hd", self.zeta_hd),
            ("zeta_he", self.zeta_he),
            ("delta", self.delta),
            ("gamma_bar_d", self.gamma_bar_d),
            ("gamma_bar_e", self.gamma_bar_e),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(domain(name, value, "finite and > 0"));
            }
        }
        if !(self.r_th.is_finite() && self.r_th >= 0.0) {
            return Err(domain("r_th", self.r_th, "finite and >= 0"));
        }
        Ok(())
    }

    /// `rho = 2^R_th`.
    pub fn rho(&self) -> f64 {
        self.r_th.exp2()
    }

    /// Mean of `gamma_bar_d |h_d|^2`, the scale of the best-user order statistic.
    pub fn user_scale(&self) -> f64 {
        self.zeta_hd * self.gamma_bar_d
    }

    /// Mean of `gamma_bar_e |h_e|^2`.
    pub fn eve_scale(&self) -> f64 {
        self.zeta_he * self.gamma_bar_e
    }
}

/// One joint draw of the keyhole and every user/eavesdropper link power.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub g_power: f64,
    pub d_powers: Vec<f64>,
    pub e_powers: Vec<f64>,
}

impl ChannelRealization {
    /// Redraw in place, reusing the power buffers.
    ///
    /// Consumes exactly `1 + M + N` 64-bit outputs of `rng`, in the order
    /// keyhole, users, eavesdroppers.
    pub fn resample<R: RngCore + ?Sized>(&mut self, params: &SystemParams, rng: &mut R) {
        self.g_power = sample_exponential(params.zeta_g, rng);
        self.d_powers.clear();
        self.d_powers
            .extend((0..params.num_users).map(|_| sample_exponential(params.zeta_hd, rng)));
        self.e_powers.clear();
        self.e_powers
            .extend((0..params.num_eves).map(|_| sample_exponential(params.zeta_he, rng)));
    }
}

/// Instantaneous SNRs at the scheduled user and at the strongest eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPair {
    pub gamma_d: f64,
    pub gamma_e: f64,
}

/// Uniform on `(0, 1]` from the top 53 bits of one `u64`.
fn unit_interval_open_zero<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    ((rng.next_u64() >> 11) + 1) as f64 * SCALE
}

/// Exponential draw with the given MEAN by inversion, `-mean * ln(U)`.
pub fn sample_exponential<R: RngCore + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    -mean * unit_interval_open_zero(rng).ln()
}

pub fn sample_realization<R: RngCore + ?Sized>(
    params: &SystemParams,
    rng: &mut R,
) -> Result<ChannelRealization> {
    params.validate()?;
    let mut realization = ChannelRealization {
        g_power: 0.0,
        d_powers: Vec::with_capacity(params.num_users as usize),
        e_powers: Vec::with_capacity(params.num_eves as usize),
    };
    realization.resample(params, rng);
    Ok(realization)
}

pub fn instantaneous_snrs(params: &SystemParams, real: &ChannelRealization) -> Result<SnrPair> {
    if real.d_powers.len() != params.num_users as usize
        || real.e_powers.len() != params.num_eves as usize
    {
        return Err(Error::DimensionMismatch {
            users: params.num_users as usize,
            eves: params.num_eves as usize,
            got_users: real.d_powers.len(),
            got_eves: real.e_powers.len(),
        });
    }
    Ok(snrs_unchecked(params, real))
}

pub(crate) fn snrs_unchecked(params: &SystemParams, real: &ChannelRealization) -> SnrPair {
    let keyhole = real.g_power * params.delta * params.delta;
    let best_user = real.d_powers.iter().copied().fold(0.0, f64::max);
    let best_eve = real.e_powers.iter().copied().fold(0.0, f64::max);
    SnrPair {
        gamma_d: params.gamma_bar_d * keyhole * best_user,
        gamma_e: params.gamma_bar_e * keyhole * best_eve,
    }
}

/// `log2((1 + gamma_d) / (1 + gamma_e))` without the positive-part clamp.
pub fn capacity_difference(snrs: SnrPair) -> f64 {
    (snrs.gamma_d.ln_1p() - snrs.gamma_e.ln_1p()) / std::f64::consts::LN_2
}

/// Achievable secrecy rate `[C_B - C_E]^+` in bits per channel use.
pub fn secrecy_rate(snrs: SnrPair) -> f64 {
    capacity_difference(snrs).max(0.0)
}

/// A parameter file: `key = value` lines, `#` starts a comment.
///
/// Keys: `M`, `N`, `zeta_g_db`, `zeta_hd_db`, `zeta_he_db`, `delta`,
/// `gamma_bar_d_db`, `gamma_bar_e_db` (optional) and `r_th`. When
/// `gamma_bar_e_db` is absent it follows `gamma_bar_d_db`, and sweeps over
/// the user SNR keep it tied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamFile {
    pub params: SystemParams,
    pub symmetric_noise: bool,
}

const PARAM_KEYS: [&str; 9] = [
    "M",
    "N",
    "zeta_g_db",
    "zeta_hd_db",
    "zeta_he_db",
    "delta",
    "gamma_bar_d_db",
    "gamma_bar_e_db",
    "r_th",
];

impl ParamFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    /// Renders back to the file format.
    pub fn render(&self) -> String {
        let p = &self.params;
        let mut out = format!(
            "M = {}\nN = {}\nzeta_g_db = {}\nzeta_hd_db = {}\nzeta_he_db = {}\ndelta = {}\ngamma_bar_d_db = {}\n",
            p.num_users,
            p.num_eves,
            linear_to_db(p.zeta_g),
            linear_to_db(p.zeta_hd),
            linear_to_db(p.zeta_he),
            p.delta,
            linear_to_db(p.gamma_bar_d),
        );
        if !self.symmetric_noise {
            out.push_str(&format!("gamma_bar_e_db = {}\n", linear_to_db(p.gamma_bar_e)));
        }
        out.push_str(&format!("r_th = {}\n", p.r_th));
        out
    }
}

impl FromStr for ParamFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values: [Option<(usize, &str)>; PARAM_KEYS.len()] = [None; PARAM_KEYS.len()];
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::ParamFile {
                line,
                reason: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            let slot = PARAM_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::ParamFile {
                    line,
                    reason: format!("unknown key `{key}`"),
                })?;
            if values[slot].is_some() {
                return Err(Error::ParamFile {
                    line,
                    reason: format!("duplicate key `{key}`"),
                });
            }
            values[slot] = Some((line, value.trim()));
        }

        let real = |slot: usize| -> Result<f64> {
            let (line, text) = values[slot].ok_or_else(|| Error::ParamFile {
                line: 0,
                reason: format!("missing key `{}`", PARAM_KEYS[slot]),
            })?;
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::ParamFile {
                    line,
                    reason: format!("`{}` is not a finite number: `{text}`", PARAM_KEYS[slot]),
                })
        };
        let count = |slot: usize| -> Result<u32> {
            let (line, text) = values[slot].ok_or_else(|| Error::ParamFile {
                line: 0,
                reason: format!("missing key `{}`", PARAM_KEYS[slot]),
            })?;
            text.parse::<u32>().map_err(|_| Error::ParamFile {
                line,
                reason: format!("`{}` is not a non-negative integer: `{text}`", PARAM_KEYS[slot]),
            })
        };

        let gamma_bar_d_db = real(6)?;
        let symmetric_noise = values[7].is_none();
        let gamma_bar_e_db = if symmetric_noise { gamma_bar_d_db } else { real(7)? };
        let params = SystemParams {
            num_users: count(0)?,
            num_eves: count(1)?,
            zeta_g: db_to_linear(real(2)?)?,
            zeta_hd: db_to_linear(real(3)?)?,
            zeta_he: db_to_linear(real(4)?)?,
            delta: real(5)?,
            gamma_bar_d: db_to_linear(gamma_bar_d_db)?,
            gamma_bar_e: db_to_linear(gamma_bar_e_db)?,
            r_th: real(8)?,
        };
        params.validate()?;
        Ok(Self {
            params,
            symmetric_noise,
        })
    }
}
