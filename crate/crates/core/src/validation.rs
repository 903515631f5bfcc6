//! Three-way validation over a `(M, N, SNR)` grid: Monte Carlo against the
//! closed form, closed form against quadrature, and the 60 dB closed form
//! against the saturation level.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::analytic::{sop_asymptotic, sop_closed_form, sop_quadrature, MAX_CLOSED_FORM_ORDER};
use crate::error::{Error, Result};
use crate::model::{db_to_linear, ParamFile, SystemParams};
use crate::montecarlo::{compare, estimate_sop, ValidationReport};

/// Closed form and quadrature must agree to this relative tolerance...
pub const QUAD_REL_AGREEMENT: f64 = 1e-6;
/// ...or to this absolute one when the SOP is below `SMALL_SOP`.
pub const QUAD_ABS_AGREEMENT: f64 = 1e-9;
pub const SMALL_SOP: f64 = 1e-3;
pub const SATURATION_SNR_DB: f64 = 60.0;
pub const SATURATION_TOLERANCE: f64 = 1e-3;
/// One tolerated Monte Carlo miss per this many grid points.
pub const POINTS_PER_ALLOWED_MISS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub base: ParamFile,
    pub users: Vec<u32>,
    pub eves: Vec<u32>,
    pub snrs_db: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    pub num_streams: usize,
    pub quad_rel_tol: f64,
}

impl GridConfig {
    /// `M in {1, 2, 5, 8}`, `N in {1, 3}`, user SNR in `{0, 10, 20, 30}` dB.
    pub fn standard(base: ParamFile, samples: u64, seed: u64, num_streams: usize) -> Self {
        Self {
            base,
            users: vec![1, 2, 5, 8],
            eves: vec![1, 3],
            snrs_db: vec![0.0, 10.0, 20.0, 30.0],
            samples,
            seed,
            num_streams,
            quad_rel_tol: 1e-9,
        }
    }

    fn point(&self, m: u32, n: u32, snr_db: f64) -> Result<SystemParams> {
        let mut p = self.base.params;
        p.num_users = m;
        p.num_eves = n;
        p.gamma_bar_d = db_to_linear(snr_db)?;
        if self.base.symmetric_noise {
            p.gamma_bar_e = p.gamma_bar_d;
        }
        p.validate()?;
        Ok(p)
    }

    /// Every grid point, checked up front so a bad grid fails before any
    /// simulation starts.
    pub fn points(&self) -> Result<Vec<(u32, u32, f64, SystemParams)>> {
        if self.users.is_empty() || self.eves.is_empty() || self.snrs_db.is_empty() {
            return Err(Error::Sweep("validation grid has an empty axis".into()));
        }
        let mut out = Vec::new();
        for &m in &self.users {
            for &n in &self.eves {
                if m > MAX_CLOSED_FORM_ORDER || n > MAX_CLOSED_FORM_ORDER {
                    return Err(Error::BinomialCap {
                        m,
                        n,
                        cap: MAX_CLOSED_FORM_ORDER,
                    });
                }
                for &snr in &self.snrs_db {
                    out.push((m, n, snr, self.point(m, n, snr)?));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub num_users: u32,
    pub num_eves: u32,
    pub snr_db: f64,
    pub report: ValidationReport,
    pub quadrature: f64,
    pub quad_agrees: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationResult {
    pub num_users: u32,
    pub num_eves: u32,
    pub closed_form: f64,
    pub asymptotic: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub points: Vec<PointResult>,
    pub saturation: Vec<SaturationResult>,
    pub allowed_mc_misses: usize,
}

pub fn quad_agrees(closed_form: f64, quadrature: f64) -> bool {
    let diff = (closed_form - quadrature).abs();
    diff <= QUAD_REL_AGREEMENT * closed_form.abs() || (closed_form < SMALL_SOP && diff <= QUAD_ABS_AGREEMENT)
}

impl ValidationSummary {
    pub fn mc_misses(&self) -> usize {
        self.points.iter().filter(|p| !p.report.pass).count()
    }

    pub fn quad_failures(&self) -> usize {
        self.points.iter().filter(|p| !p.quad_agrees).count()
    }

    pub fn saturation_failures(&self) -> usize {
        self.saturation.iter().filter(|s| !s.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.mc_misses() <= self.allowed_mc_misses
            && self.quad_failures() == 0
            && self.saturation_failures() == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>3} {:>3} {:>7} {:>14} {:>14} {:>11} {:>8} {:>14} {:>6}",
            "M", "N", "snr_dB", "closed_form", "monte_carlo", "std_error", "z", "quadrature", "status"
        );
        for p in &self.points {
            let status = match (p.report.pass, p.quad_agrees) {
                (true, true) => "ok",
                (false, true) => "MC",
                (true, false) => "QUAD",
                (false, false) => "BOTH",
            };
            let _ = writeln!(
                out,
                "{:>3} {:>3} {:>7.1} {:>14.8e} {:>14.8e} {:>11.3e} {:>8.3} {:>14.8e} {:>6}",
                p.num_users,
                p.num_eves,
                p.snr_db,
                p.report.cf.value,
                p.report.mc.sop_hat,
                p.report.mc.std_error,
                p.report.z_score,
                p.quadrature,
                status
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "saturation at {SATURATION_SNR_DB} dB:");
        for s in &self.saturation {
            let _ = writeln!(
                out,
                "{:>3} {:>3} closed_form {:.8e} asymptotic {:.8e} |diff| {:.2e} {}",
                s.num_users,
                s.num_eves,
                s.closed_form,
                s.asymptotic,
                (s.closed_form - s.asymptotic).abs(),
                if s.pass { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Monte Carlo |z| > 4: {} of {} (allowed {})",
            self.mc_misses(),
            self.points.len(),
            self.allowed_mc_misses
        );
        let _ = writeln!(
            out,
            "closed form vs quadrature disagreements: {}",
            self.quad_failures()
        );
        let _ = writeln!(out, "saturation failures: {}", self.saturation_failures());
        let _ = writeln!(out, "verdict: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

pub fn run_validation(config: &GridConfig) -> Result<ValidationSummary> {
    let grid = config.points()?;
    let points = grid
        .par_iter()
        .map(|&(m, n, snr_db, params)| {
            let cf = sop_closed_form(&params)?;
            let mc = estimate_sop(&params, config.samples, config.seed, config.num_streams)?;
            let quadrature = sop_quadrature(&params, config.quad_rel_tol)?.value;
            Ok(PointResult {
                num_users: m,
                num_eves: n,
                snr_db,
                report: compare(mc, cf),
                quadrature,
                quad_agrees: quad_agrees(cf.value, quadrature),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut saturation = Vec::new();
    for &m in &config.users {
        for &n in &config.eves {
            let params = config.point(m, n, SATURATION_SNR_DB)?;
            let closed_form = sop_closed_form(&params)?.value;
            let asymptotic = sop_asymptotic(&params)?.value;
            saturation.push(SaturationResult {
                num_users: m,
                num_eves: n,
                closed_form,
                asymptotic,
                pass: (closed_form - asymptotic).abs() <= SATURATION_TOLERANCE,
            });
        }
    }

    Ok(ValidationSummary {
        allowed_mc_misses: points.len().div_ceil(POINTS_PER_ALLOWED_MISS),
        points,
        saturation,
    })
}
