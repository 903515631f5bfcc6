//! Parameter sweeps over one axis and their CSV rendering.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic::{
    sop_asymptotic, sop_closed_form, sop_quadrature, Method, MAX_QUAD_TOL, MIN_QUAD_TOL,
};
use crate::error::{Error, Result};
use crate::model::{db_to_linear, SystemParams};
use crate::montecarlo::{default_streams, estimate_sop, MIN_SAMPLES};

pub const DEFAULT_MC_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    GammaBarDDb,
    NumUsers,
    NumEves,
    RTh,
    Delta,
}

impl Axis {
    pub const ALL: [Axis; 5] = [
        Axis::GammaBarDDb,
        Axis::NumUsers,
        Axis::NumEves,
        Axis::RTh,
        Axis::Delta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::GammaBarDDb => "gamma_bar_d_db",
            Axis::NumUsers => "M",
            Axis::NumEves => "N",
            Axis::RTh => "r_th",
            Axis::Delta => "delta",
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Axis::NumUsers | Axis::NumEves)
    }

    /// `base` with this axis set to `value`. A user-SNR step moves the
    /// eavesdropper SNR along with it when `gamma_e_tracks_d` is set.
    pub fn apply(self, base: &SystemParams, value: f64, gamma_e_tracks_d: bool) -> Result<SystemParams> {
        let mut p = *base;
        match self {
            Axis::GammaBarDDb => {
                p.gamma_bar_d = db_to_linear(value)?;
                if gamma_e_tracks_d {
                    p.gamma_bar_e = p.gamma_bar_d;
                }
            }
            Axis::NumUsers => p.num_users = integer_value(self, value)?,
            Axis::NumEves => p.num_eves = integer_value(self, value)?,
            Axis::RTh => p.r_th = value,
            Axis::Delta => p.delta = value,
        }
        Ok(p)
    }
}

fn integer_value(axis: Axis, value: f64) -> Result<u32> {
    if value.fract() != 0.0 || !(1.0..=f64::from(u32::MAX)).contains(&value) {
        return Err(Error::Sweep(format!(
            "axis {} takes positive integers, got {value}",
            axis.as_str()
        )));
    }
    Ok(value as u32)
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Sweep(format!("unknown axis `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SystemParams,
    /// Keep `gamma_bar_e = gamma_bar_d` while sweeping the user SNR
    /// (equal noise powers at users and eavesdroppers).
    pub gamma_e_tracks_d: bool,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub mc_samples: u64,
    pub seed: u64,
    pub num_streams: usize,
    pub quad_rel_tol: f64,
}

impl SweepSpec {
    pub fn new(base: SystemParams, axis: Axis, values: Vec<f64>, methods: Vec<Method>) -> Self {
        Self {
            base,
            gamma_e_tracks_d: true,
            axis,
            values,
            methods,
            mc_samples: DEFAULT_MC_SAMPLES,
            seed: 0,
            num_streams: default_streams(),
            quad_rel_tol: DEFAULT_QUAD_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.values.is_empty() {
            return Err(Error::Sweep("no axis values".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Sweep("axis values must be finite".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Sweep("axis values must be strictly increasing".into()));
        }
        if self.axis.is_integer() {
            for &v in &self.values {
                integer_value(self.axis, v)?;
            }
        }
        if self.methods.is_empty() {
            return Err(Error::Sweep("no methods requested".into()));
        }
        if self.methods.contains(&Method::MonteCarlo) {
            if self.mc_samples < MIN_SAMPLES {
                return Err(Error::Sweep(format!(
                    "{} Monte Carlo samples is below the minimum of {MIN_SAMPLES}",
                    self.mc_samples
                )));
            }
            if self.num_streams == 0 {
                return Err(Error::Sweep("at least one stream is required".into()));
            }
        }
        if self.methods.contains(&Method::Quadrature)
            && !(MIN_QUAD_TOL..=MAX_QUAD_TOL).contains(&self.quad_rel_tol)
        {
            return Err(Error::Sweep(format!(
                "quadrature tolerance {} outside [{MIN_QUAD_TOL}, {MAX_QUAD_TOL}]",
                self.quad_rel_tol
            )));
        }
        Ok(())
    }

    /// Requested methods in column order, without duplicates.
    pub fn ordered_methods(&self) -> Vec<Method> {
        Method::ALL
            .into_iter()
            .filter(|m| self.methods.contains(m))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    values: [Option<f64>; 4],
    pub mc_std_error: Option<f64>,
}

impl SweepRow {
    pub fn get(&self, method: Method) -> Option<f64> {
        self.values[method as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: Axis,
    pub methods: Vec<Method>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// `(axis value, SOP)` pairs for one method.
    pub fn series(&self, method: Method) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.get(method).map(|v| (r.axis_value, v)))
            .collect()
    }
}

fn evaluate_row(spec: &SweepSpec, methods: &[Method], axis_value: f64) -> Result<SweepRow> {
    let params = spec.axis.apply(&spec.base, axis_value, spec.gamma_e_tracks_d)?;
    let mut row = SweepRow {
        axis_value,
        values: [None; 4],
        mc_std_error: None,
    };
    for &method in methods {
        let value = match method {
            Method::ClosedForm => sop_closed_form(&params)?.value,
            Method::Asymptotic => sop_asymptotic(&params)?.value,
            Method::Quadrature => sop_quadrature(&params, spec.quad_rel_tol)?.value,
            Method::MonteCarlo => {
                // Same seed on every row: common random numbers across the axis.
                let mc = estimate_sop(&params, spec.mc_samples, spec.seed, spec.num_streams)?;
                row.mc_std_error = Some(mc.std_error);
                mc.sop_hat
            }
        };
        row.values[method as usize] = Some(value);
    }
    Ok(row)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let methods = spec.ordered_methods();
    let rows = spec
        .values
        .par_iter()
        .map(|&v| {
            evaluate_row(spec, &methods, v).map_err(|e| Error::Row {
                axis: spec.axis.as_str(),
                value: v,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        axis: spec.axis,
        methods,
        rows,
    })
}

/// Twelve significant digits, scientific notation.
pub fn format_sig(x: f64) -> String {
    format!("{x:.11e}")
}

fn format_axis(axis: Axis, value: f64) -> String {
    if axis.is_integer() {
        format!("{}", value as u64)
    } else {
        format_sig(value)
    }
}

fn header_fields(table: &SweepTable) -> Vec<&'static str> {
    let mut fields = vec![table.axis.as_str()];
    fields.extend(table.methods.iter().map(|m| m.as_str()));
    if table.methods.contains(&Method::MonteCarlo) {
        fields.push("mc_std_error");
    }
    fields
}

fn row_fields(table: &SweepTable, row: &SweepRow) -> Vec<String> {
    let mut fields = vec![format_axis(table.axis, row.axis_value)];
    for &m in &table.methods {
        fields.push(row.get(m).map(format_sig).unwrap_or_default());
    }
    if table.methods.contains(&Method::MonteCarlo) {
        fields.push(row.mc_std_error.map(format_sig).unwrap_or_default());
    }
    fields
}

/// Header naming the axis and methods, then one line per row. Column order:
/// axis, closed_form, asymptotic, quadrature, monte_carlo, mc_std_error.
pub fn emit_csv<W: Write>(table: &SweepTable, out: &mut W) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::Sweep("nothing to emit: sweep has no rows".into()));
    }
    writeln!(out, "{}", header_fields(table).join(","))?;
    for row in &table.rows {
        writeln!(out, "{}", row_fields(table, row).join(","))?;
    }
    Ok(())
}

/// Several curves of one recipe in a single CSV, with a leading `curve`
/// label column. All tables must share axis and methods.
pub fn emit_labeled_csv<W: Write>(curves: &[(String, SweepTable)], out: &mut W) -> Result<()> {
    let Some((_, first)) = curves.first() else {
        return Err(Error::Sweep("nothing to emit: no curves".into()));
    };
    if curves
        .iter()
        .any(|(_, t)| t.axis != first.axis || t.methods != first.methods || t.rows.is_empty())
    {
        return Err(Error::Sweep("curves differ in axis or methods, or are empty".into()));
    }
    writeln!(out, "curve,{}", header_fields(first).join(","))?;
    for (label, table) in curves {
        for row in &table.rows {
            writeln!(out, "{label},{}", row_fields(table, row).join(","))?;
        }
    }
    Ok(())
}
