//! Named multi-curve sweeps stored as TOML.
//!
//! ```toml
//! name = "fig3"
//! axis = "M"
//! values = [1, 2, 3]
//! methods = ["closed_form", "monte_carlo"]
//!
//! [base]          # optional overrides of the reference scenario
//! N = 3
//!
//! [[curve]]
//! label = "snr5dB"
//! gamma_bar_d_db = 5
//! ```
//!
//! Curve and base tables accept the parameter-file keys.

use serde::Deserialize;

use crate::analytic::Method;
use crate::error::{Error, Result};
use crate::model::{db_to_linear, ParamFile, SystemParams};
use crate::sweep::{run_sweep, Axis, SweepSpec, SweepTable};

pub const BUILTIN: [(&str, &str); 4] = [
    ("fig2", include_str!("../recipes/fig2.toml")),
    ("fig3", include_str!("../recipes/fig3.toml")),
    ("fig4", include_str!("../recipes/fig4.toml")),
    ("fig5", include_str!("../recipes/fig5.toml")),
];

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub label: Option<String>,
    #[serde(rename = "M")]
    pub num_users: Option<u32>,
    #[serde(rename = "N")]
    pub num_eves: Option<u32>,
    pub zeta_g_db: Option<f64>,
    pub zeta_hd_db: Option<f64>,
    pub zeta_he_db: Option<f64>,
    pub delta: Option<f64>,
    pub gamma_bar_d_db: Option<f64>,
    pub gamma_bar_e_db: Option<f64>,
    pub r_th: Option<f64>,
}

impl Overrides {
    fn apply(&self, file: &mut ParamFile) -> Result<()> {
        let p = &mut file.params;
        if let Some(m) = self.num_users {
            p.num_users = m;
        }
        if let Some(n) = self.num_eves {
            p.num_eves = n;
        }
        if let Some(x) = self.zeta_g_db {
            p.zeta_g = db_to_linear(x)?;
        }
        if let Some(x) = self.zeta_hd_db {
            p.zeta_hd = db_to_linear(x)?;
        }
        if let Some(x) = self.zeta_he_db {
            p.zeta_he = db_to_linear(x)?;
        }
        if let Some(x) = self.delta {
            p.delta = x;
        }
        if let Some(x) = self.gamma_bar_d_db {
            p.gamma_bar_d = db_to_linear(x)?;
            if file.symmetric_noise {
                p.gamma_bar_e = p.gamma_bar_d;
            }
        }
        if let Some(x) = self.gamma_bar_e_db {
            p.gamma_bar_e = db_to_linear(x)?;
            file.symmetric_noise = false;
        }
        if let Some(x) = self.r_th {
            p.r_th = x;
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecipeFile {
    name: String,
    description: Option<String>,
    axis: String,
    values: Vec<f64>,
    methods: Vec<String>,
    #[serde(default)]
    base: Overrides,
    #[serde(rename = "curve")]
    curves: Vec<Overrides>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub name: String,
    pub description: String,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    base: Overrides,
    curves: Vec<(String, Overrides)>,
}

/// Monte Carlo and quadrature knobs shared by every curve of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub mc_samples: u64,
    pub seed: u64,
    pub num_streams: usize,
    pub quad_rel_tol: f64,
}

impl Recipe {
    pub fn builtin(name: &str) -> Result<Self> {
        let (_, text) = BUILTIN
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Recipe {
                name: name.into(),
                reason: format!(
                    "no such recipe; available: {}",
                    BUILTIN.map(|(n, _)| n).join(", ")
                ),
            })?;
        Self::parse(text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: RecipeFile = toml::from_str(text).map_err(|e| Error::Recipe {
            name: "<unparsed>".into(),
            reason: e.to_string(),
        })?;
        let fail = |reason: String| Error::Recipe {
            name: file.name.clone(),
            reason,
        };
        let axis = file.axis.parse::<Axis>().map_err(|e| fail(e.to_string()))?;
        let methods = file
            .methods
            .iter()
            .map(|m| m.parse::<Method>())
            .collect::<Result<Vec<_>>>()
            .map_err(|e| fail(e.to_string()))?;
        if file.curves.is_empty() {
            return Err(fail("at least one [[curve]] is required".into()));
        }
        let mut curves = Vec::with_capacity(file.curves.len());
        for curve in &file.curves {
            let label = curve
                .label
                .clone()
                .ok_or_else(|| fail("every curve needs a label".into()))?;
            if label.is_empty() || label.contains([',', '"', '\n']) {
                return Err(fail(format!("curve label `{label}` is not a plain CSV field")));
            }
            if curves.iter().any(|(l, _)| *l == label) {
                return Err(fail(format!("duplicate curve label `{label}`")));
            }
            curves.push((label, curve.clone()));
        }
        Ok(Self {
            name: file.name.clone(),
            description: file.description.clone().unwrap_or_default(),
            axis,
            values: file.values,
            methods,
            base: file.base,
            curves,
        })
    }

    pub fn curve_labels(&self) -> impl Iterator<Item = &str> {
        self.curves.iter().map(|(l, _)| l.as_str())
    }

    /// One sweep per curve. `params`, when given, replaces the reference
    /// scenario and the recipe's own `[base]` table; curve overrides still
    /// apply on top.
    pub fn curve_specs(
        &self,
        params: Option<&ParamFile>,
        settings: RunSettings,
    ) -> Result<Vec<(String, SweepSpec)>> {
        let start = match params {
            Some(file) => *file,
            None => {
                let mut file = ParamFile {
                    params: SystemParams::reference(1, 1, 0.0),
                    symmetric_noise: true,
                };
                self.base.apply(&mut file)?;
                file
            }
        };
        self.curves
            .iter()
            .map(|(label, overrides)| {
                let mut file = start;
                overrides.apply(&mut file)?;
                let mut spec =
                    SweepSpec::new(file.params, self.axis, self.values.clone(), self.methods.clone());
                spec.gamma_e_tracks_d = file.symmetric_noise;
                spec.mc_samples = settings.mc_samples;
                spec.seed = settings.seed;
                spec.num_streams = settings.num_streams;
                spec.quad_rel_tol = settings.quad_rel_tol;
                Ok((label.clone(), spec))
            })
            .collect()
    }

    pub fn run(
        &self,
        params: Option<&ParamFile>,
        settings: RunSettings,
    ) -> Result<Vec<(String, SweepTable)>> {
        self.curve_specs(params, settings)?
            .into_iter()
            .map(|(label, spec)| Ok((label, run_sweep(&spec)?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> RunSettings {
        RunSettings {
            mc_samples: 1_000,
            seed: 1,
            num_streams: 2,
            quad_rel_tol: 1e-6,
        }
    }

    #[test]
    fn builtins_parse() {
        for (name, _) in BUILTIN {
            let recipe = Recipe::builtin(name).unwrap();
            assert_eq!(recipe.name, name);
            let specs = recipe.curve_specs(None, settings()).unwrap();
            assert!(!specs.is_empty());
            for (_, spec) in specs {
                spec.validate().unwrap();
            }
        }
        assert!(Recipe::builtin("fig9").is_err());
    }

    #[test]
    fn fig3_curves() {
        let recipe = Recipe::builtin("fig3").unwrap();
        assert_eq!(recipe.axis, Axis::NumUsers);
        let specs = recipe.curve_specs(None, settings()).unwrap();
        assert_eq!(specs.len(), 3);
        let (label, spec) = &specs[1];
        assert_eq!(label, "snr10dB");
        assert_eq!(spec.base.num_eves, 3);
        assert!((spec.base.gamma_bar_d - 10.0).abs() < 1e-12);
        assert_eq!(spec.base.gamma_bar_e, spec.base.gamma_bar_d);
    }

    #[test]
    fn rejects_malformed() {
        let minimal = "name = \"x\"\naxis = \"delta\"\nvalues = [0.5]\nmethods = [\"closed_form\"]\n";
        assert!(Recipe::parse(minimal).is_err(), "no curves");
        let ok = format!("{minimal}[[curve]]\nlabel = \"a\"\n");
        Recipe::parse(&ok).unwrap();
        let unknown = format!("{minimal}[[curve]]\nlabel = \"a\"\nsigma = 2\n");
        assert!(Recipe::parse(&unknown).is_err());
        let nolabel = format!("{minimal}[[curve]]\nM = 2\n");
        assert!(Recipe::parse(&nolabel).is_err());
        let dup = format!("{minimal}[[curve]]\nlabel = \"a\"\n[[curve]]\nlabel = \"a\"\n");
        assert!(Recipe::parse(&dup).is_err());
        let bad_axis = ok.replace("\"delta\"", "\"power\"");
        assert!(Recipe::parse(&bad_axis).is_err());
    }
}
