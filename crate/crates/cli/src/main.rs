use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use keyhole::analytic::{sop_asymptotic, sop_closed_form, sop_quadrature, Method};
use keyhole::model::{linear_to_db, ParamFile};
use keyhole::montecarlo::{default_streams, estimate_sop};
use keyhole::recipe::{Recipe, RunSettings};
use keyhole::sweep::{emit_csv, emit_labeled_csv, run_sweep, Axis, SweepSpec, DEFAULT_MC_SAMPLES};
use keyhole::validation::{run_validation, GridConfig};
use keyhole::SystemParams;

const SEED_ENV: &str = "KEYHOLE_SEED";

/// Secrecy outage probability of a keyhole-aided multi-user system with
/// multiple eavesdroppers.
#[derive(Debug, Parser)]
#[command(name = "keyhole", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one operating point with every method.
    Sop(SopArgs),
    /// Sweep one parameter, from a built-in recipe or an explicit axis.
    Sweep(SweepArgs),
    /// Monte Carlo estimate only.
    Simulate(SimArgs),
    /// Three-way validation over an (M, N, SNR) grid.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Parameter file (`key = value` lines). Defaults to the reference
    /// scenario with M = 2, N = 3 and a 10 dB user SNR.
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    samples: u64,
    /// Monte Carlo seed; the KEYHOLE_SEED environment variable takes precedence.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random substreams; results do not depend on this.
    #[arg(long)]
    streams: Option<usize>,
}

impl Common {
    fn seed(&self) -> Result<u64> {
        match std::env::var(SEED_ENV) {
            Ok(text) => text
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={text} is not a 64-bit seed")),
            Err(_) => Ok(self.seed),
        }
    }

    fn streams(&self) -> usize {
        self.streams.unwrap_or_else(default_streams)
    }

    fn param_file(&self) -> Result<Option<ParamFile>> {
        self.params
            .as_deref()
            .map(|path| ParamFile::read(path).with_context(|| format!("reading {}", path.display())))
            .transpose()
    }

    fn params_or_reference(&self) -> Result<ParamFile> {
        Ok(self.param_file()?.unwrap_or(ParamFile {
            params: SystemParams::reference(2, 3, 10.0),
            symmetric_noise: true,
        }))
    }
}

#[derive(Debug, Args)]
struct SopArgs {
    #[command(flatten)]
    common: Common,
    /// Relative tolerance of the quadrature oracle.
    #[arg(long, default_value_t = 1e-9)]
    quad_tol: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Built-in figure recipe.
    #[arg(long, value_parser = ["fig2", "fig3", "fig4", "fig5"], conflicts_with_all = ["axis", "values"])]
    recipe: Option<String>,
    /// Swept parameter: gamma_bar_d_db, M, N, r_th or delta.
    #[arg(long, requires = "values")]
    axis: Option<String>,
    /// Axis values: comma list (`0,5,10`) or `start:step:stop`.
    #[arg(long, requires = "axis", allow_hyphen_values = true)]
    values: Option<String>,
    /// Comma list of closed_form, asymptotic, quadrature, monte_carlo.
    /// Defaults to the recipe's methods, or closed_form,asymptotic.
    #[arg(long)]
    methods: Option<String>,
    /// Relative tolerance when quadrature is requested.
    #[arg(long, default_value_t = 1e-8)]
    quad_tol: f64,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// User counts of the grid.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 5, 8])]
    grid_m: Vec<u32>,
    /// Eavesdropper counts of the grid.
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 3])]
    grid_n: Vec<u32>,
    /// User SNRs of the grid in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 10.0, 20.0, 30.0])]
    grid_snr_db: Vec<f64>,
    /// Relative tolerance of the quadrature oracle.
    #[arg(long, default_value_t = 1e-9)]
    quad_tol: f64,
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("bad range `{text}`"))?;
        let [start, step, stop] = parts[..] else {
            bail!("range must be start:step:stop, got `{text}`");
        };
        if !(step > 0.0) || stop < start {
            bail!("range `{text}` needs a positive step and stop >= start");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    text.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad axis value `{v}`")))
        .collect()
}

fn parse_methods(text: &str) -> Result<Vec<Method>> {
    text.split(',')
        .filter(|m| !m.trim().is_empty())
        .map(|m| Ok(m.trim().parse::<Method>()?))
        .collect()
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn describe(params: &SystemParams) -> String {
    format!(
        "M = {}, N = {}, zeta_g = {:.3} dB, zeta_hd = {:.3} dB, zeta_he = {:.3} dB, delta = {}, \
         gamma_bar_d = {:.3} dB, gamma_bar_e = {:.3} dB, R_th = {} bpcu",
        params.num_users,
        params.num_eves,
        linear_to_db(params.zeta_g),
        linear_to_db(params.zeta_hd),
        linear_to_db(params.zeta_he),
        params.delta,
        linear_to_db(params.gamma_bar_d),
        linear_to_db(params.gamma_bar_e),
        params.r_th
    )
}

fn cmd_sop(args: &SopArgs) -> Result<ExitCode> {
    let params = args.common.params_or_reference()?.params;
    println!("{}", describe(&params));
    let mut out = io::stdout().lock();
    match sop_closed_form(&params) {
        Ok(v) => writeln!(out, "closed_form  {:.12e}", v.value)?,
        Err(e) => writeln!(out, "closed_form  unavailable: {e}")?,
    }
    match sop_asymptotic(&params) {
        Ok(v) => writeln!(out, "asymptotic   {:.12e}", v.value)?,
        Err(e) => writeln!(out, "asymptotic   unavailable: {e}")?,
    }
    let q = sop_quadrature(&params, args.quad_tol)?;
    writeln!(out, "quadrature   {:.12e}", q.value)?;
    let mc = estimate_sop(&params, args.common.samples, args.common.seed()?, args.common.streams())?;
    writeln!(
        out,
        "monte_carlo  {:.12e}  (std error {:.3e}, 95% CI [{:.6e}, {:.6e}], {} samples, seed {})",
        mc.sop_hat, mc.std_error, mc.ci95_low, mc.ci95_high, mc.num_samples, mc.seed
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode> {
    let common = &args.common;
    let file = common.param_file()?;
    let methods = args.methods.as_deref().map(parse_methods).transpose()?;
    let mut out = open_output(args.out.as_deref())?;

    if let Some(name) = &args.recipe {
        let mut recipe = Recipe::builtin(name)?;
        if let Some(methods) = methods {
            recipe.methods = methods;
        }
        let settings = RunSettings {
            mc_samples: common.samples,
            seed: common.seed()?,
            num_streams: common.streams(),
            quad_rel_tol: args.quad_tol,
        };
        let curves = recipe.run(file.as_ref(), settings)?;
        emit_labeled_csv(&curves, &mut out)?;
    } else {
        let (Some(axis), Some(values)) = (&args.axis, &args.values) else {
            bail!("give either --recipe or both --axis and --values");
        };
        let base = file.unwrap_or(ParamFile {
            params: SystemParams::reference(2, 3, 10.0),
            symmetric_noise: true,
        });
        let methods = methods.unwrap_or_else(|| vec![Method::ClosedForm, Method::Asymptotic]);
        let mut spec = SweepSpec::new(base.params, axis.parse::<Axis>()?, parse_values(values)?, methods);
        spec.gamma_e_tracks_d = base.symmetric_noise;
        spec.mc_samples = common.samples;
        spec.seed = common.seed()?;
        spec.num_streams = common.streams();
        spec.quad_rel_tol = args.quad_tol;
        emit_csv(&run_sweep(&spec)?, &mut out)?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: &SimArgs) -> Result<ExitCode> {
    let params = args.common.params_or_reference()?.params;
    let mc = estimate_sop(&params, args.common.samples, args.common.seed()?, args.common.streams())?;
    println!("{}", describe(&params));
    println!("sop_hat      {:.12e}", mc.sop_hat);
    println!("outages      {} of {}", mc.outages, mc.num_samples);
    println!("std_error    {:.6e}", mc.std_error);
    println!("ci95         [{:.12e}, {:.12e}]", mc.ci95_low, mc.ci95_high);
    println!("seed         {}", mc.seed);
    println!("streams      {}", mc.num_streams);
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: &ValidateArgs) -> Result<ExitCode> {
    let common = &args.common;
    let base = common.params_or_reference()?;
    let mut config = GridConfig::standard(base, common.samples, common.seed()?, common.streams());
    config.users = args.grid_m.clone();
    config.eves = args.grid_n.clone();
    config.snrs_db = args.grid_snr_db.clone();
    config.quad_rel_tol = args.quad_tol;
    let summary = run_validation(&config)?;
    print!("{}", summary.render());
    Ok(if summary.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sop(args) => cmd_sop(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
