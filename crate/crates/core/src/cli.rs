//! The `mdiqkd` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a Monte Carlo validation fails, 2 for
//! usage, configuration or parameter errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    crossover_modes, distance_grid, optimize_intensities_with, optimize_temporal_modes,
    sweep_distances, BaselineKind, CrossoverResult, DEFAULT_MODE_CAP,
};
use crate::config::{ConfigError, RunConfig};
use crate::error::Error;
use crate::memory::LoadingStats;
use crate::montecarlo::{simulate_loading, simulate_multimode_round, McConfig};
use crate::output::{write_comparison_csv, write_crossover_csv, write_sweep_csv};
use crate::params::{ChannelParams, QberMode, Scenario, Variant};
use crate::protocols::evaluate;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "mdiqkd", version, about = "Key rates of memory-assisted MDI-QKD")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for Monte Carlo runs.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one rate point and print it as JSON.
    Rate {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        km: f64,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Sweep the distance and print a CSV curve.
    Sweep {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Smallest spectral mode count beating the repeaterless bound, per distance.
    Crossover {
        /// Single distance; takes precedence over the range.
        #[arg(long)]
        km: Option<f64>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, value_enum)]
        baseline: Option<BaselineArg>,
        #[arg(long)]
        m_cap: Option<u64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Optimize WCP intensities or the temporal mode count.
    Optimize {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        km: f64,
        #[arg(long, value_enum, default_value = "intensities")]
        target: TargetArg,
        #[arg(long)]
        grid_step: Option<f64>,
        #[arg(long)]
        mt_cap: Option<u64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compare Monte Carlo estimates with the closed forms.
    McValidate {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Loading efficiencies to check (comma separated).
        #[arg(long, value_delimiter = ',')]
        etas: Option<Vec<f64>>,
        /// Distances for the multimode yield checks (comma separated).
        #[arg(long, value_delimiter = ',')]
        km: Option<Vec<f64>>,
        /// Multiply every analytic value by this factor before comparing.
        #[arg(long, hide = true)]
        perturb_analytic: Option<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Original,
    OnDemand,
    Multimode,
    Temporal,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Original => Variant::Original,
            VariantArg::OnDemand => Variant::OnDemand,
            VariantArg::Multimode => Variant::Multimode,
            VariantArg::Temporal => Variant::Temporal,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BaselineArg {
    PerMode,
    Single,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TargetArg {
    Intensities,
    TemporalModes,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum QberArg {
    Ideal,
    DarkCount,
    DarkCountPlusDephasing,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub ms: Option<u64>,
    #[arg(long)]
    pub mt: Option<u64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub p_dc: Option<f64>,
    #[arg(long, value_enum)]
    pub qber: Option<QberArg>,
    /// Lossless devices, no dark counts, ideal QBER.
    #[arg(long)]
    pub ideal: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if self.ideal {
            cfg.channel = ChannelParams {
                l_att_km: cfg.channel.l_att_km,
                ..ChannelParams::ideal()
            };
            cfg.memory.eta_r0 = 1.0;
            cfg.protocol.qber = Some(QberMode::Ideal);
        }
        if let Some(v) = self.ms {
            cfg.memory.m_s = v;
        }
        if let Some(v) = self.mt {
            cfg.memory.m_t = v;
        }
        if let Some(v) = self.mu {
            cfg.source.mu = v;
        }
        if let Some(v) = self.nu {
            cfg.source.nu = v;
        }
        if let Some(v) = self.t2 {
            cfg.memory.t2_s = v;
        }
        if let Some(v) = self.tau {
            cfg.memory.tau_s = v;
        }
        if let Some(v) = self.p_dc {
            cfg.channel.p_dc = v;
        }
        if let Some(q) = self.qber {
            cfg.protocol.qber = Some(match q {
                QberArg::Ideal => QberMode::Ideal,
                QberArg::DarkCount => QberMode::DarkCount,
                QberArg::DarkCountPlusDephasing => QberMode::DarkCountPlusDephasing,
            });
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// JSON envelope: the effective configuration next to the result.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a RunConfig,
    variant: Option<Variant>,
    result: T,
}

/// One row of the `mc-validate` table.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub z: f64,
}

fn range(
    name: [&'static str; 3],
    flags: [Option<f64>; 3],
    file: [Option<f64>; 3],
) -> Result<Vec<f64>, ConfigError> {
    let mut v = [0.0; 3];
    for i in 0..3 {
        v[i] = flags[i].or(file[i]).ok_or(ConfigError::Missing(name[i]))?;
    }
    Ok(distance_grid(v[0], v[1], v[2])?)
}

/// Parses `args` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(w) = cli.workers {
        cfg.mc.workers = Some(w);
    }
    let finalize = |cfg: &mut RunConfig, o: &Overrides, variant: Option<Variant>| {
        o.apply(cfg);
        if variant.is_some() {
            cfg.protocol.variant = variant;
        }
        cfg.validate()
    };

    match cli.command {
        Command::Rate {
            variant,
            km,
            overrides,
        } => {
            let variant = Variant::from(variant);
            finalize(&mut cfg, &overrides, Some(variant))?;
            let point = evaluate(km, &cfg.scenario(variant))?;
            let report = Report {
                config: &cfg,
                variant: Some(variant),
                result: point,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Command::Sweep {
            variant,
            start,
            stop,
            step,
            overrides,
        } => {
            let variant = Variant::from(variant);
            finalize(&mut cfg, &overrides, Some(variant))?;
            let grid = range(
                ["sweep.start_km", "sweep.stop_km", "sweep.step_km"],
                [start, stop, step],
                [cfg.sweep.start_km, cfg.sweep.stop_km, cfg.sweep.step_km],
            )?;
            let curve = sweep_distances(&cfg.scenario(variant), &grid)?;
            write_sweep_csv(&mut *out, &curve)?;
        }
        Command::Crossover {
            km,
            start,
            stop,
            step,
            baseline,
            m_cap,
            overrides,
        } => {
            finalize(&mut cfg, &overrides, Some(Variant::Multimode))?;
            let grid = match km {
                Some(km) => vec![km],
                None => range(
                    ["crossover.start_km", "crossover.stop_km", "crossover.step_km"],
                    [start, stop, step],
                    [
                        cfg.crossover.start_km,
                        cfg.crossover.stop_km,
                        cfg.crossover.step_km,
                    ],
                )?,
            };
            let kind = match baseline {
                Some(BaselineArg::PerMode) => BaselineKind::PlobPerMode,
                Some(BaselineArg::Single) => BaselineKind::PlobSingle,
                None => cfg.crossover.baseline.unwrap_or(BaselineKind::PlobPerMode),
            };
            let cap = m_cap.or(cfg.crossover.m_cap).unwrap_or(DEFAULT_MODE_CAP);
            let scenario = cfg.scenario(Variant::Multimode);
            let rows = grid
                .iter()
                .map(|&km| crossover_modes(km, &scenario, kind, cap))
                .collect::<Result<Vec<CrossoverResult>, Error>>()?;
            write_crossover_csv(&mut *out, &rows)?;
        }
        Command::Optimize {
            variant,
            km,
            target,
            grid_step,
            mt_cap,
            overrides,
        } => {
            let variant = Variant::from(variant);
            finalize(&mut cfg, &overrides, Some(variant))?;
            let scenario = cfg.scenario(variant);
            let json = match target {
                TargetArg::Intensities => {
                    let step = grid_step.or(cfg.optimize.grid_step).unwrap_or(0.05);
                    let opt = optimize_intensities_with(km, &scenario, step)?;
                    serde_json::to_string_pretty(&Report {
                        config: &cfg,
                        variant: Some(variant),
                        result: opt,
                    })?
                }
                TargetArg::TemporalModes => {
                    let cap = mt_cap.or(cfg.optimize.m_t_cap).unwrap_or(100_000_000);
                    let opt = optimize_temporal_modes(km, cfg.memory.m_s, &scenario, cap)?;
                    serde_json::to_string_pretty(&Report {
                        config: &cfg,
                        variant: Some(Variant::Temporal),
                        result: opt,
                    })?
                }
            };
            writeln!(out, "{json}")?;
        }
        Command::McValidate {
            seed,
            trials,
            etas,
            km,
            perturb_analytic,
            overrides,
        } => {
            finalize(&mut cfg, &overrides, None)?;
            if overrides.ms.is_some() {
                cfg.mc.m_s = overrides.ms;
            }
            if let Some(s) = seed {
                cfg.mc.seed = Some(s);
            }
            if let Some(n) = trials {
                cfg.mc.n_trials = Some(n);
            }
            if etas.is_some() {
                cfg.mc.etas = etas;
            }
            if km.is_some() {
                cfg.mc.distances_km = km;
            }
            cfg.validate()?;
            let mc = cfg.mc_config()?;
            let rows = mc_validate(&cfg, &mc, perturb_analytic.unwrap_or(1.0))?;
            write_comparison_csv(&mut *out, &rows)?;
            let failed = rows.iter().filter(|r| r.z.is_nan() || r.z.abs() > 3.0).count();
            if failed > 0 {
                writeln!(err, "{failed} of {} comparisons exceed 3 standard errors", rows.len())?;
                return Ok(EXIT_VALIDATION);
            }
            writeln!(err, "all {} comparisons within 3 standard errors", rows.len())?;
        }
    }
    Ok(EXIT_OK)
}

/// Runs every Monte Carlo check configured in `cfg`. `scale` multiplies the
/// analytic side and exists to exercise the failure path.
pub fn mc_validate(cfg: &RunConfig, mc: &McConfig, scale: f64) -> Result<Vec<Comparison>, Error> {
    let mut rows = Vec::new();
    let mut push = |quantity: String, analytic: f64, est: crate::montecarlo::McEstimate| {
        let analytic = analytic * scale;
        rows.push(Comparison {
            quantity,
            analytic,
            mc_mean: est.mean,
            mc_stderr: est.std_err,
            z: est.z_score(analytic),
        });
    };
    let ratio = cfg.mc.tau_over_t2.unwrap_or(cfg.memory.tau_over_t2());
    let etas = cfg.mc.etas.clone().unwrap_or_else(|| vec![0.5, 0.1, 0.01]);
    for eta in etas {
        let stats = LoadingStats::new(eta, eta, ratio)?;
        let est = simulate_loading(eta, eta, ratio, mc)?;
        push(format!("n_l(eta={eta})"), stats.mean_attempts, est.attempts);
        push(format!("abs_delta_n(eta={eta})"), stats.mean_abs_delta_n, est.abs_delta);
        push(format!("decay(eta={eta})"), stats.mean_decay, est.decay);
    }
    let m_s = cfg.mc.m_s.unwrap_or(100);
    let mut scenario: Scenario = cfg.scenario(Variant::Multimode).with_modes(m_s, 1);
    if let Some(v) = cfg.protocol.variant {
        if v == Variant::Temporal {
            scenario = cfg.scenario(Variant::Temporal).with_modes(m_s, cfg.memory.m_t);
        }
    }
    let distances = cfg.mc.distances_km.clone().unwrap_or_else(|| vec![200.0, 300.0]);
    for km in distances {
        let analytic = evaluate(km, &scenario)?.y11_qm;
        let est = simulate_multimode_round(km, &scenario, mc)?;
        push(format!("y11_qm(km={km},m_s={m_s})"), analytic, est.y11_qm);
    }
    Ok(rows)
}
