//! Experiment runner behind the `mec-relay` binary.
//!
//! Each experiment returns an in-memory table that is written as CSV with a
//! `#`-prefixed header recording the tool version, the subcommand and every
//! resolved configuration key. Rows come out in sweep order; the same
//! configuration and seed always produce byte-identical files.

mod config;

pub use config::{
    CpuFreqPolicy, ExperimentConfig, SchemeFilter, SweepAxis, SweepScale, SweepVariable, DEFAULT_SEED,
};

use std::io::{self, Write};

use thiserror::Error;

use crate::analytic::{analytic_outage, diversity_order, predicted_order, DiversityError, DiversityFit, QuadSettings};
use crate::model::{ModelError, SystemConfig};
use crate::montecarlo::{estimate_all_schemes_shared_draws, Method};
use crate::schemes::SchemeId;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Diversity(#[from] DiversityError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CURVE_COLUMNS: &str = "sweep_value,scheme_id,method,p_out,ci_low,ci_high,n_trials,seed";

/// One output line: one (sweep point, scheme, method) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub sweep_value: f64,
    pub scheme_id: String,
    pub method: String,
    pub p_out: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_trials: u64,
    pub seed: u64,
}

impl CurveRow {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.sweep_value, self.scheme_id, self.method, self.p_out, self.ci_low, self.ci_high, self.n_trials, self.seed
        )
    }

    /// Parse one data line written by [`CurveFile::write_to`].
    pub fn from_csv(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return None;
        }
        Some(Self {
            sweep_value: f[0].parse().ok()?,
            scheme_id: f[1].to_string(),
            method: f[2].to_string(),
            p_out: f[3].parse().ok()?,
            ci_low: f[4].parse().ok()?,
            ci_high: f[5].parse().ok()?,
            n_trials: f[6].parse().ok()?,
            seed: f[7].parse().ok()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveFile {
    pub header: Vec<String>,
    pub rows: Vec<CurveRow>,
}

impl CurveFile {
    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for line in &self.header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "{CURVE_COLUMNS}")?;
        for row in &self.rows {
            writeln!(w, "{}", row.to_csv())?;
        }
        Ok(())
    }

    pub fn rows_for<'a>(&'a self, scheme_id: &'a str, method: &'a str) -> impl Iterator<Item = &'a CurveRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.scheme_id == scheme_id && r.method == method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityRow {
    pub fit: DiversityFit,
    pub predicted_order: usize,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityReport {
    pub header: Vec<String>,
    pub rows: Vec<DiversityRow>,
}

pub const DIVERSITY_COLUMNS: &str = "scheme_id,predicted_order,slope,fit_residual,outage_saturated,converged,pass";

impl DiversityReport {
    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        for line in &self.header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "{DIVERSITY_COLUMNS}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.fit.scheme_id, r.predicted_order, r.fit.slope, r.fit.fit_residual, r.fit.outage_saturated, r.fit.converged, r.pass
            )?;
        }
        Ok(())
    }
}

fn header(command: &str, cfg: &ExperimentConfig, axis: &SweepAxis) -> Vec<String> {
    let mut h = vec![format!("mec-relay {VERSION}"), format!("command = {command}")];
    h.extend(cfg.entries(axis).into_iter().map(|(k, v)| format!("{k} = {v}")));
    h
}

fn join_freqs(freqs: &[f64]) -> String {
    freqs.iter().map(|f| format!("{f}")).collect::<Vec<_>>().join(",")
}

fn method_label(method: Method, converged: bool) -> String {
    if converged {
        method.to_string()
    } else {
        format!("{method}-nonconverged")
    }
}

/// Monte Carlo rows (shared draws) followed by analytic rows for one
/// operating point.
pub fn point_rows(
    sys: &SystemConfig,
    sweep_value: f64,
    label_suffix: &str,
    cfg: &ExperimentConfig,
    quad: QuadSettings,
) -> Vec<CurveRow> {
    let schemes = cfg.scheme.schemes();
    let mc = estimate_all_schemes_shared_draws(sys, cfg.trials, cfg.seed);
    let mut rows = Vec::with_capacity(2 * schemes.len());
    for r in mc.iter().filter(|r| schemes.contains(&r.scheme_id)) {
        rows.push(CurveRow {
            sweep_value,
            scheme_id: format!("{}{label_suffix}", r.scheme_id),
            method: r.method.to_string(),
            p_out: r.p_hat,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            n_trials: r.n_trials,
            seed: cfg.seed,
        });
    }
    for &scheme in &schemes {
        let (e, method) = analytic_outage(sys, scheme, quad);
        rows.push(CurveRow {
            sweep_value,
            scheme_id: format!("{scheme}{label_suffix}"),
            method: method_label(method, e.converged),
            p_out: e.value,
            ci_low: e.value,
            ci_high: e.value,
            n_trials: 0,
            seed: cfg.seed,
        });
    }
    rows
}

/// Outage versus relay (or source) SNR with CPU frequencies drawn once.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<CurveFile, ExpError> {
    cfg.validate()?;
    let axis = cfg.sweep.unwrap_or_else(SweepAxis::fig2_default);
    if !matches!(axis.variable, SweepVariable::RelaySnr | SweepVariable::SrcSnr) {
        return Err(ExpError::Config("fig2 sweeps relay_snr or src_snr".into()));
    }
    let freqs = cfg.cpu_freqs.resolve(cfg.relays, cfg.seed, 0)?;
    let base = cfg.system_config(cfg.relays, &freqs)?;
    let quad = cfg.quad_settings();

    let mut h = header("fig2", cfg, &axis);
    h.push(format!("cpu_freqs.resolved = {}", join_freqs(&freqs)));
    let mut rows = Vec::new();
    for v in axis.values() {
        let power = axis.to_linear(v) * base.noise;
        let sys = match axis.variable {
            SweepVariable::RelaySnr => base.with_relay_power(power),
            _ => base.with_src_power(power),
        };
        sys.validate()?;
        rows.extend(point_rows(&sys, v, "", cfg, quad));
    }
    Ok(CurveFile { header: h, rows })
}

/// Label suffix distinguishing the CPU-frequency populations of fig3.
pub fn population_label(mean: f64) -> String {
    format!("@{mean:e}")
}

/// CPU frequencies of population `k` for `n` relays: U(m (1 - s), m (1 + s)),
/// drawn from configuration stream `k + 1`.
pub fn population_freqs(cfg: &ExperimentConfig, k: usize, n: usize) -> Result<Vec<f64>, ExpError> {
    let mean = cfg.fig3_cpu_means[k];
    let s = cfg.fig3_cpu_spread;
    let policy = if s == 0.0 {
        CpuFreqPolicy::Explicit(vec![mean])
    } else {
        CpuFreqPolicy::Uniform {
            lo: mean * (1.0 - s),
            hi: mean * (1.0 + s),
        }
    };
    policy.resolve(n, cfg.seed, k as u64 + 1)
}

/// Outage versus number of relays for each CPU-frequency population.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<CurveFile, ExpError> {
    cfg.validate()?;
    let axis = cfg.sweep.unwrap_or_else(SweepAxis::fig3_default);
    axis.validate()?;
    if axis.variable != SweepVariable::Relays {
        return Err(ExpError::Config("fig3 sweeps relays".into()));
    }
    let counts = axis.values();
    let n_max = counts.iter().fold(0.0f64, |a, &b| a.max(b)) as usize;
    let quad = cfg.quad_settings();

    let mut h = header("fig3", cfg, &axis);
    let mut rows = Vec::new();
    for (k, &mean) in cfg.fig3_cpu_means.iter().enumerate() {
        let freqs = population_freqs(cfg, k, n_max)?;
        let label = population_label(mean);
        h.push(format!("cpu_freqs.population{label} = {}", join_freqs(&freqs)));
        for &n in &counts {
            let n = n as usize;
            let sys = cfg.system_config(n, &freqs[..n])?;
            rows.extend(point_rows(&sys, n as f64, &label, cfg, quad));
        }
    }
    Ok(CurveFile { header: h, rows })
}

/// Diversity-order fits for every requested scheme against the prediction.
pub fn run_diversity(cfg: &ExperimentConfig) -> Result<DiversityReport, ExpError> {
    cfg.validate()?;
    let axis = cfg.sweep.unwrap_or_else(SweepAxis::diversity_default);
    if axis.variable != SweepVariable::Gamma {
        return Err(ExpError::Config("diversity sweeps gamma".into()));
    }
    let grid: Vec<f64> = axis.values().into_iter().map(|v| axis.to_linear(v)).collect();
    let freqs = cfg.cpu_freqs.resolve(cfg.relays, cfg.seed, 0)?;
    let template = cfg.system_config(cfg.relays, &freqs)?;

    let mut h = header("diversity", cfg, &axis);
    h.push(format!("cpu_freqs.resolved = {}", join_freqs(&freqs)));
    h.push(format!("gamma_grid = {}", join_freqs(&grid)));
    let mut rows = Vec::new();
    for scheme in cfg.scheme.schemes() {
        let fit = diversity_order(&template, scheme, &grid, cfg.quad_settings())?;
        let predicted = predicted_order(&template, scheme);
        let tolerance = match scheme {
            SchemeId::Cpors => 0.1,
            SchemeId::Lbrs | SchemeId::Cors => 0.3,
        };
        let pass = if predicted == 0 {
            fit.outage_saturated && fit.slope == 0.0
        } else {
            (fit.slope - predicted as f64).abs() <= tolerance
        };
        rows.push(DiversityRow {
            fit,
            predicted_order: predicted,
            tolerance,
            pass,
        });
    }
    Ok(DiversityReport { header: h, rows })
}

/// Monte Carlo and analytic values at the configured relay SNR.
pub fn run_point(cfg: &ExperimentConfig) -> Result<CurveFile, ExpError> {
    cfg.validate()?;
    let freqs = cfg.cpu_freqs.resolve(cfg.relays, cfg.seed, 0)?;
    let sys = cfg.system_config(cfg.relays, &freqs)?;
    let axis = SweepAxis {
        variable: SweepVariable::RelaySnr,
        start: cfg.relay_snr_db,
        stop: cfg.relay_snr_db,
        points: 1,
        scale: SweepScale::Db,
    };
    let mut h = header("point", cfg, &axis);
    h.push(format!("cpu_freqs.resolved = {}", join_freqs(&freqs)));
    let rows = point_rows(&sys, cfg.relay_snr_db, "", cfg, cfg.quad_settings());
    Ok(CurveFile { header: h, rows })
}
