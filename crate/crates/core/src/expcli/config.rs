//! Flat `key = value` experiment configuration.
//!
//! Every key has a default equal to the reference parameter set. Values are
//! parsed once; decibel keys are converted to linear powers when a
//! [`SystemConfig`] is resolved.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::analytic::QuadSettings;
use crate::channel::{open_unit, SeedSpec};
use crate::model::{db_to_linear, RelayNode, SystemConfig, TaskSpec};
use crate::quadrature::Tolerance;
use crate::schemes::SchemeId;

use super::ExpError;

/// Seed used when neither the config file nor the command line sets one.
///
/// With it, the four CPU frequencies drawn from U(5e9, 30e9) are one fast
/// relay and three slow ones, the regime in which the computing-only policy
/// beats the communication-only one at low relay SNR.
pub const DEFAULT_SEED: u64 = 133;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// `P_r / sigma^2`
    RelaySnr,
    /// `P_s / sigma^2`
    SrcSnr,
    /// Number of relays.
    Relays,
    /// Normalized SNR with `P_s = P_r`.
    Gamma,
}

impl SweepVariable {
    fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::RelaySnr => "relay_snr",
            SweepVariable::SrcSnr => "src_snr",
            SweepVariable::Relays => "relays",
            SweepVariable::Gamma => "gamma",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relay_snr" => Ok(Self::RelaySnr),
            "src_snr" => Ok(Self::SrcSnr),
            "relays" => Ok(Self::Relays),
            "gamma" => Ok(Self::Gamma),
            _ => Err(format!("unknown sweep variable `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Db,
    Linear,
    Count,
}

impl SweepScale {
    fn as_str(&self) -> &'static str {
        match self {
            SweepScale::Db => "db",
            SweepScale::Linear => "linear",
            SweepScale::Count => "count",
        }
    }
}

impl FromStr for SweepScale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "db" | "dB" => Ok(Self::Db),
            "linear" => Ok(Self::Linear),
            "count" => Ok(Self::Count),
            _ => Err(format!("unknown sweep scale `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    /// Ignored for [`SweepScale::Count`], which steps by one.
    pub points: usize,
    pub scale: SweepScale,
}

impl SweepAxis {
    pub fn fig2_default() -> Self {
        Self {
            variable: SweepVariable::RelaySnr,
            start: 0.0,
            stop: 30.0,
            points: 7,
            scale: SweepScale::Db,
        }
    }

    pub fn fig3_default() -> Self {
        Self {
            variable: SweepVariable::Relays,
            start: 1.0,
            stop: 8.0,
            points: 8,
            scale: SweepScale::Count,
        }
    }

    pub fn diversity_default() -> Self {
        Self {
            variable: SweepVariable::Gamma,
            start: 30.0,
            stop: 60.0,
            points: 8,
            scale: SweepScale::Db,
        }
    }

    /// Sweep values as written in the output (dB for dB axes).
    pub fn values(&self) -> Vec<f64> {
        match self.scale {
            SweepScale::Count => {
                let (a, b) = (self.start.round() as i64, self.stop.round() as i64);
                (a..=b).map(|v| v as f64).collect()
            }
            SweepScale::Db | SweepScale::Linear => {
                if self.points <= 1 {
                    return vec![self.start];
                }
                let step = (self.stop - self.start) / (self.points - 1) as f64;
                (0..self.points).map(|k| self.start + step * k as f64).collect()
            }
        }
    }

    /// Convert a sweep value to the linear quantity it controls.
    pub fn to_linear(&self, value: f64) -> f64 {
        match self.scale {
            SweepScale::Db => db_to_linear(value),
            SweepScale::Linear | SweepScale::Count => value,
        }
    }

    pub fn validate(&self) -> Result<(), ExpError> {
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            return Err(ExpError::Config("sweep needs finite start <= stop".into()));
        }
        if self.scale != SweepScale::Count && self.points == 0 {
            return Err(ExpError::Config("sweep.points must be >= 1".into()));
        }
        if self.variable == SweepVariable::Relays && (self.scale != SweepScale::Count || self.start < 1.0) {
            return Err(ExpError::Config("a relay-count sweep uses scale = count and starts at 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CpuFreqPolicy {
    /// One frequency per relay; a single entry applies to every relay.
    Explicit(Vec<f64>),
    /// Drawn once per experiment from U(lo, hi).
    Uniform { lo: f64, hi: f64 },
}

impl fmt::Display for CpuFreqPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CpuFreqPolicy::Explicit(v) => write!(f, "list:{}", join(v)),
            CpuFreqPolicy::Uniform { lo, hi } => write!(f, "uniform:{lo:e},{hi:e}"),
        }
    }
}

impl FromStr for CpuFreqPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("expected `uniform:LO,HI` or `list:F1,F2,..`, got `{s}`"))?;
        let values = parse_list(rest)?;
        match kind.trim() {
            "uniform" => match values[..] {
                [lo, hi] if lo > 0.0 && lo < hi => Ok(Self::Uniform { lo, hi }),
                _ => Err(format!("uniform needs 0 < LO < HI, got `{rest}`")),
            },
            "list" => {
                if values.iter().all(|&v| v > 0.0) {
                    Ok(Self::Explicit(values))
                } else {
                    Err("cpu frequencies must be positive".into())
                }
            }
            other => Err(format!("unknown cpu frequency policy `{other}`")),
        }
    }
}

impl CpuFreqPolicy {
    /// Frequencies for `n` relays. Uniform draws come from configuration
    /// stream `k` of `seed`, relay by relay, so a prefix of a larger draw
    /// equals a smaller draw.
    pub fn resolve(&self, n: usize, seed: u64, k: u64) -> Result<Vec<f64>, ExpError> {
        match self {
            CpuFreqPolicy::Explicit(v) if v.len() == 1 => Ok(vec![v[0]; n]),
            CpuFreqPolicy::Explicit(v) if v.len() >= n => Ok(v[..n].to_vec()),
            CpuFreqPolicy::Explicit(v) => Err(ExpError::Config(format!(
                "cpu_freqs lists {} frequencies but {n} relays are needed",
                v.len()
            ))),
            CpuFreqPolicy::Uniform { lo, hi } => {
                let mut rng = SeedSpec::config_stream(seed, k).rng();
                Ok((0..n).map(|_| lo + (hi - lo) * open_unit(&mut rng)).collect())
            }
        }
    }
}

/// Which policies to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeFilter {
    All,
    Only(SchemeId),
}

impl SchemeFilter {
    pub fn schemes(&self) -> Vec<SchemeId> {
        match self {
            SchemeFilter::All => SchemeId::ALL.to_vec(),
            SchemeFilter::Only(s) => vec![*s],
        }
    }
}

impl FromStr for SchemeFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(Self::All)
        } else {
            s.parse().map(Self::Only)
        }
    }
}

impl fmt::Display for SchemeFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeFilter::All => f.write_str("all"),
            SchemeFilter::Only(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub src_snr_db: f64,
    pub relay_snr_db: f64,
    pub noise: f64,
    pub bandwidth: f64,
    pub pathloss_exp: f64,
    pub deadline: f64,
    pub input_bits: f64,
    pub cycles_per_bit: f64,
    pub compute_ratio: f64,
    pub relays: usize,
    /// Source-to-relay distances; one entry applies to every relay.
    pub dist_src: Vec<f64>,
    pub dist_dst: Vec<f64>,
    pub cpu_freqs: CpuFreqPolicy,
    /// Population means of the relay-count study.
    pub fig3_cpu_means: Vec<f64>,
    /// Relative half-width of each population's uniform range.
    pub fig3_cpu_spread: f64,
    /// `None` selects the subcommand's default axis.
    pub sweep: Option<SweepAxis>,
    pub trials: u64,
    pub seed: u64,
    pub quad_inner_tol: f64,
    pub quad_outer_tol: f64,
    pub scheme: SchemeFilter,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            src_snr_db: 25.0,
            relay_snr_db: 20.0,
            noise: 1.0,
            bandwidth: 100e6,
            pathloss_exp: 3.0,
            deadline: 0.2,
            input_bits: 50e6,
            cycles_per_bit: 10.0,
            compute_ratio: 0.5,
            relays: 4,
            dist_src: vec![1.0],
            dist_dst: vec![1.0],
            cpu_freqs: CpuFreqPolicy::Uniform { lo: 5e9, hi: 30e9 },
            fig3_cpu_means: vec![5e9, 20e9],
            fig3_cpu_spread: 0.5,
            sweep: None,
            trials: 1_000_000,
            seed: DEFAULT_SEED,
            quad_inner_tol: 1e-9,
            quad_outer_tol: 1e-7,
            scheme: SchemeFilter::All,
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let values: Result<Vec<f64>, _> = s.split(',').map(|v| v.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(format!("expected a comma-separated list of numbers, got `{s}`")),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ExpError>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| ExpError::Config(format!("bad value for `{key}`: {e}")))
}

impl ExperimentConfig {
    /// Parse a config file body on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self, ExpError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ExpError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ExpError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| ExpError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    fn sweep_mut(&mut self) -> &mut SweepAxis {
        self.sweep.get_or_insert_with(SweepAxis::fig2_default)
    }

    /// Set one key. Keys are those printed by [`ExperimentConfig::entries`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExpError> {
        match key {
            "src_snr_db" => self.src_snr_db = parse(key, value)?,
            "relay_snr_db" => self.relay_snr_db = parse(key, value)?,
            "noise" => self.noise = parse(key, value)?,
            "bandwidth" => self.bandwidth = parse(key, value)?,
            "pathloss_exp" => self.pathloss_exp = parse(key, value)?,
            "deadline" => self.deadline = parse(key, value)?,
            "input_bits" => self.input_bits = parse(key, value)?,
            "cycles_per_bit" => self.cycles_per_bit = parse(key, value)?,
            "compute_ratio" => self.compute_ratio = parse(key, value)?,
            "relays" => self.relays = parse(key, value)?,
            "dist_src" => self.dist_src = parse_list(value).map_err(ExpError::Config)?,
            "dist_dst" => self.dist_dst = parse_list(value).map_err(ExpError::Config)?,
            "cpu_freqs" => self.cpu_freqs = parse(key, value)?,
            "fig3.cpu_means" => self.fig3_cpu_means = parse_list(value).map_err(ExpError::Config)?,
            "fig3.cpu_spread" => self.fig3_cpu_spread = parse(key, value)?,
            "sweep.variable" => self.sweep_mut().variable = parse(key, value)?,
            "sweep.start" => self.sweep_mut().start = parse(key, value)?,
            "sweep.stop" => self.sweep_mut().stop = parse(key, value)?,
            "sweep.points" => self.sweep_mut().points = parse(key, value)?,
            "sweep.scale" => self.sweep_mut().scale = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "quad.inner_tol" => self.quad_inner_tol = parse(key, value)?,
            "quad.outer_tol" => self.quad_outer_tol = parse(key, value)?,
            "scheme" => self.scheme = parse(key, value)?,
            _ => return Err(ExpError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Check everything that does not depend on the subcommand.
    pub fn validate(&self) -> Result<(), ExpError> {
        if self.relays == 0 {
            return Err(ExpError::Config("relays must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(ExpError::Config("trials must be >= 1".into()));
        }
        if !(self.quad_inner_tol > 0.0 && self.quad_outer_tol > 0.0) {
            return Err(ExpError::Config("quadrature tolerances must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.fig3_cpu_spread) || self.fig3_cpu_means.iter().any(|&m| m <= 0.0) {
            return Err(ExpError::Config("fig3 populations need positive means and 0 <= spread < 1".into()));
        }
        for (name, list) in [("dist_src", &self.dist_src), ("dist_dst", &self.dist_dst)] {
            if list.len() != 1 && list.len() < self.relays {
                return Err(ExpError::Config(format!(
                    "{name} lists {} distances but {} relays are configured",
                    list.len(),
                    self.relays
                )));
            }
        }
        if let Some(axis) = &self.sweep {
            axis.validate()?;
        }
        // Resolving once surfaces model violations early.
        self.system_config(self.relays, &self.cpu_freqs.resolve(self.relays, self.seed, 0)?)?;
        Ok(())
    }

    pub fn quad_settings(&self) -> QuadSettings {
        QuadSettings {
            inner: Tolerance::absolute(self.quad_inner_tol),
            outer: Tolerance::absolute(self.quad_outer_tol),
        }
    }

    fn distance(list: &[f64], i: usize) -> f64 {
        if list.len() == 1 {
            list[0]
        } else {
            list[i]
        }
    }

    /// Concrete configuration for the first `n` relays with the given CPU
    /// frequencies.
    pub fn system_config(&self, n: usize, cpu_freqs: &[f64]) -> Result<SystemConfig, ExpError> {
        let relays = (0..n)
            .map(|i| {
                RelayNode::new(
                    cpu_freqs[i],
                    Self::distance(&self.dist_src, i),
                    Self::distance(&self.dist_dst, i),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let cfg = SystemConfig {
            src_power: db_to_linear(self.src_snr_db) * self.noise,
            relay_power: db_to_linear(self.relay_snr_db) * self.noise,
            noise: self.noise,
            bandwidth: self.bandwidth,
            pathloss_exp: self.pathloss_exp,
            deadline: self.deadline,
            relays,
            task: TaskSpec::new(self.input_bits, self.cycles_per_bit, self.compute_ratio)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolved key/value pairs in a fixed order, for output headers.
    pub fn entries(&self, axis: &SweepAxis) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("src_snr_db", format!("{}", self.src_snr_db));
        m.insert("relay_snr_db", format!("{}", self.relay_snr_db));
        m.insert("noise", format!("{}", self.noise));
        m.insert("bandwidth", format!("{}", self.bandwidth));
        m.insert("pathloss_exp", format!("{}", self.pathloss_exp));
        m.insert("deadline", format!("{}", self.deadline));
        m.insert("input_bits", format!("{}", self.input_bits));
        m.insert("cycles_per_bit", format!("{}", self.cycles_per_bit));
        m.insert("compute_ratio", format!("{}", self.compute_ratio));
        m.insert("relays", format!("{}", self.relays));
        m.insert("dist_src", join(&self.dist_src));
        m.insert("dist_dst", join(&self.dist_dst));
        m.insert("cpu_freqs", self.cpu_freqs.to_string());
        m.insert("fig3.cpu_means", join(&self.fig3_cpu_means));
        m.insert("fig3.cpu_spread", format!("{}", self.fig3_cpu_spread));
        m.insert("sweep.variable", axis.variable.as_str().to_string());
        m.insert("sweep.start", format!("{}", axis.start));
        m.insert("sweep.stop", format!("{}", axis.stop));
        m.insert("sweep.points", format!("{}", axis.points));
        m.insert("sweep.scale", axis.scale.as_str().to_string());
        m.insert("trials", format!("{}", self.trials));
        m.insert("seed", format!("{}", self.seed));
        m.insert("quad.inner_tol", format!("{}", self.quad_inner_tol));
        m.insert("quad.outer_tol", format!("{}", self.quad_outer_tol));
        m.insert("scheme", self.scheme.to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_parameters() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let freqs = cfg.cpu_freqs.resolve(4, cfg.seed, 0).unwrap();
        let sys = cfg.system_config(4, &freqs).unwrap();
        assert!((sys.src_power - 316.227_766).abs() < 1e-5);
        assert_eq!(sys.task.input_bits, 50e6);
        assert_eq!(sys.deadline, 0.2);
        assert_eq!(sys.pathloss_exp, 3.0);
        assert!(freqs.iter().all(|&f| (5e9..30e9).contains(&f)));
    }

    #[test]
    fn parses_key_values_and_comments() {
        let text = "
            # reference run
            relays = 3
            relay_snr_db = 12.5   # override
            cpu_freqs = list:6e9, 7e9, 8e9
            dist_src = 1, 2, 0.5
            sweep.variable = src_snr
            sweep.points = 4
            scheme = cors
        ";
        let cfg = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(cfg.relays, 3);
        assert_eq!(cfg.relay_snr_db, 12.5);
        assert_eq!(cfg.cpu_freqs, CpuFreqPolicy::Explicit(vec![6e9, 7e9, 8e9]));
        assert_eq!(cfg.dist_src, vec![1.0, 2.0, 0.5]);
        let axis = cfg.sweep.unwrap();
        assert_eq!(axis.variable, SweepVariable::SrcSnr);
        assert_eq!(axis.points, 4);
        assert_eq!(cfg.scheme, SchemeFilter::Only(SchemeId::Cors));
        cfg.validate().unwrap();
        let sys = cfg.system_config(3, &[6e9, 7e9, 8e9]).unwrap();
        assert_eq!(sys.relays[2].dist_src, 0.5);
        assert_eq!(sys.relays[2].dist_dst, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_text("bogus = 1").is_err());
        assert!(ExperimentConfig::from_text("relays 4").is_err());
        assert!(ExperimentConfig::from_text("relays = four").is_err());
        assert!(ExperimentConfig::from_text("cpu_freqs = uniform:3e9").is_err());
        let cfg = ExperimentConfig::from_text("pathloss_exp = 2").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig::from_text("relays = 3\ndist_dst = 1,2").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_values() {
        assert_eq!(SweepAxis::fig2_default().values(), vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        assert_eq!(SweepAxis::fig3_default().values(), (1..=8).map(f64::from).collect::<Vec<_>>());
        let g = SweepAxis::diversity_default();
        let v = g.values();
        assert_eq!(v.len(), 8);
        assert!((g.to_linear(v[0]) - 1e3).abs() < 1e-9);
        assert!((g.to_linear(v[7]) - 1e6).abs() < 1e-6);
    }

    #[test]
    fn uniform_draw_prefix_and_reproducibility() {
        let p = CpuFreqPolicy::Uniform { lo: 5e9, hi: 30e9 };
        let a = p.resolve(3, 9, 0).unwrap();
        let b = p.resolve(6, 9, 0).unwrap();
        assert_eq!(a[..], b[..3]);
        assert_ne!(p.resolve(3, 9, 1).unwrap(), a);
        let e = CpuFreqPolicy::Explicit(vec![7e9]);
        assert_eq!(e.resolve(3, 0, 0).unwrap(), vec![7e9; 3]);
        assert!(CpuFreqPolicy::Explicit(vec![7e9, 8e9]).resolve(3, 0, 0).is_err());
    }
}
