//! Monte Carlo estimation of the delay outage probability.
//!
//! Trial `t` always consumes fading stream `t` of the master seed, so the
//! estimate depends only on `(cfg, n_trials, master_seed)`. Trials are cut
//! into blocks of [`TRIAL_BLOCK`] for parallel evaluation; outage counts are
//! summed, which makes the reduction order irrelevant.

use std::fmt;

use rayon::prelude::*;

use crate::channel::{ChannelDraw, ChannelSampler};
use crate::schemes::{cors_index, cpors_index, lbrs_index, LinkBudget, SchemeId};
use crate::model::SystemConfig;

/// Trials per parallel work unit.
pub const TRIAL_BLOCK: u64 = 8192;

/// Two-sided 95% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MonteCarlo,
    Analytic,
    AnalyticUpperBound,
    Asymptotic,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MonteCarlo => "monte-carlo",
            Method::Analytic => "analytic",
            Method::AnalyticUpperBound => "analytic-upper-bound",
            Method::Asymptotic => "asymptotic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageResult {
    pub scheme_id: SchemeId,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_trials: u64,
    pub n_outages: u64,
    pub method: Method,
    pub master_seed: u64,
}

impl OutageResult {
    pub fn from_counts(scheme_id: SchemeId, n_outages: u64, n_trials: u64, master_seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(n_outages, n_trials);
        Self {
            scheme_id,
            p_hat: n_outages as f64 / n_trials as f64,
            ci_low,
            ci_high,
            n_trials,
            n_outages,
            method: Method::MonteCarlo,
            master_seed,
        }
    }

    /// A deterministic value with a degenerate interval.
    pub fn exact(scheme_id: SchemeId, value: f64, method: Method, master_seed: u64) -> Self {
        Self {
            scheme_id,
            p_hat: value,
            ci_low: value,
            ci_high: value,
            n_trials: 0,
            n_outages: 0,
            method,
            master_seed,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // Exact endpoints at the boundaries keep low <= p <= high under rounding.
    let low = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let high = if successes == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    (low, high)
}

/// Outage counts of the three policies over one shared set of draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutageCounts {
    pub lbrs: u64,
    pub cors: u64,
    pub cpors: u64,
}

impl OutageCounts {
    pub fn get(&self, scheme: SchemeId) -> u64 {
        match scheme {
            SchemeId::Lbrs => self.lbrs,
            SchemeId::Cors => self.cors,
            SchemeId::Cpors => self.cpors,
        }
    }

    fn merge(self, other: Self) -> Self {
        Self {
            lbrs: self.lbrs + other.lbrs,
            cors: self.cors + other.cors,
            cpors: self.cpors + other.cpors,
        }
    }
}

/// Count outages of every scheme for trials `0..n_trials`.
pub fn count_outages(cfg: &SystemConfig, n_trials: u64, master_seed: u64) -> OutageCounts {
    let budget = LinkBudget::new(cfg);
    let sampler = ChannelSampler::new(master_seed);
    let cpors = cpors_index(cfg);
    let deadline = cfg.deadline;
    let n_blocks = n_trials.div_ceil(TRIAL_BLOCK);

    (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let start = block * TRIAL_BLOCK;
            let end = (start + TRIAL_BLOCK).min(n_trials);
            let mut draw = ChannelDraw::default();
            let mut states = Vec::with_capacity(budget.n_relays());
            let mut counts = OutageCounts::default();
            for trial in start..end {
                sampler.fill(trial, budget.n_relays(), &mut draw);
                budget.evaluate(&draw, &mut states);
                let outage = |i: usize| u64::from(states[i].delay >= deadline);
                counts.lbrs += outage(lbrs_index(&states));
                counts.cors += outage(cors_index(&states));
                counts.cpors += outage(cpors);
            }
            counts
        })
        .reduce(OutageCounts::default, OutageCounts::merge)
}

/// Monte Carlo estimate of `Pr{delay >= D_max}` for one scheme.
pub fn estimate_outage(cfg: &SystemConfig, scheme: SchemeId, n_trials: u64, master_seed: u64) -> OutageResult {
    assert!(n_trials >= 1, "at least one trial is required");
    let counts = count_outages(cfg, n_trials, master_seed);
    OutageResult::from_counts(scheme, counts.get(scheme), n_trials, master_seed)
}

/// Estimates for LBRS, CORS and CPORS (in that order) from identical draws.
pub fn estimate_all_schemes_shared_draws(cfg: &SystemConfig, n_trials: u64, master_seed: u64) -> [OutageResult; 3] {
    assert!(n_trials >= 1, "at least one trial is required");
    let counts = count_outages(cfg, n_trials, master_seed);
    SchemeId::ALL.map(|s| OutageResult::from_counts(s, counts.get(s), n_trials, master_seed))
}
