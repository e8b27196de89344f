//! Relay-selection policies evaluated on a single channel realization.
//!
//! Ties are always broken toward the lowest relay index.

use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelDraw;
use crate::model::{compute_time, hop_time, shannon_rate, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    /// Latency-best: minimum end-to-end delay.
    Lbrs,
    /// Communication-only: maximum bottleneck rate.
    Cors,
    /// Computing-only: maximum CPU frequency.
    Cpors,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::Lbrs, SchemeId::Cors, SchemeId::Cpors];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::Lbrs => "lbrs",
            SchemeId::Cors => "cors",
            SchemeId::Cpors => "cpors",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lbrs" => Ok(SchemeId::Lbrs),
            "cors" => Ok(SchemeId::Cors),
            "cpors" => Ok(SchemeId::Cpors),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOutcome {
    pub chosen_index: Option<usize>,
    pub scheme_id: SchemeId,
    /// End-to-end delay through the chosen relay, possibly `+inf`.
    pub realized_delay: f64,
}

/// Per-relay quantities that depend on the configuration only, hoisted out
/// of the trial loop.
#[derive(Debug, Clone)]
pub(crate) struct LinkBudget {
    bandwidth: f64,
    input_bits: f64,
    output_bits: f64,
    /// `P_s / ((1 + d_si^alpha) sigma^2)`
    up_snr_scale: Vec<f64>,
    /// `P_r / ((1 + d_ri^alpha) sigma^2)`
    down_snr_scale: Vec<f64>,
    t_comp: Vec<f64>,
}

impl LinkBudget {
    pub(crate) fn new(cfg: &SystemConfig) -> Self {
        Self {
            bandwidth: cfg.bandwidth,
            input_bits: cfg.task.input_bits,
            output_bits: cfg.task.output_bits(),
            up_snr_scale: cfg
                .relays
                .iter()
                .map(|r| cfg.src_power / (cfg.attenuation(r.dist_src) * cfg.noise))
                .collect(),
            down_snr_scale: cfg
                .relays
                .iter()
                .map(|r| cfg.relay_power / (cfg.attenuation(r.dist_dst) * cfg.noise))
                .collect(),
            t_comp: cfg.relays.iter().map(|r| compute_time(&cfg.task, r)).collect(),
        }
    }

    pub(crate) fn n_relays(&self) -> usize {
        self.t_comp.len()
    }

    /// Evaluate every relay under `draw`, writing into `out`.
    pub(crate) fn evaluate(&self, draw: &ChannelDraw, out: &mut Vec<RelayState>) {
        debug_assert_eq!(draw.n_relays(), self.n_relays());
        out.clear();
        for i in 0..self.n_relays() {
            let rate_up = shannon_rate(self.bandwidth, self.up_snr_scale[i] * draw.h2[i]);
            let rate_down = shannon_rate(self.bandwidth, self.down_snr_scale[i] * draw.g2[i]);
            let delay =
                hop_time(self.input_bits, rate_up) + self.t_comp[i] + hop_time(self.output_bits, rate_down);
            out.push(RelayState {
                bottleneck_rate: rate_up.min(rate_down),
                delay,
            });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RelayState {
    pub bottleneck_rate: f64,
    pub delay: f64,
}

/// First index holding the maximum of `key`.
fn first_argmax<T>(items: &[T], key: impl Fn(&T) -> f64) -> usize {
    let mut best = 0;
    for (i, item) in items.iter().enumerate().skip(1) {
        if key(item) > key(&items[best]) {
            best = i;
        }
    }
    best
}

pub(crate) fn cors_index(states: &[RelayState]) -> usize {
    first_argmax(states, |s| s.bottleneck_rate)
}

pub(crate) fn lbrs_index(states: &[RelayState]) -> usize {
    first_argmax(states, |s| -s.delay)
}

/// Relay with the fastest CPU.
pub fn cpors_index(cfg: &SystemConfig) -> usize {
    first_argmax(&cfg.relays, |r| r.cpu_freq)
}

fn evaluate(cfg: &SystemConfig, draw: &ChannelDraw) -> Vec<RelayState> {
    assert_eq!(draw.n_relays(), cfg.n_relays(), "draw and configuration disagree on relay count");
    let mut states = Vec::with_capacity(cfg.n_relays());
    LinkBudget::new(cfg).evaluate(draw, &mut states);
    states
}

/// Relay maximizing `min(rate_up, rate_down)` over all relays, regardless of
/// whether it can meet the deadline.
pub fn select_cors(cfg: &SystemConfig, draw: &ChannelDraw) -> SelectionOutcome {
    let states = evaluate(cfg, draw);
    let i = cors_index(&states);
    SelectionOutcome {
        chosen_index: Some(i),
        scheme_id: SchemeId::Cors,
        realized_delay: states[i].delay,
    }
}

/// Relay with the largest CPU frequency. The choice does not depend on the
/// channel, so `realized_delay` is left as NaN; use
/// [`select_cpors_for_draw`] to obtain it for a realization.
pub fn select_cpors(cfg: &SystemConfig) -> SelectionOutcome {
    SelectionOutcome {
        chosen_index: Some(cpors_index(cfg)),
        scheme_id: SchemeId::Cpors,
        realized_delay: f64::NAN,
    }
}

pub fn select_cpors_for_draw(cfg: &SystemConfig, draw: &ChannelDraw) -> SelectionOutcome {
    let states = evaluate(cfg, draw);
    let i = cpors_index(cfg);
    SelectionOutcome {
        chosen_index: Some(i),
        scheme_id: SchemeId::Cpors,
        realized_delay: states[i].delay,
    }
}

/// Relay with the smallest end-to-end delay. When every delay is infinite
/// the first relay is reported.
pub fn select_lbrs(cfg: &SystemConfig, draw: &ChannelDraw) -> SelectionOutcome {
    let states = evaluate(cfg, draw);
    let i = lbrs_index(&states);
    SelectionOutcome {
        chosen_index: Some(i),
        scheme_id: SchemeId::Lbrs,
        realized_delay: states[i].delay,
    }
}

pub fn select(scheme: SchemeId, cfg: &SystemConfig, draw: &ChannelDraw) -> SelectionOutcome {
    match scheme {
        SchemeId::Lbrs => select_lbrs(cfg, draw),
        SchemeId::Cors => select_cors(cfg, draw),
        SchemeId::Cpors => select_cpors_for_draw(cfg, draw),
    }
}
