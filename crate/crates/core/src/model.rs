//! Domain types and the deterministic latency formulas of the two-hop
//! compute-and-forward link.
//!
//! A task of `L` input bits is sent from the source to relay `i`, processed
//! there at `K` cycles per bit on a CPU running at `f_i` cycles/s, and the
//! `rho * L` output bits are forwarded to the destination. Every hop is a
//! Rayleigh channel with distance-based path loss `1 / (1 + d^alpha)`.
//!
//! All quantities are linear scale. Decibel conversion happens only where
//! configuration is parsed.

use std::f64::consts::LN_2;

use thiserror::Error;

/// Violations of the system model's parameter domain.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} must be {requirement}, got {value}")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("at least one relay is required")]
    NoRelays,
}

fn check(name: &'static str, requirement: &'static str, value: f64, ok: bool) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::OutOfRange {
            name,
            requirement,
            value,
        })
    }
}

/// The computation task `(L, K, rho)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSpec {
    /// Input size `L` in bits.
    pub input_bits: f64,
    /// Required CPU cycles per input bit `K`.
    pub cycles_per_bit: f64,
    /// Output size divided by input size.
    pub compute_ratio: f64,
}

impl TaskSpec {
    pub fn new(input_bits: f64, cycles_per_bit: f64, compute_ratio: f64) -> Result<Self, ModelError> {
        let task = Self {
            input_bits,
            cycles_per_bit,
            compute_ratio,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check("input_bits", "finite and > 0", self.input_bits, self.input_bits.is_finite() && self.input_bits > 0.0)?;
        // K = 0 is accepted: it models a pure forwarding task.
        check(
            "cycles_per_bit",
            "finite and >= 0",
            self.cycles_per_bit,
            self.cycles_per_bit.is_finite() && self.cycles_per_bit >= 0.0,
        )?;
        check(
            "compute_ratio",
            "finite and >= 0",
            self.compute_ratio,
            self.compute_ratio.is_finite() && self.compute_ratio >= 0.0,
        )
    }

    /// Total CPU cycles the task needs, `L * K`.
    pub fn cycles(&self) -> f64 {
        self.input_bits * self.cycles_per_bit
    }

    /// Output payload in bits, `rho * L`.
    pub fn output_bits(&self) -> f64 {
        self.compute_ratio * self.input_bits
    }
}

/// A computing-enabled relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayNode {
    /// CPU frequency in cycles/s.
    pub cpu_freq: f64,
    /// Source-to-relay distance in meters.
    pub dist_src: f64,
    /// Relay-to-destination distance in meters.
    pub dist_dst: f64,
}

impl RelayNode {
    pub fn new(cpu_freq: f64, dist_src: f64, dist_dst: f64) -> Result<Self, ModelError> {
        let relay = Self {
            cpu_freq,
            dist_src,
            dist_dst,
        };
        relay.validate()?;
        Ok(relay)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check("cpu_freq", "finite and > 0", self.cpu_freq, self.cpu_freq.is_finite() && self.cpu_freq > 0.0)?;
        check("dist_src", "finite and >= 0", self.dist_src, self.dist_src.is_finite() && self.dist_src >= 0.0)?;
        check("dist_dst", "finite and >= 0", self.dist_dst, self.dist_dst.is_finite() && self.dist_dst >= 0.0)
    }
}

/// Complete description of one network operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Source transmit power `P_s` in watts.
    pub src_power: f64,
    /// Relay transmit power `P_r` in watts, shared by every relay.
    pub relay_power: f64,
    /// Noise variance in watts.
    pub noise: f64,
    /// Bandwidth of each hop in Hz.
    pub bandwidth: f64,
    /// Path-loss exponent, strictly greater than 2.
    pub pathloss_exp: f64,
    /// Deadline `D_max` in seconds. May be `+inf`.
    pub deadline: f64,
    pub relays: Vec<RelayNode>,
    pub task: TaskSpec,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |name, v: f64| check(name, "finite and > 0", v, v.is_finite() && v > 0.0);
        positive("src_power", self.src_power)?;
        positive("relay_power", self.relay_power)?;
        positive("noise", self.noise)?;
        positive("bandwidth", self.bandwidth)?;
        check(
            "pathloss_exp",
            "finite and > 2",
            self.pathloss_exp,
            self.pathloss_exp.is_finite() && self.pathloss_exp > 2.0,
        )?;
        check("deadline", "> 0", self.deadline, self.deadline > 0.0)?;
        if self.relays.is_empty() {
            return Err(ModelError::NoRelays);
        }
        for relay in &self.relays {
            relay.validate()?;
        }
        self.task.validate()
    }

    pub fn n_relays(&self) -> usize {
        self.relays.len()
    }

    /// Copy of this configuration with a different relay transmit power.
    pub fn with_relay_power(&self, relay_power: f64) -> Self {
        Self {
            relay_power,
            ..self.clone()
        }
    }

    /// Copy of this configuration with a different source transmit power.
    pub fn with_src_power(&self, src_power: f64) -> Self {
        Self {
            src_power,
            ..self.clone()
        }
    }

    /// `1 + d^alpha` for a distance under this configuration's exponent.
    pub fn attenuation(&self, d: f64) -> f64 {
        1.0 + d.powf(self.pathloss_exp)
    }
}

/// Rates and delay components of relay `i` under one channel realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetrics {
    pub snr_up: f64,
    pub snr_down: f64,
    /// Source-to-relay rate in bits/s.
    pub rate_up: f64,
    /// Relay-to-destination rate in bits/s.
    pub rate_down: f64,
    pub t_up: f64,
    pub t_comp: f64,
    pub t_down: f64,
    pub t_total: f64,
}

/// Per-relay deadline slack after computation.
#[derive(Debug, Clone, PartialEq)]
pub struct EligibilityView {
    /// `D_max - L K / f_i` for every relay, in seconds.
    pub phi_margins: Vec<f64>,
    /// Indices with a strictly positive margin, ascending.
    pub phi_set: Vec<usize>,
}

impl EligibilityView {
    pub fn is_eligible(&self, index: usize) -> bool {
        self.phi_margins[index] > 0.0
    }
}

/// Large-scale channel gain `1 / (1 + d^alpha)`.
pub fn pathloss_gain(d: f64, alpha: f64) -> Result<f64, ModelError> {
    check("distance", "finite and >= 0", d, d.is_finite() && d >= 0.0)?;
    check("pathloss_exp", "finite and > 2", alpha, alpha.is_finite() && alpha > 2.0)?;
    Ok(1.0 / (1.0 + d.powf(alpha)))
}

/// Shannon rate `W log2(1 + snr)` in bits/s.
pub fn shannon_rate(bandwidth: f64, snr: f64) -> f64 {
    bandwidth * snr.ln_1p() / LN_2
}

/// Received SNR of a hop driven at `power` over distance `d` with fading
/// power `gain2`.
pub fn hop_snr(power: f64, gain2: f64, d: f64, cfg: &SystemConfig) -> f64 {
    power * gain2 / (cfg.attenuation(d) * cfg.noise)
}

/// Achievable rate of one hop in bits/s. Zero when `gain2` is zero.
pub fn link_rate(power: f64, gain2: f64, d: f64, cfg: &SystemConfig) -> f64 {
    shannon_rate(cfg.bandwidth, hop_snr(power, gain2, d, cfg))
}

/// Computation latency `L K / f` in seconds.
pub fn compute_time(task: &TaskSpec, relay: &RelayNode) -> f64 {
    task.cycles() / relay.cpu_freq
}

/// Hop transmission time; a zero rate maps to `+inf`, a zero payload to 0.
pub(crate) fn hop_time(bits: f64, rate: f64) -> f64 {
    if bits == 0.0 {
        0.0
    } else {
        bits / rate
    }
}

/// End-to-end latency through `relay` for fading powers `h2` (uplink) and
/// `g2` (downlink).
pub fn total_delay(task: &TaskSpec, relay: &RelayNode, cfg: &SystemConfig, h2: f64, g2: f64) -> LinkMetrics {
    let snr_up = hop_snr(cfg.src_power, h2, relay.dist_src, cfg);
    let snr_down = hop_snr(cfg.relay_power, g2, relay.dist_dst, cfg);
    let rate_up = shannon_rate(cfg.bandwidth, snr_up);
    let rate_down = shannon_rate(cfg.bandwidth, snr_down);
    let t_up = hop_time(task.input_bits, rate_up);
    let t_comp = compute_time(task, relay);
    let t_down = hop_time(task.output_bits(), rate_down);
    LinkMetrics {
        snr_up,
        snr_down,
        rate_up,
        rate_down,
        t_up,
        t_comp,
        t_down,
        t_total: t_up + t_comp + t_down,
    }
}

/// Deadline margins `phi_i` and the set of relays that can finish the
/// computation alone before the deadline.
pub fn eligibility(cfg: &SystemConfig) -> EligibilityView {
    let phi_margins: Vec<f64> = cfg
        .relays
        .iter()
        .map(|r| cfg.deadline - compute_time(&cfg.task, r))
        .collect();
    let phi_set = phi_margins
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(i, _)| i)
        .collect();
    EligibilityView { phi_margins, phi_set }
}

/// Parameter set used throughout the reference experiments: `L = 50e6`,
/// `K = 10`, `rho = 0.5`, `P_s / sigma^2 = 25 dB`, `W = 100 MHz`,
/// `D_max = 0.2 s`, `alpha = 3`, unit noise. The caller supplies the relays.
pub fn reference_config(relay_snr_db: f64, relays: Vec<RelayNode>) -> SystemConfig {
    SystemConfig {
        src_power: db_to_linear(25.0),
        relay_power: db_to_linear(relay_snr_db),
        noise: 1.0,
        bandwidth: 100e6,
        pathloss_exp: 3.0,
        deadline: 0.2,
        relays,
        task: TaskSpec {
            input_bits: 50e6,
            cycles_per_bit: 10.0,
            compute_ratio: 0.5,
        },
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
