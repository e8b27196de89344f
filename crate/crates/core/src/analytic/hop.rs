//! Distribution of a single hop's bandwidth-normalized transmission time.
//!
//! With `g ~ Exp(1)` and SNR `g / c`, the normalized time
//! `T = r / log2(1 + g / c)` has
//!
//! ```text
//! F(t) = exp(-c (2^(r/t) - 1))                              t > 0
//! f(t) = c r ln2 2^(r/t) / t^2 * exp(-c (2^(r/t) - 1))
//! ```
//!
//! Multiplying `T` by `L / W` gives the hop time in seconds. `r = 1` for the
//! uplink and `r = rho` for the downlink.

use std::f64::consts::LN_2;

use crate::model::SystemConfig;

use super::Evaluation;
use crate::quadrature::{graded_breakpoints, integrate_with_breakpoints, Tolerance};

/// Beyond this exponent `2^(r/t)` is treated as overflowing and the CDF as 0.
const MAX_EXPONENT: f64 = 1024.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopTimeDistribution {
    /// `(1 + d^alpha) sigma^2 / P`, the inverse mean SNR of the hop.
    pub scale: f64,
    /// Payload relative to `L`.
    pub payload_ratio: f64,
}

impl HopTimeDistribution {
    pub fn new(scale: f64, payload_ratio: f64) -> Self {
        assert!(scale > 0.0 && payload_ratio >= 0.0);
        Self { scale, payload_ratio }
    }

    /// Source-to-relay hop of relay `i`.
    pub fn uplink(cfg: &SystemConfig, i: usize) -> Self {
        let r = &cfg.relays[i];
        Self::new(cfg.attenuation(r.dist_src) * cfg.noise / cfg.src_power, 1.0)
    }

    /// Relay-to-destination hop of relay `i`.
    pub fn downlink(cfg: &SystemConfig, i: usize) -> Self {
        let r = &cfg.relays[i];
        Self::new(
            cfg.attenuation(r.dist_dst) * cfg.noise / cfg.relay_power,
            cfg.task.compute_ratio,
        )
    }

    /// `c (2^(r/t) - 1)`, or `None` when `2^(r/t)` overflows.
    fn exponent(&self, t: f64) -> Option<f64> {
        let s = self.payload_ratio / t;
        if s > MAX_EXPONENT {
            None
        } else {
            Some(self.scale * (s * LN_2).exp_m1())
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.exponent(t) {
            Some(e) => (-e).exp(),
            None => 0.0,
        }
    }

    /// `1 - cdf(t)` without cancellation.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self.exponent(t) {
            Some(e) => -(-e).exp_m1(),
            None => 1.0,
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t <= 0.0 || self.payload_ratio == 0.0 {
            return 0.0;
        }
        let s = self.payload_ratio / t;
        match self.exponent(t) {
            Some(e) => {
                let log_pdf = (self.scale * self.payload_ratio * LN_2).ln() + s * LN_2 - 2.0 * t.ln() - e;
                log_pdf.exp()
            }
            None => 0.0,
        }
    }

    /// Below this normalized time the density is exactly zero.
    pub(crate) fn support_floor(&self) -> f64 {
        self.payload_ratio / MAX_EXPONENT
    }
}

/// `Pr{Y + X >= threshold}` for independent uplink `Y` and downlink `X`
/// normalized times.
///
/// Evaluated as `1 - int_0^T f_Y(y) F_X(T - y) dy`, rearranged into
/// `S_Y(T) + int_0^T f_Y(y) S_X(T - y) dy` with `S = 1 - F` so that small
/// tail probabilities keep their relative accuracy.
pub fn sum_tail_probability(
    up: &HopTimeDistribution,
    down: &HopTimeDistribution,
    threshold: f64,
    tol: Tolerance,
) -> Evaluation {
    if threshold <= 0.0 {
        return Evaluation::exact(1.0);
    }
    if threshold == f64::INFINITY {
        return Evaluation::exact(0.0);
    }
    let base = up.survival(threshold);
    if down.payload_ratio == 0.0 {
        // X is identically zero.
        return Evaluation::exact(base);
    }
    let floor = up.support_floor().min(down.support_floor()) * 0.25;
    let points = graded_breakpoints(0.0, threshold, floor);
    let r = integrate_with_breakpoints(|y| up.pdf(y) * down.survival(threshold - y), &points, tol);
    Evaluation {
        value: (base + r.value).clamp(0.0, 1.0),
        abs_error: r.abs_error_estimate,
        converged: r.converged,
    }
}
