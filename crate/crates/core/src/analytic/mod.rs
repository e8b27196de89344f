//! Closed-form and quadrature evaluation of the delay outage probability of
//! each selection policy, their high-SNR limits, and diversity-order fits.
//!
//! Times are normalized by `L / W`: a relay with deadline margin `phi_i`
//! (seconds) fails when `Y_i + X_i >= W phi_i / L`.

mod convolution;
mod diversity;
mod hop;

pub use convolution::{sum_pdf, sum_tail_probability_nested};
pub use diversity::{config_at_gamma, diversity_order, least_squares_slope, predicted_order, DiversityError, DiversityFit};
pub use hop::{sum_tail_probability, HopTimeDistribution};

use std::f64::consts::LN_2;

use crate::model::{eligibility, SystemConfig};
use crate::montecarlo::Method;
use crate::quadrature::Tolerance;
use crate::schemes::{cpors_index, SchemeId};

/// A numerically evaluated probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
}

impl Evaluation {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            abs_error: 0.0,
            converged: true,
        }
    }
}

/// Tolerances for the single integrals (`inner`) and for the outer integral
/// of nested evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub inner: Tolerance,
    pub outer: Tolerance,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            inner: Tolerance::absolute(1e-9),
            outer: Tolerance::absolute(1e-7),
        }
    }
}

/// Which hop's SNR is taken to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaturatedHop {
    Uplink,
    Downlink,
}

/// `2^x - 1`
fn pow2_m1(x: f64) -> f64 {
    (x * LN_2).exp_m1()
}

fn normalized_margin(cfg: &SystemConfig, phi: f64) -> f64 {
    cfg.bandwidth * phi / cfg.task.input_bits
}

/// Upper bound on the CORS outage probability obtained by replacing both hop
/// rates of every eligible relay with their minimum:
/// `prod_{i in phi} [1 - exp(-(c_up,i + c_down,i) (2^((1 + rho) L / (W phi_i)) - 1))]`.
pub fn cors_outage_upper_bound(cfg: &SystemConfig) -> f64 {
    let view = eligibility(cfg);
    if view.phi_set.is_empty() {
        return 1.0;
    }
    let bits = cfg.task.input_bits + cfg.task.output_bits();
    view.phi_set
        .iter()
        .map(|&i| {
            let growth = pow2_m1(bits / (cfg.bandwidth * view.phi_margins[i]));
            let c_up = HopTimeDistribution::uplink(cfg, i).scale;
            let c_down = HopTimeDistribution::downlink(cfg, i).scale;
            -(-(c_up + c_down) * growth).exp_m1()
        })
        .product()
}

/// `Pr{t_up + t_down >= phi_i}` for relay `i`; 1 when the relay is ineligible.
pub fn relay_outage(cfg: &SystemConfig, i: usize, tol: Tolerance) -> Evaluation {
    let phi = cfg.deadline - crate::model::compute_time(&cfg.task, &cfg.relays[i]);
    if phi <= 0.0 {
        return Evaluation::exact(1.0);
    }
    sum_tail_probability(
        &HopTimeDistribution::uplink(cfg, i),
        &HopTimeDistribution::downlink(cfg, i),
        normalized_margin(cfg, phi),
        tol,
    )
}

/// Outage probability of the fastest-CPU relay.
pub fn cpors_outage(cfg: &SystemConfig, settings: QuadSettings) -> Evaluation {
    relay_outage(cfg, cpors_index(cfg), settings.inner)
}

/// Outage probability of latency-best selection: the product of the
/// per-relay outage probabilities over the eligible set.
pub fn lbrs_outage(cfg: &SystemConfig, settings: QuadSettings) -> Evaluation {
    let view = eligibility(cfg);
    let mut acc = Evaluation::exact(1.0);
    for &i in &view.phi_set {
        let e = relay_outage(cfg, i, settings.inner);
        acc = Evaluation {
            // (v + dv)(w + dw) - v w, to first order
            abs_error: acc.abs_error * e.value + acc.value * e.abs_error,
            value: acc.value * e.value,
            converged: acc.converged && e.converged,
        };
    }
    acc
}

/// The analytic counterpart reported for `scheme`: exact for LBRS and CPORS,
/// an upper bound for CORS.
pub fn analytic_outage(cfg: &SystemConfig, scheme: SchemeId, settings: QuadSettings) -> (Evaluation, Method) {
    match scheme {
        SchemeId::Lbrs => (lbrs_outage(cfg, settings), Method::Analytic),
        SchemeId::Cpors => (cpors_outage(cfg, settings), Method::Analytic),
        SchemeId::Cors => (Evaluation::exact(cors_outage_upper_bound(cfg)), Method::AnalyticUpperBound),
    }
}

/// Single-hop outage factor `1 - exp(-c (2^(bits / (W phi)) - 1))` of the
/// hop that is left when the other one is saturated.
fn residual_hop_factor(cfg: &SystemConfig, i: usize, phi: f64, saturated: SaturatedHop) -> f64 {
    let (c, bits) = match saturated {
        SaturatedHop::Uplink => (HopTimeDistribution::downlink(cfg, i).scale, cfg.task.output_bits()),
        SaturatedHop::Downlink => (HopTimeDistribution::uplink(cfg, i).scale, cfg.task.input_bits),
    };
    -(-c * pow2_m1(bits / (cfg.bandwidth * phi))).exp_m1()
}

/// Outage probability when one hop's transmit power grows without bound.
///
/// LBRS and CORS share one expression, the product over eligible relays of
/// the residual hop's outage; CPORS keeps only the fastest relay.
pub fn limit_outage(cfg: &SystemConfig, scheme: SchemeId, saturated: SaturatedHop) -> f64 {
    let view = eligibility(cfg);
    match scheme {
        SchemeId::Lbrs | SchemeId::Cors => {
            if view.phi_set.is_empty() {
                return 1.0;
            }
            view.phi_set
                .iter()
                .map(|&i| residual_hop_factor(cfg, i, view.phi_margins[i], saturated))
                .product()
        }
        SchemeId::Cpors => {
            let i = cpors_index(cfg);
            let phi = view.phi_margins[i];
            if phi <= 0.0 {
                1.0
            } else {
                residual_hop_factor(cfg, i, phi, saturated)
            }
        }
    }
}

/// Leading-order CORS outage for `P_s = P_r` and normalized SNR `gamma`:
/// `gamma^-|phi| prod_{i in phi} (2^((1 + rho) L / (W phi_i)) - 1) (2 + d_si^a + d_ri^a) / (1 + d_si^a)`.
pub fn cors_asymptotic_outage(cfg: &SystemConfig, gamma: f64) -> f64 {
    let view = eligibility(cfg);
    let bits = cfg.task.input_bits + cfg.task.output_bits();
    view.phi_set
        .iter()
        .map(|&i| {
            let r = &cfg.relays[i];
            let a_s = r.dist_src.powf(cfg.pathloss_exp);
            let a_r = r.dist_dst.powf(cfg.pathloss_exp);
            pow2_m1(bits / (cfg.bandwidth * view.phi_margins[i])) * (2.0 + a_s + a_r) / (1.0 + a_s) / gamma
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_config, RelayNode};

    fn relays(freqs: &[f64]) -> Vec<RelayNode> {
        freqs.iter().map(|&f| RelayNode::new(f, 1.0, 1.0).unwrap()).collect()
    }

    #[test]
    fn upper_bound_single_relay_value() {
        // phi = 0.1 s needs f = L K / 0.1 = 5e9; P_s = P_r = 25 dB.
        let cfg = reference_config(25.0, relays(&[5e9]));
        let snr = 10f64.powf(2.5);
        // Hand evaluation: 2^7.5 - 1 = 180.019..., factor exp(-2 * 180.019 / 316.23) per hop.
        let g = 2f64.powf(7.5) - 1.0;
        assert!((g - 180.019_336).abs() < 1e-5);
        let expected = 1.0 - (-2.0 * g / snr).exp().powi(2);
        let got = cors_outage_upper_bound(&cfg);
        assert!((got - expected).abs() < 1e-14, "{got} vs {expected}");
        assert!((got - 0.897_37).abs() < 1e-4, "{got}");
    }

    #[test]
    fn upper_bound_limits() {
        let cfg = reference_config(25.0, relays(&[1e9, 2e9]));
        assert_eq!(cors_outage_upper_bound(&cfg), 1.0);
        let cfg = reference_config(200.0, relays(&[5e9])).with_src_power(1e20);
        assert!(cors_outage_upper_bound(&cfg) < 1e-12);
    }

    #[test]
    fn empty_eligible_set() {
        let cfg = reference_config(25.0, relays(&[1e9, 2.5e9]));
        let s = QuadSettings::default();
        assert_eq!(lbrs_outage(&cfg, s).value, 1.0);
        assert_eq!(cpors_outage(&cfg, s).value, 1.0);
        for scheme in SchemeId::ALL {
            assert_eq!(limit_outage(&cfg, scheme, SaturatedHop::Uplink), 1.0);
        }
    }

    #[test]
    fn singleton_lbrs_equals_cpors() {
        let cfg = reference_config(18.0, relays(&[12e9]));
        let s = QuadSettings::default();
        assert_eq!(lbrs_outage(&cfg, s).value, cpors_outage(&cfg, s).value);
        assert_eq!(lbrs_outage(&cfg, s).value, relay_outage(&cfg, 0, s.inner).value);
    }

    #[test]
    fn lbrs_below_cpors() {
        let cfg = reference_config(18.0, relays(&[12e9, 25e9, 7e9]));
        let s = QuadSettings::default();
        assert!(lbrs_outage(&cfg, s).value < cpors_outage(&cfg, s).value);
    }

    #[test]
    fn saturated_uplink_limits_agree_exactly() {
        let cfg = reference_config(14.0, relays(&[6e9, 25e9, 9e9, 3e9]));
        for hop in [SaturatedHop::Uplink, SaturatedHop::Downlink] {
            assert_eq!(limit_outage(&cfg, SchemeId::Lbrs, hop), limit_outage(&cfg, SchemeId::Cors, hop));
        }
        let mut zero = cfg.clone();
        zero.task.compute_ratio = 0.0;
        assert_eq!(limit_outage(&zero, SchemeId::Lbrs, SaturatedHop::Uplink), 0.0);
    }

    #[test]
    fn lbrs_approaches_uplink_limit() {
        let cfg = reference_config(20.0, relays(&[6e9, 25e9, 9e9, 14e9]))
            .with_src_power(crate::model::db_to_linear(60.0));
        let full = lbrs_outage(&cfg, QuadSettings::default()).value;
        let limit = limit_outage(&cfg, SchemeId::Lbrs, SaturatedHop::Uplink);
        assert!((full - limit).abs() < 1e-3, "{full} vs {limit}");
        assert!(full >= limit);
    }

    #[test]
    fn asymptote_power_law() {
        let cfg = reference_config(25.0, relays(&[6e9, 25e9, 9e9]));
        let a = cors_asymptotic_outage(&cfg, 1e4);
        let b = cors_asymptotic_outage(&cfg, 2e4);
        assert!((a / b - 8.0).abs() < 1e-12);
        let none = reference_config(25.0, relays(&[1e9]));
        assert_eq!(cors_asymptotic_outage(&none, 1e4), 1.0);
    }

    #[test]
    fn bound_over_asymptote_tends_to_one() {
        let template = reference_config(25.0, relays(&[6e9, 25e9, 9e9, 14e9]));
        let mut last = f64::INFINITY;
        for gamma in [1e4, 1e5, 1e6] {
            let cfg = config_at_gamma(&template, gamma);
            let ratio = cors_outage_upper_bound(&cfg) / cors_asymptotic_outage(&cfg, gamma);
            let gap = (ratio - 1.0).abs();
            assert!(gap < 0.05, "gamma={gamma}: ratio {ratio}");
            assert!(gap < last);
            last = gap;
        }
    }
}
