use thiserror::Error;

use super::{cors_outage_upper_bound, cpors_outage, lbrs_outage, QuadSettings};
use crate::model::{eligibility, SystemConfig};
use crate::quadrature::Tolerance;
use crate::schemes::{cpors_index, SchemeId};

#[derive(Debug, Error, PartialEq)]
pub enum DiversityError {
    #[error("gamma grid needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("gamma grid must be positive and strictly increasing")]
    BadGrid,
    #[error("outage underflowed to zero at gamma = {0}")]
    ZeroOutage(f64),
}

/// Least-squares fit of `-ln P_out` against `ln gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityFit {
    pub scheme_id: SchemeId,
    pub gamma_grid: Vec<f64>,
    /// Natural log of the outage probability at each grid point.
    pub log_outage: Vec<f64>,
    /// Estimated diversity order.
    pub slope: f64,
    /// Root-mean-square residual of the fit, in nepers.
    pub fit_residual: f64,
    /// Every outage value was exactly 1; the slope is reported as 0.
    pub outage_saturated: bool,
    pub converged: bool,
}

/// `P_s = P_r = gamma sigma^2 (1 + d^alpha)` with `d` the first relay's
/// source distance, so that `gamma` is the normalized uplink SNR of that
/// relay.
pub fn config_at_gamma(template: &SystemConfig, gamma: f64) -> SystemConfig {
    let power = gamma * template.noise * template.attenuation(template.relays[0].dist_src);
    SystemConfig {
        src_power: power,
        relay_power: power,
        ..template.clone()
    }
}

/// Diversity order the analysis predicts: `|phi|` for LBRS and CORS, and 1
/// or 0 for CPORS depending on whether the fastest relay is eligible.
pub fn predicted_order(cfg: &SystemConfig, scheme: SchemeId) -> usize {
    let view = eligibility(cfg);
    match scheme {
        SchemeId::Lbrs | SchemeId::Cors => view.phi_set.len(),
        SchemeId::Cpors => usize::from(view.is_eligible(cpors_index(cfg))),
    }
}

/// Slope and RMS residual of the least-squares line through `(x, y)`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, (sse / n).sqrt())
}

/// Fit the diversity order of `scheme` from its analytic outage over
/// `gamma_grid`, scaling both transmit powers together.
///
/// CORS uses its upper bound. Small outage values are integrated to a
/// relative tolerance: `settings.inner.rel`, or the
/// absolute tolerance reinterpreted as relative when no relative one is set.
pub fn diversity_order(
    template: &SystemConfig,
    scheme: SchemeId,
    gamma_grid: &[f64],
    settings: QuadSettings,
) -> Result<DiversityFit, DiversityError> {
    if gamma_grid.len() < 4 {
        return Err(DiversityError::TooFewPoints(gamma_grid.len()));
    }
    // Written so that NaN entries are rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if gamma_grid[0] <= 0.0 || gamma_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(DiversityError::BadGrid);
    }
    let tight = QuadSettings {
        inner: Tolerance::relative(if settings.inner.rel > 0.0 {
            settings.inner.rel
        } else {
            settings.inner.abs
        }),
        ..settings
    };
    let mut converged = true;
    let mut outage = Vec::with_capacity(gamma_grid.len());
    for &gamma in gamma_grid {
        let cfg = config_at_gamma(template, gamma);
        let e = match scheme {
            SchemeId::Cors => super::Evaluation::exact(cors_outage_upper_bound(&cfg)),
            SchemeId::Cpors => cpors_outage(&cfg, tight),
            SchemeId::Lbrs => lbrs_outage(&cfg, tight),
        };
        converged &= e.converged;
        if e.value <= 0.0 {
            return Err(DiversityError::ZeroOutage(gamma));
        }
        outage.push(e.value);
    }
    let log_outage: Vec<f64> = outage.iter().map(|p| p.ln()).collect();
    let outage_saturated = outage.iter().all(|&p| p == 1.0);
    let (slope, fit_residual) = if outage_saturated {
        (0.0, 0.0)
    } else {
        let x: Vec<f64> = gamma_grid.iter().map(|g| g.ln()).collect();
        let y: Vec<f64> = log_outage.iter().map(|l| -l).collect();
        least_squares_slope(&x, &y)
    };
    Ok(DiversityFit {
        scheme_id: scheme,
        gamma_grid: gamma_grid.to_vec(),
        log_outage,
        slope,
        fit_residual,
        outage_saturated,
        converged,
    })
}
