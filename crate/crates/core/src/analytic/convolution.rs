//! The pdf of `Z = X + Y` written as a constant times a convolution
//! integral, and the tail probability as a nested integral of that pdf.
//!
//! ```text
//! f_Z(z)       = O * Q(z)
//! O            = ln2^2 * r_x * r_y * c_x * c_y * exp(c_x + c_y)
//! Q(z)         = int_0^z exp(-(c_x 2^(r_x/x) + c_y 2^(r_y/(z-x))))
//!                       * 2^(r_x/x + r_y/(z-x)) / (x^2 (z-x)^2) dx
//! Pr{Z >= T}   = O * int_T^inf Q(z) dz
//! ```
//!
//! This is the slow, direct route. It exists to cross-check
//! [`sum_tail_probability`](super::sum_tail_probability), which needs only a
//! single integral.

use std::cell::Cell;
use std::f64::consts::LN_2;

use super::hop::HopTimeDistribution;
use super::{Evaluation, QuadSettings};
use crate::quadrature::{graded_breakpoints, integrate_semi_infinite, integrate_with_breakpoints, Tolerance};

const MAX_EXPONENT: f64 = 1024.0;

struct Kernel {
    c_x: f64,
    r_x: f64,
    c_y: f64,
    r_y: f64,
}

impl Kernel {
    fn new(up: &HopTimeDistribution, down: &HopTimeDistribution) -> Self {
        assert!(
            down.payload_ratio > 0.0 && up.payload_ratio > 0.0,
            "the convolution form needs a continuous downlink time"
        );
        Self {
            c_x: down.scale,
            r_x: down.payload_ratio,
            c_y: up.scale,
            r_y: up.payload_ratio,
        }
    }

    /// `O` without the `exp(c_x + c_y)` factor, which is folded into the
    /// integrand's exponent.
    fn prefactor(&self) -> f64 {
        LN_2 * LN_2 * self.r_x * self.r_y * self.c_x * self.c_y
    }

    /// Integrand of `Q(z)` at `x`, times `exp(c_x + c_y)`.
    fn integrand(&self, z: f64, x: f64) -> f64 {
        let w = z - x;
        if x <= 0.0 || w <= 0.0 {
            return 0.0;
        }
        let sx = self.r_x / x;
        let sy = self.r_y / w;
        if sx > MAX_EXPONENT || sy > MAX_EXPONENT {
            return 0.0;
        }
        let exponent = -self.c_x * (sx * LN_2).exp_m1() - self.c_y * (sy * LN_2).exp_m1() + (sx + sy) * LN_2
            - 2.0 * x.ln()
            - 2.0 * w.ln();
        exponent.exp()
    }

    fn floor(&self) -> f64 {
        self.r_x.min(self.r_y) / MAX_EXPONENT * 0.25
    }

    fn q(&self, z: f64, tol: Tolerance, ok: &Cell<bool>) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let points = graded_breakpoints(0.0, z, self.floor());
        let r = integrate_with_breakpoints(|x| self.integrand(z, x), &points, tol);
        if !r.converged {
            ok.set(false);
        }
        r.value
    }
}

fn scaled(tol: Tolerance, factor: f64) -> Tolerance {
    Tolerance {
        abs: tol.abs / factor,
        rel: tol.rel,
    }
}

/// Density of `Z = Y + X` at `z`, with `tol` applied to the density value.
pub fn sum_pdf(up: &HopTimeDistribution, down: &HopTimeDistribution, z: f64, tol: Tolerance) -> Evaluation {
    let k = Kernel::new(up, down);
    let o = k.prefactor();
    let ok = Cell::new(true);
    let value = o * k.q(z, scaled(tol, o), &ok);
    Evaluation {
        value,
        abs_error: tol.bound(value),
        converged: ok.get(),
    }
}

/// `Pr{Y + X >= threshold}` by integrating the convolution density over
/// `[threshold, inf)`. `settings.inner` governs `Q(z)`, `settings.outer` the
/// tail integral.
pub fn sum_tail_probability_nested(
    up: &HopTimeDistribution,
    down: &HopTimeDistribution,
    threshold: f64,
    settings: QuadSettings,
) -> Evaluation {
    if threshold <= 0.0 {
        return Evaluation::exact(1.0);
    }
    let k = Kernel::new(up, down);
    let o = k.prefactor();
    let ok = Cell::new(true);
    let inner = scaled(settings.inner, o);
    let outer = integrate_semi_infinite(|z| k.q(z, inner, &ok), threshold, scaled(settings.outer, o));
    Evaluation {
        value: (o * outer.value).clamp(0.0, 1.0),
        abs_error: o * outer.abs_error_estimate,
        converged: outer.converged && ok.get(),
    }
}
