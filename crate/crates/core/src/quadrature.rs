//! Globally adaptive Gauss-Kronrod (7, 15) integration on finite and
//! semi-infinite intervals.
//!
//! Panels live in a max-heap keyed by their error estimate; the worst panel
//! is bisected until the summed estimate meets the tolerance or the panel
//! budget is exhausted. Integration never fails silently: a result that did
//! not reach its tolerance carries `converged == false`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae on [-1, 1], descending; the last entry is the center.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd Kronrod abscissae `XGK[1], XGK[3], XGK[5]` and
/// the center.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Maximum number of live panels before giving up.
pub const MAX_PANELS: usize = 4000;

/// Requested accuracy: the result converges once its error estimate is at
/// most `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    pub fn bound(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub n_evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            // Deterministic order among equal errors: leftmost first.
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = kronrod.abs();
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += w * (f1 + f2);
        abs_sum += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let raw = ((kronrod - gauss) * half).abs();
    // Floor at the rounding level of the panel so refinement never chases noise.
    let floor = 50.0 * f64::EPSILON * abs_sum * half.abs();
    Panel {
        a,
        b,
        value,
        error: raw.max(floor),
    }
}

const EVALS_PER_PANEL: usize = 15;

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    integrate_with_breakpoints(f, &[a, b], tol)
}

/// Adaptive integral over `[points[0], points[last]]` with the initial panels
/// split at every interior point. `points` must be strictly increasing.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> QuadResult {
    assert!(points.len() >= 2, "need at least two points");
    assert!(
        points.windows(2).all(|w| w[0] < w[1]),
        "integration points must be strictly increasing"
    );
    assert!(tol.abs >= 0.0 && tol.rel >= 0.0 && (tol.abs > 0.0 || tol.rel > 0.0));

    let mut heap: BinaryHeap<Panel> = points.windows(2).map(|w| gauss_kronrod(&f, w[0], w[1])).collect();
    let mut n_evaluations = heap.len() * EVALS_PER_PANEL;

    let totals = |heap: &BinaryHeap<Panel>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };

    loop {
        let (value, error) = totals(&heap);
        if !(value.is_finite() && error.is_finite()) {
            return QuadResult {
                value,
                abs_error_estimate: error,
                n_evaluations,
                converged: false,
            };
        }
        if error <= tol.bound(value) {
            return QuadResult {
                value,
                abs_error_estimate: error,
                n_evaluations,
                converged: true,
            };
        }
        if heap.len() >= MAX_PANELS {
            return QuadResult {
                value,
                abs_error_estimate: error,
                n_evaluations,
                converged: false,
            };
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Interval can no longer be split in floating point.
            heap.push(worst);
            let (value, error) = totals(&heap);
            return QuadResult {
                value,
                abs_error_estimate: error,
                n_evaluations,
                converged: error <= tol.bound(value),
            };
        }
        heap.push(gauss_kronrod(&f, worst.a, mid));
        heap.push(gauss_kronrod(&f, mid, worst.b));
        n_evaluations += 2 * EVALS_PER_PANEL;
    }
}

/// Integral of `f` over `[a, inf)` through `t = a + u / (1 - u)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> QuadResult {
    assert!(a.is_finite(), "lower limit must be finite");
    let mapped = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - u;
        let t = a + u / s;
        if !t.is_finite() {
            return 0.0;
        }
        let v = f(t) / (s * s);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(mapped, 0.0, 1.0, tol)
}

/// Strictly increasing breakpoints on `[a, b]` that refine geometrically
/// toward both endpoints, stopping once the spacing falls below `floor`.
///
/// Useful for integrands whose mass sits in narrow features near the ends of
/// a long interval.
pub fn graded_breakpoints(a: f64, b: f64, floor: f64) -> Vec<f64> {
    assert!(a < b);
    let width = b - a;
    let mut offsets = Vec::new();
    let mut h = 0.5 * width;
    while h > floor && offsets.len() < 200 {
        offsets.push(h);
        h *= 0.5;
    }
    let mut points = Vec::with_capacity(2 * offsets.len() + 1);
    points.push(a);
    points.extend(offsets.iter().rev().map(|h| a + h));
    points.extend(offsets.iter().skip(1).map(|h| b - h));
    points.push(b);
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    points.dedup_by(|x, y| !(*y < *x));
    if *points.last().unwrap() != b {
        points.push(b);
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_degree_22() {
        // Moments of x^k on [-1, 1]: 2 / (k + 1) for even k, 0 for odd.
        for k in 0..=22 {
            let p = gauss_kronrod(&|x: f64| x.powi(k), -1.0, 1.0);
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((p.value - exact).abs() < 1e-15, "k = {k}: {}", p.value);
        }
    }

    #[test]
    fn embedded_gauss_rule_is_exact_for_degree_13() {
        for k in 0..=13 {
            let p = gauss_kronrod(&|x: f64| x.powi(k), -1.0, 1.0);
            // Exact K and G agree, so the estimate drops to the rounding floor.
            assert!(p.error < 1e-13, "k = {k}: error {}", p.error);
        }
        let p = gauss_kronrod(&|x: f64| x.powi(14), -1.0, 1.0);
        assert!(p.error > 1e-6);
    }

    #[test]
    fn constant_and_polynomial() {
        let r = integrate(|_| 1.0, 0.0, 1.0, Tolerance::absolute(1e-12));
        assert_eq!(r.value, 1.0);
        assert!(r.converged);
        let r = integrate(|x| x * x, 0.0, 1.0, Tolerance::absolute(1e-12));
        assert!((r.value - 1.0 / 3.0).abs() < 1e-10);
        // Degree-10 polynomial on a single panel.
        let r = integrate(|x| x.powi(10) - 3.0 * x.powi(7) + x, -2.0, 3.0, Tolerance::absolute(1e-9));
        let exact = (3f64.powi(11) + 2f64.powi(11)) / 11.0 - 3.0 * (3f64.powi(8) - 2f64.powi(8)) / 8.0 + 2.5;
        assert!((r.value - exact).abs() < 1e-9 * exact.abs());
        assert_eq!(r.n_evaluations, 15);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_semi_infinite(|x| (-x).exp(), 0.0, Tolerance::absolute(1e-10));
        assert!((r.value - 1.0).abs() < 1e-8, "{}", r.value);
        assert!(r.converged);
        let r = integrate_semi_infinite(|x| (-x).exp(), std::f64::consts::LN_2, Tolerance::absolute(1e-10));
        assert!((r.value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn heavy_tail() {
        // int_1^inf x^-2 dx = 1
        let r = integrate_semi_infinite(|x| 1.0 / (x * x), 1.0, Tolerance::absolute(1e-10));
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn peaked_integrand() {
        let w = 1e-3;
        let r = integrate(
            |x| (-(x - 0.3f64).powi(2) / (2.0 * w * w)).exp(),
            0.0,
            1.0,
            Tolerance::absolute(1e-12),
        );
        let exact = w * (2.0 * std::f64::consts::PI).sqrt();
        assert!((r.value - exact).abs() < 1e-11, "{} vs {exact}", r.value);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let r = integrate(|x| 1.0 / x.sqrt().max(1e-300) / x.max(1e-300), 0.0, 1.0, Tolerance::absolute(1e-12));
        assert!(!r.converged);
    }

    #[test]
    fn relative_tolerance_on_tiny_values() {
        let scale = 1e-20;
        let r = integrate(|x| scale * x.sin(), 0.0, 2.0, Tolerance::relative(1e-10));
        let exact = scale * (1.0 - 2f64.cos());
        assert!(((r.value - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn graded_points_are_increasing() {
        let p = graded_breakpoints(0.0, 10.0, 1e-3);
        assert_eq!(p[0], 0.0);
        assert_eq!(*p.last().unwrap(), 10.0);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!(p[1] < 2e-3);
        assert!(10.0 - p[p.len() - 2] < 2e-3);
        assert_eq!(graded_breakpoints(0.0, 1e-4, 1e-3), vec![0.0, 1e-4]);
    }
}
