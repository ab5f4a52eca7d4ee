//! Entropy test functions and the singular entropy integral that enters
//! every enhanced-area coefficient.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_graded, GaussLegendre};

/// Rényi index `alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiParam(f64);

impl RenyiParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha.is_finite() {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("Rényi index must be finite and > 0, got {alpha}"),
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Indices closer to 1 than this use the von Neumann formula.
pub const VON_NEUMANN_WINDOW: f64 = 1e-12;

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `h_1(t) = -t log t - (1 - t) log(1 - t)` on `[0, 1]`, zero elsewhere.
pub fn von_neumann_h(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    -xlogx(t) - xlogx(1.0 - t)
}

/// `h_alpha(t) = log(t^alpha + (1 - t)^alpha) / (1 - alpha)` on `[0, 1]`,
/// zero elsewhere.
pub fn renyi_h(alpha: RenyiParam, t: f64) -> f64 {
    let a = alpha.value();
    if (a - 1.0).abs() < VON_NEUMANN_WINDOW {
        return von_neumann_h(t);
    }
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    (t.powf(a) + (1.0 - t).powf(a)).ln() / (1.0 - a)
}

/// A real test function `h` together with its Hölder data: exponent
/// `gamma` in `(0, 1)` and the finite set of points where `h` fails to be
/// `C^2`.
#[derive(Clone)]
pub struct TestFunction {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// `u -> h(1 - u)` evaluated without forming `1 - u`, when available.
    reflected: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    hoelder_exponent: f64,
    singular_set: Vec<f64>,
    label: String,
    renyi: Option<RenyiParam>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("hoelder_exponent", &self.hoelder_exponent)
            .field("singular_set", &self.singular_set)
            .finish()
    }
}

impl TestFunction {
    pub fn new<F>(label: impl Into<String>, hoelder_exponent: f64, singular_set: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(hoelder_exponent > 0.0 && hoelder_exponent < 1.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("Hölder exponent must lie in (0, 1), got {hoelder_exponent}"),
            });
        }
        Ok(Self {
            eval: Arc::new(f),
            reflected: None,
            hoelder_exponent,
            singular_set,
            label: label.into(),
            renyi: None,
        })
    }

    /// The Rényi entropy function `h_alpha` (von Neumann for `alpha = 1`),
    /// singular at `{0, 1}`.
    pub fn renyi(alpha: f64) -> Result<Self> {
        let param = RenyiParam::new(alpha)?;
        // h_alpha is Hölder continuous of order min(alpha, 1) at 0 and 1;
        // any exponent below that works, so take the midpoint.
        let gamma = 0.5 * alpha.min(1.0);
        let mut h = Self::new(format!("renyi({alpha})"), gamma, vec![0.0, 1.0], move |t| {
            renyi_h(param, t)
        })?;
        h.renyi = Some(param);
        // h_alpha(t) = h_alpha(1 - t)
        h.reflected = Some(h.eval.clone());
        Ok(h)
    }

    pub fn von_neumann() -> Self {
        Self::renyi(1.0).expect("alpha = 1 is valid")
    }

    /// Piecewise-linear interpolation of `(t, h(t))` samples on `[0, 1]`,
    /// extended by zero outside. Knots must be strictly increasing, start at
    /// `t = 0` with value 0 and end at `t = 1`.
    pub fn from_table(label: impl Into<String>, knots: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidParameter {
            name: "h_table",
            reason: reason.to_string(),
        };
        if knots.len() < 2 {
            return Err(bad("need at least two knots"));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(bad("knots must be strictly increasing in t"));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(bad("first knot must be (0, 0) so that h(0) = 0"));
        }
        if knots[knots.len() - 1].0 != 1.0 {
            return Err(bad("last knot must sit at t = 1"));
        }
        let table = knots;
        Self::new(label, 0.99, vec![0.0, 1.0], move |t| {
            if !(0.0..=1.0).contains(&t) {
                return 0.0;
            }
            let i = table.partition_point(|&(x, _)| x <= t).clamp(1, table.len() - 1);
            let (x0, y0) = table[i - 1];
            let (x1, y1) = table[i];
            y0 + (y1 - y0) * (t - x0) / (x1 - x0)
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    /// `h(1 - u)`, accurate for small `u` when the function supplies a
    /// reflected form.
    pub fn eval_reflected(&self, u: f64) -> f64 {
        match &self.reflected {
            Some(r) => r(u),
            None => self.eval(1.0 - u),
        }
    }

    pub fn hoelder_exponent(&self) -> f64 {
        self.hoelder_exponent
    }

    pub fn singular_set(&self) -> &[f64] {
        &self.singular_set
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The Rényi index when this is one of the Rényi entropy functions.
    pub fn renyi_index(&self) -> Option<f64> {
        self.renyi.map(RenyiParam::value)
    }
}

/// Relative tolerance of the refinement loop in [`entropy_integral`].
pub const ENTROPY_INTEGRAL_TOL: f64 = 1e-12;

/// `int_0^1 (h(t) - h(1) t) / (t (1 - t)) dt`.
///
/// The interval is split at `1/2`; the halves are mapped by `t = s^2` and
/// `1 - t = s^2` respectively, which turns the endpoint singularities into
/// Hölder-regular behaviour at `s = 0`. Each half is integrated with
/// Gauss-Legendre panels graded geometrically toward `s = 0`, refining the
/// order and the number of layers until two successive results agree.
/// The half next to `t = 1` samples `h(1 - u)` through
/// [`TestFunction::eval_reflected`], since `1 - u` itself loses the digits
/// of small `u`.
pub fn entropy_integral(h: &TestFunction) -> Result<f64> {
    let h1 = h.eval(1.0);
    let integrand = |t: f64| -> f64 {
        let denom = t * (1.0 - t);
        if denom <= 0.0 {
            0.0
        } else {
            (h.eval(t) - h1 * t) / denom
        }
    };
    let smax = std::f64::consts::FRAC_1_SQRT_2;
    let evaluate = |order: usize, levels: usize| -> f64 {
        let rule = GaussLegendre::new(order);
        let left = integrate_graded(&rule, smax, levels, 0.2, |s| 2.0 * s * integrand(s * s));
        let right = integrate_graded(&rule, smax, levels, 0.2, |s| {
            let u = s * s;
            if u == 0.0 {
                return 0.0;
            }
            2.0 * s * (h.eval_reflected(u) - h1 * (1.0 - u)) / (u * (1.0 - u))
        });
        left + right
    };
    let mut trace = Vec::new();
    let mut previous = evaluate(12, 12);
    trace.push(previous);
    for step in 1..=6 {
        let current = evaluate(12 + 6 * step, 12 + 6 * step);
        trace.push(current);
        if (current - previous).abs() <= ENTROPY_INTEGRAL_TOL * current.abs().max(1.0) {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NonConvergence {
        what: "entropy integral",
        trace,
    })
}

/// Closed form `pi^2 (1 + alpha) / (6 alpha)` of the entropy integral of
/// the Rényi function `h_alpha`.
pub fn renyi_entropy_integral(alpha: f64) -> f64 {
    std::f64::consts::PI.powi(2) * (1.0 + alpha) / (6.0 * alpha)
}

/// Best constant and measured exponent for one derivative order at one
/// singular point.
#[derive(Debug, Clone, PartialEq)]
pub struct HoelderEstimate {
    pub point: f64,
    pub order: usize,
    /// `max |d^k [h - h(x_j)](x)| * |x - x_j|^(k - gamma)` over the samples.
    pub constant: f64,
    /// The same constant over samples restricted to half the radius.
    pub constant_half_radius: f64,
    /// Local exponent `e` in `|d^k [h - h(x_j)]| ~ |x - x_j|^(e - k)`,
    /// measured from the innermost samples; `None` when the function is
    /// identically flat there.
    pub exponent: Option<f64>,
    pub passed: bool,
}

/// Result of [`assumption_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub label: String,
    pub gamma: f64,
    pub estimates: Vec<HoelderEstimate>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.estimates.iter().all(|e| e.passed)
    }
}

/// Slack allowed between the measured exponent and `gamma`.
pub const EXPONENT_SLACK: f64 = 0.02;

/// Numerically spot-checks the Hölder bound
/// `|d^k/dx^k [h - h(x_j)](x)| <= C |x - x_j|^(gamma - k)`, `k = 0, 1, 2`,
/// near every singular point `x_j` of `h`.
///
/// Samples sit at distances `radius * 2^-i`, `i = 1..=samples`, on both
/// sides of each point; derivatives use central differences with step
/// `1e-3` of the distance. A point fails when the exponent measured on the
/// innermost samples falls below `gamma`. `radii` supplies the neighbourhood
/// radius per singular point (the last value is reused if shorter).
pub fn assumption_check(h: &TestFunction, samples: usize, radii: &[f64]) -> AssumptionReport {
    let gamma = h.hoelder_exponent();
    let samples = samples.max(8);
    let mut estimates = Vec::new();
    for (j, &xj) in h.singular_set().iter().enumerate() {
        let radius = radii.get(j).or_else(|| radii.last()).copied().unwrap_or(0.25);
        let hj = h.eval(xj);
        let shifted = |x: f64| h.eval(x) - hj;
        for order in 0..=2usize {
            // (distance, |derivative|) for each side
            let mut best_exponent: Option<f64> = None;
            let mut constant: f64 = 0.0;
            let mut constant_half: f64 = 0.0;
            for side in [-1.0f64, 1.0] {
                let mut series = Vec::with_capacity(samples);
                for i in 1..=samples {
                    let dist = radius * 0.5f64.powi(i as i32);
                    let x = xj + side * dist;
                    let step = 1e-3 * dist;
                    let value = match order {
                        0 => shifted(x),
                        1 => (shifted(x + step) - shifted(x - step)) / (2.0 * step),
                        _ => (shifted(x + step) - 2.0 * shifted(x) + shifted(x - step)) / (step * step),
                    }
                    .abs();
                    let c = value * dist.powf(order as f64 - gamma);
                    constant = constant.max(c);
                    if i >= 2 {
                        constant_half = constant_half.max(c);
                    }
                    series.push((dist, value));
                }
                let tail = &series[series.len() - 5..];
                if tail.iter().all(|&(_, v)| v == 0.0) {
                    continue;
                }
                if tail.iter().any(|&(_, v)| v == 0.0 || !v.is_finite()) {
                    best_exponent = Some(f64::NEG_INFINITY);
                    continue;
                }
                let slope = log_log_slope(tail);
                let exponent = slope + order as f64;
                best_exponent = Some(match best_exponent {
                    Some(e) => e.min(exponent),
                    None => exponent,
                });
            }
            let passed = best_exponent.is_none_or(|e| e >= gamma - EXPONENT_SLACK);
            estimates.push(HoelderEstimate {
                point: xj,
                order,
                constant,
                constant_half_radius: constant_half,
                exponent: best_exponent,
                passed,
            });
        }
    }
    AssumptionReport {
        label: h.label().to_string(),
        gamma,
        estimates,
    }
}

fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), &(x, y)| {
        let dx = x.ln() - mx;
        (num + dx * (y.ln() - my), den + dx * dx)
    });
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn r(alpha: f64) -> RenyiParam {
        RenyiParam::new(alpha).unwrap()
    }

    #[test]
    fn endpoints_vanish() {
        for a in [0.5, 1.0, 2.0, 3.0, 7.5] {
            assert_eq!(renyi_h(r(a), 0.0), 0.0);
            assert_eq!(renyi_h(r(a), 1.0), 0.0);
        }
    }

    #[test]
    fn midpoint_values() {
        assert!((renyi_h(r(1.0), 0.5) - LN_2).abs() < 1e-15);
        assert!((renyi_h(r(2.0), 0.5) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn zero_outside_unit_interval() {
        assert_eq!(renyi_h(r(2.0), -0.1), 0.0);
        assert_eq!(renyi_h(r(1.0), 1.5), 0.0);
    }

    #[test]
    fn values_bounded_by_log_two() {
        for a in [0.3, 1.0, 4.0] {
            for i in 0..=200 {
                let v = renyi_h(r(a), i as f64 / 200.0);
                assert!((0.0..=LN_2 + 1e-15).contains(&v));
            }
        }
    }

    #[test]
    fn renyi_approaches_von_neumann() {
        for a in [1.0 - 1e-4, 1.0 + 1e-4] {
            let sup = (0..=1000)
                .map(|i| i as f64 / 1000.0)
                .map(|t| (renyi_h(r(a), t) - von_neumann_h(t)).abs())
                .fold(0.0, f64::max);
            assert!(sup <= 1e-3, "alpha={a} sup={sup}");
        }
    }

    #[test]
    fn invalid_alpha_rejected() {
        assert!(RenyiParam::new(0.0).is_err());
        assert!(RenyiParam::new(-1.0).is_err());
        assert!(RenyiParam::new(f64::NAN).is_err());
    }

    #[test]
    fn entropy_integral_closed_forms() {
        for a in [0.5, 1.0, 2.0, 3.0, 5.0] {
            let v = entropy_integral(&TestFunction::renyi(a).unwrap()).unwrap();
            let want = renyi_entropy_integral(a);
            assert!((v - want).abs() < 1e-9, "alpha={a}: {v} vs {want}");
        }
        let vn = entropy_integral(&TestFunction::von_neumann()).unwrap();
        assert!((vn - PI * PI / 3.0).abs() < 1e-10);
        let r2 = entropy_integral(&TestFunction::renyi(2.0).unwrap()).unwrap();
        assert!((r2 - PI * PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn entropy_integral_annihilates_linear_functions() {
        let h = TestFunction::new("linear", 0.5, vec![], |t| 2.5 * t).unwrap();
        assert!(entropy_integral(&h).unwrap().abs() < 1e-14);
    }

    #[test]
    fn table_interpolates() {
        let h = TestFunction::from_table("tent", vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        assert_eq!(h.eval(0.25), 0.5);
        assert_eq!(h.eval(1.0), 0.0);
        assert_eq!(h.eval(-0.5), 0.0);
        assert!(TestFunction::from_table("bad", vec![(0.0, 1.0), (1.0, 0.0)]).is_err());
        assert!(TestFunction::from_table("bad", vec![(0.0, 0.0), (0.0, 0.0)]).is_err());
    }

    #[test]
    fn von_neumann_passes_hoelder_check() {
        let rep = assumption_check(&TestFunction::von_neumann(), 30, &[0.25]);
        assert!(rep.passed(), "{rep:#?}");
        // constants are finite
        assert!(rep.estimates.iter().all(|e| e.constant.is_finite()));
    }

    #[test]
    fn smooth_function_passes_vacuously() {
        let h = TestFunction::new("linear", 0.5, vec![], |t| t).unwrap();
        let rep = assumption_check(&h, 30, &[]);
        assert!(rep.estimates.is_empty());
        assert!(rep.passed());
    }

    #[test]
    fn square_root_fails_for_large_gamma() {
        let h = TestFunction::new("sqrt", 0.9, vec![0.0], |t: f64| t.abs().sqrt()).unwrap();
        let rep = assumption_check(&h, 30, &[0.25]);
        assert!(!rep.passed());
        let e0 = rep.estimates.iter().find(|e| e.order == 0).unwrap();
        assert!((e0.exponent.unwrap() - 0.5).abs() < 1e-6);
        // and passes for gamma below one half
        let h = TestFunction::new("sqrt", 0.45, vec![0.0], |t: f64| t.abs().sqrt()).unwrap();
        assert!(assumption_check(&h, 30, &[0.25]).passed());
    }
}
