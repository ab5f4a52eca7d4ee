//! Quadrature rules and special functions shared by the coefficient and
//! kernel code.
//!
//! Everything here is deterministic: rules are generated from closed
//! recurrences, never from random sampling, so repeated runs produce
//! bit-identical results.

use std::f64::consts::PI;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on the Legendre
    /// recurrence, seeded with the Tricomi approximation of the roots.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Integrates `f` over `[a, b]` split into `panels` equal sub-intervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + h * p as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Appends the mapped nodes and weights of this rule on `[a, b]` split
    /// into `panels` sub-intervals.
    pub fn push_composite(&self, a: f64, b: f64, panels: usize, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + h * p as f64;
            let half = 0.5 * h;
            let mid = lo + half;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                nodes.push(mid + half * x);
                weights.push(w * half);
            }
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Integrates `f` over `[0, b]` on panels graded geometrically toward `0`
/// (ratio `grading`, `levels` layers), which resolves algebraic and
/// logarithmic endpoint behaviour at an exponential rate.
pub fn integrate_graded<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    b: f64,
    levels: usize,
    grading: f64,
    mut f: F,
) -> f64 {
    let mut hi = b;
    let mut total = 0.0;
    for _ in 0..levels {
        let lo = hi * grading;
        total += rule.integrate(lo, hi, &mut f);
        hi = lo;
    }
    total + rule.integrate(0.0, hi, &mut f)
}

/// Bessel function of the first kind `J_n(x)` for `n` in {0, 1}.
///
/// Evaluated from the integral representation
/// `J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt` with the trapezoidal
/// rule, which is exact up to aliasing of order `J_{M+n}(x)` for `M` nodes
/// per half period; `M = |x| + 40` keeps that below double precision.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    debug_assert!(order <= 1);
    let ax = x.abs();
    let m = (ax.ceil() as usize + 40).max(48);
    let h = PI / m as f64;
    let n = order as f64;
    let mut sum = 0.5 * ((0.0f64).cos() + (n * PI - ax * PI.sin()).cos());
    for k in 1..m {
        let t = h * k as f64;
        sum += (n * t - ax * t.sin()).cos();
    }
    let value = sum * h / PI;
    if order == 1 && x < 0.0 {
        -value
    } else {
        value
    }
}

/// `Gamma(n / 2)` for a positive integer `n`, from the exact half-integer
/// recurrences.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n >= 1);
    if n.is_multiple_of(2) {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut a = 0.5;
        while a < n as f64 / 2.0 - 0.25 {
            g *= a;
            a += 1.0;
        }
        g
    }
}

/// Surface area of the unit sphere in `R^d` (`2` for `d = 1`).
pub fn unit_sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// Volume of the ball of radius `radius` in `R^d`.
pub fn ball_volume(d: usize, radius: f64) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma_half(d + 2) * radius.powi(d as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(12);
        // degree 23 is the highest exactly integrated degree
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(23));
        let exact = (2.0f64.powi(24) - 1.0) / 24.0;
        assert!((v - exact).abs() / exact < 1e-13);
        let w: f64 = rule.weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn graded_rule_handles_log_singularity() {
        let rule = GaussLegendre::new(16);
        let v = integrate_graded(&rule, 1.0, 30, 0.15, |x| -x.ln());
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn bessel_reference_values() {
        // Abramowitz & Stegun Table 9.1
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_6),
            (1, 1.0, 0.440_050_585_744_933_5),
            (0, 10.0, -0.245_935_764_451_348_3),
            (1, 10.0, 0.043_472_746_168_861_44),
            (0, 2.404_825_557_695_773, 0.0),
        ];
        for (n, x, want) in cases {
            let got = bessel_j(n, x);
            assert!((got - want).abs() < 1e-14, "J{n}({x}) = {got}, want {want}");
        }
        assert!((bessel_j(1, -3.0) + bessel_j(1, 3.0)).abs() < 1e-16);
    }

    #[test]
    fn bessel_large_argument_matches_asymptotics() {
        let x = 400.0f64;
        let phase = x - PI / 4.0;
        let asym = (2.0 / (PI * x)).sqrt() * (phase.cos() + phase.sin() / (8.0 * x));
        assert!((bessel_j(0, x) - asym).abs() < 1e-7);
    }

    #[test]
    fn gamma_and_ball_volumes() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert!((gamma_half(3) - 0.5 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(6), 2.0);
        assert!((ball_volume(1, 2.0) - 4.0).abs() < 1e-15);
        assert!((ball_volume(2, 1.0) - PI).abs() < 1e-15);
        assert!((ball_volume(3, 1.0) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-15);
    }
}
