//! Position-space kernel `K_{a,L}(r) = (L/2pi)^d int e^{i L xi.r} a(D(xi)) dxi`.
//!
//! With the radial profiles of the symbol the kernel is
//! `K(r) = A(rho) 1 + i B(rho) (r/|r| . alpha) + C(rho) beta`, `rho = |r|`:
//!
//! * `d = 1`: `A = (L/pi) int_0^K cos(L k rho) S dk`, `B = (L/pi) int sin(L k rho) V dk`,
//!   `C = (L/pi) int cos(L k rho) M dk`;
//! * `d = 2`: `A = (L^2/2pi) int J0(L k rho) S k dk`, `B = (L^2/2pi) int J1(L k rho) V k dk`,
//!   `C = (L^2/2pi) int J0(L k rho) M k dk`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{bessel_j, GaussLegendre};
use crate::spinor::{dirac_matrices, SpinorMatrix};

use super::symbol::RadialSymbol;

/// Quadrature settings for the momentum integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuadrature {
    /// Gauss-Legendre order per sub-panel.
    pub order: usize,
    /// Minimum number of sub-panels on a non-constant panel.
    pub min_panels: usize,
    /// Quadrature points per oscillation of the Fourier factor.
    pub points_per_oscillation: f64,
    /// Use closed forms on panels where the profiles are constant (`d = 1`).
    pub closed_form_flat: bool,
}

impl Default for KernelQuadrature {
    fn default() -> Self {
        Self {
            order: 24,
            min_panels: 6,
            points_per_oscillation: 24.0,
            closed_form_flat: true,
        }
    }
}

impl KernelQuadrature {
    /// Twice the resolution, used as the convergence reference.
    pub fn refined(&self) -> Self {
        Self {
            min_panels: 2 * self.min_panels,
            points_per_oscillation: 2.0 * self.points_per_oscillation,
            ..*self
        }
    }

    fn sub_panels(&self, omega: f64, width: f64, flat: bool) -> usize {
        let oscillations = omega * width / (2.0 * PI);
        let needed = (self.points_per_oscillation * oscillations / self.order as f64).ceil() as usize;
        needed.max(if flat { 1 } else { self.min_panels })
    }
}

/// Scalar, vector and mass parts of `K(r)` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadialKernel {
    pub scalar: f64,
    pub vector: f64,
    pub mass: f64,
}

impl RadialKernel {
    fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.scalar - other.scalar)
            .abs()
            .max((self.vector - other.vector).abs())
            .max((self.mass - other.mass).abs())
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension { d, supported: "1, 2" })
    }
}

/// `A, B, C` at radius `rho` for the scaled kernel.
pub fn radial_kernel<S: RadialSymbol + ?Sized>(
    symbol: &S,
    scale: f64,
    rho: f64,
    quad: &KernelQuadrature,
) -> Result<RadialKernel> {
    let d = symbol.dimension();
    check_dimension(d)?;
    let rule = GaussLegendre::new(quad.order);
    Ok(radial_kernel_with(symbol, scale, rho, quad, &rule))
}

fn radial_kernel_with<S: RadialSymbol + ?Sized>(
    symbol: &S,
    scale: f64,
    rho: f64,
    quad: &KernelQuadrature,
    rule: &GaussLegendre,
) -> RadialKernel {
    let d = symbol.dimension();
    let omega = scale * rho.abs();
    let bp = symbol.breakpoints();
    let mut acc = RadialKernel::default();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in bp.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let flat = symbol.is_flat(lo, hi);
        if d == 1 && flat && quad.closed_form_flat {
            let c = symbol.components(0.5 * (lo + hi));
            let (cos_int, sin_int) = trig_integrals(omega, lo, hi);
            acc.scalar += c.scalar * cos_int;
            acc.vector += c.vector * sin_int;
            acc.mass += c.mass * cos_int;
            continue;
        }
        nodes.clear();
        weights.clear();
        rule.push_composite(lo, hi, quad.sub_panels(omega, hi - lo, flat), &mut nodes, &mut weights);
        for (&k, &wt) in nodes.iter().zip(&weights) {
            let c = symbol.components(k);
            if d == 1 {
                let (s, co) = (omega * k).sin_cos();
                acc.scalar += wt * co * c.scalar;
                acc.vector += wt * s * c.vector;
                acc.mass += wt * co * c.mass;
            } else {
                let j0 = if c.scalar != 0.0 || c.mass != 0.0 {
                    bessel_j(0, omega * k)
                } else {
                    0.0
                };
                let j1 = if c.vector != 0.0 { bessel_j(1, omega * k) } else { 0.0 };
                acc.scalar += wt * j0 * c.scalar * k;
                acc.vector += wt * j1 * c.vector * k;
                acc.mass += wt * j0 * c.mass * k;
            }
        }
    }
    let prefactor = if d == 1 { scale / PI } else { scale * scale / (2.0 * PI) };
    RadialKernel {
        scalar: prefactor * acc.scalar,
        vector: prefactor * acc.vector,
        mass: prefactor * acc.mass,
    }
}

/// `(int_lo^hi cos(w k) dk, int_lo^hi sin(w k) dk)`, stable as `w -> 0`.
fn trig_integrals(omega: f64, lo: f64, hi: f64) -> (f64, f64) {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let x = omega * half;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    let (s, c) = (omega * mid).sin_cos();
    (2.0 * half * c * sinc, 2.0 * half * s * sinc)
}

/// Absolute tolerance for the quadrature convergence probe, relative to the
/// natural kernel size `L^d`.
pub const KERNEL_PROBE_TOL: f64 = 1e-10;

/// `A, B, C` at `rho`, checked against a run at doubled resolution.
pub fn radial_kernel_checked<S: RadialSymbol + ?Sized>(
    symbol: &S,
    scale: f64,
    rho: f64,
    quad: &KernelQuadrature,
) -> Result<RadialKernel> {
    let coarse = radial_kernel(symbol, scale, rho, quad)?;
    let fine = radial_kernel(symbol, scale, rho, &quad.refined())?;
    let diff = coarse.max_abs_diff(&fine);
    let size = scale.powi(symbol.dimension() as i32);
    if diff > KERNEL_PROBE_TOL * size {
        return Err(Error::NonConvergence {
            what: "kernel quadrature",
            trace: vec![coarse.scalar, fine.scalar, coarse.vector, fine.vector, diff],
        });
    }
    Ok(fine)
}

/// The `n_d x n_d` block `K_{a,L}(r)`.
pub fn kernel_block<S: RadialSymbol + ?Sized>(
    symbol: &S,
    scale: f64,
    r: &[f64],
    quad: &KernelQuadrature,
) -> Result<SpinorMatrix> {
    let d = symbol.dimension();
    if r.len() != d {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("expected {d} components, got {}", r.len()),
        });
    }
    let rho = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let k = radial_kernel(symbol, scale, rho, quad)?;
    let direction: Vec<f64> = if rho > 0.0 {
        r.iter().map(|x| x / rho).collect()
    } else {
        vec![0.0; d]
    };
    Ok(BlockBasis::new(d)?.block(&k, &direction))
}

/// Flattened Dirac matrices for fast block assembly.
#[derive(Debug, Clone)]
pub(crate) struct BlockBasis {
    pub n: usize,
    alphas: Vec<Vec<num_complex::Complex64>>,
    beta: Vec<num_complex::Complex64>,
}

impl BlockBasis {
    pub fn new(d: usize) -> Result<Self> {
        let m = dirac_matrices(d)?;
        let n = m.spinor_dimension();
        let flat =
            |s: &SpinorMatrix| -> Vec<num_complex::Complex64> { (0..n * n).map(|i| s.entry(i / n, i % n)).collect() };
        Ok(Self {
            n,
            alphas: m.alphas.iter().map(flat).collect(),
            beta: flat(&m.beta),
        })
    }

    /// Entry `(a, b)` of `A 1 + i B (u . alpha) + C beta`.
    #[inline]
    pub fn entry(&self, k: &RadialKernel, direction: &[f64], a: usize, b: usize) -> num_complex::Complex64 {
        let idx = a * self.n + b;
        let mut dir = num_complex::Complex64::new(0.0, 0.0);
        for (alpha, u) in self.alphas.iter().zip(direction) {
            dir += alpha[idx] * *u;
        }
        let diag = if a == b { k.scalar } else { 0.0 };
        num_complex::Complex64::new(diag, 0.0) + num_complex::Complex64::i() * dir * k.vector + self.beta[idx] * k.mass
    }

    pub fn block(&self, k: &RadialKernel, direction: &[f64]) -> SpinorMatrix {
        let mut out = SpinorMatrix::zeros(self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                out.0[(a, b)] = self.entry(k, direction, a, b);
            }
        }
        out
    }
}

/// Kernel values on all lattice displacements `delta * n` that occur
/// between cells of a grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    dimension: usize,
    spacing: f64,
    values: Vec<RadialKernel>,
}

impl KernelTable {
    /// Key of an integer displacement: `|n|` for `d = 1`, `|n|^2` for `d = 2`.
    pub fn key(dimension: usize, n: [i64; 2]) -> usize {
        if dimension == 1 {
            n[0].unsigned_abs() as usize
        } else {
            (n[0] * n[0] + n[1] * n[1]) as usize
        }
    }

    /// Builds the table for displacements with `|n_k| <= extent[k]`.
    /// The largest radius and a spread of others are probed at doubled
    /// quadrature resolution.
    pub fn build<S: RadialSymbol + ?Sized>(
        symbol: &S,
        scale: f64,
        spacing: f64,
        extent: [i64; 2],
        quad: &KernelQuadrature,
    ) -> Result<Self> {
        let d = symbol.dimension();
        check_dimension(d)?;
        let max_key = Self::key(d, extent);
        let mut needed = vec![false; max_key + 1];
        if d == 1 {
            needed.iter_mut().for_each(|x| *x = true);
        } else {
            for a in 0..=extent[0] {
                for b in 0..=extent[1] {
                    needed[Self::key(2, [a, b])] = true;
                }
            }
        }
        let keys: Vec<usize> = (0..=max_key).filter(|&k| needed[k]).collect();
        let radius = |key: usize| -> f64 {
            if d == 1 {
                spacing * key as f64
            } else {
                spacing * (key as f64).sqrt()
            }
        };
        let rule = GaussLegendre::new(quad.order);
        let computed: Vec<(usize, RadialKernel)> = keys
            .par_iter()
            .map(|&key| (key, radial_kernel_with(symbol, scale, radius(key), quad, &rule)))
            .collect();
        let mut values = vec![RadialKernel::default(); max_key + 1];
        for (key, v) in computed {
            values[key] = v;
        }
        let probes = [0, keys.len() / 3, 2 * keys.len() / 3, keys.len() - 1];
        for &p in &probes {
            let key = keys[p];
            let fine = radial_kernel_checked(symbol, scale, radius(key), quad)?;
            let diff = fine.max_abs_diff(&values[key]);
            if diff > KERNEL_PROBE_TOL * scale.powi(d as i32) {
                return Err(Error::NonConvergence {
                    what: "kernel table quadrature",
                    trace: vec![values[key].scalar, fine.scalar, diff],
                });
            }
        }
        log::debug!("kernel table: {} radii, spacing {spacing}, scale {scale}", keys.len());
        Ok(Self {
            dimension: d,
            spacing,
            values,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Kernel at integer displacement `n` (second component ignored in `d = 1`).
    pub fn get(&self, n: [i64; 2]) -> &RadialKernel {
        &self.values[Self::key(self.dimension, n)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::symbol::{FermiSymbol, SymbolComponents};
    use crate::spinor::DiracParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `a = 1_{[-p, p]}` acting on the identity only.
    struct Indicator {
        p: f64,
    }

    impl RadialSymbol for Indicator {
        fn dimension(&self) -> usize {
            1
        }
        fn components(&self, k: f64) -> SymbolComponents {
            SymbolComponents {
                scalar: if k < self.p { 1.0 } else { 0.0 },
                ..Default::default()
            }
        }
        fn breakpoints(&self) -> Vec<f64> {
            vec![0.0, self.p]
        }
        fn support_radius(&self) -> f64 {
            self.p
        }
        fn is_flat(&self, _: f64, _: f64) -> bool {
            true
        }
    }

    #[test]
    fn indicator_kernel_is_sinc() {
        let sym = Indicator { p: 1.3 };
        let numeric = KernelQuadrature {
            closed_form_flat: false,
            ..Default::default()
        };
        for i in 0..=200 {
            let r = 0.01 * (1000.0f64).powf(i as f64 / 200.0);
            let exact = (1.3 * r).sin() / (PI * r);
            for q in [KernelQuadrature::default(), numeric] {
                let k = radial_kernel(&sym, 1.0, r, &q).unwrap();
                assert!((k.scalar - exact).abs() < 1e-6, "r = {r}");
                assert_eq!(k.vector, 0.0);
            }
        }
    }

    #[test]
    fn closed_form_matches_quadrature_for_massless_fermi_symbol() {
        let sym = FermiSymbol::new(DiracParams::new(1, 0.0, 1.0, 1.0).unwrap());
        let numeric = KernelQuadrature {
            closed_form_flat: false,
            ..Default::default()
        };
        for r in [0.0, 0.1, 0.77, 3.0, 12.5] {
            let a = radial_kernel(&sym, 7.0, r, &KernelQuadrature::default()).unwrap();
            let b = radial_kernel(&sym, 7.0, r, &numeric).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-11, "r = {r}");
        }
    }

    #[test]
    fn kernel_is_hermitian_under_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = KernelQuadrature::default();
        for (d, p) in [
            (1, DiracParams::new(1, 0.4, 1.1, 1.0).unwrap()),
            (2, DiracParams::new(2, 0.5, 0.2, 1.0).unwrap()),
        ] {
            let sym = FermiSymbol::new(p);
            for _ in 0..100 {
                let r: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
                let minus: Vec<f64> = r.iter().map(|x| -x).collect();
                let kp = kernel_block(&sym, 3.0, &r, &q).unwrap();
                let km = kernel_block(&sym, 3.0, &minus, &q).unwrap();
                assert!(km.max_abs_diff(&kp.adjoint()) < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_trace_matches_momentum_integral() {
        // tr K(0) = (L/2pi)^d int tr chi(D) dxi = n_d (L/2pi)^d int S(|xi|) dxi
        let p = DiracParams::new(1, 0.0, 1.0, 1.0).unwrap();
        let sym = FermiSymbol::new(p);
        let k0 = kernel_block(&sym, 2.0, &[0.0], &KernelQuadrature::default()).unwrap();
        let rule = GaussLegendre::new(40);
        let int_s = rule.integrate_composite(0.0, 3.0, 30, |k| sym.components(k).scalar);
        let expected = 2.0 * (2.0 / (2.0 * PI)) * 2.0 * int_s;
        assert!((k0.trace().re - expected).abs() < 1e-10);
        assert!(k0.trace().im.abs() < 1e-15);
    }

    #[test]
    fn rejects_unsupported_dimension() {
        let sym = FermiSymbol::new(DiracParams::new(3, 0.0, 1.0, 1.0).unwrap());
        assert!(matches!(
            radial_kernel(&sym, 1.0, 0.5, &KernelQuadrature::default()),
            Err(Error::UnsupportedDimension { d: 3, .. })
        ));
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let sym = FermiSymbol::new(DiracParams::new(2, 0.0, 0.0, 1.0).unwrap());
        let q = KernelQuadrature::default();
        let t = KernelTable::build(&sym, 4.0, 0.2, [5, 5], &q).unwrap();
        let direct = radial_kernel(&sym, 4.0, 0.2 * 13f64.sqrt(), &q).unwrap();
        assert_eq!(*t.get([2, -3]), direct);
        assert_eq!(*t.get([-3, 2]), direct);
    }
}
