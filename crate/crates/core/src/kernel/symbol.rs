//! Radial form of matrix-valued symbols `a(D(xi))`.
//!
//! Every function of the Dirac symbol decomposes as
//! `a(D(xi)) = S(k) 1 + V(k) (xi/k . alpha) + M(k) beta`, `k = |xi|`, with
//! `S = (a_+ + a_-)/2`, `V = (a_+ - a_-)/2 * k/E`, `M = (a_+ - a_-)/2 * m/E`.
//! Kernels only need these three radial profiles.

use crate::spinor::DiracParams;

use super::cutoff::CutoffFunction;

/// Radial profiles of a symbol at one momentum modulus.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymbolComponents {
    /// Coefficient of the identity.
    pub scalar: f64,
    /// Coefficient of `xi/|xi| . alpha`.
    pub vector: f64,
    /// Coefficient of `beta`.
    pub mass: f64,
}

/// A matrix-valued symbol depending on `xi` only through the radial
/// profiles above, with compact support.
pub trait RadialSymbol: Sync {
    fn dimension(&self) -> usize;

    fn components(&self, momentum: f64) -> SymbolComponents;

    /// Sorted points in `[0, support_radius]`, both ends included, between
    /// which the profiles are smooth.
    fn breakpoints(&self) -> Vec<f64>;

    fn support_radius(&self) -> f64;

    /// Whether all three profiles are constant on `(lo, hi)`, which must be a
    /// panel between consecutive breakpoints.
    fn is_flat(&self, lo: f64, hi: f64) -> bool;
}

/// The smoothed Fermi projection `chi(D)` or its square `chi(D)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiSymbol {
    params: DiracParams,
    cutoff: CutoffFunction,
    power: i32,
}

impl FermiSymbol {
    pub fn new(params: DiracParams) -> Self {
        Self {
            params,
            cutoff: CutoffFunction::new(params.fermi_energy, params.cutoff),
            power: 1,
        }
    }

    /// The symbol of `chi(D)^2`, i.e. of the function `chi^2`.
    pub fn squared(params: DiracParams) -> Self {
        Self {
            power: 2,
            ..Self::new(params)
        }
    }

    pub fn params(&self) -> &DiracParams {
        &self.params
    }

    fn scalar_function(&self, x: f64) -> f64 {
        self.cutoff.chi(x).powi(self.power)
    }

    /// `(a_+, a_-)(k) = (a(E(k)), a(-E(k)))`.
    pub fn plus_minus(&self, momentum: f64) -> (f64, f64) {
        let e = self.params.energy(momentum);
        (self.scalar_function(e), self.scalar_function(-e))
    }

    /// Momentum at which `E(k) = energy`, if any.
    fn momentum_at(&self, energy: f64) -> Option<f64> {
        let m = self.params.mass;
        (energy > m).then(|| ((energy - m) * (energy + m)).sqrt())
    }
}

impl RadialSymbol for FermiSymbol {
    fn dimension(&self) -> usize {
        self.params.dimension
    }

    fn components(&self, momentum: f64) -> SymbolComponents {
        let e = self.params.energy(momentum);
        let (plus, minus) = self.plus_minus(momentum);
        let odd = 0.5 * (plus - minus);
        let (vector, mass) = if e > 0.0 {
            (odd * momentum / e, odd * self.params.mass / e)
        } else {
            (0.0, 0.0)
        };
        SymbolComponents {
            scalar: 0.5 * (plus + minus),
            vector,
            mass,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let ef = self.params.fermi_energy.abs();
        let b = self.params.cutoff;
        let mut pts = vec![0.0];
        // jump of chi(E) or chi(-E) at the Fermi surface
        if ef > self.params.mass {
            pts.extend(self.momentum_at(ef));
        }
        pts.extend(self.momentum_at(ef + b));
        pts.extend(self.momentum_at(ef + b + 1.0));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1.0));
        pts
    }

    fn support_radius(&self) -> f64 {
        let ef = self.params.fermi_energy.abs();
        self.momentum_at(ef + self.params.cutoff + 1.0).unwrap_or(0.0)
    }

    fn is_flat(&self, lo: f64, hi: f64) -> bool {
        if self.params.mass != 0.0 {
            return false;
        }
        // massless: k/E = 1, m/E = 0, and chi(+-k) is piecewise constant
        // outside the transition shell of phi
        let ef = self.params.fermi_energy.abs();
        let shell_lo = ef + self.params.cutoff;
        let shell_hi = shell_lo + 1.0;
        hi <= shell_lo || lo >= shell_hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinor::{apply_function, dirac_matrices, normalized_symbol, MomentumPoint, SpinorMatrix};

    fn reconstruct(sym: &FermiSymbol, xi: &MomentumPoint) -> SpinorMatrix {
        let p = sym.params();
        let m = dirac_matrices(p.dimension).unwrap();
        let k = xi.norm();
        let c = sym.components(k);
        let mut out = SpinorMatrix::identity(m.spinor_dimension()).scale(c.scalar);
        out = out.add(&m.beta.scale(c.mass));
        if k > 0.0 {
            for (a, x) in m.alphas.iter().zip(&xi.0) {
                out = out.add(&a.scale(c.vector * x / k));
            }
        }
        out
    }

    #[test]
    fn decomposition_matches_functional_calculus() {
        let cases = [
            DiracParams::new(1, 0.0, 1.0, 1.0).unwrap(),
            DiracParams::new(1, 0.7, -1.3, 0.4).unwrap(),
            DiracParams::new(2, 1.0, 0.3, 1.0).unwrap(),
            DiracParams::new(2, 0.0, 0.0, 2.0).unwrap(),
            DiracParams::new(3, 0.5, 2.0, 0.0).unwrap(),
        ];
        for p in cases {
            let sym = FermiSymbol::new(p);
            let mats = dirac_matrices(p.dimension).unwrap();
            let cut = CutoffFunction::new(p.fermi_energy, p.cutoff);
            for i in 0..200 {
                let t = i as f64 * 0.037;
                let xi: Vec<f64> = (0..p.dimension).map(|j| t * (1.0 + j as f64).sin()).collect();
                let xi = MomentumPoint::new(xi);
                let direct = apply_function(|x| cut.chi(x), &mats, &p, &xi).unwrap();
                assert!(reconstruct(&sym, &xi).max_abs_diff(&direct) < 1e-12);
            }
        }
    }

    #[test]
    fn plus_part_is_fermi_ball_indicator() {
        // E_F > m: chi_+ = 1 on the ball of radius p_F, 0 outside
        let p = DiracParams::new(2, 0.6, 1.0, 0.5).unwrap();
        let sym = FermiSymbol::new(p);
        let pf = 0.8;
        for i in 0..100 {
            let k = i as f64 * 0.03;
            let (plus, _) = sym.plus_minus(k);
            assert_eq!(
                plus,
                if k < pf - 1e-12 {
                    1.0
                } else if k > pf + 1e-12 {
                    0.0
                } else {
                    plus
                }
            );
        }
        // E_F < -m: chi_+ vanishes identically
        let sym = FermiSymbol::new(DiracParams::new(2, 0.6, -1.0, 0.5).unwrap());
        assert!((0..100).all(|i| sym.plus_minus(i as f64 * 0.03).0 == 0.0));
    }

    #[test]
    fn breakpoints_and_support() {
        let sym = FermiSymbol::new(DiracParams::new(1, 0.0, 1.0, 1.0).unwrap());
        assert_eq!(sym.breakpoints(), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(sym.support_radius(), 3.0);
        assert!(sym.is_flat(0.0, 1.0) && sym.is_flat(1.0, 2.0) && !sym.is_flat(2.0, 3.0));
        let gapped = FermiSymbol::new(DiracParams::new(1, 1.0, 0.3, 1.0).unwrap());
        let bp = gapped.breakpoints();
        assert_eq!(bp.len(), 3);
        assert!((bp[2] - (2.3f64 * 2.3 - 1.0).sqrt()).abs() < 1e-15);
        // outside the support every profile vanishes
        let c = gapped.components(gapped.support_radius() + 1e-9);
        assert_eq!(c, SymbolComponents::default());
        let _ = normalized_symbol;
    }
}
