//! Schatten quasi-norms `||1_Omega chi(D_L) 1_{Omega^c}||_q^q`.
//!
//! With `X = 1_Omega chi 1_{Omega^c}` one has
//! `X X^* = 1_Omega chi^2 1_Omega - (1_Omega chi 1_Omega)^2`, and `chi^2` is
//! again a function of `D`. The squared singular values of `X` are therefore
//! eigenvalues of a matrix living on `Omega` alone, with no truncation of the
//! unbounded complement. An explicitly truncated complement is available for
//! comparison.

use faer::Mat;

use crate::error::{Error, Result};
use crate::region::Region;
use crate::spinor::DiracParams;

use super::block::KernelQuadrature;
use super::operator::{
    assemble_between, assemble_on_grid, hermitian_eigenvalues, Grid, OperatorMatrix, OperatorOptions,
};
use super::symbol::FermiSymbol;

/// Squared singular values below this fraction of the largest one are
/// treated as round-off.
pub const SINGULAR_FLOOR: f64 = 1e-13;

/// Boundary-shell share of the norm above which a truncation is reported
/// as insufficient.
pub const SHELL_WARNING_FRACTION: f64 = 0.01;

/// How the complement `Omega^c` is represented.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Truncation {
    /// Exact complement through the `chi^2` identity.
    #[default]
    Exact,
    /// Complement cut to the cells within this distance of `Omega`.
    Radius(f64),
}

impl Truncation {
    /// Radius at which the sharp-part envelope `1/(pi r)` has dropped to
    /// `1e-4` of its value at one cell, doubled.
    pub fn envelope_rule(spacing: f64) -> Self {
        Self::Radius(2.0 * 1e4 * spacing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchattenReport {
    /// `sum_j s_j^q` for the requested truncation.
    pub value: f64,
    /// Value with the exact complement.
    pub exact: f64,
    /// Relative share `(exact - value) / exact` missing from a truncated
    /// complement; `None` for [`Truncation::Exact`].
    pub shell_fraction: Option<f64>,
    /// Set when `shell_fraction` exceeds [`SHELL_WARNING_FRACTION`].
    pub truncation_warning: bool,
}

/// `||1_Omega chi(D_L) 1_{Omega^c}||_q^q` for `0 < q <= 2`.
pub fn offdiag_schatten(
    region: &Region,
    scale: f64,
    params: &DiracParams,
    q: f64,
    nodes_per_unit_length: f64,
    truncation: Truncation,
) -> Result<SchattenReport> {
    if !(q > 0.0 && q <= 2.0) {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: format!("must lie in (0, 2], got {q}"),
        });
    }
    params.validate()?;
    let options = OperatorOptions {
        quadrature: KernelQuadrature::default(),
        real_gauge: true,
    };
    let grid = Grid::new(region, nodes_per_unit_length)?;
    let t1 = assemble_on_grid(&grid, scale, &FermiSymbol::new(*params), &options)?;
    let t2 = assemble_on_grid(&grid, scale, &FermiSymbol::squared(*params), &options)?;
    let gram = match (t1.matrix(), t2.matrix()) {
        (OperatorMatrix::Real(a), OperatorMatrix::Real(b)) => OperatorMatrix::Real(b - a * a),
        (OperatorMatrix::Complex(a), OperatorMatrix::Complex(b)) => OperatorMatrix::Complex(b - a * a),
        _ => unreachable!("both operators share the gauge"),
    };
    let squares = if grid.is_empty() {
        Vec::new()
    } else {
        hermitian_eigenvalues(&gram)?
    };
    let exact = power_sum(&squares, q);

    match truncation {
        Truncation::Exact => Ok(SchattenReport {
            value: exact,
            exact,
            shell_fraction: None,
            truncation_warning: false,
        }),
        Truncation::Radius(radius) => {
            if !(radius > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "truncation_radius",
                    reason: format!("must be positive, got {radius}"),
                });
            }
            let shell = Grid::exterior_shell(region, nodes_per_unit_length, radius)?;
            let x = assemble_between(&grid, &shell, scale, &FermiSymbol::new(*params), &options)?;
            let singular = match x.matrix() {
                OperatorMatrix::Real(m) => singular_values(m)?,
                OperatorMatrix::Complex(m) => singular_values(m)?,
            };
            let squares: Vec<f64> = singular.iter().map(|s| s * s).collect();
            let value = power_sum(&squares, q);
            let fraction = if exact > 0.0 { (exact - value) / exact } else { 0.0 };
            let warn = fraction > SHELL_WARNING_FRACTION;
            if warn {
                log::warn!(
                    "truncation radius {radius} misses {:.2}% of the Schatten norm",
                    100.0 * fraction
                );
            }
            Ok(SchattenReport {
                value,
                exact,
                shell_fraction: Some(fraction),
                truncation_warning: warn,
            })
        }
    }
}

fn singular_values<T: faer::traits::ComplexField<Real = f64>>(m: &Mat<T>) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    m.singular_values().map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// `sum_j s_j^q` from squared singular values, dropping the round-off floor.
fn power_sum(squares: &[f64], q: f64) -> f64 {
    let top = squares.iter().copied().fold(0.0, f64::max);
    let floor = SINGULAR_FLOOR * top;
    squares
        .iter()
        .filter(|&&s2| s2 > floor)
        .map(|s2| s2.powf(0.5 * q))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_matches_explicit_complement() {
        // a generous explicit complement reproduces the exact value
        let region = Region::interval(0.0, 1.0).unwrap();
        let p = DiracParams::new(1, 0.0, 1.0, 1.0).unwrap();
        // the tail beyond R of sum s^2 is about 1/(pi^2 R)
        let r = offdiag_schatten(&region, 6.0, &p, 2.0, 12.0, Truncation::Radius(60.0)).unwrap();
        let f = r.shell_fraction.unwrap();
        let tail = 1.0 / (std::f64::consts::PI.powi(2) * 60.0) / r.exact;
        assert!(f > 0.0 && f < 2.0 * tail, "shell fraction {f}, tail estimate {tail}");
        assert!(!r.truncation_warning);
    }

    #[test]
    fn tight_truncation_warns() {
        let region = Region::interval(0.0, 1.0).unwrap();
        let p = DiracParams::new(1, 0.0, 1.0, 1.0).unwrap();
        let r = offdiag_schatten(&region, 6.0, &p, 0.5, 12.0, Truncation::Radius(0.1)).unwrap();
        assert!(r.truncation_warning);
        assert!(r.value < r.exact);
    }

    #[test]
    fn hilbert_schmidt_norm_is_trace_of_gram() {
        // q = 2: sum s^2 = tr(T2 - T1^2) including the sub-floor tail
        let region = Region::interval(0.0, 1.0).unwrap();
        let p = DiracParams::new(1, 0.3, 1.0, 1.0).unwrap();
        let r = offdiag_schatten(&region, 5.0, &p, 2.0, 10.0, Truncation::Exact).unwrap();
        let grid = Grid::new(&region, 10.0).unwrap();
        let o = OperatorOptions::default();
        let t1 = assemble_on_grid(&grid, 5.0, &FermiSymbol::new(p), &o)
            .unwrap()
            .to_nalgebra();
        let t2 = assemble_on_grid(&grid, 5.0, &FermiSymbol::squared(p), &o)
            .unwrap()
            .to_nalgebra();
        let tr = (t2 - &t1 * &t1).trace().re;
        assert!((r.exact - tr).abs() < 1e-10 * tr.max(1.0));
    }

    #[test]
    fn rejects_bad_exponent() {
        let region = Region::interval(0.0, 1.0).unwrap();
        let p = DiracParams::new(1, 0.0, 1.0, 1.0).unwrap();
        assert!(offdiag_schatten(&region, 1.0, &p, 0.0, 4.0, Truncation::Exact).is_err());
        assert!(offdiag_schatten(&region, 1.0, &p, 3.0, 4.0, Truncation::Exact).is_err());
    }
}
