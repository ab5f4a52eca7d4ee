//! Closed-form coefficients of the asymptotic expansion
//! `tr h(1_Lambda chi(D_L) 1_Lambda) = V L^d |Lambda| + W L^{d-1} log L + o(L^{d-1} log L)`.

use std::f64::consts::PI;
use std::fmt;

use crate::entropy::{entropy_integral, TestFunction};
use crate::error::{Error, Result};
use crate::kernel::CutoffFunction;
use crate::quadrature::{ball_volume, gamma_half, unit_sphere_area, GaussLegendre};
use crate::region::{BoundaryPiece, Region};
use crate::spinor::DiracParams;

/// Which case of the asymptotic law applies to `(E_F, m, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `|E_F| > m`: a Fermi surface exists and `W != 0`.
    Enhanced,
    /// `|E_F| <= m != 0`: the Fermi level lies in the gap, `W = 0`.
    GappedAreaLaw,
    /// `E_F = m = 0`, `d = 1`: the Fermi "surface" is the point `0`.
    MasslessZeroD1,
    /// `E_F = m = 0`, `d >= 2`: `W = 0`.
    MasslessZeroDge2,
}

impl Regime {
    pub fn classify(fermi_energy: f64, mass: f64, dimension: usize) -> Self {
        if fermi_energy == 0.0 && mass == 0.0 {
            if dimension == 1 {
                Self::MasslessZeroD1
            } else {
                Self::MasslessZeroDge2
            }
        } else if fermi_energy.abs() > mass {
            Self::Enhanced
        } else {
            Self::GappedAreaLaw
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Enhanced => "enhanced",
            Self::GappedAreaLaw => "gapped-area-law",
            Self::MasslessZeroD1 => "massless-zero-d1",
            Self::MasslessZeroDge2 => "massless-zero-dge2",
        }
    }

    /// Whether the `L^{d-1} log L` coefficient is non-zero.
    pub fn has_log_term(self) -> bool {
        matches!(self, Self::Enhanced | Self::MasslessZeroD1)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `p_F = sqrt(E_F^2 - m^2)`, and `0` for `E_F = m = 0`.
pub fn fermi_momentum(fermi_energy: f64, mass: f64) -> Result<f64> {
    if fermi_energy == 0.0 && mass == 0.0 {
        return Ok(0.0);
    }
    let e = fermi_energy.abs();
    if e <= mass {
        return Err(Error::UndefinedRegime { fermi_energy, mass });
    }
    Ok(((e - mass) * (e + mass)).sqrt())
}

/// `Phi` by the closed form `2/Gamma((d+1)/2) (p^2/4pi)^{(d-1)/2} |dLambda|`.
pub fn geometric_factor_closed_form(dimension: usize, boundary_measure: f64, momentum: f64) -> f64 {
    let d = dimension as i32;
    2.0 / gamma_half(dimension + 1) * (momentum * momentum / (4.0 * PI)).powf(0.5 * (d - 1) as f64) * boundary_measure
}

/// `Phi(Lambda, E_F, m)`, the surface integral
/// `(2pi)^{1-d} int_{dLambda} int_{dB_pF} |n_x . n_xi| dS(xi) dS(x)`.
pub fn geometric_factor(region: &Region, fermi_energy: f64, mass: f64) -> Result<f64> {
    if region.dimension() == 1 {
        return Ok(2.0 * region.boundary_measure());
    }
    geometric_factor_at(region, fermi_momentum(fermi_energy, mass)?)
}

/// The surface integral for a Fermi sphere of radius `momentum`.
pub fn geometric_factor_at(region: &Region, momentum: f64) -> Result<f64> {
    match region.dimension() {
        1 => Ok(2.0 * region.boundary_measure()),
        2 => Ok(boundary_integral(region, |n| fermi_circle_integral(n, momentum)) / (2.0 * PI)),
        d => Err(Error::UnsupportedDimension {
            d,
            supported: "1, 2 (closed form for d >= 3)",
        }),
    }
}

/// `int_0^{2pi} |n . (cos t, sin t)| p dt`, split at the two kinks.
fn fermi_circle_integral(normal: [f64; 2], momentum: f64) -> f64 {
    let rule = GaussLegendre::new(20);
    let t0 = normal[1].atan2(normal[0]) + 0.5 * PI;
    let f = |t: f64| (normal[0] * t.cos() + normal[1] * t.sin()).abs() * momentum;
    rule.integrate(t0, t0 + PI, f) + rule.integrate(t0 + PI, t0 + 2.0 * PI, f)
}

/// `int_{dLambda} g(n(x)) dS(x)`: Gauss-Legendre per polygon edge,
/// periodic trapezoid on circles.
fn boundary_integral<G: Fn([f64; 2]) -> f64>(region: &Region, g: G) -> f64 {
    let rule = GaussLegendre::new(16);
    region
        .boundary_pieces()
        .iter()
        .map(|piece| match piece {
            BoundaryPiece::Segment { start, end, normal } => {
                let len = (end[0] - start[0]).hypot(end[1] - start[1]);
                rule.integrate(0.0, len, |_| g(*normal))
            }
            BoundaryPiece::Circle { radius, .. } => {
                let m = 256;
                let h = 2.0 * PI / m as f64;
                (0..m)
                    .map(|i| {
                        let t = h * i as f64;
                        g([t.cos(), t.sin()])
                    })
                    .sum::<f64>()
                    * h
                    * radius
            }
        })
        .sum()
}

/// Analytic coefficients at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientReport {
    /// `None` when there is no Fermi surface.
    pub p_f: Option<f64>,
    pub phi: Option<f64>,
    /// Coefficient of `L^{d-1} log L`.
    pub w: f64,
    /// Coefficient of `L^d |Lambda|`, filled by [`coefficient_report`].
    pub volume: Option<f64>,
    pub regime: Regime,
}

/// `W(h, Lambda, E_F, m) = Phi / (2pi)^2 * I(h)` with the case logic of the
/// regimes.
pub fn enhanced_coefficient(
    h: &TestFunction,
    region: &Region,
    fermi_energy: f64,
    mass: f64,
) -> Result<CoefficientReport> {
    let d = region.dimension();
    let regime = Regime::classify(fermi_energy, mass, d);
    let (p_f, phi, w) = match regime {
        Regime::Enhanced | Regime::MasslessZeroD1 => {
            let p = fermi_momentum(fermi_energy, mass)?;
            let phi = geometric_factor(region, fermi_energy, mass)?;
            (Some(p), Some(phi), phi / (4.0 * PI * PI) * entropy_integral(h)?)
        }
        Regime::GappedAreaLaw => (None, None, 0.0),
        Regime::MasslessZeroDge2 => (Some(0.0), Some(0.0), 0.0),
    };
    Ok(CoefficientReport {
        p_f,
        phi,
        w,
        volume: None,
        regime,
    })
}

/// [`enhanced_coefficient`] together with the volume coefficient.
pub fn coefficient_report(h: &TestFunction, region: &Region, params: &DiracParams) -> Result<CoefficientReport> {
    params.validate()?;
    if region.dimension() != params.dimension {
        return Err(Error::Geometry(format!(
            "region of dimension {} for d = {}",
            region.dimension(),
            params.dimension
        )));
    }
    let mut report = enhanced_coefficient(h, region, params.fermi_energy, params.mass)?;
    report.volume = Some(volume_coefficient(h, params)?);
    Ok(report)
}

/// Named volume coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeKind {
    /// `V_-`, for `E_F < -m`.
    Minus,
    /// `V_+`, for `E_F > m`.
    Plus,
    /// `V_0`, for `E_F = m = 0`, `d = 1`.
    Zero,
}

impl VolumeKind {
    fn label(self) -> &'static str {
        match self {
            Self::Minus => "V- (E_F < -m)",
            Self::Plus => "V+ (E_F > m)",
            Self::Zero => "V0 (E_F = m = 0, d = 1)",
        }
    }

    fn applies(self, params: &DiracParams) -> bool {
        match self {
            Self::Minus => params.fermi_energy < -params.mass,
            Self::Plus => params.fermi_energy > params.mass,
            Self::Zero => params.fermi_energy == 0.0 && params.mass == 0.0 && params.dimension == 1,
        }
    }
}

/// Tolerance of the adaptive radial quadrature in [`volume_coefficient`].
pub const VOLUME_TOL: f64 = 1e-13;

/// Volume coefficient `(2pi)^{-d} int [h(chi(E(xi))) + h(chi(-E(xi)))] dxi`,
/// normalised per pair of spinor components.
///
/// For `E_F < -m` this is `V_-`, for `E_F > m` it is
/// `V_+ = V_- + 2 |B_pF| h(1) / (2pi)^d`, for `E_F = m = 0` it is `V_0`; the
/// same integral gives the volume term in the remaining regimes.
pub fn volume_coefficient(h: &TestFunction, params: &DiracParams) -> Result<f64> {
    params.validate()?;
    let d = params.dimension;
    let m = params.mass;
    let ef = params.fermi_energy.abs();
    let b = params.cutoff;
    let radius_at = |e: f64| if e > m { ((e - m) * (e + m)).sqrt() } else { 0.0 };
    let k1 = radius_at(ef + b);
    let k2 = radius_at(ef + b + 1.0);
    let enhanced = ef > m;
    let k0 = if enhanced { radius_at(ef) } else { 0.0 };
    let h1 = h.eval(1.0);
    let dd = d as i32;
    let plateau = h1 * (k1.powi(dd) - k0.powi(dd)) / d as f64;
    let cut = CutoffFunction::new(params.fermi_energy, b);
    let shell = shell_integral(|k| h.eval(cut.phi(-params.energy(k) + b)) * k.powi(dd - 1), k1, k2)?;
    let mut v = unit_sphere_area(d) * (plateau + shell);
    if params.fermi_energy > m {
        v += 2.0 * ball_volume(d, radius_at(ef)) * h1;
    }
    Ok(v / (2.0 * PI).powi(dd))
}

/// [`volume_coefficient`], checking that `kind` matches the regime.
pub fn volume_coefficient_as(kind: VolumeKind, h: &TestFunction, params: &DiracParams) -> Result<f64> {
    if !kind.applies(params) {
        return Err(Error::RegimeMismatch {
            requested: kind.label(),
            actual: Regime::classify(params.fermi_energy, params.mass, params.dimension).label(),
        });
    }
    volume_coefficient(h, params)
}

fn shell_integral<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(24);
    let mut trace = Vec::new();
    let mut prev = rule.integrate_composite(lo, hi, 4, &f);
    trace.push(prev);
    for panels in [8, 16, 32, 64, 128, 256] {
        let next = rule.integrate_composite(lo, hi, panels, &f);
        trace.push(next);
        if (next - prev).abs() <= VOLUME_TOL * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        what: "volume coefficient",
        trace,
    })
}

/// `Phi` for the relativistic Fermi momentum and for the non-relativistic
/// one `p_c = sqrt(2m(|E_F| - m))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonrelativisticComparison {
    pub phi_relativistic: f64,
    pub phi_nonrelativistic: f64,
    /// `phi_relativistic / phi_nonrelativistic`.
    pub ratio: f64,
}

pub fn nonrelativistic_limit(region: &Region, fermi_energy: f64, mass: f64) -> Result<NonrelativisticComparison> {
    if !(mass > 0.0) {
        return Err(Error::InvalidParameter {
            name: "mass",
            reason: format!("the comparison needs m > 0, got {mass}"),
        });
    }
    let p_f = fermi_momentum(fermi_energy, mass)?;
    let p_c = (2.0 * mass * (fermi_energy.abs() - mass)).sqrt();
    let rel = geometric_factor_at(region, p_f)?;
    let nonrel = geometric_factor_at(region, p_c)?;
    Ok(NonrelativisticComparison {
        phi_relativistic: rel,
        phi_nonrelativistic: nonrel,
        ratio: rel / nonrel,
    })
}
