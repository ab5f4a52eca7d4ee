//! Quick invariant suite run by `dirac-ent selftest`.

use std::f64::consts::PI;

use dirac_entanglement::coefficients::{enhanced_coefficient, geometric_factor, geometric_factor_closed_form};
use dirac_entanglement::entropy::{entropy_integral, renyi_entropy_integral, TestFunction};
use dirac_entanglement::kernel::{
    assemble_restricted, radial_kernel, spectrum, KernelQuadrature, RadialSymbol, SymbolComponents,
};
use dirac_entanglement::region::Region;
use dirac_entanglement::spinor::{apply_function, dirac_matrices, DiracParams, MomentumPoint, SpinorMatrix};
use dirac_entanglement::Result;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Suite = fn() -> Result<(bool, String)>;

/// Runs every check; errors count as failures.
pub fn run() -> Vec<Check> {
    let suite: [(&'static str, Suite); 7] = [
        ("clifford relations", clifford),
        ("functional calculus", functional_calculus),
        ("entropy integral closed forms", entropy_closed_forms),
        ("kernel vs sinc", kernel_sinc),
        ("Phi quadrature vs closed form", phi_closed_form),
        ("coefficient examples", coefficient_examples),
        ("restricted spectrum in [0, 1]", restricted_spectrum),
    ];
    suite
        .iter()
        .map(|&(name, f)| {
            let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
            Check { name, passed, detail }
        })
        .collect()
}

fn clifford() -> Result<(bool, String)> {
    let mut ok = true;
    for d in 1..=8 {
        let m = dirac_matrices(d)?;
        let n = m.spinor_dimension();
        let mut all = m.alphas.clone();
        all.push(m.beta.clone());
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let expected = if i == j {
                    SpinorMatrix::identity(n).scale(2.0)
                } else {
                    SpinorMatrix::zeros(n)
                };
                ok &= a.anticommutator(b).max_abs_diff(&expected) == 0.0;
            }
        }
    }
    Ok((ok, "d = 1..8, exact".into()))
}

fn functional_calculus() -> Result<(bool, String)> {
    let f = |x: f64| (x - 0.2).tanh() + 0.3 * x * x;
    let mut err = 0.0f64;
    for d in 1..=4 {
        let p = DiracParams::new(d, 0.7, 1.3, 1.0)?;
        let mats = dirac_matrices(d)?;
        let n = mats.spinor_dimension();
        for s in 0..20 {
            let xi = MomentumPoint::new((0..d).map(|j| ((s * 7 + j * 3) as f64 * 0.37).sin() * 2.0).collect());
            let e = xi.energy(p.mass);
            let (lo, hi) = (f(e).min(f(-e)), f(e).max(f(-e)));
            let a = apply_function(f, &mats, &p, &xi)?;
            for (i, l) in a.hermitian_eigenvalues().iter().enumerate() {
                err = err.max((l - if i < n / 2 { lo } else { hi }).abs());
            }
        }
    }
    Ok((err <= 1e-12, format!("max eigenvalue deviation {err:.1e}")))
}

fn entropy_closed_forms() -> Result<(bool, String)> {
    let vn = entropy_integral(&TestFunction::von_neumann())?;
    let mut err = (vn - PI * PI / 3.0).abs();
    for alpha in [0.5, 2.0, 3.0] {
        err = err.max((entropy_integral(&TestFunction::renyi(alpha)?)? - renyi_entropy_integral(alpha)).abs());
    }
    Ok((
        err <= 1e-10,
        format!("I(h_1) = {vn:.12} vs pi^2/3, max error {err:.1e}"),
    ))
}

struct Indicator(f64);

impl RadialSymbol for Indicator {
    fn dimension(&self) -> usize {
        1
    }
    fn components(&self, k: f64) -> SymbolComponents {
        SymbolComponents {
            scalar: if k < self.0 { 1.0 } else { 0.0 },
            ..Default::default()
        }
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, self.0]
    }
    fn support_radius(&self) -> f64 {
        self.0
    }
    fn is_flat(&self, _: f64, _: f64) -> bool {
        true
    }
}

fn kernel_sinc() -> Result<(bool, String)> {
    let numeric = KernelQuadrature {
        closed_form_flat: false,
        ..Default::default()
    };
    let mut err = 0.0f64;
    for i in 0..=100 {
        let r = 0.01 * 1000f64.powf(i as f64 / 100.0);
        let k = radial_kernel(&Indicator(1.7), 1.0, r, &numeric)?;
        err = err.max((k.scalar - (1.7 * r).sin() / (PI * r)).abs());
    }
    Ok((err <= 1e-6, format!("max deviation {err:.1e}")))
}

fn phi_closed_form() -> Result<(bool, String)> {
    let disc = Region::disc([0.3, -0.2], 1.5)?;
    let phi = geometric_factor(&disc, 2.0, 1.0)?;
    let pf = 3f64.sqrt();
    let disc_err = (phi - 4.0 * 1.5 * pf).abs();
    let square = Region::polygon(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]])?;
    let sq_err = (geometric_factor(&square, 1.0, 0.0)? - geometric_factor_closed_form(2, 8.0, 1.0)).abs();
    Ok((
        disc_err <= 1e-10 && sq_err <= 1e-12,
        format!("disc vs 4 R p_F {disc_err:.1e}, square {sq_err:.1e}"),
    ))
}

fn coefficient_examples() -> Result<(bool, String)> {
    let h = TestFunction::von_neumann();
    let w1 = enhanced_coefficient(&h, &Region::interval(0.0, 1.0)?, 1.0, 0.0)?.w;
    let w2 = enhanced_coefficient(&h, &Region::disc([0.0, 0.0], 1.0)?, 1.0, 0.0)?.w;
    let gapped = enhanced_coefficient(&h, &Region::interval(0.0, 1.0)?, 0.5, 1.0)?.w;
    let err = (w1 - 1.0 / 3.0).abs().max((w2 - 1.0 / 3.0).abs()).max(gapped.abs());
    Ok((
        err <= 1e-10,
        format!("W = {w1:.12} (d=1), {w2:.12} (d=2 disc), {gapped} (gapped)"),
    ))
}

fn restricted_spectrum() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (m, ef) in [(0.0, 1.0), (0.5, 1.2), (1.0, 0.5)] {
        let p = DiracParams::new(1, m, ef, 1.0)?;
        let op = assemble_restricted(&Region::interval(0.0, 1.0)?, 8.0, &p, 16.0)?;
        worst = worst.max(spectrum(&op)?.excursion);
    }
    Ok((worst <= 1e-11, format!("max excursion {worst:.1e}")))
}
