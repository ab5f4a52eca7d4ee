//! Dirac matrices, the momentum-space symbol of the free Dirac operator and
//! the functional calculus on it.
//!
//! The symbol `D(xi) = sum_k alpha_k xi_k + m beta` has the eigenvalues
//! `+E(xi)` and `-E(xi)`, `E(xi) = sqrt(m^2 + |xi|^2)`, each with
//! multiplicity `n_d / 2`. Any scalar function `a` therefore acts as
//!
//! ```text
//! a(D(xi)) = (a_+ + a_-)/2 * 1 + (a_+ - a_-)/2 * D(xi)/E(xi),
//! a_+(xi) = a(E(xi)),  a_-(xi) = a(-E(xi)),
//! ```
//!
//! with the convention `D/E(0) = 0` when `m = 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension for which Dirac matrices are built (`n_8 = 16`).
pub const MAX_DIMENSION: usize = 8;

/// Physical parameters of the free Dirac operator and its Fermi projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracParams {
    /// Spatial dimension `d >= 1`.
    pub dimension: usize,
    /// Mass `m >= 0`.
    pub mass: f64,
    /// Fermi energy `E_F`.
    pub fermi_energy: f64,
    /// Ultraviolet cut-off `b >= 0`.
    pub cutoff: f64,
}

impl DiracParams {
    pub fn new(dimension: usize, mass: f64, fermi_energy: f64, cutoff: f64) -> Result<Self> {
        let params = Self {
            dimension,
            mass,
            fermi_energy,
            cutoff,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.dimension > MAX_DIMENSION {
            return Err(Error::UnsupportedDimension {
                d: self.dimension,
                supported: "1..=8",
            });
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("mass must be finite and >= 0, got {}", self.mass),
            });
        }
        if !self.fermi_energy.is_finite() {
            return Err(Error::InvalidParameter {
                name: "E_F",
                reason: "Fermi energy must be finite".into(),
            });
        }
        if !(self.cutoff >= 0.0 && self.cutoff.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "b",
                reason: format!("cut-off must be finite and >= 0, got {}", self.cutoff),
            });
        }
        Ok(())
    }

    /// Spinor dimension `n_d = 2^floor((d + 1) / 2)`.
    pub fn spinor_dimension(&self) -> usize {
        spinor_dimension(self.dimension)
    }

    /// `E(k) = sqrt(m^2 + k^2)` for a momentum of modulus `k`.
    pub fn energy(&self, momentum: f64) -> f64 {
        self.mass.hypot(momentum)
    }
}

/// Spinor dimension `n_d = 2^floor((d + 1) / 2)`.
pub fn spinor_dimension(d: usize) -> usize {
    1 << d.div_ceil(2)
}

/// A point `xi` in momentum space.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumPoint(pub Vec<f64>);

impl MomentumPoint {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `E(xi)` for mass `m`; always `>= m`.
    pub fn energy(&self, mass: f64) -> f64 {
        mass.hypot(self.norm())
    }
}

/// Dense `n x n` complex matrix acting on spinor space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorMatrix(pub DMatrix<Complex64>);

impl SpinorMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to another matrix of the same size.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Ascending eigenvalues of a Hermitian matrix.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * Complex64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    /// Anticommutator `self * other + other * self`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 + &other.0 * &self.0)
    }

    fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }
}

/// The Dirac matrices `alpha_1, ..., alpha_d` and `beta` of dimension `d`.
#[derive(Debug, Clone)]
pub struct DiracMatrices {
    pub alphas: Vec<SpinorMatrix>,
    pub beta: SpinorMatrix,
}

impl DiracMatrices {
    pub fn spinor_dimension(&self) -> usize {
        self.beta.dim()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli() -> [SpinorMatrix; 3] {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        SpinorMatrix(DMatrix::from_row_slice(2, 2, &[o, one, one, o])),
        SpinorMatrix(DMatrix::from_row_slice(2, 2, &[o, -i, i, o])),
        SpinorMatrix(DMatrix::from_row_slice(2, 2, &[one, o, o, -one])),
    ]
}

/// `2k + 1` pairwise anticommuting Hermitian involutions of size `2^k`,
/// generated by `G_{k+1} = { sx (x) g : g in G_k } + { sy (x) 1, sz (x) 1 }`.
fn hermitian_generators(k: usize) -> Vec<SpinorMatrix> {
    let mut gens = vec![SpinorMatrix::identity(1)];
    let [sx, sy, sz] = pauli();
    for level in 0..k {
        let id = SpinorMatrix::identity(1 << level);
        let mut next: Vec<SpinorMatrix> = gens.iter().map(|g| sx.kron(g)).collect();
        next.push(sy.kron(&id));
        next.push(sz.kron(&id));
        gens = next;
    }
    gens
}

/// Dirac matrices in the block representation
/// `alpha_j = [[0, s_j], [s_j^*, 0]]`, `beta = diag(1, -1)`.
///
/// The blocks `s_j` have size `n_d / 2` and satisfy
/// `s_j s_k^* + s_k s_j^* = s_j^* s_k + s_k^* s_j = 2 delta_jk`. For odd `d`
/// they are `d` Hermitian anticommuting involutions; for even `d` the last one
/// is `i * 1`. Entries are exactly `0, +-1, +-i`.
pub fn dirac_matrices(d: usize) -> Result<DiracMatrices> {
    if d == 0 || d > MAX_DIMENSION {
        return Err(Error::UnsupportedDimension { d, supported: "1..=8" });
    }
    let n = spinor_dimension(d);
    let half = n / 2;
    let mut sigmas = if d % 2 == 1 {
        hermitian_generators((d - 1) / 2)
    } else {
        let mut s = hermitian_generators((d - 2) / 2);
        s.truncate(d - 1);
        s.push(SpinorMatrix::identity(half).scale_complex(c(0.0, 1.0)));
        s
    };
    sigmas.truncate(d);
    debug_assert!(sigmas.iter().all(|s| s.dim() == half));

    let alphas = sigmas
        .iter()
        .map(|s| {
            let mut m = DMatrix::zeros(n, n);
            m.view_mut((0, half), (half, half)).copy_from(&s.0);
            m.view_mut((half, 0), (half, half)).copy_from(&s.0.adjoint());
            SpinorMatrix(m)
        })
        .collect();
    let mut beta = DMatrix::zeros(n, n);
    for i in 0..n {
        beta[(i, i)] = if i < half { c(1.0, 0.0) } else { c(-1.0, 0.0) };
    }
    Ok(DiracMatrices {
        alphas,
        beta: SpinorMatrix(beta),
    })
}

/// The symbol `D(xi) = sum_k alpha_k xi_k + m beta`.
pub fn symbol_eval(matrices: &DiracMatrices, params: &DiracParams, xi: &MomentumPoint) -> Result<SpinorMatrix> {
    check_dimension(matrices, params, xi)?;
    let mut out = matrices.beta.scale(params.mass);
    for (alpha, &x) in matrices.alphas.iter().zip(&xi.0) {
        out = out.add(&alpha.scale(x));
    }
    Ok(out)
}

/// `D(xi) / E(xi)`, the zero matrix at `xi = 0` when `m = 0`.
pub fn normalized_symbol(matrices: &DiracMatrices, params: &DiracParams, xi: &MomentumPoint) -> Result<SpinorMatrix> {
    let e = xi.energy(params.mass);
    if e == 0.0 {
        check_dimension(matrices, params, xi)?;
        return Ok(SpinorMatrix::zeros(matrices.spinor_dimension()));
    }
    Ok(symbol_eval(matrices, params, xi)?.scale(1.0 / e))
}

/// `a(D(xi))` through the two-eigenvalue identity.
pub fn apply_function<F: Fn(f64) -> f64>(
    a: F,
    matrices: &DiracMatrices,
    params: &DiracParams,
    xi: &MomentumPoint,
) -> Result<SpinorMatrix> {
    let e = xi.energy(params.mass);
    let (plus, minus) = (a(e), a(-e));
    let n = matrices.spinor_dimension();
    let dir = normalized_symbol(matrices, params, xi)?;
    Ok(SpinorMatrix::identity(n)
        .scale(0.5 * (plus + minus))
        .add(&dir.scale(0.5 * (plus - minus))))
}

fn check_dimension(matrices: &DiracMatrices, params: &DiracParams, xi: &MomentumPoint) -> Result<()> {
    if matrices.alphas.len() != params.dimension || xi.dimension() != params.dimension {
        return Err(Error::InvalidParameter {
            name: "xi",
            reason: format!(
                "dimension mismatch: matrices d = {}, params d = {}, momentum d = {}",
                matrices.alphas.len(),
                params.dimension,
                xi.dimension()
            ),
        });
    }
    Ok(())
}
