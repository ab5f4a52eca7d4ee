//! Nyström discretisation of `1_Lambda chi(D_L) 1_Lambda` and its spectrum.
//!
//! The region is covered by cells `[k delta, (k + 1) delta)^d` of a lattice
//! anchored at the origin; a cell belongs to the region when its centre does.
//! The matrix is `M_ij = delta^d K(x_i - x_j)` between cell centres. Because
//! the symbol is supported in `|xi| <= K`, the guard `delta L K <= pi`
//! rules out aliasing: `M` is then a compression of a lattice Toeplitz
//! operator whose symbol is `chi(D)` itself, so its spectrum lies in `[0, 1]`.

use faer::{c64, Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::entropy::TestFunction;
use crate::error::{Error, Result};
use crate::region::Region;
use crate::spinor::{DiracParams, SpinorMatrix};

use super::block::{BlockBasis, KernelQuadrature, KernelTable};
use super::symbol::{FermiSymbol, RadialSymbol};

/// Cell-centred lattice points of a region.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dimension: usize,
    spacing: f64,
    cells: Vec<[i64; 2]>,
}

impl Grid {
    /// Cells of spacing `1 / nodes_per_unit_length` whose centres lie in
    /// `region`.
    pub fn new(region: &Region, nodes_per_unit_length: f64) -> Result<Self> {
        if !(nodes_per_unit_length.is_finite() && nodes_per_unit_length > 0.0) {
            return Err(Error::InvalidParameter {
                name: "nodes_per_unit_length",
                reason: format!("must be positive, got {nodes_per_unit_length}"),
            });
        }
        let d = region.dimension();
        let spacing = 1.0 / nodes_per_unit_length;
        let (lo, hi) = region.bounding_box();
        let range = |k: usize| {
            let a = (lo[k] / spacing).floor() as i64 - 1;
            let b = (hi[k] / spacing).ceil() as i64 + 1;
            a..=b
        };
        let mut cells = Vec::new();
        if d == 1 {
            for i in range(0) {
                if region.contains(&[(i as f64 + 0.5) * spacing]) {
                    cells.push([i, 0]);
                }
            }
        } else {
            for j in range(1) {
                for i in range(0) {
                    let c = [(i as f64 + 0.5) * spacing, (j as f64 + 0.5) * spacing];
                    if region.contains(&c) {
                        cells.push([i, j]);
                    }
                }
            }
        }
        Ok(Self {
            dimension: d,
            spacing,
            cells,
        })
    }

    /// The cells of `self` whose centres lie in `region`.
    pub fn restrict(&self, region: &Region) -> Self {
        Self {
            cells: self
                .cells
                .iter()
                .copied()
                .filter(|&c| region.contains(&self.centre_of(c)))
                .collect(),
            ..*self
        }
    }

    /// Cells of the same lattice outside `region` whose centres are within
    /// `radius` of it.
    pub fn exterior_shell(region: &Region, nodes_per_unit_length: f64, radius: f64) -> Result<Self> {
        let (lo, hi) = region.bounding_box();
        let d = region.dimension();
        let grown = match d {
            1 => Region::interval(lo[0] - radius, hi[0] + radius)?,
            _ => Region::polygon(vec![
                [lo[0] - radius, lo[1] - radius],
                [hi[0] + radius, lo[1] - radius],
                [hi[0] + radius, hi[1] + radius],
                [lo[0] - radius, hi[1] + radius],
            ])?,
        };
        let all = Self::new(&grown, nodes_per_unit_length)?;
        Ok(Self {
            cells: all
                .cells
                .iter()
                .copied()
                .filter(|&c| {
                    let x = all.centre_of(c);
                    !region.contains(&x) && region.distance_to_point(&x) <= radius
                })
                .collect(),
            ..all
        })
    }

    fn centre_of(&self, c: [i64; 2]) -> Vec<f64> {
        (0..self.dimension)
            .map(|k| (c[k] as f64 + 0.5) * self.spacing)
            .collect()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[[i64; 2]] {
        &self.cells
    }

    /// Centre of cell `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        self.centre_of(self.cells[i])
    }

    /// `delta^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dimension as i32)
    }

    /// Discrete volume `N delta^d`.
    pub fn measure(&self) -> f64 {
        self.len() as f64 * self.cell_volume()
    }

    fn extent_with(&self, other: &Grid) -> [i64; 2] {
        let mut ext = [0i64; 2];
        if self.is_empty() || other.is_empty() {
            return ext;
        }
        for k in 0..2 {
            let (a_lo, a_hi) = min_max(self.cells.iter().map(|c| c[k]));
            let (b_lo, b_hi) = min_max(other.cells.iter().map(|c| c[k]));
            ext[k] = (a_hi - b_lo).abs().max((b_hi - a_lo).abs());
        }
        ext
    }
}

fn min_max(it: impl Iterator<Item = i64>) -> (i64, i64) {
    it.fold((i64::MAX, i64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// Assembly settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorOptions {
    pub quadrature: KernelQuadrature,
    /// In `d = 1`, conjugate by `W = diag(1, i)` per cell, which makes the
    /// matrix real symmetric.
    pub real_gauge: bool,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        Self {
            quadrature: KernelQuadrature::default(),
            real_gauge: true,
        }
    }
}

/// Dense storage of a discretised operator.
#[derive(Debug, Clone)]
pub enum OperatorMatrix {
    /// Real symmetric form in the `d = 1` gauge `W = diag(1, i)`.
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

/// Matrix of `1_A chi(D_L) 1_B` between two grids, `(N_A n_d) x (N_B n_d)`,
/// spinor index fastest.
#[derive(Debug, Clone)]
pub struct RestrictedOperator {
    rows: Grid,
    cols: Grid,
    scale: f64,
    spinor_dimension: usize,
    matrix: OperatorMatrix,
}

/// Diagonal gauge entry `w_a` for spinor component `a`.
fn gauge(a: usize) -> Complex64 {
    if a == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::i()
    }
}

impl RestrictedOperator {
    pub fn dim(&self) -> usize {
        self.rows.len() * self.spinor_dimension
    }

    pub fn grid(&self) -> &Grid {
        &self.rows
    }

    pub fn column_grid(&self) -> &Grid {
        &self.cols
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn spinor_dimension(&self) -> usize {
        self.spinor_dimension
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn is_real_gauge(&self) -> bool {
        matches!(self.matrix, OperatorMatrix::Real(_))
    }

    /// Entry in the standard (ungauged) spinor basis.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        match &self.matrix {
            OperatorMatrix::Complex(m) => m[(row, col)],
            OperatorMatrix::Real(m) => {
                let n = self.spinor_dimension;
                let g = gauge(row % n).conj() * gauge(col % n);
                g.conj() * m[(row, col)]
            }
        }
    }

    /// Spinor block between cells `i` and `j`, i.e. `delta^d K(x_i - x_j)`.
    pub fn block(&self, i: usize, j: usize) -> SpinorMatrix {
        let n = self.spinor_dimension;
        let mut out = SpinorMatrix::zeros(n);
        for a in 0..n {
            for b in 0..n {
                out.0[(a, b)] = self.entry(i * n + a, j * n + b);
            }
        }
        out
    }

    /// Dense copy in the standard basis.
    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        let (r, c) = (
            self.rows.len() * self.spinor_dimension,
            self.cols.len() * self.spinor_dimension,
        );
        DMatrix::from_fn(r, c, |i, j| self.entry(i, j))
    }

    /// `max |M - M^*|`; only meaningful for square operators.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }
}

fn check_guard(grid: &Grid, scale: f64, radius: f64) -> Result<()> {
    if grid.spacing() * scale * radius > std::f64::consts::PI * (1.0 + 1e-12) {
        return Err(Error::ResolutionGuard {
            spacing: grid.spacing(),
            scale,
            momentum_radius: radius,
        });
    }
    Ok(())
}

/// Assembles `1_Lambda chi(D_L) 1_Lambda` for the smoothed Fermi projection.
pub fn assemble_restricted(
    region: &Region,
    scale: f64,
    params: &DiracParams,
    nodes_per_unit_length: f64,
) -> Result<RestrictedOperator> {
    params.validate()?;
    if region.dimension() != params.dimension {
        return Err(Error::Geometry(format!(
            "region of dimension {} for d = {}",
            region.dimension(),
            params.dimension
        )));
    }
    let grid = Grid::new(region, nodes_per_unit_length)?;
    assemble_on_grid(&grid, scale, &FermiSymbol::new(*params), &OperatorOptions::default())
}

/// Assembles `1_Lambda a(D_L) 1_Lambda` on the cells of `grid`.
pub fn assemble_on_grid<S: RadialSymbol + ?Sized>(
    grid: &Grid,
    scale: f64,
    symbol: &S,
    options: &OperatorOptions,
) -> Result<RestrictedOperator> {
    assemble_between(grid, grid, scale, symbol, options)
}

/// Assembles the (generally rectangular) block `1_A a(D_L) 1_B`.
pub fn assemble_between<S: RadialSymbol + ?Sized>(
    rows: &Grid,
    cols: &Grid,
    scale: f64,
    symbol: &S,
    options: &OperatorOptions,
) -> Result<RestrictedOperator> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidParameter {
            name: "scale",
            reason: format!("must be positive, got {scale}"),
        });
    }
    let d = symbol.dimension();
    if rows.dimension() != d || cols.dimension() != d || rows.spacing() != cols.spacing() {
        return Err(Error::Geometry("grids do not share the lattice of the symbol".into()));
    }
    check_guard(rows, scale, symbol.support_radius())?;
    let basis = BlockBasis::new(d)?;
    let n = basis.n;
    let table = KernelTable::build(
        symbol,
        scale,
        rows.spacing(),
        rows.extent_with(cols),
        &options.quadrature,
    )?;
    let w = rows.cell_volume();
    let entry = |r: usize, c: usize| -> Complex64 {
        let (i, a) = (r / n, r % n);
        let (j, b) = (c / n, c % n);
        let (ci, cj) = (rows.cells[i], cols.cells[j]);
        let dn = [ci[0] - cj[0], ci[1] - cj[1]];
        let k = table.get(dn);
        let rho = if d == 1 {
            dn[0].abs() as f64
        } else {
            ((dn[0] * dn[0] + dn[1] * dn[1]) as f64).sqrt()
        };
        let dir = if rho > 0.0 {
            [dn[0] as f64 / rho, dn[1] as f64 / rho]
        } else {
            [0.0, 0.0]
        };
        basis.entry(k, &dir[..d], a, b) * w
    };
    let (nr, nc) = (rows.len() * n, cols.len() * n);
    let matrix = if d == 1 && options.real_gauge {
        OperatorMatrix::Real(Mat::from_fn(nr, nc, |r, c| {
            let v = gauge(r % n).conj() * gauge(c % n) * entry(r, c);
            debug_assert!(v.im.abs() <= 1e-14 * v.re.abs().max(1e-300));
            v.re
        }))
    } else {
        OperatorMatrix::Complex(Mat::from_fn(nr, nc, entry))
    };
    Ok(RestrictedOperator {
        rows: rows.clone(),
        cols: cols.clone(),
        scale,
        spinor_dimension: n,
        matrix,
    })
}

/// Ascending eigenvalues of a discretised operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `max(0, -lambda_min, lambda_max - 1)`, the round-off excursion
    /// removed by [`Spectrum::clipped`].
    pub excursion: f64,
}

impl Spectrum {
    fn from_values(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let excursion = match (eigenvalues.first(), eigenvalues.last()) {
            (Some(&lo), Some(&hi)) => (-lo).max(hi - 1.0).max(0.0),
            _ => 0.0,
        };
        Self { eigenvalues, excursion }
    }

    /// Eigenvalues clipped to `[0, 1]`.
    pub fn clipped(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|x| x.clamp(0.0, 1.0)).collect()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Eigenvalues of a square operator with the dense Hermitian solver.
pub fn spectrum(op: &RestrictedOperator) -> Result<Spectrum> {
    if op.rows.len() != op.cols.len() {
        return Err(Error::Geometry("spectrum of a rectangular block".into()));
    }
    if op.dim() == 0 {
        return Ok(Spectrum::from_values(Vec::new()));
    }
    let values = hermitian_eigenvalues(&op.matrix)?;
    let s = Spectrum::from_values(values);
    if s.excursion > 0.0 {
        log::debug!("clipping spectral excursion {:.3e} outside [0, 1]", s.excursion);
    }
    Ok(s)
}

pub(crate) fn hermitian_eigenvalues(m: &OperatorMatrix) -> Result<Vec<f64>> {
    let err = |e| Error::Eigensolver(format!("{e:?}"));
    match m {
        OperatorMatrix::Real(m) => m.self_adjoint_eigenvalues(Side::Lower).map_err(err),
        OperatorMatrix::Complex(m) => m.self_adjoint_eigenvalues(Side::Lower).map_err(err),
    }
}

/// Eigenvalues from an independent solver (nalgebra), for cross-checks.
pub fn reference_spectrum(op: &RestrictedOperator) -> Spectrum {
    Spectrum::from_values(op.to_nalgebra().symmetric_eigenvalues().iter().copied().collect())
}

/// `tr h(M) = sum_i h(lambda_i)` over the clipped spectrum.
pub fn trace_entropy(spectrum: &Spectrum, h: &TestFunction) -> f64 {
    spectrum.clipped().into_iter().map(|x| h.eval(x)).sum()
}
