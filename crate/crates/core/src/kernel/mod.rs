//! Position-space kernels of `chi(D_L)` and their restrictions to regions.

mod block;
mod cutoff;
mod operator;
mod schatten;
mod symbol;

pub use block::{
    kernel_block, radial_kernel, radial_kernel_checked, KernelQuadrature, KernelTable, RadialKernel, KERNEL_PROBE_TOL,
};
pub use cutoff::{smooth_step, CutoffFunction};
pub use operator::{
    assemble_between, assemble_on_grid, assemble_restricted, reference_spectrum, spectrum, trace_entropy, Grid,
    OperatorMatrix, OperatorOptions, RestrictedOperator, Spectrum,
};
pub use schatten::{offdiag_schatten, SchattenReport, Truncation, SHELL_WARNING_FRACTION, SINGULAR_FLOOR};
pub use symbol::{FermiSymbol, RadialSymbol, SymbolComponents};
