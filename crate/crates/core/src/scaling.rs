//! Scale scans of `tr h(...)`, volume subtraction and the
//! `c_log L^{d-1} log L + c_area L^{d-1}` regression.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::coefficients::{volume_coefficient, CoefficientReport};
use crate::entropy::TestFunction;
use crate::error::{Error, Result};
use crate::kernel::{assemble_on_grid, spectrum, trace_entropy, FermiSymbol, Grid, OperatorOptions, RadialSymbol};
use crate::region::Region;
use crate::spinor::DiracParams;

/// One scale of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub scale: f64,
    /// Normalised trace (`NaN` when the entry failed).
    pub raw_trace: f64,
    pub volume_subtracted: f64,
    pub wall_ms: f64,
    /// Failure message of this entry, if any.
    pub error: Option<String>,
}

impl ScanEntry {
    pub fn is_usable(&self) -> bool {
        self.error.is_none() && self.volume_subtracted.is_finite()
    }

    fn failed(scale: f64, err: &Error, wall_ms: f64) -> Self {
        Self {
            scale,
            raw_trace: f64::NAN,
            volume_subtracted: f64::NAN,
            wall_ms,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSeries {
    pub dimension: usize,
    pub entries: Vec<ScanEntry>,
}

impl ScalingSeries {
    pub fn usable(&self) -> impl Iterator<Item = &ScanEntry> {
        self.entries.iter().filter(|e| e.is_usable())
    }
}

/// Discretisation settings of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Cells per unit length divided by `L`. Keeping this fixed makes the
    /// discretisation exactly self-similar in `L`.
    pub nodes_per_unit_scale: f64,
    pub operator: OperatorOptions,
}

impl ScanOptions {
    pub fn new(nodes_per_unit_scale: f64) -> Self {
        Self {
            nodes_per_unit_scale,
            operator: OperatorOptions::default(),
        }
    }

    /// About two cells per Nyquist length in `d = 1` (an integer, so that
    /// integer scales give integer cell counts on integer intervals) and a
    /// coarser grid in `d = 2`.
    pub fn for_params(params: &DiracParams) -> Self {
        let k = FermiSymbol::new(*params).support_radius();
        let nyquist = k / std::f64::consts::PI;
        let nu = if params.dimension == 1 {
            (2.0 * nyquist).ceil().max(1.0)
        } else {
            ((1.2 * nyquist) * 4.0).ceil() / 4.0
        };
        Self::new(nu)
    }
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "scales",
            reason: "scales must be positive".into(),
        });
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "scales",
            reason: "scales must be strictly increasing".into(),
        });
    }
    Ok(())
}

fn check_region(region: &Region, params: &DiracParams) -> Result<()> {
    if region.dimension() != params.dimension {
        return Err(Error::Geometry(format!(
            "region of dimension {} for d = {}",
            region.dimension(),
            params.dimension
        )));
    }
    Ok(())
}

/// `sum h(lambda)` over the spectrum of the operator on `grid`.
fn grid_trace(grid: &Grid, scale: f64, params: &DiracParams, h: &TestFunction, options: &ScanOptions) -> Result<f64> {
    if grid.is_empty() {
        return Ok(0.0);
    }
    let op = assemble_on_grid(grid, scale, &FermiSymbol::new(*params), &options.operator)?;
    Ok(trace_entropy(&spectrum(&op)?, h))
}

fn run_entries<F>(scales: &[f64], f: F) -> Vec<ScanEntry>
where
    F: Fn(f64) -> Result<(f64, f64)> + Sync,
{
    scales
        .par_iter()
        .map(|&scale| {
            let start = Instant::now();
            let out = f(scale);
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            match out {
                Ok((raw, sub)) => {
                    log::info!("L = {scale}: trace {raw:.12e}, volume-subtracted {sub:.12e} ({wall_ms:.0} ms)");
                    ScanEntry {
                        scale,
                        raw_trace: raw,
                        volume_subtracted: sub,
                        wall_ms,
                        error: None,
                    }
                }
                Err(e) => {
                    log::warn!("L = {scale} failed: {e}");
                    ScanEntry::failed(scale, &e, wall_ms)
                }
            }
        })
        .collect()
}

/// `(2/n_d) tr h(1_Omega chi(D_L) 1_Omega)` over `scales`, minus
/// `L^d V |Omega|` (with the discrete volume `N delta^d` of the grid).
pub fn single_domain_scan(
    region: &Region,
    params: &DiracParams,
    h: &TestFunction,
    scales: &[f64],
    options: &ScanOptions,
) -> Result<ScalingSeries> {
    params.validate()?;
    check_region(region, params)?;
    check_scales(scales)?;
    let v = volume_coefficient(h, params)?;
    let norm = params.spinor_dimension() as f64 / 2.0;
    let d = params.dimension as i32;
    let entries = run_entries(scales, |scale| {
        let grid = Grid::new(region, options.nodes_per_unit_scale * scale)?;
        let raw = grid_trace(&grid, scale, params, h, options)? / norm;
        Ok((raw, raw - scale.powi(d) * v * grid.measure()))
    });
    Ok(ScalingSeries {
        dimension: params.dimension,
        entries,
    })
}

/// `(1/n_d) [tr h(1_Lambda T 1_Lambda) + tr h(1_{Lambda'\Lambda} T 1_{Lambda'\Lambda})
/// - tr h(1_Lambda' T 1_Lambda')]` with `T = chi(D_L)`. The volume terms
/// cancel, so `volume_subtracted = raw_trace`.
pub fn three_domain_scan(
    inner: &Region,
    outer: &Region,
    params: &DiracParams,
    h: &TestFunction,
    scales: &[f64],
    options: &ScanOptions,
) -> Result<ScalingSeries> {
    params.validate()?;
    check_region(inner, params)?;
    check_region(outer, params)?;
    check_scales(scales)?;
    if !inner.is_inside(outer) {
        return Err(Error::Geometry("inner region is not contained in the outer one".into()));
    }
    let dist = inner.distance_to_boundary(outer);
    if !(dist > 0.0) {
        return Err(Error::Geometry(format!(
            "inner region must keep a positive distance to the outer boundary (got {dist})"
        )));
    }
    let rest = Region::difference(outer.clone(), inner.clone())?;
    let defect = inner.volume() + rest.volume() - outer.volume();
    if defect.abs() > 1e-12 * outer.volume() {
        return Err(Error::Geometry(format!("volume identity violated by {defect:e}")));
    }
    let norm = params.spinor_dimension() as f64;
    let entries = run_entries(scales, |scale| {
        let all = Grid::new(outer, options.nodes_per_unit_scale * scale)?;
        let a = all.restrict(inner);
        let b = all.restrict(&rest);
        if a.len() + b.len() != all.len() {
            return Err(Error::Geometry("cells of the outer region are not partitioned".into()));
        }
        let raw = (grid_trace(&a, scale, params, h, options)? + grid_trace(&b, scale, params, h, options)?
            - grid_trace(&all, scale, params, h, options)?)
            / norm;
        Ok((raw, raw))
    });
    Ok(ScalingSeries {
        dimension: params.dimension,
        entries,
    })
}

/// Settings of [`fit_log_coefficient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Drop the smallest scale while doing so moves `c_log` by more than
    /// this fraction.
    pub window_tolerance: f64,
    /// Absolute change of `c_log` below which the window is accepted,
    /// for coefficients near zero.
    pub absolute_floor: f64,
    /// Also fit `c_0 L^{d-2}` (`d >= 2`, at least four points) and report
    /// the spread of `c_log`.
    pub third_term: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            window_tolerance: 0.02,
            absolute_floor: 1e-3,
            third_term: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub c_log: f64,
    pub c_area: f64,
    /// `c_0` of the three-term fit, when requested.
    pub c_const: Option<f64>,
    /// `|c_log(two-term) - c_log(three-term)|`, when requested.
    pub c_log_spread: Option<f64>,
    /// Euclidean norm of the residuals of the two-term fit.
    pub residual: f64,
    /// Smallest and largest scale used.
    pub window: (f64, f64),
    pub points: usize,
}

fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = rows.len();
    let p = rows[0].len();
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let y = DVector::from_column_slice(y);
    // scale columns so the rank test is unit free
    let norms: Vec<f64> = (0..p).map(|j| x.column(j).norm()).collect();
    if norms.contains(&0.0) {
        return Err(Error::RankDeficient);
    }
    let xs = DMatrix::from_fn(n, p, |i, j| x[(i, j)] / norms[j]);
    let svd = xs.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-10 * smax {
        return Err(Error::RankDeficient);
    }
    let coef = svd
        .solve(&y, 1e-14 * smax)
        .map_err(|e| Error::Eigensolver(e.to_string()))?;
    let residual = (&y - &xs * &coef).norm();
    Ok(((0..p).map(|j| coef[j] / norms[j]).collect(), residual))
}

fn design(dimension: usize, scale: f64, third: bool) -> Vec<f64> {
    let area = scale.powi(dimension as i32 - 1);
    let mut row = vec![area * scale.ln(), area];
    if third {
        row.push(scale.powi(dimension as i32 - 2));
    }
    row
}

fn fit_window(dimension: usize, pts: &[(f64, f64)], third: bool) -> Result<(Vec<f64>, f64)> {
    let rows: Vec<Vec<f64>> = pts.iter().map(|&(l, _)| design(dimension, l, third)).collect();
    let y: Vec<f64> = pts.iter().map(|&(_, v)| v).collect();
    least_squares(&rows, &y)
}

/// Least-squares fit of `volume_subtracted(L) = c_log L^{d-1} log L + c_area L^{d-1}`
/// on a data-driven window of the largest scales.
pub fn fit_log_coefficient(series: &ScalingSeries, options: &FitOptions) -> Result<FitResult> {
    let mut pts: Vec<(f64, f64)> = series.usable().map(|e| (e.scale, e.volume_subtracted)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints { usable: pts.len() });
    }
    let d = series.dimension;
    let mut start = 0;
    while pts.len() - start > 3 {
        let (full, _) = fit_window(d, &pts[start..], false)?;
        let (dropped, _) = fit_window(d, &pts[start + 1..], false)?;
        let change = (full[0] - dropped[0]).abs();
        if change <= options.window_tolerance * dropped[0].abs() || change <= options.absolute_floor {
            break;
        }
        start += 1;
    }
    let window = &pts[start..];
    let (coef, residual) = fit_window(d, window, false)?;
    // the three-term fit needs a fourth point; borrow it from below the
    // window if necessary
    let wide = &pts[start.min(pts.len().saturating_sub(4))..];
    let (c_const, spread) = if options.third_term && d >= 2 && wide.len() >= 4 {
        let (c3, _) = fit_window(d, wide, true)?;
        (Some(c3[2]), Some((c3[0] - coef[0]).abs()))
    } else {
        (None, None)
    };
    Ok(FitResult {
        c_log: coef[0],
        c_area: coef[1],
        c_const,
        c_log_spread: spread,
        residual,
        window: (window[0].0, window[window.len() - 1].0),
        points: window.len(),
    })
}

/// Comparison of a fitted coefficient with the prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub passed: bool,
    pub fitted: f64,
    pub predicted: f64,
    pub tolerance: f64,
    /// Reference scale used in zero-coefficient regimes.
    pub reference: Option<f64>,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// `|c_log - W| <= tol |W|`; in regimes with `W = 0` the bound is
/// `|c_log| <= tol * reference`, where `reference` is supplied explicitly
/// (typically `W` of a nearby enhanced configuration).
pub fn verdict(
    fit: &FitResult,
    predicted: &CoefficientReport,
    tolerance: f64,
    reference: Option<f64>,
) -> Result<Verdict> {
    let (passed, reference) = if predicted.regime.has_log_term() {
        ((fit.c_log - predicted.w).abs() <= tolerance * predicted.w.abs(), None)
    } else {
        let r = reference.ok_or(Error::MissingReference)?;
        (fit.c_log.abs() <= tolerance * r.abs(), Some(r))
    };
    Ok(Verdict {
        passed,
        fitted: fit.c_log,
        predicted: predicted.w,
        tolerance,
        reference,
    })
}

/// Behaviour of `volume_subtracted(L) / L^{d-1}` over a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaBound {
    pub ratios: Vec<f64>,
    pub max_abs: f64,
    /// `(max - min) / max_abs` of the ratios.
    pub relative_variation: f64,
}

impl AreaBound {
    pub fn from_series(series: &ScalingSeries) -> Self {
        let ratios: Vec<f64> = series
            .usable()
            .map(|e| e.volume_subtracted / e.scale.powi(series.dimension as i32 - 1))
            .collect();
        let max_abs = ratios.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
        let relative_variation = if max_abs > 0.0 { (hi - lo) / max_abs } else { 0.0 };
        Self {
            ratios,
            max_abs,
            relative_variation,
        }
    }

    /// Bounded in the sense of an `O(L^{d-1})` remainder: the ratio stays
    /// within `tolerance` of its range, or below `floor` in absolute value.
    pub fn is_bounded(&self, tolerance: f64, floor: f64) -> bool {
        !self.ratios.is_empty() && (self.relative_variation <= tolerance || self.max_abs <= floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Regime;

    fn synthetic(d: usize, scales: &[f64], f: impl Fn(f64) -> f64) -> ScalingSeries {
        ScalingSeries {
            dimension: d,
            entries: scales
                .iter()
                .map(|&l| ScanEntry {
                    scale: l,
                    raw_trace: f(l),
                    volume_subtracted: f(l),
                    wall_ms: 0.0,
                    error: None,
                })
                .collect(),
        }
    }

    fn report(w: f64, regime: Regime) -> CoefficientReport {
        CoefficientReport {
            p_f: None,
            phi: None,
            w,
            volume: None,
            regime,
        }
    }

    fn fit_with(c_log: f64) -> FitResult {
        FitResult {
            c_log,
            c_area: 0.0,
            c_const: None,
            c_log_spread: None,
            residual: 0.0,
            window: (1.0, 2.0),
            points: 3,
        }
    }

    #[test]
    fn recovers_exact_two_term_data() {
        let s = synthetic(1, &[10.0, 20.0, 40.0, 80.0], |l| 0.25 * l.ln() - 1.7);
        let f = fit_log_coefficient(&s, &FitOptions::default()).unwrap();
        assert!((f.c_log - 0.25).abs() < 1e-10 && (f.c_area + 1.7).abs() < 1e-10);
        assert_eq!((f.points, f.window), (4, (10.0, 80.0)));
        let s = synthetic(2, &[8.0, 12.0, 16.0, 24.0], |l| -0.4 * l * l.ln() + 2.0 * l);
        let f = fit_log_coefficient(&s, &FitOptions::default()).unwrap();
        assert!((f.c_log + 0.4).abs() < 1e-10 && (f.c_area - 2.0).abs() < 1e-10);
    }

    #[test]
    fn constant_data_has_no_log_term() {
        let s = synthetic(1, &[10.0, 20.0, 40.0], |_| 3.0);
        let f = fit_log_coefficient(&s, &FitOptions::default()).unwrap();
        assert!(f.c_log.abs() < 1e-12);
    }

    #[test]
    fn window_drops_contaminated_small_scales() {
        let s = synthetic(1, &[5.0, 10.0, 20.0, 40.0, 80.0, 160.0], |l| {
            0.25 * l.ln() + 1.0 + 40.0 * (-l / 3.0).exp()
        });
        let f = fit_log_coefficient(&s, &FitOptions::default()).unwrap();
        assert!(f.window.0 > 5.0);
        assert!((f.c_log - 0.25).abs() < 0.005);
    }

    #[test]
    fn rejects_degenerate_series() {
        let s = synthetic(1, &[10.0, 20.0], |l| l);
        assert!(matches!(
            fit_log_coefficient(&s, &FitOptions::default()),
            Err(Error::InsufficientPoints { usable: 2 })
        ));
        let s = synthetic(1, &[10.0, 10.0, 10.0], |l| l);
        assert!(matches!(
            fit_log_coefficient(&s, &FitOptions::default()),
            Err(Error::RankDeficient)
        ));
    }

    #[test]
    fn third_term_reports_spread() {
        let s = synthetic(2, &[8.0, 12.0, 16.0, 24.0, 32.0], |l| 0.1 * l * l.ln() + l + 0.5);
        let opts = FitOptions {
            third_term: true,
            ..Default::default()
        };
        let f = fit_log_coefficient(&s, &opts).unwrap();
        assert!((f.c_const.unwrap() - 0.5).abs() < 1e-8);
        assert!(f.c_log_spread.unwrap() > 0.0);
    }

    #[test]
    fn verdict_examples() {
        let enhanced = report(1.0 / 3.0, Regime::Enhanced);
        assert!(verdict(&fit_with(0.331), &enhanced, 0.1, None).unwrap().passed);
        assert!(!verdict(&fit_with(0.2), &enhanced, 0.1, None).unwrap().passed);
        let zero = report(0.0, Regime::GappedAreaLaw);
        assert!(verdict(&fit_with(0.01), &zero, 0.1, Some(1.0 / 3.0)).unwrap().passed);
        assert!(!verdict(&fit_with(0.05), &zero, 0.1, Some(1.0 / 3.0)).unwrap().passed);
        assert!(matches!(
            verdict(&fit_with(0.0), &zero, 0.1, None),
            Err(Error::MissingReference)
        ));
    }

    #[test]
    fn empty_region_gives_zero_traces() {
        let p = DiracParams::new(1, 0.0, 1.0, 1.0).unwrap();
        let tiny = Region::interval(0.0, 1e-4).unwrap();
        let s = single_domain_scan(
            &tiny,
            &p,
            &TestFunction::von_neumann(),
            &[2.0, 4.0],
            &ScanOptions::new(2.0),
        )
        .unwrap();
        assert!(s
            .entries
            .iter()
            .all(|e| e.raw_trace == 0.0 && e.volume_subtracted == 0.0));
    }

    #[test]
    fn three_domain_requires_separation() {
        let p = DiracParams::new(1, 0.0, 1.0, 1.0).unwrap();
        let a = Region::interval(0.0, 1.0).unwrap();
        let h = TestFunction::von_neumann();
        let opts = ScanOptions::new(2.0);
        assert!(matches!(
            three_domain_scan(&a, &a, &p, &h, &[4.0], &opts),
            Err(Error::Geometry(_))
        ));
        let touching = Region::interval(0.0, 2.0).unwrap();
        assert!(three_domain_scan(&a, &touching, &p, &h, &[4.0], &opts).is_err());
    }

    #[test]
    fn scales_must_increase() {
        let p = DiracParams::new(1, 0.0, 1.0, 1.0).unwrap();
        let a = Region::interval(0.0, 1.0).unwrap();
        let h = TestFunction::von_neumann();
        assert!(single_domain_scan(&a, &p, &h, &[4.0, 2.0], &ScanOptions::new(2.0)).is_err());
    }

    #[test]
    fn area_bound_detects_log_growth() {
        let flat = synthetic(1, &[10.0, 20.0, 40.0], |l| 0.7 + (-l).exp());
        assert!(AreaBound::from_series(&flat).is_bounded(0.1, 1e-6));
        let growing = synthetic(1, &[10.0, 20.0, 40.0], |l| 0.3 * l.ln());
        assert!(!AreaBound::from_series(&growing).is_bounded(0.1, 1e-6));
    }

    #[test]
    fn default_density_satisfies_guard() {
        for p in [
            DiracParams::new(1, 0.0, 1.0, 1.0).unwrap(),
            DiracParams::new(1, 0.0, 1.0, 2.0).unwrap(),
            DiracParams::new(2, 0.0, 0.0, 1.0).unwrap(),
        ] {
            let nu = ScanOptions::for_params(&p).nodes_per_unit_scale;
            assert!(FermiSymbol::new(p).support_radius() / nu <= std::f64::consts::PI);
        }
        assert_eq!(
            ScanOptions::for_params(&DiracParams::new(1, 0.0, 1.0, 1.0).unwrap()).nodes_per_unit_scale,
            2.0
        );
        assert_eq!(
            ScanOptions::for_params(&DiracParams::new(1, 0.0, 1.0, 2.0).unwrap()).nodes_per_unit_scale,
            3.0
        );
    }
}
