use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dirac_entanglement::coefficients::{coefficient_report, CoefficientReport};
use dirac_entanglement::region::Region;
use dirac_entanglement::scaling::{
    fit_log_coefficient, single_domain_scan, three_domain_scan, verdict, FitOptions, FitResult, ScalingSeries,
    ScanEntry, ScanOptions,
};
use dirac_entanglement::spinor::DiracParams;
use dirac_entanglement::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::output::{config_hash, fmt_g, fmt_opt, Cache, CachedEntry, COEFF_HEADER, SCAN_HEADER, SCHEMA};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonConvergence { .. }
            | CoreError::Eigensolver(_)
            | CoreError::InsufficientPoints { .. }
            | CoreError::RankDeficient => Self::Numerical(e.to_string()),
            other => Self::Config(ConfigError::Field {
                key: "parameters".into(),
                reason: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Single,
    ThreeDomain,
}

impl Mode {
    fn label(self) -> &'static str {
        match self {
            Self::Single => "single",
            Self::ThreeDomain => "three-domain",
        }
    }
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// One row per `(alpha, E_F, m, region)`; returns the number of rows.
pub fn cmd_coeff(config: &RunConfig, out: &Path) -> Result<usize, CliError> {
    if config.regions.is_empty() {
        return Err(ConfigError::Field {
            key: "region".into(),
            reason: "coeff needs at least one region".into(),
        }
        .into());
    }
    let hash = config_hash(&config.canonical());
    let functions = config.entropy.functions()?;
    let mut jobs = Vec::new();
    for (alpha, h) in &functions {
        for &ef in &config.fermi_energies {
            for &m in &config.masses {
                for (id, region) in &config.regions {
                    jobs.push((*alpha, h, ef, m, id, region));
                }
            }
        }
    }
    let rows: Vec<String> = jobs
        .par_iter()
        .map(|&(alpha, h, ef, m, id, region)| -> Result<String, CliError> {
            let params = DiracParams::new(config.dimension, m, ef, config.cutoff)?;
            let r = coefficient_report(h, region, &params)?;
            Ok([
                fmt_opt(alpha),
                config.dimension.to_string(),
                fmt_g(m),
                fmt_g(ef),
                fmt_g(config.cutoff),
                csv_quote(id),
                r.regime.label().to_string(),
                fmt_opt(r.p_f),
                fmt_opt(r.phi),
                fmt_g(r.w),
                fmt_opt(r.volume),
                hash.clone(),
            ]
            .join(","))
        })
        .collect::<Result<_, _>>()?;
    let mut text = format!("{SCHEMA}\n{COEFF_HEADER}\n");
    for row in &rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::create_dir_all(out)?;
    fs::write(out.join("coeff.csv"), text)?;
    Ok(rows.len())
}

/// Fit summary written next to the scan table.
#[derive(Debug, Serialize)]
pub struct FitSummary {
    pub config_hash: String,
    pub mode: &'static str,
    pub c_log: f64,
    pub c_area: f64,
    pub c_const: Option<f64>,
    pub residual: f64,
    pub window: [f64; 2],
    pub points: usize,
    #[serde(rename = "predicted_W")]
    pub predicted_w: f64,
    pub regime: &'static str,
    pub tolerance: f64,
    pub reference: Option<f64>,
    pub verdict: &'static str,
    pub failed_scales: Vec<FailedScale>,
}

#[derive(Debug, Serialize)]
pub struct FailedScale {
    #[serde(rename = "L")]
    pub scale: f64,
    pub error: String,
}

pub struct ScanOutcome {
    pub summary: FitSummary,
    pub cache_hits: usize,
}

enum Domains<'a> {
    Single(&'a str, &'a Region),
    Three {
        inner: (&'a str, &'a Region),
        outer: (&'a str, &'a Region),
    },
}

fn domains(config: &RunConfig, mode: Mode) -> Result<Domains<'_>, ConfigError> {
    let missing = |key: &str, reason: &str| ConfigError::Field {
        key: key.into(),
        reason: reason.into(),
    };
    match mode {
        Mode::Single => match config.regions.as_slice() {
            [(id, r)] => Ok(Domains::Single(id, r)),
            [] => Err(missing("region", "a single-domain scan needs one region")),
            _ => Err(missing("region", "a scan takes exactly one region")),
        },
        Mode::ThreeDomain => match (&config.inner, &config.outer) {
            (Some(i), Some(o)) => Ok(Domains::Three {
                inner: (&i.0, &i.1),
                outer: (&o.0, &o.1),
            }),
            (None, _) => Err(missing("inner_region", "required in three-domain mode")),
            (_, None) => Err(missing("outer_region", "required in three-domain mode")),
        },
    }
}

/// Scan, table, fit and verdict.
pub fn cmd_scan(config: &RunConfig, mode: Mode, out: &Path, resume: bool) -> Result<ScanOutcome, CliError> {
    config.check_scales()?;
    let params = config.scan_params()?;
    let h = config.scan_function()?;
    let domains = domains(config, mode)?;
    let predicted_region = match &domains {
        Domains::Single(_, r) => *r,
        Domains::Three { inner, .. } => inner.1,
    };
    let predicted: CoefficientReport = coefficient_report(&h, predicted_region, &params)?;
    if !predicted.regime.has_log_term() && config.reference.is_none() {
        return Err(ConfigError::Field {
            key: "reference".into(),
            reason: format!(
                "required in the {} regime, where the predicted coefficient is 0",
                predicted.regime
            ),
        }
        .into());
    }
    let options = config
        .nodes_per_unit_scale
        .map(ScanOptions::new)
        .unwrap_or_else(|| ScanOptions::for_params(&params));

    let mut computation = String::new();
    let _ = writeln!(computation, "version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(computation, "mode={}", mode.label());
    let _ = writeln!(
        computation,
        "d={} m={:?} E_F={:?} b={:?}",
        params.dimension, params.mass, params.fermi_energy, params.cutoff
    );
    let _ = writeln!(computation, "h={}", config.entropy_key());
    match &domains {
        Domains::Single(id, _) => {
            let _ = writeln!(computation, "region={id}");
        }
        Domains::Three { inner, outer } => {
            let _ = writeln!(computation, "inner={} outer={}", inner.0, outer.0);
        }
    }
    let _ = writeln!(computation, "nodes_per_unit_scale={:?}", options.nodes_per_unit_scale);
    let hash = config_hash(&format!("{}mode={}\n", config.canonical(), mode.label()));

    let cache = Cache::new(out);
    let keys: Vec<String> = config.scales.iter().map(|&l| Cache::key(&computation, l)).collect();
    let mut entries: Vec<Option<ScanEntry>> = vec![None; config.scales.len()];
    let mut cache_hits = 0;
    if resume {
        for (slot, key) in entries.iter_mut().zip(&keys) {
            if let Some(c) = cache.load(key) {
                let (scale, raw, sub, wall) = c.values();
                *slot = Some(ScanEntry {
                    scale,
                    raw_trace: raw,
                    volume_subtracted: sub,
                    wall_ms: wall,
                    error: None,
                });
                cache_hits += 1;
            }
        }
    }
    let missing: Vec<f64> = config
        .scales
        .iter()
        .zip(&entries)
        .filter(|(_, e)| e.is_none())
        .map(|(&l, _)| l)
        .collect();
    if !missing.is_empty() {
        let series = match &domains {
            Domains::Single(_, r) => single_domain_scan(r, &params, &h, &missing, &options)?,
            Domains::Three { inner, outer } => three_domain_scan(inner.1, outer.1, &params, &h, &missing, &options)?,
        };
        for entry in series.entries {
            let i = config
                .scales
                .iter()
                .position(|&l| l == entry.scale)
                .expect("scan returns the requested scales");
            if entry.error.is_none() {
                let cached = CachedEntry::new(entry.scale, entry.raw_trace, entry.volume_subtracted, entry.wall_ms);
                cache.store(&keys[i], &cached)?;
            }
            entries[i] = Some(entry);
        }
    }
    let entries: Vec<ScanEntry> = entries.into_iter().map(|e| e.expect("every scale filled")).collect();

    let mut text = format!("{SCHEMA}\n{SCAN_HEADER}\n");
    for e in &entries {
        let _ = writeln!(
            text,
            "{},{},{},{},{hash}",
            fmt_g(e.scale),
            fmt_g(e.raw_trace),
            fmt_g(e.volume_subtracted),
            fmt_g(e.wall_ms)
        );
    }
    fs::create_dir_all(out)?;
    fs::write(out.join("scan.csv"), text)?;

    let failed_scales: Vec<FailedScale> = entries
        .iter()
        .filter_map(|e| {
            e.error.as_ref().map(|err| FailedScale {
                scale: e.scale,
                error: err.clone(),
            })
        })
        .collect();
    let series = ScalingSeries {
        dimension: params.dimension,
        entries,
    };
    let usable = series.usable().count();
    if usable < 3 {
        return Err(CliError::Numerical(format!(
            "insufficient points: {usable} usable scale(s), at least 3 are needed for a fit"
        )));
    }
    let fit: FitResult = fit_log_coefficient(
        &series,
        &FitOptions {
            window_tolerance: config.window_tolerance,
            absolute_floor: config.window_floor,
            third_term: config.third_term,
        },
    )?;
    let v = verdict(&fit, &predicted, config.tolerance, config.reference)?;
    let summary = FitSummary {
        config_hash: hash,
        mode: mode.label(),
        c_log: fit.c_log,
        c_area: fit.c_area,
        c_const: fit.c_const,
        residual: fit.residual,
        window: [fit.window.0, fit.window.1],
        points: fit.points,
        predicted_w: predicted.w,
        regime: predicted.regime.label(),
        tolerance: config.tolerance,
        reference: v.reference,
        verdict: v.label(),
        failed_scales,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
    fs::write(out.join("fit.json"), json + "\n")?;
    Ok(ScanOutcome { summary, cache_hits })
}
