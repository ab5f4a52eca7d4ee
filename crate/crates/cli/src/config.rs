//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! d = 1
//! mass = 0
//! fermi_energy = 1, 2        # lists are comma separated
//! cutoff = 1
//! alpha = 1                  # or: h_table = 0:0 0.5:0.35 1:0
//! region = interval(0, 1); interval(0, 2)
//! scales = 40, 80, 160, 320
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dirac_entanglement::entropy::TestFunction;
use dirac_entanglement::region::Region;
use dirac_entanglement::spinor::DiracParams;
use thiserror::Error;

/// Every key the parser accepts, with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("d", "spatial dimension (integer >= 1)"),
    ("mass", "mass m >= 0 (list)"),
    ("fermi_energy", "Fermi energy E_F (list)"),
    ("cutoff", "width b > 0 of the smoothing shell, default 1"),
    ("alpha", "Rényi index alpha > 0 (list); 1 is von Neumann"),
    (
        "h_table",
        "custom test function as knots t:h(t), first 0:0, last at t = 1",
    ),
    ("region", "region descriptors separated by ';'"),
    ("inner_region", "inner region of a three-domain scan"),
    ("outer_region", "outer region of a three-domain scan"),
    ("scales", "increasing list of scales L"),
    (
        "nodes_per_unit_scale",
        "quadrature nodes per unit length per unit L, default chosen from the cutoff",
    ),
    ("tolerance", "relative tolerance of the verdict, default 0.05"),
    ("reference", "reference coefficient for regimes without a log term"),
    ("window_tolerance", "fit window stability tolerance, default 0.02"),
    ("window_floor", "absolute floor of the fit window test, default 1e-3"),
    (
        "third_term",
        "add an L^{d-2} term to the fit (true/false), default false",
    ),
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unknown key `{key}` on line {line}; allowed keys: {allowed}")]
    UnknownKey { key: String, line: usize, allowed: String },
    #[error("key `{key}` given twice (lines {first} and {second})")]
    Duplicate { key: String, first: usize, second: usize },
    #[error("`{key}`: {reason}")]
    Field { key: String, reason: String },
    #[error("insufficient points: {0} scale(s) given, at least 3 are needed for a fit")]
    InsufficientPoints(usize),
}

fn field(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Entropy function selected by the config.
#[derive(Debug, Clone, PartialEq)]
pub enum EntropySpec {
    Renyi(Vec<f64>),
    Table(Vec<(f64, f64)>),
}

impl EntropySpec {
    /// `(alpha, h)` pairs; `alpha` is `None` for a table.
    pub fn functions(&self) -> Result<Vec<(Option<f64>, TestFunction)>, ConfigError> {
        match self {
            Self::Renyi(alphas) => alphas
                .iter()
                .map(|&a| {
                    TestFunction::renyi(a)
                        .map(|h| (Some(a), h))
                        .map_err(|e| field("alpha", e.to_string()))
                })
                .collect(),
            Self::Table(knots) => {
                let h =
                    TestFunction::from_table("table", knots.clone()).map_err(|e| field("h_table", e.to_string()))?;
                Ok(vec![(None, h)])
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dimension: usize,
    pub masses: Vec<f64>,
    pub fermi_energies: Vec<f64>,
    pub cutoff: f64,
    pub entropy: EntropySpec,
    pub regions: Vec<(String, Region)>,
    pub inner: Option<(String, Region)>,
    pub outer: Option<(String, Region)>,
    pub scales: Vec<f64>,
    pub nodes_per_unit_scale: Option<f64>,
    pub tolerance: f64,
    pub reference: Option<f64>,
    pub window_tolerance: f64,
    pub window_floor: f64,
    pub third_term: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw = read_pairs(text)?;
        let get = |k: &str| raw.get(k).map(|(_, v)| v.as_str());

        let dimension: usize = match get("d") {
            None => return Err(field("d", "missing")),
            Some(v) => v
                .parse()
                .map_err(|_| field("d", format!("expected a positive integer, got `{v}`")))?,
        };
        if dimension == 0 {
            return Err(field("d", "must be at least 1"));
        }
        let masses = match get("mass") {
            Some(v) => number_list("mass", v)?,
            None => vec![0.0],
        };
        let fermi_energies = match get("fermi_energy") {
            Some(v) => number_list("fermi_energy", v)?,
            None => return Err(field("fermi_energy", "missing")),
        };
        let cutoff = get("cutoff").map(|v| number("cutoff", v)).transpose()?.unwrap_or(1.0);

        let entropy = match (get("alpha"), get("h_table")) {
            (Some(_), Some(_)) => return Err(field("h_table", "give either `alpha` or `h_table`, not both")),
            (Some(v), None) => EntropySpec::Renyi(number_list("alpha", v)?),
            (None, Some(v)) => EntropySpec::Table(knots(v)?),
            (None, None) => EntropySpec::Renyi(vec![1.0]),
        };

        let regions = match get("region") {
            Some(v) => v
                .split(';')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| region("region", s).map(|r| (normalize(s), r)))
                .collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        let inner = get("inner_region")
            .map(|s| region("inner_region", s).map(|r| (normalize(s), r)))
            .transpose()?;
        let outer = get("outer_region")
            .map(|s| region("outer_region", s).map(|r| (normalize(s), r)))
            .transpose()?;
        for (key, r) in regions
            .iter()
            .map(|r| ("region", r))
            .chain(inner.iter().map(|r| ("inner_region", r)))
            .chain(outer.iter().map(|r| ("outer_region", r)))
        {
            if r.1.dimension() != dimension {
                return Err(field(
                    key,
                    format!("`{}` has dimension {}, d = {dimension}", r.0, r.1.dimension()),
                ));
            }
        }

        let scales = get("scales")
            .map(|v| number_list("scales", v))
            .transpose()?
            .unwrap_or_default();
        if scales.iter().any(|&l| !(l > 0.0)) {
            return Err(field("scales", "scales must be positive"));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(field("scales", "scales must be strictly increasing"));
        }
        let nodes_per_unit_scale = get("nodes_per_unit_scale")
            .map(|v| number("nodes_per_unit_scale", v))
            .transpose()?;
        if nodes_per_unit_scale.is_some_and(|n| !(n > 0.0)) {
            return Err(field("nodes_per_unit_scale", "must be positive"));
        }
        let positive = |key: &str, default: f64| -> Result<f64, ConfigError> {
            let x = get(key).map(|v| number(key, v)).transpose()?.unwrap_or(default);
            if !(x > 0.0) {
                return Err(field(key, "must be positive"));
            }
            Ok(x)
        };
        let tolerance = positive("tolerance", 0.05)?;
        let window_tolerance = positive("window_tolerance", 0.02)?;
        let window_floor = positive("window_floor", 1e-3)?;
        let reference = get("reference").map(|v| number("reference", v)).transpose()?;
        let third_term = match get("third_term") {
            None | Some("false") => false,
            Some("true") => true,
            Some(v) => return Err(field("third_term", format!("expected true or false, got `{v}`"))),
        };

        let config = Self {
            dimension,
            masses,
            fermi_energies,
            cutoff,
            entropy,
            regions,
            inner,
            outer,
            scales,
            nodes_per_unit_scale,
            tolerance,
            reference,
            window_tolerance,
            window_floor,
            third_term,
        };
        // physics parameters are checked up front for every combination
        for &m in &config.masses {
            for &ef in &config.fermi_energies {
                DiracParams::new(dimension, m, ef, cutoff)
                    .map_err(|e| field("mass/fermi_energy/cutoff", e.to_string()))?;
            }
        }
        config.entropy.functions()?;
        Ok(config)
    }

    /// The single parameter set of a scan.
    pub fn scan_params(&self) -> Result<DiracParams, ConfigError> {
        let one = |key: &str, v: &[f64]| -> Result<f64, ConfigError> {
            match v {
                [x] => Ok(*x),
                _ => Err(field(key, format!("a scan takes exactly one value, got {}", v.len()))),
            }
        };
        let m = one("mass", &self.masses)?;
        let ef = one("fermi_energy", &self.fermi_energies)?;
        DiracParams::new(self.dimension, m, ef, self.cutoff)
            .map_err(|e| field("mass/fermi_energy/cutoff", e.to_string()))
    }

    /// The single test function of a scan.
    pub fn scan_function(&self) -> Result<TestFunction, ConfigError> {
        let mut fs = self.entropy.functions()?;
        if fs.len() != 1 {
            return Err(field(
                "alpha",
                format!("a scan takes exactly one value, got {}", fs.len()),
            ));
        }
        Ok(fs.remove(0).1)
    }

    pub fn check_scales(&self) -> Result<(), ConfigError> {
        if self.scales.len() < 3 {
            return Err(ConfigError::InsufficientPoints(self.scales.len()));
        }
        Ok(())
    }

    /// Canonical text used for hashing: parsed values in a fixed order,
    /// floats in round-trip form.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "d={}", self.dimension);
        let _ = writeln!(s, "mass={}", list(&self.masses));
        let _ = writeln!(s, "fermi_energy={}", list(&self.fermi_energies));
        let _ = writeln!(s, "cutoff={:?}", self.cutoff);
        let _ = writeln!(s, "h={}", self.entropy_key());
        let regions: Vec<&str> = self.regions.iter().map(|r| r.0.as_str()).collect();
        let _ = writeln!(s, "region={}", regions.join(";"));
        let _ = writeln!(s, "inner_region={}", self.inner.as_ref().map_or("", |r| r.0.as_str()));
        let _ = writeln!(s, "outer_region={}", self.outer.as_ref().map_or("", |r| r.0.as_str()));
        let _ = writeln!(s, "scales={}", list(&self.scales));
        let _ = writeln!(s, "nodes_per_unit_scale={:?}", self.nodes_per_unit_scale);
        let _ = writeln!(s, "tolerance={:?}", self.tolerance);
        let _ = writeln!(s, "reference={:?}", self.reference);
        let _ = writeln!(s, "window_tolerance={:?}", self.window_tolerance);
        let _ = writeln!(s, "window_floor={:?}", self.window_floor);
        let _ = writeln!(s, "third_term={}", self.third_term);
        s
    }

    pub fn entropy_key(&self) -> String {
        match &self.entropy {
            EntropySpec::Renyi(a) => format!(
                "renyi:{}",
                a.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
            ),
            EntropySpec::Table(k) => format!(
                "table:{}",
                k.iter()
                    .map(|(t, h)| format!("{t:?}:{h:?}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
        }
    }
}

fn read_pairs(text: &str) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let mut out: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: line_no,
                reason: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::UnknownKey {
                key: key.to_string(),
                line: line_no,
                allowed: KEYS.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(", "),
            });
        }
        if let Some((first, _)) = out.get(key) {
            return Err(ConfigError::Duplicate {
                key: key.to_string(),
                first: *first,
                second: line_no,
            });
        }
        let value = value.trim();
        if value.is_empty() {
            return Err(field(key, "empty value"));
        }
        out.insert(key.to_string(), (line_no, value.to_string()));
    }
    Ok(out)
}

fn number(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| field(key, format!("expected a number, got `{}`", v.trim())))?;
    if !x.is_finite() {
        return Err(field(key, format!("must be finite, got `{}`", v.trim())));
    }
    Ok(x)
}

fn number_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',').map(|s| number(key, s)).collect()
}

fn knots(v: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    v.split_whitespace()
        .map(|pair| {
            let (t, h) = pair
                .split_once(':')
                .ok_or_else(|| field("h_table", format!("expected `t:h`, got `{pair}`")))?;
            Ok((number("h_table", t)?, number("h_table", h)?))
        })
        .collect()
}

fn normalize(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// `interval(a,b)`, `intervals(a1,b1,a2,b2,...)`, `disc(cx,cy,r)`,
/// `polygon(x1,y1,x2,y2,...)`, `difference(outer,inner)`.
pub fn region(key: &str, s: &str) -> Result<Region, ConfigError> {
    let s = normalize(s);
    let mut p = Parser { key, s: &s, pos: 0 };
    let r = p.region()?;
    if p.pos != s.len() {
        return Err(field(key, format!("trailing input `{}`", &s[p.pos..])));
    }
    Ok(r)
}

struct Parser<'a> {
    key: &'a str,
    s: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, reason: impl Into<String>) -> ConfigError {
        field(self.key, format!("{} (in `{}`)", reason.into(), self.s))
    }

    fn eat(&mut self, c: char) -> Result<(), ConfigError> {
        if self.s[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}` at offset {}", self.pos)))
        }
    }

    fn ident(&mut self) -> &str {
        let rest = &self.s[self.pos..];
        let n = rest.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(rest.len());
        self.pos += n;
        &rest[..n]
    }

    fn numbers(&mut self) -> Result<Vec<f64>, ConfigError> {
        let rest = &self.s[self.pos..];
        let n = rest.find(')').ok_or_else(|| self.err("missing `)`"))?;
        self.pos += n;
        rest[..n]
            .split(',')
            .map(|t| t.parse::<f64>().map_err(|_| self.err(format!("bad number `{t}`"))))
            .collect()
    }

    fn region(&mut self) -> Result<Region, ConfigError> {
        let name = self.ident().to_string();
        self.eat('(')?;
        let geometry = |e: dirac_entanglement::Error| field(self.key, e.to_string());
        let r = match name.as_str() {
            "difference" => {
                let outer = self.region()?;
                self.eat(',')?;
                let inner = self.region()?;
                Region::difference(outer, inner).map_err(geometry)?
            }
            "interval" | "intervals" | "disc" | "polygon" => {
                let v = self.numbers()?;
                match name.as_str() {
                    "interval" if v.len() == 2 => Region::interval(v[0], v[1]).map_err(geometry)?,
                    "intervals" if !v.is_empty() && v.len() % 2 == 0 => {
                        Region::intervals(v.chunks(2).map(|c| (c[0], c[1])).collect()).map_err(geometry)?
                    }
                    "disc" if v.len() == 3 => Region::disc([v[0], v[1]], v[2]).map_err(geometry)?,
                    "polygon" if v.len() >= 6 && v.len() % 2 == 0 => {
                        Region::polygon(v.chunks(2).map(|c| [c[0], c[1]]).collect()).map_err(geometry)?
                    }
                    _ => return Err(self.err(format!("wrong number of arguments for `{name}`: {}", v.len()))),
                }
            }
            "" => return Err(self.err("expected a region name")),
            other => {
                return Err(self.err(format!(
                    "unknown region `{other}`; use interval, intervals, disc, polygon or difference"
                )))
            }
        };
        self.eat(')')?;
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "d = 1\nfermi_energy = 1\nregion = interval(0, 1)\n";

    #[test]
    fn defaults() {
        let c = RunConfig::parse(BASIC).unwrap();
        assert_eq!(c.masses, vec![0.0]);
        assert_eq!(c.cutoff, 1.0);
        assert_eq!(c.entropy, EntropySpec::Renyi(vec![1.0]));
        assert_eq!(c.tolerance, 0.05);
    }

    #[test]
    fn unknown_key_lists_allowed_keys() {
        let e = RunConfig::parse("d = 1\nfermi_enrgy = 1\n").unwrap_err().to_string();
        assert!(
            e.contains("fermi_enrgy") && e.contains("fermi_energy") && e.contains("line 2"),
            "{e}"
        );
    }

    #[test]
    fn duplicate_and_syntax_errors() {
        assert!(matches!(
            RunConfig::parse("d = 1\nd = 2\n"),
            Err(ConfigError::Duplicate { .. })
        ));
        assert!(matches!(
            RunConfig::parse("d 1\n"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn field_level_messages() {
        let e = RunConfig::parse("d = 1\nfermi_energy = 1\nmass = -1\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("mass"), "{e}");
        let e = RunConfig::parse("d = 2\nfermi_energy = 1\nregion = interval(0,1)\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("region") && e.contains("dimension"), "{e}");
    }

    #[test]
    fn region_grammar() {
        assert_eq!(region("r", "interval(0, 2)").unwrap().volume(), 2.0);
        assert_eq!(region("r", "intervals(0,1, 2,4)").unwrap().volume(), 3.0);
        let sq = region("r", "polygon(0,0, 1,0, 1,1, 0,1)").unwrap();
        assert!((sq.boundary_measure() - 4.0).abs() < 1e-14);
        let ring = region("r", "difference(disc(0,0,2), disc(0,0,1))").unwrap();
        assert!((ring.volume() - 3.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(region("r", "disc(0,0)").is_err());
        assert!(region("r", "square(1)").is_err());
        assert!(region("r", "interval(0,1)x").is_err());
    }

    #[test]
    fn table_and_alpha_are_exclusive() {
        let text = format!("{BASIC}alpha = 1\nh_table = 0:0 1:0\n");
        assert!(RunConfig::parse(&text).is_err());
        let text = format!("{BASIC}h_table = 0:0 0.5:0.5 1:0\n");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.entropy, EntropySpec::Table(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]));
    }

    #[test]
    fn canonical_form_ignores_layout() {
        let a = RunConfig::parse("d=1\nfermi_energy=1\nregion=interval(0,1)\n").unwrap();
        let b = RunConfig::parse("# x\nregion = interval( 0 , 1 )\n\nfermi_energy = 1.0\nd = 1\n").unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }

    #[test]
    fn scan_needs_single_values() {
        let c = RunConfig::parse("d = 1\nfermi_energy = 1, 2\n").unwrap();
        assert!(c.scan_params().is_err());
        let c = RunConfig::parse("d = 1\nfermi_energy = 1\nscales = 1, 2\n").unwrap();
        assert!(matches!(c.check_scales(), Err(ConfigError::InsufficientPoints(2))));
    }
}
