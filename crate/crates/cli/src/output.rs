//! CSV formatting, hashing and the per-scale cache.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "# schema=1";

pub const COEFF_HEADER: &str = "alpha,d,m,E_F,b,region_id,regime,p_F,Phi,W,V,config_hash";
pub const SCAN_HEADER: &str = "L,raw_trace,volume_subtracted,wall_ms,config_hash";

/// `%.12g`: 12 significant digits, trailing zeros removed.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{x:.*}", (11 - exp) as usize);
        trim_zeros(&fixed).to_string()
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g).unwrap_or_default()
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// Short provenance hash stamped on every row.
pub fn config_hash(canonical: &str) -> String {
    sha256_hex(canonical.as_bytes())[..16].to_string()
}

/// Cached result of one scale. Floats are stored by bit pattern so that a
/// cache hit reproduces the row exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedEntry {
    pub scale: u64,
    pub raw_trace: u64,
    pub volume_subtracted: u64,
    pub wall_ms: u64,
}

impl CachedEntry {
    pub fn new(scale: f64, raw: f64, sub: f64, wall_ms: f64) -> Self {
        Self {
            scale: scale.to_bits(),
            raw_trace: raw.to_bits(),
            volume_subtracted: sub.to_bits(),
            wall_ms: wall_ms.to_bits(),
        }
    }

    pub fn values(&self) -> (f64, f64, f64, f64) {
        (
            f64::from_bits(self.scale),
            f64::from_bits(self.raw_trace),
            f64::from_bits(self.volume_subtracted),
            f64::from_bits(self.wall_ms),
        )
    }
}

/// Content-addressed store under `<out>/cache`.
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(out: &Path) -> Self {
        Self { dir: out.join("cache") }
    }

    /// Key of one scale: everything that changes the trace, and nothing
    /// that only affects the fit.
    pub fn key(computation: &str, scale: f64) -> String {
        sha256_hex(format!("{computation}L={scale:?}\n").as_bytes())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Option<CachedEntry> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        match serde_json::from_str(&text) {
            Ok(e) => Some(e),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {key}: {e}");
                None
            }
        }
    }

    pub fn store(&self, key: &str, entry: &CachedEntry) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!("{key}.tmp"));
        fs::write(&tmp, serde_json::to_string(entry).map_err(io::Error::other)?)?;
        fs::rename(tmp, self.path(key))
    }
}
