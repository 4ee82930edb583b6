//! Line-delimited JSON cache of planar free-energy coefficients.
//!
//! One record per line; coefficients are exact rationals stored as strings in
//! canonical monomial order, so loading and re-storing a record reproduces its
//! bytes. Writers take an exclusive advisory lock, readers a shared one.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::algebra::{format_rational, GradedPolynomial};
use crate::error::{Error, Result};
use crate::planar::{free_energy_enum_with, EnumOptions, MAX_ENUM_ORDER};
use crate::series::free_energy_oracle;

pub const CACHE_VERSION: &str = "hciz-free-energy/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Enum,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Enum => "enum",
            Method::Oracle => "oracle",
        }
    }

    pub fn other(self) -> Method {
        match self {
            Method::Enum => Method::Oracle,
            Method::Oracle => Method::Enum,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enum" => Ok(Method::Enum),
            "oracle" => Ok(Method::Oracle),
            _ => Err(Error::domain(format!("unknown method {s:?}; expected enum or oracle"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheRecord {
    pub version: String,
    pub order: usize,
    pub method: Method,
    /// monomial key -> `p/q`
    pub coefficients: IndexMap<String, String>,
    /// seconds since the Unix epoch
    pub timestamp: u64,
    pub revision: String,
}

impl CacheRecord {
    pub fn new(order: usize, method: Method, poly: &GradedPolynomial) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        CacheRecord {
            version: CACHE_VERSION.to_string(),
            order,
            method,
            coefficients: poly.to_text_terms().into_iter().collect(),
            timestamp,
            revision: format!("hciz-core {}", env!("CARGO_PKG_VERSION")),
        }
    }

    pub fn polynomial(&self) -> Result<GradedPolynomial> {
        GradedPolynomial::from_text_terms(self.coefficients.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    /// Serialized record without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.version != CACHE_VERSION {
            return Err(format!("incompatible cache version {:?} (expected {CACHE_VERSION:?})", self.version));
        }
        let poly = self.polynomial().map_err(|e| e.to_string())?;
        let n = self.order as u64;
        if let Some((m, _)) = poly.terms().find(|(m, _)| m.a_weight() != n || m.b_weight() != n) {
            return Err(format!("monomial {} does not have weight {n} on both sides", m.key()));
        }
        let canonical: Vec<(String, String)> = poly.to_text_terms();
        let stored: Vec<(String, String)> = self.coefficients.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        if canonical != stored {
            return Err("coefficients are not in canonical form".into());
        }
        Ok(())
    }
}

/// Parse cache contents; `offset` of errors is a byte position in `text`.
pub fn parse_cache(text: &str) -> Result<Vec<CacheRecord>> {
    let mut records = Vec::new();
    let mut start = 0usize;
    while start < text.len() {
        let Some(len) = text[start..].find('\n') else {
            return Err(Error::Format { offset: start as u64, message: "truncated record (no line terminator)".into() });
        };
        let line = &text[start..start + len];
        let record: CacheRecord = serde_json::from_str(line).map_err(|e| {
            let col = if e.line() == 1 { e.column().saturating_sub(1) } else { 0 };
            Error::Format { offset: (start + col.min(line.len())) as u64, message: e.to_string() }
        })?;
        record.validate().map_err(|message| Error::Format { offset: start as u64, message })?;
        if record.to_line() != line {
            return Err(Error::Format { offset: start as u64, message: "record is not in canonical form".into() });
        }
        records.push(record);
        start += len + 1;
    }
    Ok(records)
}

/// Records of the cache at `path`; a missing file is an empty cache.
pub fn load_cache(path: &Path) -> Result<Vec<CacheRecord>> {
    let mut file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    file.lock_shared()?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Format { offset: e.valid_up_to() as u64, message: "invalid UTF-8".into() })?;
    parse_cache(text)
}

/// `F_order` by the chosen method.
pub fn compute(order: usize, method: Method, opts: &EnumOptions) -> Result<GradedPolynomial> {
    if order == 0 {
        return Err(Error::domain("free energy order must be at least 1"));
    }
    let all = match method {
        Method::Enum => {
            if order > MAX_ENUM_ORDER {
                return Err(Error::domain(format!("enumeration order must be in 1..={MAX_ENUM_ORDER}, got {order}")));
            }
            free_energy_enum_with(order, opts)?
        }
        Method::Oracle => free_energy_oracle(order)?,
    };
    Ok(all.into_iter().next_back().expect("order >= 1"))
}

/// Human-readable differences `key: left vs right`.
pub fn diff_polynomials(left: &GradedPolynomial, right: &GradedPolynomial) -> Vec<String> {
    let mut keys: Vec<_> = left.terms().map(|(m, _)| m.clone()).chain(right.terms().map(|(m, _)| m.clone())).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .filter_map(|m| {
            let (l, r) = (left.coeff(&m), right.coeff(&m));
            (l != r).then(|| format!("{}: {} vs {}", m.key(), format_rational(&l), format_rational(&r)))
        })
        .collect()
}

fn cross_check(a: &CacheRecord, b: &CacheRecord) -> Result<()> {
    let diff = diff_polynomials(&a.polynomial()?, &b.polynomial()?);
    if diff.is_empty() {
        Ok(())
    } else {
        Err(Error::Mismatch(format!(
            "order {}: {} and {} disagree on {} monomials ({} vs {}):\n{}",
            a.order,
            a.method.name(),
            b.method.name(),
            diff.len(),
            a.method.name(),
            b.method.name(),
            diff.join("\n")
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CacheOutcome {
    pub record: CacheRecord,
    pub from_cache: bool,
}

/// Cached `F_order` for `method`, computing and appending it if absent.
///
/// Whenever the other method's record for the same order is present the two
/// must agree exactly, otherwise [`Error::Mismatch`] lists the differences.
/// A corrupt file is reported, never overwritten.
pub fn compute_and_cache(order: usize, method: Method, path: &Path, opts: &EnumOptions) -> Result<CacheOutcome> {
    let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
    file.lock()?;
    let mut bytes = Vec::new();
    file.seek(SeekFrom::Start(0))?;
    file.read_to_end(&mut bytes)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Format { offset: e.valid_up_to() as u64, message: "invalid UTF-8".into() })?;
    let records = parse_cache(text)?;
    let find = |m: Method| records.iter().find(|r| r.order == order && r.method == m).cloned();
    let other = find(method.other());
    if let Some(record) = find(method) {
        if let Some(o) = &other {
            cross_check(&record, o)?;
        }
        return Ok(CacheOutcome { record, from_cache: true });
    }
    let record = CacheRecord::new(order, method, &compute(order, method, opts)?);
    if let Some(o) = &other {
        cross_check(&record, o)?;
    }
    let mut line = record.to_line();
    line.push('\n');
    file.write_all(line.as_bytes())?;
    file.flush()?;
    Ok(CacheOutcome { record, from_cache: false })
}
