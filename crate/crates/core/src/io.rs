//! JSON file formats, CSV number formatting, and the small text grammars
//! used on the command line for partitions and value lists.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::binning::{BinnedDistribution, BinnedOutcome, ModePartition};
use crate::error::{Error, Result};
use crate::interference::{GramMatrix, OutcomePattern, SampleMetadata, SampleSet};
use crate::linalg::{ComplexMatrix, UnitaryMatrix};
use crate::validation::single_and_two_mode_bins;

/// 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// 1-based line of the first occurrence of `"key"`, or 1.
fn line_of(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

fn parse_json<T: DeserializeOwned>(text: &str, file: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        file: file.to_string(),
        line: e.line().max(1),
        message: e.to_string(),
    })
}

fn semantic(file: &str, text: &str, key: &str, err: impl std::fmt::Display) -> Error {
    Error::Parse {
        file: file.to_string(),
        line: line_of(text, key),
        message: err.to_string(),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory values serialize");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
struct UnitaryDoc {
    m: usize,
    entries: Vec<[f64; 2]>,
}

/// `{"m": m, "entries": [[re, im], ...]}` in row-major order.
pub fn unitary_to_json(u: &UnitaryMatrix) -> String {
    to_json(&UnitaryDoc {
        m: u.dim(),
        entries: u.matrix().to_row_major().iter().map(|z| [z.re, z.im]).collect(),
    })
}

pub fn unitary_from_json(text: &str, file: &str) -> Result<UnitaryMatrix> {
    let doc: UnitaryDoc = parse_json(text, file)?;
    if doc.entries.len() != doc.m * doc.m {
        return Err(semantic(
            file,
            text,
            "entries",
            format!("{} entries for m={}, expected {}", doc.entries.len(), doc.m, doc.m * doc.m),
        ));
    }
    let entries = doc.entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    ComplexMatrix::from_row_major(doc.m, doc.m, entries)
        .and_then(UnitaryMatrix::new)
        .map_err(|e| semantic(file, text, "entries", e))
}

pub fn read_unitary(path: &Path) -> Result<UnitaryMatrix> {
    unitary_from_json(&read_text(path)?, &path.display().to_string())
}

#[derive(Serialize, Deserialize)]
struct GramDoc {
    n: usize,
    entries: Vec<Vec<f64>>,
}

/// `{"n": n, "entries": [[x_11, ...], ...]}`.
pub fn gram_to_json(x: &GramMatrix) -> String {
    to_json(&GramDoc {
        n: x.n(),
        entries: x.to_rows(),
    })
}

pub fn gram_from_json(text: &str, file: &str) -> Result<GramMatrix> {
    let doc: GramDoc = parse_json(text, file)?;
    if doc.entries.len() != doc.n || doc.entries.iter().any(|r| r.len() != doc.n) {
        return Err(semantic(file, text, "entries", format!("entries are not {0}x{0}", doc.n)));
    }
    GramMatrix::from_rows(&doc.entries).map_err(|e| semantic(file, text, "entries", e))
}

pub fn read_gram(path: &Path) -> Result<GramMatrix> {
    gram_from_json(&read_text(path)?, &path.display().to_string())
}

/// Map serialized in the order given rather than by key.
struct Ordered<'a, V: Serialize>(&'a [(String, V)]);

impl<V: Serialize> Serialize for Ordered<'_, V> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct SamplesOut<'a> {
    m: usize,
    n: usize,
    total: u64,
    counts: Ordered<'a, u64>,
    #[serde(skip_serializing_if = "is_default_metadata")]
    metadata: &'a SampleMetadata,
}

fn is_default_metadata(m: &&SampleMetadata) -> bool {
    **m == SampleMetadata::default()
}

#[derive(Deserialize)]
struct SamplesIn {
    m: usize,
    n: usize,
    total: u64,
    counts: BTreeMap<String, u64>,
    #[serde(default)]
    metadata: SampleMetadata,
}

/// `{"m":, "n":, "total":, "counts": {"s1,...,sm": count}}` with optional
/// `"metadata"`.
pub fn samples_to_json(s: &SampleSet) -> String {
    let counts: Vec<(String, u64)> = s.counts().iter().map(|(p, c)| (p.to_string(), *c)).collect();
    to_json(&SamplesOut {
        m: s.m(),
        n: s.n(),
        total: s.total(),
        counts: Ordered(&counts),
        metadata: &s.metadata,
    })
}

pub fn samples_from_json(text: &str, file: &str) -> Result<SampleSet> {
    let doc: SamplesIn = parse_json(text, file)?;
    let mut counts = BTreeMap::new();
    for (key, c) in &doc.counts {
        let pattern: OutcomePattern = key.parse().map_err(|e| semantic(file, text, key, e))?;
        counts.insert(pattern, *c);
    }
    let mut set = SampleSet::new(doc.m, doc.n, counts).map_err(|e| semantic(file, text, "counts", e))?;
    if set.total() != doc.total {
        return Err(semantic(
            file,
            text,
            "total",
            format!("total {} does not match the sum of counts {}", doc.total, set.total()),
        ));
    }
    set.metadata = doc.metadata;
    Ok(set)
}

pub fn read_samples(path: &Path) -> Result<SampleSet> {
    samples_from_json(&read_text(path)?, &path.display().to_string())
}

#[derive(Serialize)]
struct BinnedOut<'a> {
    m: usize,
    n: usize,
    partition: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_estimate: Option<f64>,
    probs: Ordered<'a, f64>,
}

#[derive(Deserialize)]
struct BinnedIn {
    m: usize,
    n: usize,
    partition: String,
    #[serde(default)]
    method: Option<String>,
    #[serde(default)]
    error_estimate: Option<f64>,
    probs: BTreeMap<String, f64>,
}

/// A binned distribution as read from or written to a file.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedFile {
    pub distribution: BinnedDistribution,
    pub method: Option<String>,
    pub error_estimate: Option<f64>,
}

/// `{"m":, "n":, "partition": "1,2|3", "probs": {"k1,k2": p, ...}}` with
/// outcomes in support order.
pub fn binned_to_json(file: &BinnedFile) -> String {
    let d = &file.distribution;
    let probs: Vec<(String, f64)> = d.probs().iter().map(|(k, p)| (k.to_string(), *p)).collect();
    to_json(&BinnedOut {
        m: d.partition().m(),
        n: d.n(),
        partition: d.partition().to_string(),
        method: file.method.as_deref(),
        error_estimate: file.error_estimate,
        probs: Ordered(&probs),
    })
}

pub fn binned_from_json(text: &str, file: &str) -> Result<BinnedFile> {
    let doc: BinnedIn = parse_json(text, file)?;
    let partition = parse_partition(&doc.partition, doc.m).map_err(|e| semantic(file, text, "partition", e))?;
    let mut probs = BTreeMap::new();
    for (key, p) in &doc.probs {
        let k: BinnedOutcome = key.parse().map_err(|e| semantic(file, text, key, e))?;
        probs.insert(k, *p);
    }
    let distribution =
        BinnedDistribution::new(partition, doc.n, probs).map_err(|e| semantic(file, text, "probs", e))?;
    Ok(BinnedFile {
        distribution,
        method: doc.method,
        error_estimate: doc.error_estimate,
    })
}

pub fn read_binned(path: &Path) -> Result<BinnedFile> {
    binned_from_json(&read_text(path)?, &path.display().to_string())
}

/// Any serializable value as pretty JSON with a trailing newline.
pub fn json_string<T: Serialize>(value: &T) -> String {
    to_json(value)
}

fn parse_mode(token: &str, m: usize) -> Result<usize> {
    let t = token.trim();
    let v: usize = t
        .parse()
        .map_err(|_| Error::arg(format!("bad mode label {t:?}")))?;
    if v == 0 || v > m {
        return Err(Error::arg(format!("mode {v} outside 1..={m}")));
    }
    Ok(v)
}

/// One partition: bins separated by `|`, modes by `,`; the bin `rest` holds
/// every mode not named elsewhere.
pub fn parse_partition(text: &str, m: usize) -> Result<ModePartition> {
    let mut bins: Vec<Option<Vec<usize>>> = Vec::new();
    for bin in text.split('|') {
        let bin = bin.trim();
        if bin == "rest" {
            bins.push(None);
        } else if bin.is_empty() {
            return Err(Error::arg(format!("empty bin in partition {text:?}")));
        } else {
            bins.push(Some(bin.split(',').map(|t| parse_mode(t, m)).collect::<Result<_>>()?));
        }
    }
    if bins.iter().filter(|b| b.is_none()).count() > 1 {
        return Err(Error::arg(format!("`rest` used twice in {text:?}")));
    }
    let named: Vec<usize> = bins.iter().flatten().flatten().copied().collect();
    let rest: Vec<usize> = (1..=m).filter(|k| !named.contains(k)).collect();
    let bins: Vec<Vec<usize>> = bins
        .into_iter()
        .map(|b| b.unwrap_or_else(|| rest.clone()))
        .collect();
    ModePartition::new(m, bins)
}

/// Partitions separated by `;`. The keywords `all1`, `all2` and `all` expand
/// to every one-mode bin, every two-mode bin, or both.
pub fn parse_partitions(text: &str, m: usize) -> Result<Vec<ModePartition>> {
    let mut out = Vec::new();
    for item in text.split(';') {
        let item = item.trim();
        let all = single_and_two_mode_bins(m);
        match item {
            "all1" => out.extend(all.into_iter().filter(|p| p.bins()[0].len() == 1)),
            "all2" => out.extend(all.into_iter().filter(|p| p.bins()[0].len() == 2)),
            "all" => out.extend(all),
            _ => out.push(parse_partition(item, m)?),
        }
    }
    Ok(out)
}

fn parse_number(t: &str) -> Result<f64> {
    let t = t.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::arg(format!("bad number {t:?}")))
}

fn arithmetic(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step == 0.0 || !step.is_finite() || (stop - start) * step < 0.0 {
        return Err(Error::arg(format!("cannot step from {start} to {stop} by {step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(Error::size(format!("{count} values requested")));
    }
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// `start:stop:step` (stop included when reached), a comma list, or a comma
/// list with `...` continuing the step of the two preceding values up to the
/// following one, as in `0,0.25,...,1`.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::arg(format!("range {text:?} is not start:stop:step")));
        }
        return arithmetic(parse_number(parts[0])?, parse_number(parts[1])?, parse_number(parts[2])?);
    }
    let tokens: Vec<&str> = text.split(',').map(str::trim).collect();
    let mut out: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i] == "..." {
            if out.len() < 2 || i + 1 >= tokens.len() {
                return Err(Error::arg(format!("`...` needs two values before and one after in {text:?}")));
            }
            let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
            let stop = parse_number(tokens[i + 1])?;
            let filled = arithmetic(b, stop, b - a)?;
            if (filled.last().copied().unwrap_or(b) - stop).abs() > 1e-9 * (1.0 + stop.abs()) {
                return Err(Error::arg(format!("{stop} is not reached in steps of {} from {b}", b - a)));
            }
            out.extend(filled.into_iter().skip(1));
            i += 2;
        } else {
            out.push(parse_number(tokens[i])?);
            i += 1;
        }
    }
    if out.is_empty() {
        return Err(Error::arg("empty value list"));
    }
    Ok(out)
}

/// Nonnegative integers in the [`parse_values`] grammar.
pub fn parse_counts(text: &str) -> Result<Vec<usize>> {
    parse_values(text)?
        .into_iter()
        .map(|v| {
            let r = v.round();
            if (v - r).abs() > 1e-9 || r < 0.0 {
                Err(Error::arg(format!("{v} is not a nonnegative integer")))
            } else {
                Ok(r as usize)
            }
        })
        .collect()
}
