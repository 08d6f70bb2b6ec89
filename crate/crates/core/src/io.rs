//! Configuration files, CSV exchange and exact fraction parsing.
//!
//! A configuration file is JSON with every real written as a decimal string
//! in shortest round-trip form, so parsing reproduces each float64 bit for
//! bit:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "provenance": "trivial(2)",
//!   "claimed_delta": "1.0",
//!   "elements": [
//!     ["0.0", "-0.5", "0.0"],
//!     ["0.0", "0.5", "0.0"]
//!   ]
//! }
//! ```
//!
//! An optional `"labels"` array carries `[i, j, inner]` per element.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{CellLabel, ConfigElement, Configuration};

pub const FORMAT_VERSION: u32 = 1;

/// Shortest decimal string that parses back to the same float.
pub fn fmt_real(v: f64) -> String {
    format!("{v:?}")
}

pub fn parse_real(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Format(format!("not a finite number: {s:?}")));
    }
    Ok(v)
}

/// A decimal or an exact ratio `p/q`, divided once in float64.
pub fn parse_fraction(s: &str) -> Result<f64> {
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (parse_real(p)?, parse_real(q)?);
            if q == 0.0 {
                return Err(Error::Format(format!("zero denominator in {s:?}")));
            }
            Ok(p / q)
        }
        None => parse_real(s),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format_version: u32,
    provenance: String,
    claimed_delta: Option<String>,
    elements: Vec<[String; 3]>,
    #[serde(default)]
    labels: Option<Vec<(usize, i64, usize)>>,
}

/// Serialize a configuration; labels are written only when `with_labels`.
pub fn to_config_string(config: &Configuration, with_labels: bool) -> String {
    let q = |s: &str| serde_json::to_string(s).expect("string serializes");
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"format_version\": {FORMAT_VERSION},\n"));
    out.push_str(&format!("  \"provenance\": {},\n", q(config.provenance())));
    match config.claimed_delta() {
        Some(d) => out.push_str(&format!("  \"claimed_delta\": {},\n", q(&fmt_real(d)))),
        None => out.push_str("  \"claimed_delta\": null,\n"),
    }
    let labels = config.labels().filter(|_| with_labels);
    let rows: Vec<String> = config
        .elements()
        .iter()
        .map(|e| {
            format!(
                "    [{}, {}, {}]",
                q(&fmt_real(e.x)),
                q(&fmt_real(e.y)),
                q(&fmt_real(e.theta))
            )
        })
        .collect();
    out.push_str("  \"elements\": [");
    if !rows.is_empty() {
        out.push('\n');
        out.push_str(&rows.join(",\n"));
        out.push_str("\n  ");
    }
    out.push(']');
    if let Some(labels) = labels {
        let rows: Vec<String> = labels
            .iter()
            .map(|l| format!("    [{}, {}, {}]", l.i, l.j, l.inner))
            .collect();
        out.push_str(",\n  \"labels\": [");
        if !rows.is_empty() {
            out.push('\n');
            out.push_str(&rows.join(",\n"));
            out.push_str("\n  ");
        }
        out.push(']');
    }
    out.push_str("\n}\n");
    out
}

pub fn parse_config_str(text: &str) -> Result<Configuration> {
    let raw: RawFile =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("configuration file: {e}")))?;
    if raw.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            raw.format_version
        )));
    }
    let elements = raw
        .elements
        .iter()
        .map(|[x, y, t]| Ok(ConfigElement::new(parse_real(x)?, parse_real(y)?, parse_real(t)?)))
        .collect::<Result<Vec<_>>>()?;
    let claim = raw.claimed_delta.as_deref().map(parse_real).transpose()?;
    let config = Configuration::new(elements, claim, raw.provenance)?;
    match raw.labels {
        Some(labels) => config.with_labels(
            labels
                .into_iter()
                .map(|(i, j, inner)| CellLabel { i, j, inner })
                .collect(),
        ),
        None => Ok(config),
    }
}

pub fn read_config(path: &Path) -> Result<Configuration> {
    parse_config_str(&fs::read_to_string(path)?)
}

pub fn write_config(path: &Path, config: &Configuration, with_labels: bool) -> Result<()> {
    fs::write(path, to_config_string(config, with_labels))?;
    Ok(())
}

pub fn to_csv_string(config: &Configuration) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "theta"])
        .map_err(|e| Error::Format(e.to_string()))?;
    for e in config.elements() {
        w.write_record([fmt_real(e.x), fmt_real(e.y), fmt_real(e.theta)])
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Read `x,y,theta` rows; the result carries no claim.
pub fn parse_csv_str(text: &str, provenance: &str) -> Result<Configuration> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| Error::Format(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["x", "y", "theta"] {
        return Err(Error::Format(format!(
            "expected header x,y,theta, got {:?}",
            headers
        )));
    }
    let mut elements = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.len() != 3 {
            return Err(Error::Format(format!("expected 3 fields, got {}", rec.len())));
        }
        elements.push(ConfigElement::new(
            parse_real(&rec[0])?,
            parse_real(&rec[1])?,
            parse_real(&rec[2])?,
        ));
    }
    Configuration::new(elements, None, provenance)
}
