//! Tab-separated curve files with a commented header.
//!
//! ```text
//! # homdip-curve: 1
//! # seed: 42
//! # rows: 41
//! # sha256: <hex digest of the data rows>
//! # note: alpha_ps2 = 1.49
//! # config: [source]
//! # config: pulse_fwhm_ps = 0.732
//! delay_ps<TAB>expected<TAB>counts
//! -3.1<TAB>5201.7<TAB>5188
//! ```
//!
//! Floats are written in their shortest round-trip form, so reading a file
//! back yields bit-identical values. The digest covers every data row
//! including its newline.

use std::collections::BTreeMap;

use homdip::experiment::CurveMetadata;
use homdip::HomCurve;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "homdip-curve";

/// A curve plus the normalised experiment file it came from, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFile {
    pub curve: HomCurve,
    pub config: Option<String>,
}

fn schema(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("line {line}: {msg}"))
}

fn columns(curve: &HomCurve) -> Vec<&'static str> {
    let mut names = vec!["delay_ps"];
    if curve.expected.is_some() {
        names.push("expected");
    }
    if curve.counts.is_some() {
        names.push("counts");
    }
    names
}

fn data_rows(curve: &HomCurve) -> String {
    let mut out = String::new();
    for (i, tau) in curve.delays.iter().enumerate() {
        out.push_str(&tau.to_string());
        if let Some(expected) = &curve.expected {
            out.push('\t');
            out.push_str(&expected[i].to_string());
        }
        if let Some(counts) = &curve.counts {
            out.push('\t');
            out.push_str(&counts[i].to_string());
        }
        out.push('\n');
    }
    out
}

pub fn checksum(rows: &str) -> String {
    hex::encode(Sha256::digest(rows.as_bytes()))
}

impl CurveFile {
    pub fn render(&self) -> String {
        let rows = data_rows(&self.curve);
        let mut out = format!("# {MAGIC}: {FORMAT_VERSION}\n");
        match self.curve.metadata.seed {
            Some(seed) => out.push_str(&format!("# seed: {seed}\n")),
            None => out.push_str("# seed: none\n"),
        }
        out.push_str(&format!("# rows: {}\n", self.curve.len()));
        out.push_str(&format!("# sha256: {}\n", checksum(&rows)));
        for (key, value) in &self.curve.metadata.notes {
            out.push_str(&format!("# note: {key} = {value}\n"));
        }
        if let Some(config) = &self.config {
            for line in config.lines() {
                out.push_str(&format!("# config: {line}\n").replace(": \n", ":\n"));
            }
        }
        out.push_str(&columns(&self.curve).join("\t"));
        out.push('\n');
        out.push_str(&rows);
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
        let (_, first) = lines.next().ok_or_else(|| schema(1, "empty file"))?;
        let version = first
            .strip_prefix(&format!("# {MAGIC}: "))
            .ok_or_else(|| schema(1, format!("not a curve file (expected '# {MAGIC}: {FORMAT_VERSION}')")))?;
        if version.trim() != FORMAT_VERSION.to_string() {
            return Err(schema(1, format!("unsupported format version {version}")));
        }

        let mut seed = None;
        let mut rows = None;
        let mut digest = None;
        let mut notes = BTreeMap::new();
        let mut config: Option<String> = None;
        while let Some(&(n, line)) = lines.peek() {
            let Some(body) = line.strip_prefix('#') else { break };
            lines.next();
            let body = body.strip_prefix(' ').unwrap_or(body);
            let (key, value) = body.split_once(':').ok_or_else(|| schema(n, "header line lacks 'key: value'"))?;
            let value = value.strip_prefix(' ').unwrap_or(value);
            match key {
                "seed" if value == "none" => seed = None,
                "seed" => seed = Some(value.parse::<u64>().map_err(|e| schema(n, format!("seed: {e}")))?),
                "rows" => rows = Some(value.parse::<usize>().map_err(|e| schema(n, format!("rows: {e}")))?),
                "sha256" => digest = Some(value.to_string()),
                "note" => {
                    let (k, v) = value.split_once(" = ").ok_or_else(|| schema(n, "note lacks 'key = value'"))?;
                    notes.insert(k.to_string(), v.to_string());
                }
                "config" => {
                    let text = config.get_or_insert_with(String::new);
                    text.push_str(value);
                    text.push('\n');
                }
                other => return Err(schema(n, format!("unknown header key '{other}'"))),
            }
        }

        let (n, header) = lines.next().ok_or_else(|| schema(0, "missing column header"))?;
        let names: Vec<&str> = header.split('\t').collect();
        let has_expected = names.contains(&"expected");
        let has_counts = names.contains(&"counts");
        let valid = names.first() == Some(&"delay_ps")
            && names.len() == 1 + usize::from(has_expected) + usize::from(has_counts)
            && (!has_expected || names[1] == "expected");
        if !valid || names.len() < 2 {
            return Err(schema(n, format!("bad column header '{header}'")));
        }

        let mut delays = Vec::new();
        let mut expected = Vec::new();
        let mut counts = Vec::new();
        let mut body = String::new();
        for (n, line) in lines {
            body.push_str(line);
            body.push('\n');
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != names.len() {
                return Err(schema(n, format!("expected {} columns, found {}", names.len(), fields.len())));
            }
            let float = |s: &str, what: &str| s.parse::<f64>().map_err(|e| schema(n, format!("{what}: {e}")));
            delays.push(float(fields[0], "delay_ps")?);
            if has_expected {
                expected.push(float(fields[1], "expected")?);
            }
            if has_counts {
                let c = fields[names.len() - 1];
                counts.push(c.parse::<u64>().map_err(|e| schema(n, format!("counts: {e}")))?);
            }
        }

        if let Some(rows) = rows {
            if rows != delays.len() {
                return Err(schema(0, format!("header announces {rows} rows, found {}", delays.len())));
            }
        }
        let digest = digest.ok_or_else(|| schema(0, "missing sha256 header"))?;
        let actual = checksum(&body);
        if digest != actual {
            return Err(schema(0, format!("checksum mismatch: header {digest}, data {actual}")));
        }

        let mut curve = HomCurve::new(
            delays,
            has_expected.then_some(expected),
            has_counts.then_some(counts),
        )
        .map_err(|e| CliError::Schema(e.to_string()))?;
        curve.metadata = CurveMetadata { seed, notes };
        Ok(Self { curve, config })
    }
}
