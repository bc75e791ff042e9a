//! Versioned plain-text model files.
//!
//! ```text
//! eelm-model
//! version = 1
//! d = 2
//! m = 1
//! n0 = 3
//! activation = gaussian_rbf
//! provenance = elm 42
//! node_weights = <n0*d numbers, row-major>
//! biases = <n0 numbers>
//! output_weights = <n0*m numbers, row-major>
//! ```
//!
//! Numbers use Rust's shortest round-trip scientific notation, so a saved
//! model loads back bit for bit. Lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Location, Result};
use crate::learners::{Provenance, SlfnModel};
use crate::matrix::Mat;
use crate::weight_select::Activation;

pub const MODEL_MAGIC: &str = "eelm-model";
pub const MODEL_VERSION: u32 = 1;

const KEYS: [&str; 9] = [
    "version",
    "d",
    "m",
    "n0",
    "activation",
    "provenance",
    "node_weights",
    "biases",
    "output_weights",
];

fn push_numbers(out: &mut String, key: &str, values: &[f64]) {
    out.push_str(key);
    out.push_str(" =");
    for v in values {
        let _ = write!(out, " {v:e}");
    }
    out.push('\n');
}

pub fn model_to_string(model: &SlfnModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC}");
    let _ = writeln!(out, "version = {MODEL_VERSION}");
    let _ = writeln!(out, "d = {}", model.input_dim());
    let _ = writeln!(out, "m = {}", model.output_dim());
    let _ = writeln!(out, "n0 = {}", model.hidden_nodes());
    let _ = writeln!(out, "activation = {}", model.activation.name());
    match model.provenance {
        Provenance::Elm { seed } => {
            let _ = writeln!(out, "provenance = elm {seed}");
        }
        Provenance::Eelm => {
            let _ = writeln!(out, "provenance = eelm");
        }
    }
    push_numbers(&mut out, "node_weights", model.node_weights.as_slice());
    push_numbers(&mut out, "biases", &model.biases);
    push_numbers(&mut out, "output_weights", model.output_weights.as_slice());
    out
}

pub fn save_model(model: &SlfnModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SlfnModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}

/// A value and the byte offset where it starts.
struct Field<'a> {
    offset: usize,
    value: &'a str,
}

fn err(offset: usize, msg: impl Into<String>) -> Error {
    Error::format(Location::Byte(offset), msg)
}

pub fn model_from_str(text: &str) -> Result<SlfnModel> {
    let mut fields: HashMap<&str, Field> = HashMap::new();
    let mut seen_magic = false;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !seen_magic {
            if trimmed != MODEL_MAGIC {
                return Err(err(start, format!("expected {MODEL_MAGIC:?} header")));
            }
            seen_magic = true;
            continue;
        }
        let eq = line
            .find('=')
            .ok_or_else(|| err(start, "expected `key = value`"))?;
        let key = line[..eq].trim();
        if !KEYS.contains(&key) {
            return Err(err(start, format!("unknown key {key:?}")));
        }
        let raw = &line[eq + 1..];
        let lead = raw.len() - raw.trim_start().len();
        let field = Field {
            offset: start + eq + 1 + lead,
            value: raw.trim(),
        };
        if fields.insert(key, field).is_some() {
            return Err(err(start, format!("duplicate key {key:?}")));
        }
    }
    if !seen_magic {
        return Err(err(0, "empty model file"));
    }
    let end = text.len();
    let get = |key: &str| {
        fields
            .get(key)
            .ok_or_else(|| err(end, format!("missing key {key:?}")))
    };

    let version = get("version")?;
    let found: u32 = version
        .value
        .parse()
        .map_err(|_| err(version.offset, format!("bad version {:?}", version.value)))?;
    if found != MODEL_VERSION {
        return Err(err(
            version.offset,
            format!("unsupported model version: expected {MODEL_VERSION}, found {found}"),
        ));
    }

    let count = |key: &str| -> Result<usize> {
        let f = get(key)?;
        match f.value.parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(err(f.offset, format!("{key} must be a positive integer"))),
        }
    };
    let (d, m, n0) = (count("d")?, count("m")?, count("n0")?);

    let act = get("activation")?;
    let activation = Activation::from_name(act.value)
        .ok_or_else(|| err(act.offset, format!("unknown activation {:?}", act.value)))?;

    let prov = get("provenance")?;
    let mut parts = prov.value.split_whitespace();
    let provenance = match (parts.next(), parts.next(), parts.next()) {
        (Some("eelm"), None, _) => Provenance::Eelm,
        (Some("elm"), Some(seed), None) => Provenance::Elm {
            seed: seed
                .parse()
                .map_err(|_| err(prov.offset, format!("bad seed {seed:?}")))?,
        },
        _ => return Err(err(prov.offset, format!("bad provenance {:?}", prov.value))),
    };

    let numbers = |key: &str, expected: usize| -> Result<Vec<f64>> {
        let f = get(key)?;
        let mut out = Vec::with_capacity(expected);
        let mut pos = 0;
        for tok in f.value.split_whitespace() {
            let at = f.offset + pos + f.value[pos..].find(tok).unwrap_or(0);
            pos = at - f.offset + tok.len();
            match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => return Err(err(at, format!("bad number {tok:?} in {key}"))),
            }
        }
        if out.len() != expected {
            return Err(err(
                f.offset + f.value.len(),
                format!("{key} has {} values, expected {expected}", out.len()),
            ));
        }
        Ok(out)
    };
    let node_weights = Mat::new(n0, d, numbers("node_weights", n0 * d)?)?;
    let biases = numbers("biases", n0)?;
    let output_weights = Mat::new(n0, m, numbers("output_weights", n0 * m)?)?;
    SlfnModel::new(node_weights, biases, output_weights, activation, provenance)
}
