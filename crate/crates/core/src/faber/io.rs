//! Text and JSON serialization of [`FaberSeries`].
//!
//! The text format is a header line `dim <d> budget <n>` followed by one line
//! per coefficient, `j_1 .. j_d k_1 .. k_d value`, in level order and then
//! translation order. Values use the shortest decimal that round-trips.
//! The JSON variant carries the same fields:
//!
//! ```json
//! {"dim": 1, "budget": 0, "coefficients": [{"j": [-1], "k": [0], "value": 0.5}, ...]}
//! ```

use serde::{Deserialize, Serialize};

use crate::dyadic::{LevelVector, TranslationVector};
use crate::error::{FaberError, Result};

use super::FaberSeries;

#[derive(Serialize, Deserialize)]
struct SeriesDoc {
    dim: usize,
    budget: u32,
    coefficients: Vec<CoefficientDoc>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientDoc {
    j: Vec<i32>,
    k: Vec<u64>,
    value: f64,
}

pub fn to_text(series: &FaberSeries) -> String {
    use std::fmt::Write;

    let mut out = format!("dim {} budget {}\n", series.dim(), series.budget());
    for (level, data) in series.iter() {
        for (i, value) in data.iter().enumerate() {
            let k = level.translation_at(i);
            for j in level.entries() {
                let _ = write!(out, "{j} ");
            }
            for ki in k.entries() {
                let _ = write!(out, "{ki} ");
            }
            let _ = writeln!(out, "{value:?}");
        }
    }
    out
}

pub fn from_text(text: &str) -> Result<FaberSeries> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (dim, budget) = match fields.as_slice() {
        ["dim", d, "budget", n] => (
            d.parse::<usize>()
                .map_err(|e| parse_err(1, &format!("bad dim: {e}")))?,
            n.parse::<u32>()
                .map_err(|e| parse_err(1, &format!("bad budget: {e}")))?,
        ),
        _ => return Err(parse_err(1, "expected `dim <d> budget <n>`")),
    };
    let mut entries = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 * dim + 1 {
            return Err(parse_err(
                lineno + 1,
                &format!("expected {} fields, found {}", 2 * dim + 1, fields.len()),
            ));
        }
        let bad = |e: &dyn std::fmt::Display| parse_err(lineno + 1, &e.to_string());
        let j = fields[..dim]
            .iter()
            .map(|s| s.parse::<i32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(&e))?;
        let k = fields[dim..2 * dim]
            .iter()
            .map(|s| s.parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(&e))?;
        let value = fields[2 * dim].parse::<f64>().map_err(|e| bad(&e))?;
        entries.push((lineno + 1, CoefficientDoc { j, k, value }));
    }
    assemble(dim, budget, entries)
}

pub fn to_json(series: &FaberSeries) -> Result<String> {
    let mut coefficients = Vec::with_capacity(series.coefficient_count());
    for (level, data) in series.iter() {
        for (i, &value) in data.iter().enumerate() {
            coefficients.push(CoefficientDoc {
                j: level.entries().to_vec(),
                k: level.translation_at(i).entries().to_vec(),
                value,
            });
        }
    }
    let doc = SeriesDoc {
        dim: series.dim(),
        budget: series.budget(),
        coefficients,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn from_json(text: &str) -> Result<FaberSeries> {
    let doc: SeriesDoc = serde_json::from_str(text)?;
    let entries = doc
        .coefficients
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c))
        .collect();
    assemble(doc.dim, doc.budget, entries)
}

/// Every stored index must appear exactly once.
fn assemble(dim: usize, budget: u32, entries: Vec<(usize, CoefficientDoc)>) -> Result<FaberSeries> {
    let mut series = FaberSeries::zeros(dim, budget)?;
    let expected = series.coefficient_count();
    let mut seen = std::collections::HashSet::new();
    for (line, c) in entries {
        if c.j.len() != dim || c.k.len() != dim {
            return Err(parse_err(line, "index length does not match dim"));
        }
        let j = LevelVector::new(c.j).map_err(|e| parse_err(line, &e.to_string()))?;
        let k = TranslationVector::new(c.k);
        series
            .set(&j, &k, c.value)
            .map_err(|e| parse_err(line, &e.to_string()))?;
        if !seen.insert((j, k)) {
            return Err(parse_err(line, "duplicate coefficient"));
        }
    }
    if seen.len() != expected {
        return Err(FaberError::Parse {
            line: 0,
            message: format!("expected {expected} coefficients, found {}", seen.len()),
        });
    }
    Ok(series)
}

fn parse_err(line: usize, message: &str) -> FaberError {
    FaberError::Parse {
        line,
        message: message.to_string(),
    }
}
