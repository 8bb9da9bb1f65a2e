//! The two input schemas: `study,y,se` (effect estimates) and
//! `study,rt,nt,rc,nc` (two-arm event counts).

use std::str::FromStr;

use nnhm::effect_sizes::{dataset_from_tables, TwoByTwoTable};
use nnhm::model::{Dataset, StudyResult};
use nnhm::{Error, Result};

pub const EFFECTS_HEADER: [&str; 3] = ["study", "y", "se"];
pub const COUNTS_HEADER: [&str; 5] = ["study", "rt", "nt", "rc", "nc"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Effects,
    Counts,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "effects" => Ok(InputFormat::Effects),
            "counts" => Ok(InputFormat::Counts),
            _ => Err(Error::InvalidConfig(format!("unknown input format `{s}` (expected effects or counts)"))),
        }
    }
}

fn parse_error(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn header(text: &str) -> Result<Vec<String>> {
    let mut rdr = reader(text);
    let h = rdr.headers().map_err(|e| parse_error(1, e.to_string()))?;
    Ok(h.iter().map(|s| s.to_ascii_lowercase()).collect())
}

/// Picks the schema from the header row.
pub fn detect_format(text: &str) -> Result<InputFormat> {
    let h = header(text)?;
    if h == EFFECTS_HEADER {
        Ok(InputFormat::Effects)
    } else if h == COUNTS_HEADER {
        Ok(InputFormat::Counts)
    } else {
        Err(parse_error(
            1,
            format!(
                "header `{}` matches neither `{}` nor `{}`",
                h.join(","),
                EFFECTS_HEADER.join(","),
                COUNTS_HEADER.join(",")
            ),
        ))
    }
}

// Rows as (line number, fields) after checking the header.
fn rows(text: &str, expected: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let h = header(text)?;
    if h != expected {
        return Err(parse_error(1, format!("expected header `{}`, got `{}`", expected.join(","), h.join(","))));
    }
    let mut out = Vec::new();
    for rec in reader(text).records() {
        let rec = rec.map_err(|e| parse_error(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() != expected.len() {
            return Err(parse_error(line, format!("expected {} columns, found {}", expected.len(), rec.len())));
        }
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    if out.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(out)
}

fn number(line: usize, column: &str, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| parse_error(line, format!("column {column}: cannot parse `{field}` as a number")))
}

pub fn parse_effects(text: &str) -> Result<Dataset> {
    let studies = rows(text, &EFFECTS_HEADER)?
        .into_iter()
        .map(|(line, f)| Ok(StudyResult::new(f[0].clone(), number(line, "y", &f[1])?, number(line, "se", &f[2])?)))
        .collect::<Result<Vec<_>>>()?;
    Dataset::from_studies(studies)
}

pub fn parse_counts(text: &str) -> Result<Dataset> {
    let tables = rows(text, &COUNTS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let mut v = [0.0; 4];
            for (i, col) in COUNTS_HEADER[1..].iter().enumerate() {
                v[i] = number(line, col, &f[i + 1])?;
            }
            let table = TwoByTwoTable::from_f64(&f[0], v[0], v[1], v[2], v[3])
                .map_err(|e| parse_error(line, e.to_string()))?;
            Ok((f[0].clone(), table))
        })
        .collect::<Result<Vec<_>>>()?;
    dataset_from_tables(&tables)
}

pub fn parse_dataset(text: &str, format: Option<InputFormat>) -> Result<Dataset> {
    match format.map_or_else(|| detect_format(text), Ok)? {
        InputFormat::Effects => parse_effects(text),
        InputFormat::Counts => parse_counts(text),
    }
}
