//! Log odds ratios from two-arm binomial counts.

use crate::error::{Error, Result};
use crate::model::{Dataset, StudyResult};

/// Event counts `r` out of `n` patients in the test (`t`) and control (`c`) arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoByTwoTable {
    pub r_t: u64,
    pub n_t: u64,
    pub r_c: u64,
    pub n_c: u64,
}

impl TwoByTwoTable {
    pub fn new(r_t: u64, n_t: u64, r_c: u64, n_c: u64) -> Result<Self> {
        let table = TwoByTwoTable { r_t, n_t, r_c, n_c };
        table.check("")?;
        Ok(table)
    }

    /// Accepts counts parsed as floating point, rejecting anything that is
    /// not a non-negative integer.
    pub fn from_f64(id: &str, r_t: f64, n_t: f64, r_c: f64, n_c: f64) -> Result<Self> {
        let to_count = |name: &str, v: f64| -> Result<u64> {
            if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u64)
            } else {
                Err(Error::InvalidTable {
                    id: id.to_string(),
                    reason: format!("{name} must be a non-negative integer, got {v}"),
                })
            }
        };
        let table = TwoByTwoTable {
            r_t: to_count("rt", r_t)?,
            n_t: to_count("nt", n_t)?,
            r_c: to_count("rc", r_c)?,
            n_c: to_count("nc", n_c)?,
        };
        table.check(id)?;
        Ok(table)
    }

    fn check(&self, id: &str) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidTable {
                id: id.to_string(),
                reason,
            })
        };
        if self.n_t == 0 || self.n_c == 0 {
            return bad("each arm needs at least one patient".into());
        }
        if self.r_t > self.n_t {
            return bad(format!("rt = {} exceeds nt = {}", self.r_t, self.n_t));
        }
        if self.r_c > self.n_c {
            return bad(format!("rc = {} exceeds nc = {}", self.r_c, self.n_c));
        }
        Ok(())
    }

    /// The four cells `(r_t, n_t - r_t, r_c, n_c - r_c)`.
    pub fn cells(&self) -> [u64; 4] {
        [self.r_t, self.n_t - self.r_t, self.r_c, self.n_c - self.r_c]
    }

    pub fn needs_correction(&self) -> bool {
        self.cells().contains(&0)
    }

    /// Same table with the arms exchanged.
    pub fn swapped(&self) -> Self {
        TwoByTwoTable {
            r_t: self.r_c,
            n_t: self.n_c,
            r_c: self.r_t,
            n_c: self.n_t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogOddsRatio {
    pub y: f64,
    pub se: f64,
    /// Whether 1/2 was added to every cell.
    pub corrected: bool,
}

/// Log odds ratio of test versus control and its large-sample standard error.
///
/// If any cell is empty, 1/2 is added to all four cells of that table first.
pub fn log_odds_ratio(table: &TwoByTwoTable) -> LogOddsRatio {
    let corrected = table.needs_correction();
    let add = if corrected { 0.5 } else { 0.0 };
    let [a, b, c, d] = table.cells().map(|x| x as f64 + add);
    LogOddsRatio {
        y: (a * d / (c * b)).ln(),
        se: (1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d).sqrt(),
        corrected,
    }
}

/// Converts labelled tables to a dataset of log odds ratios, in order.
/// Corrected studies carry `corrected = true`.
pub fn dataset_from_tables<S: AsRef<str>>(tables: &[(S, TwoByTwoTable)]) -> Result<Dataset> {
    if tables.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut studies = Vec::with_capacity(tables.len());
    for (id, table) in tables {
        let id = id.as_ref();
        table.check(id)?;
        let lor = log_odds_ratio(table);
        studies.push(StudyResult {
            id: id.to_string(),
            y: lor.y,
            se: lor.se,
            corrected: lor.corrected,
        });
    }
    Dataset::from_studies(studies)
}
