//! Binomial scenarios modelled on a small liver-transplant evidence base:
//! acute rejection (six studies, tau = 0.5) and steroid-resistant rejection
//! (three studies, tau = 0.75).
//!
//! The per-study patient counts are stand-ins: plausible sizes (30 to 108
//! patients, allocation between 1:1 and 3:1) chosen to mimic the original
//! studies' precision, not their actual numbers. Supply real counts through
//! a campaign config when available.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

use super::scenario::BinomialScenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseStudy {
    AcuteRejection,
    SteroidResistant,
}

impl CaseStudy {
    pub fn tag(self) -> &'static str {
        match self {
            CaseStudy::AcuteRejection => "ar",
            CaseStudy::SteroidResistant => "srr",
        }
    }

    /// Stand-in `(n_treatment, n_control)` per study.
    pub fn stand_in_counts(self) -> Vec<(u64, u64)> {
        match self {
            CaseStudy::AcuteRejection => AR_COUNTS.to_vec(),
            CaseStudy::SteroidResistant => SRR_COUNTS.to_vec(),
        }
    }

    pub fn scenario(self, n_reps: usize, seed: u64) -> BinomialScenario {
        let (arm_means, rho) = match self {
            CaseStudy::AcuteRejection => ((0.0, -1.5), 0.875),
            CaseStudy::SteroidResistant => ((-2.0, -3.0), 0.719),
        };
        BinomialScenario {
            name: Some(self.tag().to_string()),
            arm_means,
            arm_var: 1.0,
            rho,
            patient_counts: self.stand_in_counts(),
            n_reps,
            seed,
        }
    }
}

const AR_COUNTS: [(u64, u64); 6] = [(40, 40), (20, 20), (60, 30), (54, 54), (30, 15), (30, 30)];
const SRR_COUNTS: [(u64, u64); 3] = [(54, 54), (50, 50), (40, 40)];

impl fmt::Display for CaseStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CaseStudy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "ar" | "acute" => Ok(CaseStudy::AcuteRejection),
            "srr" | "sr" | "steroid" => Ok(CaseStudy::SteroidResistant),
            _ => Err(Error::InvalidConfig(format!("unknown case study `{s}` (expected ar or srr)"))),
        }
    }
}
