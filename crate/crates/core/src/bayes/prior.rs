use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;
use std::str::FromStr;

use crate::dist::{normal_cdf, normal_pdf, normal_quantile, t_cdf, t_pdf, t_quantile};
use crate::error::{Error, Result};
use crate::model::check_level;

/// Prior distribution for the heterogeneity `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorSpec {
    /// `|X|` with `X ~ N(0, scale^2)`.
    HalfNormal { scale: f64 },
    HalfCauchy { scale: f64 },
    HalfT { df: f64, scale: f64 },
    /// Uniform on `[0, upper]`.
    Uniform { upper: f64 },
    /// Degenerate prior fixing `tau`; the Bayesian analysis then reduces to
    /// the known-`tau` normal result.
    PointMass { tau: f64 },
}

impl PriorSpec {
    pub fn half_normal(scale: f64) -> Result<Self> {
        PriorSpec::HalfNormal { scale }.validated()
    }

    pub fn uniform(upper: f64) -> Result<Self> {
        PriorSpec::Uniform { upper }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidPrior(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            PriorSpec::HalfNormal { scale } | PriorSpec::HalfCauchy { scale } => positive("scale", scale)?,
            PriorSpec::HalfT { df, scale } => {
                positive("scale", scale)?;
                if !(df >= 1.0 && df.is_finite()) {
                    return Err(Error::InvalidPrior(format!("half-t df must be >= 1, got {df}")));
                }
            }
            PriorSpec::Uniform { upper } => positive("upper bound", upper)?,
            PriorSpec::PointMass { tau } => {
                if !(tau >= 0.0 && tau.is_finite()) {
                    return Err(Error::InvalidPrior(format!("point mass must be at tau >= 0, got {tau}")));
                }
            }
        }
        Ok(self)
    }

    /// Density at `tau >= 0`. A point mass reports `+inf` at its location.
    pub fn density(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        match *self {
            PriorSpec::HalfNormal { scale } => 2.0 * normal_pdf(tau / scale) / scale,
            PriorSpec::HalfCauchy { scale } => {
                let z = tau / scale;
                FRAC_2_PI / (scale * (1.0 + z * z))
            }
            PriorSpec::HalfT { df, scale } => 2.0 * t_pdf(df, tau / scale) / scale,
            PriorSpec::Uniform { upper } => {
                if tau <= upper {
                    1.0 / upper
                } else {
                    0.0
                }
            }
            PriorSpec::PointMass { tau: at } => {
                if tau == at {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    /// Log density; cheaper and safer than `density().ln()` in the tails.
    pub fn log_density(&self, tau: f64) -> f64 {
        match *self {
            PriorSpec::HalfNormal { scale } if tau >= 0.0 => {
                let z = tau / scale;
                (2.0 / PI).sqrt().ln() - scale.ln() - 0.5 * z * z
            }
            _ => self.density(tau).ln(),
        }
    }

    pub fn cdf(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return match *self {
                PriorSpec::PointMass { tau: 0.0 } if tau == 0.0 => 1.0,
                _ => 0.0,
            };
        }
        match *self {
            PriorSpec::HalfNormal { scale } => 2.0 * normal_cdf(tau / scale) - 1.0,
            PriorSpec::HalfCauchy { scale } => FRAC_2_PI * (tau / scale).atan(),
            PriorSpec::HalfT { df, scale } => 2.0 * t_cdf(df, tau / scale) - 1.0,
            PriorSpec::Uniform { upper } => (tau / upper).min(1.0),
            PriorSpec::PointMass { tau: at } => {
                if tau >= at {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Inverse CDF for `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            PriorSpec::HalfNormal { scale } => scale * normal_quantile(0.5 + p / 2.0),
            PriorSpec::HalfCauchy { scale } => scale * (PI * p / 2.0).tan(),
            PriorSpec::HalfT { df, scale } => scale * t_quantile(df, 0.5 + p / 2.0),
            PriorSpec::Uniform { upper } => upper * p,
            PriorSpec::PointMass { tau } => tau,
        }
    }

    /// Label in the style used by result tables, e.g. `half-Normal(0.5)`.
    pub fn label(&self) -> String {
        match *self {
            PriorSpec::HalfNormal { scale } => format!("half-Normal({})", fmt_param(scale)),
            PriorSpec::HalfCauchy { scale } => format!("half-Cauchy({})", fmt_param(scale)),
            PriorSpec::HalfT { df, scale } => format!("half-t({},{})", fmt_param(df), fmt_param(scale)),
            PriorSpec::Uniform { upper } => format!("Uniform(0,{upper})"),
            PriorSpec::PointMass { tau } => format!("PointMass({})", fmt_param(tau)),
        }
    }
}

// Keeps one decimal for integral values ("1.0") to match table labels.
fn fmt_param(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e6 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PriorSpec {
    type Err = Error;

    /// Accepts `half-Normal(0.5)`, `HN(0.5)`, `half-Cauchy(1)`, `HC(1)`,
    /// `half-t(3,1)`, `Uniform(0,4)`, `U(0,4)`, `U(4)` and `PointMass(0.3)`,
    /// case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPrior(format!("cannot parse prior `{s}`"));
        let t = s.trim();
        let open = t.find('(').ok_or_else(bad)?;
        if !t.ends_with(')') {
            return Err(bad());
        }
        let name = t[..open].trim().to_ascii_lowercase();
        let args: Vec<f64> = t[open + 1..t.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let spec = match (name.as_str(), args.as_slice()) {
            ("half-normal" | "halfnormal" | "hn", [scale]) => PriorSpec::HalfNormal { scale: *scale },
            ("half-cauchy" | "halfcauchy" | "hc", [scale]) => PriorSpec::HalfCauchy { scale: *scale },
            ("half-t" | "halft" | "ht", [df, scale]) => PriorSpec::HalfT { df: *df, scale: *scale },
            ("uniform" | "u", [lo, upper]) if *lo == 0.0 => PriorSpec::Uniform { upper: *upper },
            ("uniform" | "u", [upper]) => PriorSpec::Uniform { upper: *upper },
            ("pointmass" | "point", [tau]) => PriorSpec::PointMass { tau: *tau },
            _ => return Err(bad()),
        };
        spec.validated()
    }
}

/// Central interval for across-study odds ratios `exp(theta_j)` at a given
/// `tau`, conditional on `mu = 0`.
pub fn across_trial_or_interval(tau: f64, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    let z = normal_quantile(0.5 + level / 2.0);
    Ok(((-z * tau).exp(), (z * tau).exp()))
}
