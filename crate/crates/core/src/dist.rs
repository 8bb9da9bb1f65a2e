//! Thin wrappers over the statrs distribution functions used throughout.

use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal, StudentsT};

fn std_normal() -> Normal {
    Normal::standard()
}

pub fn normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

pub fn normal_pdf(x: f64) -> f64 {
    std_normal().pdf(x)
}

pub fn normal_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

/// Quantile of Student's t with `df` degrees of freedom.
pub fn t_quantile(df: f64, p: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("df must be positive")
        .inverse_cdf(p)
}

pub fn t_pdf(df: f64, x: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("df must be positive")
        .pdf(x)
}

pub fn t_cdf(df: f64, x: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("df must be positive")
        .cdf(x)
}

pub fn chi2_quantile(df: f64, p: f64) -> f64 {
    ChiSquared::new(df)
        .expect("df must be positive")
        .inverse_cdf(p)
}
