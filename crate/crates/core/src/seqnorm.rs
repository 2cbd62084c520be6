//! Sequence-space norms over Faber coefficients.
//!
//! `‖c | s^r_{p,q}b‖ = ( sum_j [ 2^{|j|_1 (r - 1/p)} (sum_k |c_{j,k}|^p)^{1/p} ]^q )^{1/q}`
//! evaluated over the levels stored in a truncated series, so every value is a
//! lower bound of the norm of the full expansion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::LevelVector;
use crate::error::{FaberError, Result};
use crate::faber::{analyze, FaberSeries, FunctionHandle};

/// An integrability exponent in `(0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinity => None,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            _ => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .map(Exponent::Finite)
                .ok_or_else(|| format!("`{s}` is not a positive exponent or `inf`")),
        }
    }
}

/// Parameters `(r, p, q)` of `s^r_{p,q}b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormParams {
    r: f64,
    p: f64,
    q: Exponent,
}

impl NormParams {
    pub fn new(r: f64, p: f64, q: Exponent) -> Result<Self> {
        if !r.is_finite() {
            return Err(FaberError::InvalidParameter(format!("smoothness r = {r}")));
        }
        check_p(p)?;
        if let Exponent::Finite(q) = q {
            if !(q > 0.0 && q.is_finite()) {
                return Err(FaberError::InvalidParameter(format!("q = {q} must be > 0")));
            }
        }
        Ok(Self { r, p, q })
    }

    /// `s^{1/p}_{p,q}b`, the limiting scale where the level weight is one.
    pub fn limiting(p: f64, q: Exponent) -> Result<Self> {
        Self::new(1.0 / p, p, q)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> Exponent {
        self.q
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(FaberError::InvalidParameter(format!(
            "p = {p} must lie in [1, inf)"
        )))
    }
}

pub(crate) fn lp(values: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        values.iter().map(|v| v.abs()).sum()
    } else {
        values
            .iter()
            .map(|v| v.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// `(sum_k |c_{j,k}|^p)^{1/p}` for one stored level.
pub fn level_lp(s: &FaberSeries, j: &LevelVector, p: f64) -> Result<f64> {
    check_p(p)?;
    let data = s
        .level_coeffs(j)
        .ok_or_else(|| FaberError::MissingLevel(j.to_string()))?;
    Ok(lp(data, p))
}

/// The truncated `s^r_{p,q}b` norm.
pub fn seq_norm(s: &FaberSeries, params: &NormParams) -> f64 {
    let weighted = s.iter().map(|(j, data)| {
        let weight = (j.reduced_order() as f64 * (params.r - 1.0 / params.p)).exp2();
        weight * lp(data, params.p)
    });
    match params.q {
        Exponent::Infinity => weighted.fold(0.0, f64::max),
        Exponent::Finite(q) => weighted.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q),
    }
}

/// Per reduced order `ℓ = 0..=n`, the largest `level_lp` over `|j|_1 = ℓ`.
pub fn series_profile(s: &FaberSeries, p: f64) -> Result<Vec<(u32, f64)>> {
    check_p(p)?;
    let mut profile: Vec<(u32, f64)> = (0..=s.budget()).map(|l| (l, 0.0)).collect();
    for (j, data) in s.iter() {
        let slot = &mut profile[j.reduced_order() as usize].1;
        *slot = slot.max(lp(data, p));
    }
    Ok(profile)
}

/// Coefficient decay profile of `f` up to order `n`. A flat or decaying
/// profile is the empirical signature of membership in `S^{1/p}_{p,1}B`.
pub fn decay_profile(f: &FunctionHandle, p: f64, n: u32) -> Result<Vec<(u32, f64)>> {
    if n < 2 {
        return Err(FaberError::InvalidParameter(format!(
            "decay profile needs n >= 2, got {n}"
        )));
    }
    check_p(p)?;
    series_profile(&analyze(f, n)?, p)
}
