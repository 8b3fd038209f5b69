use std::fmt;

use crate::error::{Error, Result};

/// Errors at or below this level count as exact reproduction.
pub const EXACT_TOL: f64 = 1e-9;

/// Observed order between two consecutive levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Value(f64),
    /// One of the two errors vanishes, so the rate is undefined.
    Exact,
}

impl Rate {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(v),
            Self::Exact => None,
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Value(v) => write!(f, "{v:.4}"),
            Self::Exact => f.write_str("exact"),
        }
    }
}

/// `log(e_i / e_{i+1}) / log(s_i / s_{i+1})` for each consecutive pair.
pub fn estimate_rates(errors: &[f64], scales: &[f64]) -> Result<Vec<Rate>> {
    if errors.len() != scales.len() || errors.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "rates need two or more levels of equal length (got {} errors, {} scales)",
            errors.len(),
            scales.len()
        )));
    }
    if let Some(s) = scales.iter().find(|s| !(**s > 0.0)) {
        return Err(Error::InvalidArgument(format!("scale {s} is not positive")));
    }
    errors
        .windows(2)
        .zip(scales.windows(2))
        .map(|(e, s)| {
            if s[0] == s[1] {
                return Err(Error::InvalidArgument(format!("repeated scale {}", s[0])));
            }
            if e[0] <= EXACT_TOL || e[1] <= EXACT_TOL {
                return Ok(Rate::Exact);
            }
            Ok(Rate::Value((e[0] / e[1]).ln() / (s[0] / s[1]).ln()))
        })
        .collect()
}
