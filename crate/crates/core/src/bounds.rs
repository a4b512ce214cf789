use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{DfolsError, Result};

/// Box constraints `lower <= x <= upper`. Infinite entries are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(DfolsError::DimensionMismatch(format!(
                "lower has {} entries, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l.is_nan() || u.is_nan() || l > u) {
            return Err(DfolsError::InvalidParameter("bounds must satisfy lower <= upper".into()));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn unbounded(n: usize) -> Self {
        Bounds { lower: vec![f64::NEG_INFINITY; n], upper: vec![f64::INFINITY; n] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| *v >= *l && *v <= *u)
    }

    /// Componentwise projection onto the box.
    pub fn clip(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            x.len(),
            x.iter().zip(&self.lower).zip(&self.upper).map(|((v, l), u)| v.max(*l).min(*u)),
        )
    }

    /// Bounds on a step `s` taken from `x`, i.e. `lower - x <= s <= upper - x`.
    pub fn shifted(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let lo = DVector::from_iterator(x.len(), self.lower.iter().zip(x.iter()).map(|(l, v)| l - v));
        let hi = DVector::from_iterator(x.len(), self.upper.iter().zip(x.iter()).map(|(u, v)| u - v));
        (lo, hi)
    }
}
