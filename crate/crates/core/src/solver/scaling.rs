use nalgebra::DVector;

use crate::bounds::Bounds;
use crate::error::{DfolsError, Result};

/// Affine map of the box `[lower, upper]` onto `[0, 1]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableScaling {
    shift: DVector<f64>,
    scale: DVector<f64>,
}

impl VariableScaling {
    pub fn new(bounds: &Bounds) -> Result<Self> {
        if !bounds.is_finite() {
            return Err(DfolsError::InfiniteBounds);
        }
        let shift = DVector::from_column_slice(&bounds.lower);
        let scale = DVector::from_iterator(bounds.dim(), bounds.lower.iter().zip(&bounds.upper).map(|(l, u)| u - l));
        if scale.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(DfolsError::InvalidParameter("scaling needs lower < upper on every variable".into()));
        }
        Ok(VariableScaling { shift, scale })
    }

    pub fn to_scaled(&self, x: &DVector<f64>) -> DVector<f64> {
        (x - &self.shift).component_div(&self.scale)
    }

    pub fn to_original(&self, z: &DVector<f64>) -> DVector<f64> {
        z.component_mul(&self.scale) + &self.shift
    }

    pub fn scaled_bounds(&self) -> Bounds {
        let n = self.shift.len();
        Bounds { lower: vec![0.0; n], upper: vec![1.0; n] }
    }
}
