use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the open unit simplex: `D` coordinates in `(0, 1)` with sum
/// strictly below one. The implicit last coordinate is the remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint {
    coords: Vec<f64>,
    remainder: f64,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::domain("simplex point needs at least one coordinate"));
        }
        if let Some(c) = coords.iter().find(|c| !(**c > 0.0 && **c < 1.0)) {
            return Err(Error::domain(format!(
                "simplex coordinate {c} is not in (0, 1)"
            )));
        }
        let remainder = 1.0 - coords.iter().sum::<f64>();
        if !(remainder > 0.0) {
            return Err(Error::domain(format!(
                "simplex coordinates {coords:?} do not sum to less than 1"
            )));
        }
        Ok(SimplexPoint { coords, remainder })
    }

    /// Build from all `D + 1` parts, taking the remainder as given instead of
    /// recomputing it. The parts must be positive and sum to one up to rounding.
    pub fn from_parts(parts: &[f64]) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::domain("simplex point needs at least two parts"));
        }
        let total: f64 = parts.iter().sum();
        if parts.iter().any(|p| !(*p > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "parts {parts:?} are not a point of the simplex"
            )));
        }
        let (coords, last) = parts.split_at(parts.len() - 1);
        if coords.iter().any(|c| !(*c < 1.0)) {
            return Err(Error::domain(format!(
                "parts {parts:?} are not a point of the simplex"
            )));
        }
        // the coordinates alone may round to a sum of one
        Ok(SimplexPoint {
            coords: coords.to_vec(),
            remainder: last[0],
        })
    }

    pub fn bivariate(x1: f64, x2: f64) -> Result<Self> {
        SimplexPoint::new(vec![x1, x2])
    }

    /// Number of free coordinates `D`.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `1 - Σ x_i`.
    pub fn remainder(&self) -> f64 {
        self.remainder
    }

    /// All `D + 1` parts, remainder last.
    pub fn parts(&self) -> Vec<f64> {
        let mut v = self.coords.clone();
        v.push(self.remainder);
        v
    }
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SimplexPoint::new(v)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Self {
        p.coords
    }
}
