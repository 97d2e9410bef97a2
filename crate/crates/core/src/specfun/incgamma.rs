use statrs::function::gamma::checked_gamma_ur;

use crate::error::{Error, Result};

/// Regularized upper incomplete gamma function `Q(s, x) = Γ(s, x) / Γ(s)`.
pub fn regularized_gamma_upper(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!(
            "incomplete gamma shape must be positive, got {s}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!(
            "incomplete gamma argument must be >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    checked_gamma_ur(s, x)
        .map(|q| q.clamp(0.0, 1.0))
        .map_err(|e| Error::domain(e.to_string()))
}

/// Survival function of a chi-squared variable with `df` degrees of freedom.
pub fn chisq_sf(w: f64, df: f64) -> Result<f64> {
    regularized_gamma_upper(df / 2.0, w.max(0.0) / 2.0)
}
