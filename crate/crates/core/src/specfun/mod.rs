//! Scalar special functions: ascending factorials, generalized hypergeometric
//! series, the three-variable Humbert function and the regularized upper
//! incomplete gamma function.
//!
//! Every infinite series is governed by a [`SeriesControl`]. A series that
//! exhausts its term budget is reported through [`SeriesResult::converged`]
//! (or an [`Error::NonConvergence`](crate::Error::NonConvergence) on the
//! log-space paths) and is never silently truncated.

mod hypergeo;
mod incgamma;
mod pochhammer;
mod psi2;

pub use hypergeo::{
    f01_recurrence_check, genhypergeo, kummer_transform_check, log_hyp0f1, log_hyp1f1, series_pfq,
    RecurrenceCheck,
};
pub use incgamma::{chisq_sf, regularized_gamma_upper};
pub use pochhammer::{binomial, ln_factorial, log_pochhammer, poch_sum_split, pochhammer};
pub use psi2::{psi2_3, Psi2Output};

pub use statrs::function::gamma::ln_gamma;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping rule for infinite series.
///
/// A series stops once the magnitude of the last added term is at most
/// `tol` times the magnitude of the partial sum and the terms have started
/// to decrease. `tol == 0` keeps adding terms until they no longer change
/// the partial sum in double precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub tol: f64,
    pub maxiter: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            tol: 1e-10,
            maxiter: 2000,
        }
    }
}

impl SeriesControl {
    pub fn new(tol: f64, maxiter: usize) -> Result<Self> {
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(Error::domain(format!(
                "series tolerance must be >= 0, got {tol}"
            )));
        }
        if maxiter == 0 {
            return Err(Error::domain("series maxiter must be >= 1"));
        }
        Ok(SeriesControl { tol, maxiter })
    }

    /// Iterate to full double precision.
    pub fn exact() -> Self {
        SeriesControl {
            tol: 0.0,
            maxiter: 5000,
        }
    }

    /// Whether `term` no longer matters relative to `sum`.
    #[inline]
    pub(crate) fn negligible(&self, term: f64, sum: f64) -> bool {
        if self.tol == 0.0 {
            sum + term == sum
        } else {
            term.abs() <= self.tol * sum.abs()
        }
    }

    /// Same test with both quantities given as natural logarithms of
    /// positive numbers.
    #[inline]
    pub(crate) fn negligible_log(&self, log_term: f64, log_sum: f64) -> bool {
        if log_term == f64::NEG_INFINITY {
            return true;
        }
        let threshold = if self.tol == 0.0 {
            f64::EPSILON.ln() - std::f64::consts::LN_2
        } else {
            self.tol.ln()
        };
        log_term - log_sum <= threshold
    }
}

/// Outcome of summing a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
}

impl SeriesResult {
    /// Turn a non-converged result into an error naming the series.
    pub fn require(self, what: &str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NonConvergence {
                what: what.to_string(),
                terms: self.terms_used,
            })
        }
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
#[inline]
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Numerically stable `ln Σ exp(v)`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let s: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_validation() {
        assert!(SeriesControl::new(-1.0, 10).is_err());
        assert!(SeriesControl::new(1e-8, 0).is_err());
        assert!(SeriesControl::new(f64::NAN, 10).is_err());
        let c = SeriesControl::default();
        assert_eq!(c.tol, 1e-10);
        assert_eq!(c.maxiter, 2000);
    }

    #[test]
    fn negligible_rules() {
        let c = SeriesControl::exact();
        assert!(c.negligible(1e-17, 1.0));
        assert!(!c.negligible(1e-15, 1.0));
        let c = SeriesControl::default();
        assert!(c.negligible(1e-11, 1.0));
        assert!(!c.negligible(1e-9, 1.0));
        assert!(c.negligible_log((1e-11f64).ln(), 0.0));
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let v = [0.1, -2.0, 3.5];
        let direct: f64 = v.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&v) - direct).abs() < 1e-14);
        assert!((log_add_exp(0.1, 3.5) - (0.1f64.exp() + 3.5f64.exp()).ln()).abs() < 1e-14);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn require_reports_non_convergence() {
        let r = SeriesResult {
            value: 1.0,
            terms_used: 7,
            converged: false,
        };
        match r.require("0F1") {
            Err(Error::NonConvergence { terms, .. }) => assert_eq!(terms, 7),
            other => panic!("unexpected {other:?}"),
        }
    }
}
