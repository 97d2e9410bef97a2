use super::NcChisqParams;
use crate::error::{Error, Result};
use crate::specfun::{ln_factorial, ln_gamma, log_add_exp, SeriesControl};

/// `ln` of the central chi-squared density with `k` degrees of freedom.
pub(crate) fn chisq_logpdf(k: f64, y: f64) -> f64 {
    let h = k / 2.0;
    (h - 1.0) * y.ln() - y / 2.0 - h * std::f64::consts::LN_2 - ln_gamma(h)
}

/// Log density of the non-central chi-squared distribution as a
/// Poisson(λ/2) mixture of central chi-squared densities.
///
/// With zero degrees of freedom the law has an atom `e^{-λ/2}` at zero; the
/// value returned is then the density of the continuous part.
pub fn ncchisq_logpdf(p: &NcChisqParams, y: f64, ctl: SeriesControl) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain(format!(
            "chi-squared density needs y > 0, got {y}"
        )));
    }
    let g = p.dof();
    let half = p.lambda() / 2.0;
    if half == 0.0 {
        return Ok(chisq_logpdf(g, y));
    }
    let first = if g == 0.0 { 1 } else { 0 };
    let term = |i: u64| {
        -half + i as f64 * half.ln() - ln_factorial(i) + chisq_logpdf(g + 2.0 * i as f64, y)
    };
    let mut log_sum = term(first);
    let mut prev = log_sum;
    for n in 1..ctl.maxiter as u64 {
        let t = term(first + n);
        log_sum = log_add_exp(log_sum, t);
        if ctl.negligible_log(t, log_sum) && t <= prev {
            return Ok(log_sum);
        }
        prev = t;
    }
    Err(Error::NonConvergence {
        what: "non-central chi-squared".into(),
        terms: ctl.maxiter,
    })
}
