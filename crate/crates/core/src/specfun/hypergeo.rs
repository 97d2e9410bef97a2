use super::{SeriesControl, SeriesResult};
use crate::error::{Error, Result};

/// Rescale a positive running sum once it passes this magnitude.
const RESCALE_AT: f64 = 1e280;

/// Below this argument the confluent series is evaluated through Kummer's
/// transformation instead of summing an alternating series.
const KUMMER_THRESHOLD: f64 = -30.0;

fn check_lower(lower: &[f64]) -> Result<()> {
    for &b in lower {
        if !b.is_finite() || (b <= 0.0 && b == b.round()) {
            return Err(Error::domain(format!(
                "lower hypergeometric parameter {b} is a nonpositive integer or not finite"
            )));
        }
    }
    Ok(())
}

/// Plain partial sums of `pFq(upper; lower; x)` with no transformation.
pub fn series_pfq(
    upper: &[f64],
    lower: &[f64],
    x: f64,
    ctl: SeriesControl,
) -> Result<SeriesResult> {
    check_lower(lower)?;
    if !x.is_finite() || upper.iter().any(|a| !a.is_finite()) {
        return Err(Error::domain("hypergeometric arguments must be finite"));
    }
    if x == 0.0 {
        return Ok(SeriesResult {
            value: 1.0,
            terms_used: 1,
            converged: true,
        });
    }
    let mut sum = 1.0;
    let mut term = 1.0f64;
    for n in 1..ctl.maxiter {
        let k = (n - 1) as f64;
        let mut ratio = x / (k + 1.0);
        for &a in upper {
            ratio *= a + k;
        }
        for &b in lower {
            ratio /= b + k;
        }
        let prev = term.abs();
        term *= ratio;
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NonConvergence {
                what: "hypergeometric (overflow)".into(),
                terms: n + 1,
            });
        }
        if term == 0.0 || (ctl.negligible(term, sum) && term.abs() <= prev) {
            return Ok(SeriesResult {
                value: sum,
                terms_used: n + 1,
                converged: true,
            });
        }
    }
    Ok(SeriesResult {
        value: sum,
        terms_used: ctl.maxiter,
        converged: false,
    })
}

/// Generalized hypergeometric function `pFq(upper; lower; x)`.
///
/// For the confluent case `1F1` with strongly negative argument the series is
/// summed after Kummer's transformation `1F1(a;b;x) = e^x 1F1(b-a;b;-x)`.
pub fn genhypergeo(
    upper: &[f64],
    lower: &[f64],
    x: f64,
    ctl: SeriesControl,
) -> Result<SeriesResult> {
    if upper.len() == 1 && lower.len() == 1 && x < KUMMER_THRESHOLD {
        check_lower(lower)?;
        let (a, b) = (upper[0], lower[0]);
        let r = series_pfq(&[b - a], &[b], -x, ctl)?;
        return Ok(SeriesResult {
            value: x.exp() * r.value,
            ..r
        });
    }
    series_pfq(upper, lower, x, ctl)
}

/// Log of a series whose terms are all nonnegative, with term ratio
/// `ratio(k)` taking term `k` to term `k+1`.
fn log_positive_series(
    what: &str,
    ctl: SeriesControl,
    mut ratio: impl FnMut(f64) -> f64,
) -> Result<f64> {
    let mut log_scale = 0.0;
    let mut sum = 1.0;
    let mut term = 1.0f64;
    for n in 1..ctl.maxiter {
        let prev = term;
        term *= ratio((n - 1) as f64);
        sum += term;
        if term == 0.0 || (ctl.negligible(term, sum) && term <= prev) {
            return Ok(log_scale + sum.ln());
        }
        if sum > RESCALE_AT {
            log_scale += sum.ln();
            term /= sum;
            sum = 1.0;
        }
    }
    Err(Error::NonConvergence {
        what: what.to_string(),
        terms: ctl.maxiter,
    })
}

/// `ln 0F1(; b; x)` for `b > 0`, `x >= 0`, safe for arguments whose value
/// overflows double precision.
pub fn log_hyp0f1(b: f64, x: f64, ctl: SeriesControl) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain(format!(
            "0F1 lower parameter must be positive, got {b}"
        )));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "log 0F1 needs a finite argument >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    log_positive_series("0F1", ctl, |k| x / ((b + k) * (k + 1.0)))
}

/// `ln 1F1(a; b; x)`.
///
/// Negative arguments are mapped through Kummer's transformation whenever
/// that yields a series of positive terms, so no cancellation occurs on the
/// density path. Other sign patterns fall back to [`genhypergeo`].
pub fn log_hyp1f1(a: f64, b: f64, x: f64, ctl: SeriesControl) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() || !a.is_finite() || !x.is_finite() {
        return Err(Error::domain(format!(
            "invalid 1F1 arguments a={a} b={b} x={x}"
        )));
    }
    if x == 0.0 || a == 0.0 {
        return Ok(0.0);
    }
    if x > 0.0 && a > 0.0 {
        return log_positive_series("1F1", ctl, |k| (a + k) * x / ((b + k) * (k + 1.0)));
    }
    if x < 0.0 && b - a >= 0.0 {
        let c = b - a;
        if c == 0.0 {
            return Ok(x);
        }
        let y = -x;
        return Ok(x + log_positive_series("1F1", ctl, |k| (c + k) * y / ((b + k) * (k + 1.0)))?);
    }
    let v = genhypergeo(&[a], &[b], x, ctl)?.require("1F1")?;
    if v > 0.0 {
        Ok(v.ln())
    } else {
        Err(Error::domain(format!(
            "1F1({a};{b};{x}) = {v} has no real logarithm"
        )))
    }
}

/// Both sides of Kummer's first theorem, each summed directly:
/// `(1F1(a;b;x), e^x 1F1(b-a;b;-x))`.
pub fn kummer_transform_check(a: f64, b: f64, x: f64, ctl: SeriesControl) -> Result<(f64, f64)> {
    if !(b > 0.0) {
        return Err(Error::domain(format!("Kummer check needs b > 0, got {b}")));
    }
    let lhs = series_pfq(&[a], &[b], x, ctl)?.require("1F1")?;
    let rhs = x.exp() * series_pfq(&[b - a], &[b], -x, ctl)?.require("1F1")?;
    Ok((lhs, rhs))
}

/// Three consecutive `0F1` values used by the contiguous recurrence
/// `0F1(b;x) = 0F1(b+1;x) + x/(b(b+1)) 0F1(b+2;x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceCheck {
    pub b: f64,
    pub x: f64,
    pub values: [f64; 3],
}

impl RecurrenceCheck {
    /// `|lhs - rhs| / |lhs|` of the recurrence.
    pub fn relative_residual(&self) -> f64 {
        let [f0, f1, f2] = self.values;
        let rhs = f1 + self.x / (self.b * (self.b + 1.0)) * f2;
        (f0 - rhs).abs() / f0.abs()
    }
}

/// Evaluate `0F1(b;x)`, `0F1(b+1;x)` and `0F1(b+2;x)` independently.
pub fn f01_recurrence_check(b: f64, x: f64, ctl: SeriesControl) -> Result<RecurrenceCheck> {
    if !(b > 0.0) || !(x >= 0.0) {
        return Err(Error::domain(format!(
            "recurrence check needs b > 0 and x >= 0, got b={b} x={x}"
        )));
    }
    let mut values = [0.0; 3];
    for (i, v) in values.iter_mut().enumerate() {
        *v = series_pfq(&[], &[b + i as f64], x, ctl)?.require("0F1")?;
    }
    Ok(RecurrenceCheck { b, x, values })
}
