use super::{log_add_exp, log_hyp1f1, SeriesControl, SeriesResult};
use crate::error::{Error, Result};

/// Value of the three-variable Humbert function together with its log and,
/// on request, the sequence of outer-sum terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Psi2Output {
    /// `value` may be infinite when the function overflows; `log_value` is
    /// always finite for valid input.
    pub series: SeriesResult,
    pub log_value: f64,
    pub trace: Option<Vec<f64>>,
}

/// `ln 1F1(a + k; b3; x3)` memoized over `k = j1 + j2`.
struct InnermostCache {
    a: f64,
    b3: f64,
    x3: f64,
    ctl: SeriesControl,
    logs: Vec<f64>,
}

impl InnermostCache {
    fn get(&mut self, k: usize) -> Result<f64> {
        while self.logs.len() <= k {
            let kk = self.logs.len();
            let v = log_hyp1f1(self.a + kk as f64, self.b3, self.x3, self.ctl)
                .map_err(|e| e.with_context(format!("humbert innermost level, k={kk}")))?;
            self.logs.push(v);
        }
        Ok(self.logs[k])
    }
}

/// `Psi2^(3)(a; b1, b2, b3; x1, x2, x3)` as a double sum over `(j1, j2)` of
/// confluent hypergeometric functions `1F1(a + j1 + j2; b3; x3)`.
///
/// All accumulation is done in log space. Both the outer and the middle sum
/// use the stopping rule of `ctl`.
pub fn psi2_3(
    a: f64,
    b: [f64; 3],
    x: [f64; 3],
    ctl: SeriesControl,
    debug: bool,
) -> Result<Psi2Output> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!(
            "Humbert function needs a > 0, got {a}"
        )));
    }
    if b.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!(
            "Humbert function needs positive b, got {b:?}"
        )));
    }
    if x.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!(
            "Humbert function needs finite x >= 0, got {x:?}"
        )));
    }
    let [b1, b2, b3] = b;
    let [x1, x2, x3] = x;
    let mut cache = InnermostCache {
        a,
        b3,
        x3,
        ctl,
        logs: Vec::new(),
    };
    let mut trace = debug.then(Vec::new);

    let mut log_sum = f64::NEG_INFINITY;
    let mut log_coef = 0.0;
    let mut prev = f64::INFINITY;
    for j1 in 0..ctl.maxiter {
        if j1 > 0 {
            if x1 == 0.0 {
                return Ok(finish(log_sum, j1, trace));
            }
            let n = j1 as f64;
            log_coef += ((a + n - 1.0) / (b1 + n - 1.0) * x1 / n).ln();
        }
        let log_term = log_coef + middle_sum(a + j1 as f64, j1, b2, x2, &mut cache, ctl)?;
        log_sum = log_add_exp(log_sum, log_term);
        if let Some(t) = trace.as_mut() {
            t.push(log_term.exp());
        }
        if j1 > 0 && ctl.negligible_log(log_term, log_sum) && log_term <= prev {
            return Ok(finish(log_sum, j1 + 1, trace));
        }
        prev = log_term;
    }
    Err(Error::NonConvergence {
        what: "humbert outer level".into(),
        terms: ctl.maxiter,
    })
}

fn finish(log_sum: f64, terms_used: usize, trace: Option<Vec<f64>>) -> Psi2Output {
    Psi2Output {
        series: SeriesResult {
            value: log_sum.exp(),
            terms_used,
            converged: true,
        },
        log_value: log_sum,
        trace,
    }
}

/// `ln Σ_{j2} (s)_{j2}/(b2)_{j2} x2^{j2}/j2! 1F1(s + j2; b3; x3)` with `s = a + j1`.
fn middle_sum(
    s: f64,
    j1: usize,
    b2: f64,
    x2: f64,
    cache: &mut InnermostCache,
    ctl: SeriesControl,
) -> Result<f64> {
    let mut log_sum = cache.get(j1)?;
    if x2 == 0.0 {
        return Ok(log_sum);
    }
    let mut log_coef = 0.0;
    let mut prev = log_sum;
    for j2 in 1..ctl.maxiter {
        let n = j2 as f64;
        log_coef += ((s + n - 1.0) / (b2 + n - 1.0) * x2 / n).ln();
        let log_term = log_coef + cache.get(j1 + j2)?;
        log_sum = log_add_exp(log_sum, log_term);
        if ctl.negligible_log(log_term, log_sum) && log_term <= prev {
            return Ok(log_sum);
        }
        prev = log_term;
    }
    Err(Error::NonConvergence {
        what: format!("humbert middle level, j1={j1}"),
        terms: ctl.maxiter,
    })
}
