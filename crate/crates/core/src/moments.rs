//! Mixed raw moments of the bivariate CNcDir law: the finite closed form,
//! two series oracles and the specialised order-(1,1) expressions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{cncdir_marginal, CNcDirParams};
use crate::specfun::{
    binomial, genhypergeo, ln_factorial, log_hyp0f1, log_pochhammer, log_sum_exp, SeriesControl,
};

/// Order `(r1, r2)` of a mixed raw moment `E[X1^r1 X2^r2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentOrder {
    pub r1: u64,
    pub r2: u64,
}

impl MomentOrder {
    pub fn new(r1: u64, r2: u64) -> Self {
        MomentOrder { r1, r2 }
    }

    pub fn total(&self) -> u64 {
        self.r1 + self.r2
    }
}

fn bivariate(p: &CNcDirParams) -> Result<([f64; 3], [f64; 3])> {
    let alpha: [f64; 3] = p
        .alpha()
        .try_into()
        .map_err(|_| Error::domain("mixed moments are defined for the bivariate law"))?;
    let lambda: [f64; 3] = p.lambda().try_into().expect("validated parameters");
    Ok((alpha, lambda))
}

/// `j ln(λ/4)` with the convention `0^0 = 1`; `None` for a vanishing power.
fn log_power(lambda: f64, j: u64) -> Option<f64> {
    if j == 0 {
        Some(0.0)
    } else if lambda == 0.0 {
        None
    } else {
        Some(j as f64 * (lambda / 4.0).ln())
    }
}

/// `E[X1^r1 X2^r2]` as the doubly finite sum over `j1 ≤ r1`, `j2 ≤ r2` of
/// binomially weighted `0F1` ratios. All terms are positive and accumulated
/// in log space.
pub fn cncdir_mixed_moment(p: &CNcDirParams, r: MomentOrder, ctl: SeriesControl) -> Result<f64> {
    let (a, l) = bivariate(p)?;
    let ap = p.alpha_plus();
    let lp = p.lambda_plus();
    let rp = r.total();
    let prefactor =
        log_pochhammer(a[0], r.r1) + log_pochhammer(a[1], r.r2) - log_pochhammer(ap, rp);
    let log_norm = log_hyp0f1(ap, lp / 4.0, ctl)?;
    let mut terms = Vec::new();
    for j1 in 0..=r.r1 {
        let Some(w1) = log_power(l[0], j1) else { break };
        for j2 in 0..=r.r2 {
            let Some(w2) = log_power(l[1], j2) else { break };
            let jp = j1 + j2;
            let lower = ap + rp as f64 + jp as f64;
            terms.push(
                binomial(r.r1 as f64, j1).ln() + binomial(r.r2 as f64, j2).ln() + w1 + w2
                    - log_pochhammer(a[0], j1)
                    - log_pochhammer(a[1], j2)
                    - log_pochhammer(ap + rp as f64, jp)
                    + log_hyp0f1(lower, lp / 4.0, ctl)?,
            );
        }
    }
    Ok((prefactor + log_sum_exp(&terms) - log_norm).exp())
}

/// Moment of any two components `(i, k)` of a CNcDir law of arbitrary
/// dimension, through their bivariate marginal.
pub fn cncdir_pair_moment(
    p: &CNcDirParams,
    pair: (usize, usize),
    r: MomentOrder,
    ctl: SeriesControl,
) -> Result<f64> {
    let marginal = cncdir_marginal(p, &[pair.0, pair.1])?;
    cncdir_mixed_moment(&marginal, r, ctl)
}

/// A truncated series with the mixing mass it leaves out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSeries {
    pub value: f64,
    pub tail_mass: f64,
}

/// Oracle summing Dirichlet moments `(α1+j1)_{r1} (α2+j2)_{r2} / (α⁺+j⁺)_{r⁺}`
/// against the mixture-weight probabilities over `j⁺ ≤ truncation`.
pub fn cncdir_moment_series_oracle(
    p: &CNcDirParams,
    r: MomentOrder,
    truncation: u64,
) -> Result<TruncatedSeries> {
    if truncation < 1 {
        return Err(Error::domain("oracle truncation must be at least 1"));
    }
    let (a, l) = bivariate(p)?;
    let ap = p.alpha_plus();
    let rp = r.total();
    let log_norm = log_hyp0f1(ap, p.lambda_plus() / 4.0, SeriesControl::exact())?;
    let log_w = |lam: f64, j: u64| log_power(lam, j).map(|w| w - ln_factorial(j));

    let mut weights = Vec::new();
    let mut terms = Vec::new();
    for j1 in 0..=truncation {
        let Some(w1) = log_w(l[0], j1) else { break };
        for j2 in 0..=truncation - j1 {
            let Some(w2) = log_w(l[1], j2) else { break };
            for j3 in 0..=truncation - j1 - j2 {
                let Some(w3) = log_w(l[2], j3) else { break };
                let jp = j1 + j2 + j3;
                let lw = w1 + w2 + w3 - log_pochhammer(ap, jp) - log_norm;
                let moment = log_pochhammer(a[0] + j1 as f64, r.r1)
                    + log_pochhammer(a[1] + j2 as f64, r.r2)
                    - log_pochhammer(ap + jp as f64, rp);
                weights.push(lw);
                terms.push(lw + moment);
            }
        }
    }
    Ok(TruncatedSeries {
        value: log_sum_exp(&terms).exp(),
        tail_mass: (1.0 - log_sum_exp(&weights).exp()).max(0.0),
    })
}

/// Second oracle: the double sum over `(j2, j3)` of `1F2` functions in `λ1/4`,
/// truncated at `j2 + j3 ≤ truncation`. The tail is not bounded here.
pub fn cncdir_moment_1f2_oracle(p: &CNcDirParams, r: MomentOrder, truncation: u64) -> Result<f64> {
    let (a, l) = bivariate(p)?;
    let ap = p.alpha_plus();
    let rp = r.total() as f64;
    let ctl = SeriesControl::exact();
    let prefactor =
        log_pochhammer(a[0], r.r1) + log_pochhammer(a[1], r.r2) - log_pochhammer(ap, r.total());
    let log_norm = log_hyp0f1(ap, p.lambda_plus() / 4.0, ctl)?;
    let mut terms = Vec::new();
    for j2 in 0..=truncation {
        let Some(w2) = log_power(l[1], j2) else { break };
        for j3 in 0..=truncation - j2 {
            let Some(w3) = log_power(l[2], j3) else { break };
            let k = j2 + j3;
            let f12 = genhypergeo(
                &[a[0] + r.r1 as f64],
                &[a[0], ap + rp + k as f64],
                l[0] / 4.0,
                ctl,
            )?
            .require("1F2")?;
            terms.push(
                log_pochhammer(a[1] + r.r2 as f64, j2)
                    - log_pochhammer(a[1], j2)
                    - log_pochhammer(ap + rp, k)
                    + w2
                    - ln_factorial(j2)
                    + w3
                    - ln_factorial(j3)
                    + f12.ln(),
            );
        }
    }
    Ok((prefactor + log_sum_exp(&terms) - log_norm).exp())
}

/// The two closed forms of `E[X1 X2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moment11 {
    /// Four `0F1` evaluations.
    pub three_term: f64,
    /// Three `0F1` evaluations, after the contiguous recurrence.
    pub reduced: f64,
}

pub fn cncdir_moment_11(p: &CNcDirParams, ctl: SeriesControl) -> Result<Moment11> {
    let (a, l) = bivariate(p)?;
    let ap = p.alpha_plus();
    let lp = p.lambda_plus();
    let z = lp / 4.0;
    let log_norm = log_hyp0f1(ap, z, ctl)?;
    let ratio =
        |shift: f64| -> Result<f64> { Ok((log_hyp0f1(ap + shift, z, ctl)? - log_norm).exp()) };
    let (q1, q2) = (l[0] / 4.0, l[1] / 4.0);
    let (f2, f3, f4) = (ratio(2.0)?, ratio(3.0)?, ratio(4.0)?);
    let p2 = ap * (ap + 1.0);
    let p3 = p2 * (ap + 2.0);
    let p4 = p3 * (ap + 3.0);

    let three_term = a[0] * a[1] / p2 * f2 + (a[0] * q2 + a[1] * q1) / p3 * f3 + q1 * q2 / p4 * f4;
    let c = if lp == 0.0 {
        0.0
    } else {
        l[0] * l[1] / (4.0 * lp)
    };
    let reduced = (a[0] * a[1] + c) / p2 * f2 + (a[0] * q2 + a[1] * q1 - c * (ap + 2.0)) / p3 * f3;
    Ok(Moment11 {
        three_term,
        reduced,
    })
}

/// Both sides of Ljunggren's identity
/// `Σ_k C(α+k,k) C(n,k) (x-y)^{n-k} y^k = Σ_k C(α,k) C(n,k) x^{n-k} y^k`.
pub fn ljunggren_identity_check(alpha: u64, n: u64, x: f64, y: f64) -> Result<(f64, f64)> {
    if n > 25 {
        return Err(Error::domain("identity check is limited to n <= 25"));
    }
    let a = alpha as f64;
    let mut left = 0.0;
    let mut right = 0.0;
    for k in 0..=n {
        let c = binomial(n as f64, k);
        let e = (n - k) as i32;
        left += binomial(a + k as f64, k) * c * (x - y).powi(e) * y.powi(k as i32);
        right += binomial(a, k) * c * x.powi(e) * y.powi(k as i32);
    }
    Ok((left, right))
}
