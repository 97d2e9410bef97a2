use super::dirichlet::{check_dim, dir_logpdf_raw};
use super::vertex::{classify, VertexLimit};
use super::{Kb2Params, MixtureEval, SimplexPoint};
use crate::error::Result;
use crate::specfun::{genhypergeo, ln_factorial, log_hyp1f1, log_pochhammer, SeriesControl};

/// Log density of the bivariate Kummer-Beta distribution,
/// `Dir(x; α) e^{-(x1+x2)δ} / 1F1(α1+α2; α⁺; -δ)`.
pub fn kb2_logpdf(p: &Kb2Params, x: &SimplexPoint, ctl: SeriesControl) -> Result<f64> {
    check_dim(3, x)?;
    let a = p.alpha();
    let parts = x.parts();
    let norm = log_hyp1f1(a[0] + a[1], p.alpha_plus(), -p.delta(), ctl)?;
    Ok(dir_logpdf_raw(&a, &parts) - (parts[0] + parts[1]) * p.delta() - norm)
}

/// The same density as a Dirichlet mixture over the third shape, weighted by
/// the normalized terms of `1F1(α3; α⁺; δ)`, truncated after `terms` terms.
///
/// For negative `δ` the weights alternate in sign.
pub fn kb2_logpdf_mixture(p: &Kb2Params, x: &SimplexPoint, terms: usize) -> Result<MixtureEval> {
    check_dim(3, x)?;
    let a = p.alpha();
    let delta = p.delta();
    let alpha_plus = p.alpha_plus();
    let parts = x.parts();
    let normalizer =
        genhypergeo(&[a[2]], &[alpha_plus], delta, SeriesControl::exact())?.require("1F1")?;

    let mut log_weights = Vec::with_capacity(terms);
    let mut log_terms = Vec::with_capacity(terms);
    for j in 0..terms as u64 {
        let lw = if j == 0 {
            0.0
        } else if delta == 0.0 {
            break;
        } else {
            log_pochhammer(a[2], j) - log_pochhammer(alpha_plus, j) + j as f64 * delta.abs().ln()
                - ln_factorial(j)
        };
        let shifted = [a[0], a[1], a[2] + j as f64];
        log_weights.push(lw);
        log_terms.push(lw + dir_logpdf_raw(&shifted, &parts));
    }
    let sign = |j: usize| if delta < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 };
    let shift = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut weight_sum = 0.0;
    for (j, (&lt, &lw)) in log_terms.iter().zip(&log_weights).enumerate() {
        total += sign(j) * (lt - shift).exp();
        weight_sum += sign(j) * lw.exp();
    }
    Ok(MixtureEval {
        log_pdf: shift + total.ln() - normalizer.ln(),
        excluded_weight: (1.0 - weight_sum / normalizer).abs(),
    })
}

/// Limits of the density at `(1,0)`, `(0,1)`, `(0,0)`.
pub fn kb2_vertex_limits(p: &Kb2Params, ctl: SeriesControl) -> Result<[VertexLimit; 3]> {
    let a = p.alpha();
    let log_norm = log_hyp1f1(a[0] + a[1], p.alpha_plus(), -p.delta(), ctl)?;
    Ok(classify(a, |i| {
        // x1 + x2 is one at the first two vertices and zero at the origin
        let tilt = if i < 2 { -p.delta() } else { 0.0 };
        a[i] * (a[i] + 1.0) * (tilt - log_norm).exp()
    }))
}
