use super::dirichlet::{check_dim, dir_logpdf_raw};
use super::mixture_sum::log_box_sum;
use super::vertex::{classify, VertexLimit, OTHERS};
use super::{MixtureEval, NcDirParams, SimplexPoint};
use crate::error::{Error, Result};
use crate::specfun::{ln_factorial, ln_gamma, psi2_3, regularized_gamma_upper, SeriesControl};

/// Log density of the bivariate non-central Dirichlet distribution,
/// `Dir(x; α) e^{-λ⁺/2} Ψ2(α⁺; α; λ1 x1/2, λ2 x2/2, λ3 x3/2)`.
pub fn ncdir_logpdf(p: &NcDirParams, x: &SimplexPoint, ctl: SeriesControl) -> Result<f64> {
    check_dim(p.alpha().len(), x)?;
    if p.dim() != 2 {
        return Err(Error::domain(
            "the Humbert-function form is bivariate; use ncdir_logpdf_mixture for other dimensions",
        ));
    }
    let parts = x.parts();
    let a = p.alpha();
    let l = p.lambda();
    let args = [
        l[0] * parts[0] / 2.0,
        l[1] * parts[1] / 2.0,
        l[2] * parts[2] / 2.0,
    ];
    let psi = psi2_3(p.alpha_plus(), [a[0], a[1], a[2]], args, ctl, false)?;
    Ok(dir_logpdf_raw(a, &parts) - p.lambda_plus() / 2.0 + psi.log_value)
}

/// Log density as the Poisson-weighted Dirichlet mixture
/// `Σ_j Π_i Pois(j_i; λ_i/2) Dir(x; α + j)`, any dimension, with each count
/// truncated below `terms`.
pub fn ncdir_logpdf_mixture(
    p: &NcDirParams,
    x: &SimplexPoint,
    terms: usize,
) -> Result<MixtureEval> {
    check_dim(p.alpha().len(), x)?;
    if terms == 0 {
        return Err(Error::domain("mixture truncation needs at least one term"));
    }
    let parts = x.parts();
    let mut tables = Vec::with_capacity(parts.len());
    let mut kept = 1.0;
    for ((&a, &l), &xi) in p.alpha().iter().zip(p.lambda()).zip(&parts) {
        let half = l / 2.0;
        let n = if half == 0.0 { 1 } else { terms };
        let lx = xi.ln();
        let table: Vec<f64> = (0..n as u64)
            .map(|j| {
                let jf = j as f64;
                let pois = if j == 0 {
                    -half
                } else {
                    -half + jf * half.ln() - ln_factorial(j)
                };
                pois - ln_gamma(a + jf) + (a + jf - 1.0) * lx
            })
            .collect();
        tables.push(table);
        if half > 0.0 {
            kept *= regularized_gamma_upper(terms as f64, half)?;
        }
    }
    let alpha_plus = p.alpha_plus();
    let log_pdf = log_box_sum(&tables, |s| ln_gamma(alpha_plus + s as f64));
    Ok(MixtureEval {
        log_pdf,
        excluded_weight: (1.0 - kept).max(0.0),
    })
}

/// Limits of the bivariate density at `(1,0)`, `(0,1)`, `(0,0)`.
pub fn ncdir_vertex_limits(p: &NcDirParams) -> Result<[VertexLimit; 3]> {
    let a: [f64; 3] = p
        .alpha()
        .try_into()
        .map_err(|_| Error::domain("vertex limits are defined for the bivariate law"))?;
    let l = p.lambda();
    Ok(classify(a, |i| {
        let (j, k) = OTHERS[i];
        let half = l[i] / 2.0;
        (-(l[j] + l[k]) / 2.0).exp() * (half * half + (a[i] + 1.0) * (a[i] + l[i]))
    }))
}
