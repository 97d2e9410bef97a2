use super::vertex::{classify, VertexLimit};
use super::{DirParams, SimplexPoint};
use crate::error::{Error, Result};
use crate::specfun::{ln_gamma, pochhammer};

pub(crate) fn check_dim(n_params: usize, x: &SimplexPoint) -> Result<()> {
    if x.dim() + 1 != n_params {
        return Err(Error::domain(format!(
            "point has {} coordinates but the parameters describe {} components",
            x.dim(),
            n_params
        )));
    }
    Ok(())
}

/// `ln Γ(α⁺) - Σ ln Γ(α_i) + Σ (α_i - 1) ln x_i` over all parts.
pub(crate) fn dir_logpdf_raw(alpha: &[f64], parts: &[f64]) -> f64 {
    let alpha_plus: f64 = alpha.iter().sum();
    let mut l = ln_gamma(alpha_plus);
    for (&a, &x) in alpha.iter().zip(parts) {
        l += (a - 1.0) * x.ln() - ln_gamma(a);
    }
    l
}

/// Log density of the Dirichlet distribution.
pub fn dir_logpdf(p: &DirParams, x: &SimplexPoint) -> Result<f64> {
    check_dim(p.alpha().len(), x)?;
    Ok(dir_logpdf_raw(p.alpha(), &x.parts()))
}

/// `E[X1^r1 X2^r2] = (α1)_{r1} (α2)_{r2} / (α⁺)_{r1+r2}` for the bivariate law.
pub fn dir_mixed_moment(p: &DirParams, r1: u64, r2: u64) -> Result<f64> {
    if p.dim() != 2 {
        return Err(Error::domain(
            "mixed moments are defined for the bivariate law",
        ));
    }
    let a = p.alpha();
    Ok(pochhammer(a[0], r1) * pochhammer(a[1], r2) / pochhammer(p.alpha_plus(), r1 + r2))
}

/// Limits of the bivariate Dirichlet density at `(1,0)`, `(0,1)`, `(0,0)`.
pub fn dir_vertex_limits(p: &DirParams) -> Result<[VertexLimit; 3]> {
    let alpha: [f64; 3] = p
        .alpha()
        .try_into()
        .map_err(|_| Error::domain("vertex limits are defined for the bivariate law"))?;
    Ok(classify(alpha, |i| alpha[i] * (alpha[i] + 1.0)))
}
