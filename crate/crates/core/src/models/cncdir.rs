use super::dirichlet::{check_dim, dir_logpdf_raw};
use super::mixture_sum::log_box_sum;
use super::vertex::{classify, VertexLimit};
use super::{CNcDirParams, MixtureEval, SimplexPoint};
use crate::error::{Error, Result};
use crate::mixture_weight::{mw_log_normalizer, MwParams};
use crate::specfun::{ln_factorial, ln_gamma, log_hyp0f1, log_pochhammer, SeriesControl};

/// Log density of the conditional non-central Dirichlet distribution,
/// `Dir(x; α) Π_i 0F1(α_i; λ_i x_i / 4) / 0F1(α⁺; λ⁺/4)` with the product
/// running over all `D + 1` parts. Valid for any `D >= 1`.
pub fn cncdir_logpdf(p: &CNcDirParams, x: &SimplexPoint, ctl: SeriesControl) -> Result<f64> {
    check_dim(p.alpha().len(), x)?;
    let parts = x.parts();
    let mut l =
        dir_logpdf_raw(p.alpha(), &parts) - log_hyp0f1(p.alpha_plus(), p.lambda_plus() / 4.0, ctl)?;
    for ((&a, &lam), &xi) in p.alpha().iter().zip(p.lambda()).zip(&parts) {
        l += log_hyp0f1(a, lam * xi / 4.0, ctl)?;
    }
    Ok(l)
}

/// Log density as the mixture `Σ_j MW(j; α⁺, λ) Dir(x; α + j)` with each
/// count truncated below `terms`. The excluded weight bounds the mixing
/// mass of counts outside the box by `P(N⁺ >= terms)`.
pub fn cncdir_logpdf_mixture(
    p: &CNcDirParams,
    x: &SimplexPoint,
    terms: usize,
) -> Result<MixtureEval> {
    check_dim(p.alpha().len(), x)?;
    if terms == 0 {
        return Err(Error::domain("mixture truncation needs at least one term"));
    }
    let parts = x.parts();
    let tables: Vec<Vec<f64>> = p
        .alpha()
        .iter()
        .zip(p.lambda())
        .zip(&parts)
        .map(|((&a, &lam), &xi)| {
            let n = if lam == 0.0 { 1 } else { terms };
            let lq = (lam / 4.0).ln();
            let lx = xi.ln();
            (0..n as u64)
                .map(|j| {
                    let jf = j as f64;
                    let w = if j == 0 {
                        0.0
                    } else {
                        jf * lq - ln_factorial(j)
                    };
                    w - ln_gamma(a + jf) + (a + jf - 1.0) * lx
                })
                .collect()
        })
        .collect();
    let alpha_plus = p.alpha_plus();
    let lambda_plus = p.lambda_plus();
    let ctl = SeriesControl::exact();
    let log_norm = mw_log_normalizer(alpha_plus, lambda_plus, ctl)?;
    let log_pdf = log_box_sum(&tables, |s| {
        ln_gamma(alpha_plus + s as f64) - log_pochhammer(alpha_plus, s as u64) - log_norm
    });

    // P(N⁺ < terms) from the univariate sum law
    let mut kept = 0.0;
    let mut lp = -log_norm;
    for s in 0..terms {
        if s > 0 {
            if lambda_plus == 0.0 {
                break;
            }
            lp += (lambda_plus / 4.0).ln() - (alpha_plus + s as f64 - 1.0).ln() - (s as f64).ln();
        }
        kept += lp.exp();
    }
    Ok(MixtureEval {
        log_pdf,
        excluded_weight: (1.0 - kept).max(0.0),
    })
}

/// Limits of the bivariate density at `(1,0)`, `(0,1)`, `(0,0)`.
pub fn cncdir_vertex_limits(p: &CNcDirParams, ctl: SeriesControl) -> Result<[VertexLimit; 3]> {
    let a: [f64; 3] = p
        .alpha()
        .try_into()
        .map_err(|_| Error::domain("vertex limits are defined for the bivariate law"))?;
    let l = p.lambda();
    let lambda_plus = p.lambda_plus();
    let mut logs = [0.0; 3];
    for i in 0..3 {
        logs[i] =
            log_hyp0f1(a[i], l[i] / 4.0, ctl)? - log_hyp0f1(a[i] + 2.0, lambda_plus / 4.0, ctl)?;
    }
    Ok(classify(a, |i| a[i] * (a[i] + 1.0) * logs[i].exp()))
}

/// Ordered partition of the component indices `0..=D` into blocks. The last
/// block becomes the remainder component of the aggregated law.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, n_components: usize) -> Result<Self> {
        if blocks.len() < 2 || blocks.len() > n_components {
            return Err(Error::domain(format!(
                "a partition of {n_components} components needs between 2 and {n_components} blocks"
            )));
        }
        let mut seen = vec![false; n_components];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::domain("partition blocks must be nonempty"));
            }
            for &i in b {
                if i >= n_components || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::domain(format!(
                        "index {i} is out of range or repeated"
                    )));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::domain("partition does not cover every component"));
        }
        Ok(Partition { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block sums of a vector indexed by component.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&i| values[i]).sum())
            .collect()
    }
}

/// Parameters of the block sums `(Σ_{i∈B1} X_i, ..., Σ_{i∈Bm} X_i)`.
pub fn cncdir_aggregate(p: &CNcDirParams, partition: &Partition) -> Result<CNcDirParams> {
    if partition
        .blocks
        .iter()
        .flatten()
        .any(|&i| i >= p.alpha().len())
    {
        return Err(Error::domain(
            "partition does not match the parameter dimension",
        ));
    }
    CNcDirParams::new(partition.apply(p.alpha()), partition.apply(p.lambda()))
}

/// Parameters of the marginal law of the components listed in `indices`.
pub fn cncdir_marginal(p: &CNcDirParams, indices: &[usize]) -> Result<CNcDirParams> {
    let n = p.alpha().len();
    let mut blocks: Vec<Vec<usize>> = indices.iter().map(|&i| vec![i]).collect();
    let rest: Vec<usize> = (0..n).filter(|i| !indices.contains(i)).collect();
    blocks.push(rest);
    cncdir_aggregate(p, &Partition::new(blocks, n)?)
}

/// Parameters of the univariate law of `X_1 + ... + X_D`.
pub fn cncdir_component_sum(p: &CNcDirParams) -> Result<CNcDirParams> {
    let d = p.dim();
    cncdir_aggregate(p, &Partition::new(vec![(0..d).collect(), vec![d]], d + 1)?)
}

/// Parameters of `(X_{k+1}, ..., X_D) / (1 - x_1 - ... - x_k)` given the
/// first `k` coordinates: shapes of the remaining components, with their
/// non-centralities scaled by `1 - Σ fixed`.
pub fn cncdir_normalized_conditional(p: &CNcDirParams, fixed: &[f64]) -> Result<CNcDirParams> {
    let k = fixed.len();
    if k == 0 || k + 1 > p.dim() {
        return Err(Error::domain(format!(
            "conditioning needs between 1 and {} fixed coordinates, got {k}",
            p.dim().saturating_sub(1)
        )));
    }
    if fixed.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::domain("fixed coordinates must lie in (0, 1)"));
    }
    let scale = 1.0 - fixed.iter().sum::<f64>();
    if !(scale > 0.0) {
        return Err(Error::domain("fixed coordinates must sum to less than 1"));
    }
    CNcDirParams::new(
        p.alpha()[k..].to_vec(),
        p.lambda()[k..].iter().map(|l| l * scale).collect(),
    )
}

impl From<&CNcDirParams> for MwParams {
    fn from(p: &CNcDirParams) -> Self {
        MwParams::new(p.alpha_plus(), p.lambda().to_vec()).expect("validated parameters")
    }
}
