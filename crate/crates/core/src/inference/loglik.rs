use rayon::prelude::*;

use super::{Dataset2D, Family};
use crate::error::Result;
use crate::models::SimplexPoint;
use crate::specfun::{ln_gamma, log_hyp0f1, log_hyp1f1, psi2_3, SeriesControl};

/// Dirichlet part shared by all four log-likelihoods.
fn dir_part(alpha: &[f64], data: &Dataset2D) -> f64 {
    let n = data.len() as f64;
    let ap: f64 = alpha.iter().sum();
    let mut l = n * (ln_gamma(ap) - alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>());
    for (a, s) in alpha.iter().zip(data.log_sums()) {
        l += (a - 1.0) * s;
    }
    l
}

/// Sum of per-observation terms in observation order, optionally evaluated
/// on the rayon pool. The reduction order is fixed either way.
fn sum_observations(
    data: &Dataset2D,
    parallel: bool,
    term: impl Fn(&SimplexPoint) -> Result<f64> + Sync,
) -> Result<f64> {
    let eval = |(i, x): (usize, &SimplexPoint)| {
        term(x).map_err(|e| e.with_context(format!("observation {}", i + 1)))
    };
    let terms: Vec<f64> = if parallel {
        data.points()
            .par_iter()
            .enumerate()
            .map(eval)
            .collect::<Result<_>>()?
    } else {
        data.points()
            .iter()
            .enumerate()
            .map(eval)
            .collect::<Result<_>>()?
    };
    Ok(terms.iter().sum())
}

/// Log-likelihood of a bivariate family at the full parameter vector `theta`
/// (shapes, then `delta` or the non-centralities).
pub fn loglik(family: Family, theta: &[f64], data: &Dataset2D, ctl: SeriesControl) -> Result<f64> {
    loglik_with(family, theta, data, ctl, false)
}

pub(crate) fn loglik_with(
    family: Family,
    theta: &[f64],
    data: &Dataset2D,
    ctl: SeriesControl,
    parallel: bool,
) -> Result<f64> {
    // validates the vector
    family.param_set(theta)?;
    let alpha = &theta[..3];
    let n = data.len() as f64;
    let base = dir_part(alpha, data);
    let ap: f64 = alpha.iter().sum();
    match family {
        Family::Dir => Ok(base),
        Family::Kb2 => {
            let delta = theta[3];
            Ok(base
                - data.sum_x12() * delta
                - n * log_hyp1f1(alpha[0] + alpha[1], ap, -delta, ctl)?)
        }
        Family::NcDir => {
            let lambda = &theta[3..];
            let lp: f64 = lambda.iter().sum();
            let b = [alpha[0], alpha[1], alpha[2]];
            let psi = sum_observations(data, parallel, |x| {
                let p = x.parts();
                let args = [
                    lambda[0] / 2.0 * p[0],
                    lambda[1] / 2.0 * p[1],
                    lambda[2] / 2.0 * p[2],
                ];
                Ok(psi2_3(ap, b, args, ctl, false)?.log_value)
            })?;
            Ok(base - n * lp / 2.0 + psi)
        }
        Family::CNcDir => {
            let lambda = &theta[3..];
            let lp: f64 = lambda.iter().sum();
            let perturb = sum_observations(data, parallel, |x| {
                let mut s = 0.0;
                for ((&a, &l), &v) in alpha.iter().zip(lambda).zip(&x.parts()) {
                    s += log_hyp0f1(a, l * v / 4.0, ctl)?;
                }
                Ok(s)
            })?;
            let norm = log_hyp0f1(ap, lp / 4.0, ctl)
                .map_err(|e| e.with_context("normalizing constant"))?;
            Ok(base + perturb - n * norm)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        cncdir_logpdf, kb2_logpdf, ncdir_logpdf, CNcDirParams, Kb2Params, NcDirParams,
    };

    fn data() -> Dataset2D {
        Dataset2D::from_pairs(&[
            (0.2, 0.3),
            (0.1, 0.6),
            (0.45, 0.45),
            (0.05, 0.02),
            (0.7, 0.1),
        ])
        .unwrap()
    }

    #[test]
    fn uniform_dirichlet() {
        let d = data();
        let l = loglik(Family::Dir, &[1.0, 1.0, 1.0], &d, SeriesControl::default()).unwrap();
        assert!((l - 5.0 * 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn central_cncdir_is_dirichlet() {
        let d = data();
        let c = SeriesControl::default();
        let a = loglik(Family::CNcDir, &[1.3, 0.8, 2.0, 0.0, 0.0, 0.0], &d, c).unwrap();
        let b = loglik(Family::Dir, &[1.3, 0.8, 2.0], &d, c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sums_of_log_densities() {
        let d = data();
        let c = SeriesControl::default();
        let theta = [1.0, 1.2, 0.7, 42.78, 48.76, 44.15];
        let p = CNcDirParams::new(theta[..3].to_vec(), theta[3..].to_vec()).unwrap();
        let direct: f64 = d
            .points()
            .iter()
            .map(|x| cncdir_logpdf(&p, x, c).unwrap())
            .sum();
        let l = loglik(Family::CNcDir, &theta, &d, c).unwrap();
        assert!((l - direct).abs() < 1e-10 * direct.abs().max(1.0));

        let theta = [1.0, 1.2, 0.7, 3.05, 3.46, 3.11];
        let p = NcDirParams::new(theta[..3].to_vec(), theta[3..].to_vec()).unwrap();
        let direct: f64 = d
            .points()
            .iter()
            .map(|x| ncdir_logpdf(&p, x, c).unwrap())
            .sum();
        let l = loglik(Family::NcDir, &theta, &d, c).unwrap();
        assert!((l - direct).abs() < 1e-10 * direct.abs().max(1.0));
        assert_eq!(l, loglik_with(Family::NcDir, &theta, &d, c, true).unwrap());

        let p = Kb2Params::new([1.28, 1.37, 1.25], 0.19).unwrap();
        let direct: f64 = d
            .points()
            .iter()
            .map(|x| kb2_logpdf(&p, x, c).unwrap())
            .sum();
        let l = loglik(Family::Kb2, &[1.28, 1.37, 1.25, 0.19], &d, c).unwrap();
        assert!((l - direct).abs() < 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn row_order_does_not_matter() {
        let d = data();
        let mut pts = d.points().to_vec();
        pts.reverse();
        let r = Dataset2D::new(pts).unwrap();
        let c = SeriesControl::default();
        let theta = [0.9, 1.1, 1.4, 5.0, 0.0, 2.0];
        let a = loglik(Family::CNcDir, &theta, &d, c).unwrap();
        let b = loglik(Family::CNcDir, &theta, &r, c).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn invalid_parameters() {
        let d = data();
        let c = SeriesControl::default();
        assert!(loglik(Family::Dir, &[1.0, -1.0, 1.0], &d, c).is_err());
        assert!(loglik(Family::CNcDir, &[1.0, 1.0, 1.0, -1.0, 0.0, 0.0], &d, c).is_err());
    }
}
