use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::loglik::loglik_with;
use super::nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
use super::{Dataset2D, Family, ModelSpec, ParamKind};
use crate::error::{Error, Result};
use crate::models::ParamSet;
use crate::specfun::SeriesControl;

/// Settings of [`fit_ml`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Number of dispersed starting points, the first being the central one.
    pub starts: usize,
    pub simplex: NelderMeadOptions,
    /// Seed of the start dispersion.
    pub seed: u64,
    pub ctl: SeriesControl,
    /// Evaluate per-observation terms on the rayon pool.
    pub parallel: bool,
    /// Additional starting points, as full parameter vectors.
    pub extra_starts: Vec<Vec<f64>>,
    pub standard_errors: bool,
    /// Smallest non-centrality reachable by the optimizer.
    pub lambda_floor: f64,
    /// A non-centrality is set to zero when that costs less log-likelihood
    /// than this.
    pub snap_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            starts: 8,
            simplex: NelderMeadOptions::default(),
            seed: 0x5eed,
            ctl: SeriesControl::default(),
            parallel: false,
            extra_starts: Vec::new(),
            standard_errors: true,
            lambda_floor: 1e-8,
            snap_tol: 1e-6,
        }
    }
}

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub family: Family,
    /// Names of the parameters pinned to one.
    pub constraints: Vec<String>,
    pub estimates: BTreeMap<String, f64>,
    /// Asymptotic standard errors of the free parameters; absent when the
    /// observed information is not positive definite.
    pub std_errors: Option<BTreeMap<String, f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub n_evals: usize,
    pub starts_used: usize,
    /// Non-centralities set to exactly zero after the search.
    pub snapped_to_zero: Vec<String>,
    /// Parameters in the exchange format accepted by the other commands.
    pub params: ParamSet,
    #[serde(skip)]
    pub spec: ModelSpec,
    #[serde(skip)]
    pub theta: Vec<f64>,
}

impl FitReport {
    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.estimates.get(name).copied()
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.std_errors.as_ref()?.get(name).copied()
    }
}

/// Map between full parameter vectors and the free coordinates searched by
/// the optimizer (logs of shapes and non-centralities, the tilt as is).
struct Reparam<'a> {
    spec: &'a ModelSpec,
    free: Vec<usize>,
    floor: f64,
}

impl Reparam<'_> {
    fn full(&self, t: &[f64]) -> Vec<f64> {
        let family = self.spec.family;
        let mut theta = vec![1.0; family.n_params()];
        for (&i, &v) in self.free.iter().zip(t) {
            theta[i] = match family.kind(i) {
                ParamKind::Shape => v.exp(),
                ParamKind::Tilt => v,
                ParamKind::Noncentrality => v.exp().max(self.floor),
            };
        }
        theta
    }

    fn reduced(&self, theta: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .map(|&i| match self.spec.family.kind(i) {
                ParamKind::Tilt => theta[i],
                ParamKind::Shape => theta[i].ln(),
                ParamKind::Noncentrality => theta[i].max(self.floor).ln(),
            })
            .collect()
    }
}

/// Method-of-moments shapes of a Dirichlet law from the means of the parts
/// and the variance of the first one.
fn moment_shapes(data: &Dataset2D) -> [f64; 3] {
    let n = data.len() as f64;
    let mut mean = [0.0; 3];
    for p in data.points() {
        for (m, v) in mean.iter_mut().zip(p.parts()) {
            *m += v / n;
        }
    }
    let var = data
        .points()
        .iter()
        .map(|p| (p.coords()[0] - mean[0]).powi(2))
        .sum::<f64>()
        / n.max(2.0);
    let total = if var > 0.0 {
        mean[0] * (1.0 - mean[0]) / var - 1.0
    } else {
        3.0
    };
    let total = if total.is_finite() && total > 0.1 {
        total
    } else {
        3.0
    };
    mean.map(|m| (m * total).clamp(0.05, 50.0))
}

fn center(spec: &ModelSpec, data: &Dataset2D, opts: &FitOptions) -> Vec<f64> {
    let family = spec.family;
    let shapes = moment_shapes(data);
    let mut theta: Vec<f64> = (0..family.n_params())
        .map(|i| match family.kind(i) {
            ParamKind::Shape if spec.constraints.contains(&i) => 1.0,
            ParamKind::Shape => shapes[i],
            ParamKind::Tilt => 0.0,
            ParamKind::Noncentrality => 1.0,
        })
        .collect();
    if matches!(family, Family::NcDir | Family::CNcDir) {
        // common non-centrality chosen on a coarse grid
        let mut best = (f64::NEG_INFINITY, 1.0);
        for l in [0.5, 2.0, 8.0, 32.0] {
            theta[3..].iter_mut().for_each(|v| *v = l);
            if let Ok(v) = loglik_with(family, &theta, data, opts.ctl, opts.parallel) {
                if v > best.0 {
                    best = (v, l);
                }
            }
        }
        theta[3..].iter_mut().for_each(|v| *v = best.1);
    }
    theta
}

fn starting_points(
    spec: &ModelSpec,
    data: &Dataset2D,
    opts: &FitOptions,
    map: &Reparam,
) -> Vec<Vec<f64>> {
    let c = map.reduced(&center(spec, data, opts));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let spread = 4f64.ln();
    let mut out = vec![c.clone()];
    for _ in 1..opts.starts {
        out.push(
            map.free
                .iter()
                .zip(&c)
                .map(|(&i, &v)| match spec.family.kind(i) {
                    ParamKind::Tilt => v + rng.gen_range(-2.0..2.0),
                    _ => v + rng.gen_range(-spread..spread),
                })
                .collect(),
        );
    }
    for extra in &opts.extra_starts {
        if extra.len() == spec.family.n_params() && spec.family.param_set(extra).is_ok() {
            out.push(map.reduced(extra));
        }
    }
    out
}

/// Maximize the log-likelihood of `spec` over its free parameters from
/// several starting points and return the best converged search.
pub fn fit_ml(spec: &ModelSpec, data: &Dataset2D, opts: &FitOptions) -> Result<FitReport> {
    let family = spec.family;
    let map = Reparam {
        spec,
        free: spec.free_indices(),
        floor: opts.lambda_floor,
    };
    let objective = |t: &[f64]| -> f64 {
        match loglik_with(family, &map.full(t), data, opts.ctl, opts.parallel) {
            Ok(v) if v.is_finite() => -v,
            _ => f64::INFINITY,
        }
    };

    let starts = starting_points(spec, data, opts, &map);
    let mut n_evals = 0;
    let mut best: Option<NelderMeadResult> = None;
    for s in &starts {
        let r = nelder_mead(objective, s, opts.simplex);
        n_evals += r.evals;
        if r.converged && r.f.is_finite() && best.as_ref().is_none_or(|b| r.f < b.f) {
            best = Some(r);
        }
    }
    let best = best.ok_or(Error::NoConvergence {
        starts: starts.len(),
    })?;

    let mut theta = map.full(&best.x);
    let mut ll = -best.f;
    let mut snapped = Vec::new();
    for &i in &map.free {
        if family.kind(i) != ParamKind::Noncentrality || theta[i] == 0.0 {
            continue;
        }
        let mut trial = theta.clone();
        trial[i] = 0.0;
        if let Ok(l0) = loglik_with(family, &trial, data, opts.ctl, opts.parallel) {
            if ll - l0 < opts.snap_tol {
                theta = trial;
                ll = ll.max(l0);
                snapped.push(family.param_names()[i].to_string());
            }
        }
    }

    let names = family.param_names();
    let std_errors = if opts.standard_errors {
        let se_free: Vec<usize> = map
            .free
            .iter()
            .copied()
            .filter(|&i| !snapped.iter().any(|s| s == names[i]))
            .collect();
        observed_information_se(family, &theta, &se_free, data, opts)
            .ok()
            .map(|se| {
                se_free
                    .iter()
                    .zip(se)
                    .map(|(&i, v)| (names[i].to_string(), v))
                    .collect()
            })
    } else {
        None
    };

    Ok(FitReport {
        family,
        constraints: spec
            .constraints
            .iter()
            .map(|&i| names[i].to_string())
            .collect(),
        estimates: names
            .iter()
            .zip(&theta)
            .map(|(n, v)| (n.to_string(), *v))
            .collect(),
        std_errors,
        loglik: ll,
        converged: best.converged,
        n_evals,
        starts_used: starts.len(),
        snapped_to_zero: snapped,
        params: family.param_set(&theta)?,
        spec: spec.clone(),
        theta,
    })
}

/// Standard errors from the inverse of the observed information, by central
/// differences on the original scale over the coordinates `idx`.
fn observed_information_se(
    family: Family,
    theta: &[f64],
    idx: &[usize],
    data: &Dataset2D,
    opts: &FitOptions,
) -> Result<Vec<f64>> {
    let k = idx.len();
    if k == 0 {
        return Ok(vec![]);
    }
    let h: Vec<f64> = idx
        .iter()
        .map(|&i| (1e-4 * theta[i].abs()).max(1e-4))
        .collect();
    for (&i, &hi) in idx.iter().zip(&h) {
        if family.kind(i) != ParamKind::Tilt && theta[i] - hi <= 0.0 {
            return Err(Error::SingularInformation);
        }
    }
    let f = |shift: &[(usize, f64)]| -> Result<f64> {
        let mut t = theta.to_vec();
        for &(a, d) in shift {
            t[idx[a]] += d;
        }
        loglik_with(family, &t, data, opts.ctl, opts.parallel)
    };
    let f0 = f(&[])?;
    let mut info = DMatrix::zeros(k, k);
    for a in 0..k {
        let d2 = (f(&[(a, h[a])])? - 2.0 * f0 + f(&[(a, -h[a])])?) / (h[a] * h[a]);
        info[(a, a)] = -d2;
        for b in 0..a {
            let d2 = (f(&[(a, h[a]), (b, h[b])])?
                - f(&[(a, h[a]), (b, -h[b])])?
                - f(&[(a, -h[a]), (b, h[b])])?
                + f(&[(a, -h[a]), (b, -h[b])])?)
                / (4.0 * h[a] * h[b]);
            info[(a, b)] = -d2;
            info[(b, a)] = -d2;
        }
    }
    let chol = info.cholesky().ok_or(Error::SingularInformation)?;
    let cov = chol.solve(&DMatrix::identity(k, k));
    let se: Vec<f64> = (0..k).map(|a| cov[(a, a)].sqrt()).collect();
    if se.iter().all(|v| v.is_finite()) {
        Ok(se)
    } else {
        Err(Error::SingularInformation)
    }
}
