//! The mixture-weight distribution: the discrete law of the count vector
//! that mixes shifted Dirichlet densities into the conditional non-central
//! Dirichlet density.
//!
//! Its pmf is
//! `P(N = j) = Π_i [(λ_i/4)^{j_i} / j_i!] / ((α⁺)_{j⁺} 0F1(α⁺; λ⁺/4))`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{ln_factorial, log_hyp0f1, log_pochhammer, SeriesControl};

/// Default bound on the number of univariate masses accumulated by the
/// inverse-transform sampler.
pub const DEFAULT_SAMPLER_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwParams {
    alpha_plus: f64,
    lambda: Vec<f64>,
}

impl MwParams {
    pub fn new(alpha_plus: f64, lambda: Vec<f64>) -> Result<Self> {
        if !(alpha_plus > 0.0) || !alpha_plus.is_finite() {
            return Err(Error::domain(format!(
                "total shape must be positive, got {alpha_plus}"
            )));
        }
        if lambda.is_empty() {
            return Err(Error::domain(
                "mixture-weight law needs at least one component",
            ));
        }
        if let Some(l) = lambda.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return Err(Error::domain(format!(
                "non-centrality {l} is not a finite number >= 0"
            )));
        }
        Ok(MwParams { alpha_plus, lambda })
    }

    pub fn alpha_plus(&self) -> f64 {
        self.alpha_plus
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// A vector of nonnegative counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountVector(pub Vec<u64>);

impl CountVector {
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }
}

/// `ln 0F1(α⁺; λ⁺/4)`, the log normalizer of the law.
pub fn mw_log_normalizer(alpha_plus: f64, lambda_plus: f64, ctl: SeriesControl) -> Result<f64> {
    log_hyp0f1(alpha_plus, lambda_plus / 4.0, ctl)
}

/// `Σ_i [j_i ln(λ_i/4) - ln j_i!]`, with components of zero non-centrality
/// pinned to a zero count.
fn log_power_terms(lambda: &[f64], counts: &[u64]) -> Result<f64> {
    let mut l = 0.0;
    for (i, (&lam, &j)) in lambda.iter().zip(counts).enumerate() {
        if j == 0 {
            continue;
        }
        if lam == 0.0 {
            return Err(Error::MassZero(format!(
                "component {} has zero non-centrality but count {j}",
                i + 1
            )));
        }
        l += j as f64 * (lam / 4.0).ln() - ln_factorial(j);
    }
    Ok(l)
}

/// Joint log pmf.
pub fn mw_logpmf(p: &MwParams, j: &CountVector, ctl: SeriesControl) -> Result<f64> {
    if j.0.len() != p.len() {
        return Err(Error::domain(format!(
            "count vector has {} entries, law has {} components",
            j.0.len(),
            p.len()
        )));
    }
    let powers = log_power_terms(&p.lambda, &j.0)?;
    Ok(powers
        - log_pochhammer(p.alpha_plus, j.total())
        - mw_log_normalizer(p.alpha_plus, p.lambda_plus(), ctl)?)
}

/// Log pmf of the first `m = j.len()` components.
pub fn mw_marginal_logpmf(p: &MwParams, j: &[u64], ctl: SeriesControl) -> Result<f64> {
    let m = j.len();
    if m == 0 || m > p.len() {
        return Err(Error::domain(format!(
            "marginal needs between 1 and {} components, got {m}",
            p.len()
        )));
    }
    let j_plus: u64 = j.iter().sum();
    let rest: f64 = p.lambda[m..].iter().sum();
    Ok(
        log_power_terms(&p.lambda[..m], j)? - log_pochhammer(p.alpha_plus, j_plus)
            + log_hyp0f1(p.alpha_plus + j_plus as f64, rest / 4.0, ctl)?
            - mw_log_normalizer(p.alpha_plus, p.lambda_plus(), ctl)?,
    )
}

/// Law of the first `m` components given the counts of the last ones:
/// total shape shifted by the conditioned total, non-centralities restricted.
pub fn mw_conditional_params(p: &MwParams, given: &[u64]) -> Result<MwParams> {
    if given.is_empty() || given.len() >= p.len() {
        return Err(Error::domain(format!(
            "conditioning needs between 1 and {} given components",
            p.len() - 1
        )));
    }
    let m = p.len() - given.len();
    log_power_terms(&p.lambda[m..], given)?;
    let shift: u64 = given.iter().sum();
    MwParams::new(p.alpha_plus + shift as f64, p.lambda[..m].to_vec())
}

/// Log pmf of the total `N⁺`, which follows the univariate law with
/// parameters `(α⁺, λ⁺)`.
pub fn mw_sum_logpmf(alpha_plus: f64, lambda_plus: f64, s: u64, ctl: SeriesControl) -> Result<f64> {
    if lambda_plus == 0.0 {
        return Ok(if s == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    Ok(s as f64 * (lambda_plus / 4.0).ln()
        - ln_factorial(s)
        - log_pochhammer(alpha_plus, s)
        - mw_log_normalizer(alpha_plus, lambda_plus, ctl)?)
}

/// Multinomial law: `n` trials over the given cell probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Multinomial {
    pub n: u64,
    pub probs: Vec<f64>,
}

impl Multinomial {
    pub fn logpmf(&self, j: &[u64]) -> f64 {
        if j.len() != self.probs.len() || j.iter().sum::<u64>() != self.n {
            return f64::NEG_INFINITY;
        }
        let mut l = ln_factorial(self.n);
        for (&k, &p) in j.iter().zip(&self.probs) {
            if k > 0 {
                if p == 0.0 {
                    return f64::NEG_INFINITY;
                }
                l += k as f64 * p.ln() - ln_factorial(k);
            }
        }
        l
    }

    /// Draw by sequential binomial splitting.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let mut out = vec![0; self.probs.len()];
        let mut left = self.n;
        let mut mass = 1.0;
        let last = self.probs.len() - 1;
        for (i, &p) in self.probs.iter().enumerate() {
            if left == 0 {
                break;
            }
            if i == last {
                out[i] = left;
                break;
            }
            let q = if mass > 0.0 {
                (p / mass).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let k = if q == 0.0 {
                0
            } else if q == 1.0 {
                left
            } else {
                Binomial::new(left, q)
                    .expect("probability in [0, 1]")
                    .sample(rng)
            };
            out[i] = k;
            left -= k;
            mass -= p;
        }
        out
    }
}

/// Conditional law of the counts given their total `n_plus`:
/// multinomial with probabilities `λ_i / λ⁺` over all components.
pub fn mw_conditional_multinomial(p: &MwParams, n_plus: u64) -> Result<Multinomial> {
    let lp = p.lambda_plus();
    if lp == 0.0 {
        if n_plus > 0 {
            return Err(Error::domain(
                "a positive total is impossible when all non-centralities are zero",
            ));
        }
        let mut probs = vec![0.0; p.len()];
        probs[p.len() - 1] = 1.0;
        return Ok(Multinomial { n: 0, probs });
    }
    Ok(Multinomial {
        n: n_plus,
        probs: p.lambda.iter().map(|l| l / lp).collect(),
    })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Inverse-transform sampler: the total `N⁺` is drawn from the cumulative
/// univariate masses, then split across components multinomially.
#[derive(Debug, Clone)]
pub struct MwSampler {
    params: MwParams,
    cdf: Vec<f64>,
    tail_log_mass: f64,
    tail_acc: CompensatedSum,
    cap: usize,
}

impl MwSampler {
    pub fn new(p: &MwParams, ctl: SeriesControl, cap: usize) -> Result<Self> {
        let ap = p.alpha_plus;
        let lp = p.lambda_plus();
        let mut cdf = Vec::new();
        let mut acc = CompensatedSum::default();
        let mut log_mass = if lp == 0.0 {
            0.0
        } else {
            -mw_log_normalizer(ap, lp, ctl)?
        };
        let step = (lp / 4.0).ln();
        let mut s = 0usize;
        loop {
            if s >= cap {
                break;
            }
            if s > 0 {
                if lp == 0.0 {
                    break;
                }
                log_mass += step - (ap + s as f64 - 1.0).ln() - (s as f64).ln();
            }
            let mass = log_mass.exp();
            acc.add(mass);
            cdf.push(acc.value());
            let past_mode = (lp / 4.0) < (ap + s as f64) * (s as f64 + 1.0);
            if past_mode && (mass < 1e-20 * acc.value() || acc.value() >= 1.0) {
                break;
            }
            s += 1;
        }
        Ok(MwSampler {
            params: p.clone(),
            cdf,
            tail_log_mass: log_mass,
            tail_acc: acc,
            cap,
        })
    }

    pub fn params(&self) -> &MwParams {
        &self.params
    }

    /// Draw the total `N⁺`.
    pub fn sample_total<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c < u);
        if idx < self.cdf.len() {
            return Ok(idx as u64);
        }
        // u lies beyond the tabulated mass; keep accumulating
        let ap = self.params.alpha_plus;
        let lp = self.params.lambda_plus();
        let mut log_mass = self.tail_log_mass;
        let mut acc = self.tail_acc;
        let mut s = self.cdf.len();
        while s < self.cap {
            log_mass += (lp / 4.0).ln() - (ap + s as f64 - 1.0).ln() - (s as f64).ln();
            acc.add(log_mass.exp());
            if acc.value() >= u {
                return Ok(s as u64);
            }
            s += 1;
        }
        Err(Error::IterationCap { cap: self.cap })
    }

    /// Draw a full count vector.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CountVector> {
        let n = self.sample_total(rng)?;
        let m = mw_conditional_multinomial(&self.params, n)?;
        Ok(CountVector(m.sample(rng)))
    }
}

/// One draw with default settings. Build an [`MwSampler`] for repeated draws.
pub fn mw_sample<R: Rng + ?Sized>(p: &MwParams, rng: &mut R) -> Result<CountVector> {
    MwSampler::new(p, SeriesControl::exact(), DEFAULT_SAMPLER_CAP)?.sample(rng)
}
