//! Exact samplers: chi-squared, Poisson, non-central chi-squared, Dirichlet,
//! NcDir and CNcDir (mixture and composition representations).

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::mixture_weight::{CountVector, MwParams, MwSampler, DEFAULT_SAMPLER_CAP};
use crate::models::{CNcDirParams, DirParams, NcChisqParams, NcDirParams, SimplexPoint};
use crate::specfun::SeriesControl;

/// Deterministic random stream. Child streams derived with [`RandomStream::split`]
/// are independent ChaCha streams of the same seed.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
    seed: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream number `index` of this seed; stream 0 is the parent itself.
    pub fn split(&self, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        RandomStream {
            rng,
            seed: self.seed,
        }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

const POISSON_INVERSION_MAX: f64 = 30.0;

/// Chi-squared draw with `g > 0` degrees of freedom, i.e. Gamma(g/2, 2).
pub fn sample_chisq<R: Rng + ?Sized>(g: f64, rng: &mut R) -> Result<f64> {
    let gamma = Gamma::new(g / 2.0, 2.0).map_err(|_| {
        Error::domain(format!(
            "chi-squared degrees of freedom must be positive, got {g}"
        ))
    })?;
    Ok(gamma.sample(rng))
}

/// Chi-squared draw with two degrees of freedom, `-2 ln U`.
fn sample_chisq2<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // gen() is in [0, 1); 1 - u avoids ln 0
    let u: f64 = rng.gen();
    -2.0 * (1.0 - u).ln()
}

/// Poisson draw: sequential inversion for small means, the exact rejection
/// sampler of `rand_distr` above.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::domain(format!(
            "Poisson mean must be finite and nonnegative, got {mean}"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    if mean > POISSON_INVERSION_MAX {
        let d = Poisson::new(mean).map_err(|e| Error::domain(e.to_string()))?;
        return Ok(d.sample(rng) as u64);
    }
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u >= cdf {
        k += 1;
        p *= mean / k as f64;
        let next = cdf + p;
        if next == cdf {
            // rounding stall far in the tail
            break;
        }
        cdf = next;
    }
    Ok(k)
}

/// Non-central chi-squared draw: a central part with `g` degrees of freedom
/// plus `M ~ Poisson(λ/2)` independent two-degree chi-squareds.
pub fn sample_ncchisq<R: Rng + ?Sized>(p: &NcChisqParams, rng: &mut R) -> Result<f64> {
    let central = if p.dof() > 0.0 {
        sample_chisq(p.dof(), rng)?
    } else {
        0.0
    };
    let m = sample_poisson(p.lambda() / 2.0, rng)?;
    Ok(central + (0..m).map(|_| sample_chisq2(rng)).sum::<f64>())
}

/// Normalize positive draws onto the simplex, or `None` when rounding leaves
/// a part at zero or a coordinate at one.
fn normalize(ys: &[f64]) -> Option<SimplexPoint> {
    let total: f64 = ys.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let parts: Vec<f64> = ys.iter().map(|y| y / total).collect();
    SimplexPoint::from_parts(&parts).ok()
}

/// Retry a draw of the simplex coordinates until it is representable in
/// floating point. Rejection only happens for parts below the smallest
/// normal double or a coordinate that rounds to one.
fn draw_point<R: Rng + ?Sized>(
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> Result<Vec<f64>>,
) -> Result<SimplexPoint> {
    const ATTEMPTS: usize = 1000;
    for _ in 0..ATTEMPTS {
        if let Some(x) = normalize(&draw(rng)?) {
            return Ok(x);
        }
    }
    Err(Error::domain(
        "sampled parts repeatedly underflowed; shapes are too small",
    ))
}

/// Dirichlet draw as normalized independent chi-squareds with `2α_i` degrees.
pub fn sample_dirichlet<R: Rng + ?Sized>(p: &DirParams, rng: &mut R) -> Result<SimplexPoint> {
    draw_point(rng, |r| {
        p.alpha().iter().map(|a| sample_chisq(2.0 * a, r)).collect()
    })
}

/// NcDir draw as normalized independent non-central chi-squareds.
pub fn sample_ncdir<R: Rng + ?Sized>(p: &NcDirParams, rng: &mut R) -> Result<SimplexPoint> {
    let laws = p
        .alpha()
        .iter()
        .zip(p.lambda())
        .map(|(&a, &l)| NcChisqParams::new(2.0 * a, l))
        .collect::<Result<Vec<_>>>()?;
    draw_point(rng, |r| {
        laws.iter().map(|law| sample_ncchisq(law, r)).collect()
    })
}

/// CNcDir sampler holding the tabulated mixture-weight law for repeated draws.
#[derive(Debug, Clone)]
pub struct CNcDirSampler {
    params: CNcDirParams,
    mw: MwSampler,
}

impl CNcDirSampler {
    pub fn new(p: &CNcDirParams, ctl: SeriesControl) -> Result<Self> {
        Ok(CNcDirSampler {
            params: p.clone(),
            mw: MwSampler::new(&MwParams::from(p), ctl, DEFAULT_SAMPLER_CAP)?,
        })
    }

    pub fn params(&self) -> &CNcDirParams {
        &self.params
    }

    /// Latent counts, one per part.
    pub fn sample_counts<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CountVector> {
        self.mw.sample(rng)
    }

    /// Draw `N` from the mixture-weight law, then `Dir(α + N)`.
    pub fn sample_mixture<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SimplexPoint> {
        let n = self.mw.sample(rng)?;
        self.dirichlet_given(&n, rng)
    }

    /// `X | N ~ Dir(α + N)`.
    pub fn dirichlet_given<R: Rng + ?Sized>(
        &self,
        n: &CountVector,
        rng: &mut R,
    ) -> Result<SimplexPoint> {
        let shifted = DirParams::new(self.shifted_alpha(n))?;
        sample_dirichlet(&shifted, rng)
    }

    /// Composition draw: `Z'_i = Z_i + Σ_{j ≤ N_i} F_j` with `Z_i ~ χ²_{2α_i}`
    /// and `F_j ~ χ²_2`, normalized.
    pub fn sample_composition<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SimplexPoint> {
        Ok(self.sample_composition_parts(rng)?.0)
    }

    /// Composition draw together with the counts and the total `Z'⁺`.
    pub fn sample_composition_parts<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<(SimplexPoint, CountVector, f64)> {
        let n = self.mw.sample(rng)?;
        let alpha = self.params.alpha();
        let mut ys = Vec::new();
        let x = draw_point(rng, |r| {
            ys = Vec::with_capacity(alpha.len());
            for (i, &a) in alpha.iter().enumerate() {
                let extra = n.counts()[i];
                let mut z = sample_chisq(2.0 * a, r)?;
                for _ in 0..extra {
                    z += sample_chisq2(r);
                }
                ys.push(z);
            }
            Ok(ys.clone())
        })?;
        let total = ys.iter().sum();
        Ok((x, n, total))
    }

    fn shifted_alpha(&self, n: &CountVector) -> Vec<f64> {
        let alpha = self.params.alpha();
        let mut shifted = alpha.to_vec();
        for (s, &c) in shifted.iter_mut().zip(n.counts()) {
            *s += c as f64;
        }
        shifted
    }
}

/// One mixture-representation draw. Build a [`CNcDirSampler`] for repeated draws.
pub fn sample_cncdir_mixture<R: Rng + ?Sized>(
    p: &CNcDirParams,
    rng: &mut R,
) -> Result<SimplexPoint> {
    CNcDirSampler::new(p, SeriesControl::exact())?.sample_mixture(rng)
}

/// One composition-representation draw.
pub fn sample_cncdir_composition<R: Rng + ?Sized>(
    p: &CNcDirParams,
    rng: &mut R,
) -> Result<SimplexPoint> {
    CNcDirSampler::new(p, SeriesControl::exact())?.sample_composition(rng)
}
