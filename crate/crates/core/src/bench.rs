//! Paired timing study of CNcDir² against NcDir² maximum-likelihood fits on
//! synthetic series, with a one-tailed Z test per stratum.

use std::time::Instant;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{fit_ml, Dataset2D, Family, FitOptions, ModelSpec};
use crate::models::{CNcDirParams, NcDirParams};
use crate::sampling::{sample_ncdir, CNcDirSampler, RandomStream};
use crate::specfun::SeriesControl;
use crate::stats::{mean_var, normal_sf};

/// Share of failed replications above which a stratum result is rejected.
const MAX_FAILURE_SHARE: f64 = 0.10;

/// One cell of the timing grid: shared parameters of both models, series
/// length `N` and number of replications `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchStratum {
    pub alpha: [f64; 3],
    pub lambda: [f64; 3],
    pub series_size: usize,
    pub replications: usize,
}

impl BenchStratum {
    pub fn new(
        alpha: [f64; 3],
        lambda: [f64; 3],
        series_size: usize,
        replications: usize,
    ) -> Result<Self> {
        let s = BenchStratum {
            alpha,
            lambda,
            series_size,
            replications,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(Error::domain("stratum shapes must be positive"));
        }
        if !self.lambda.iter().all(|l| l.is_finite() && *l >= 0.0) {
            return Err(Error::domain(
                "stratum non-centralities must be non-negative",
            ));
        }
        if self.series_size < 2 {
            return Err(Error::domain("series size must be at least 2"));
        }
        if self.replications < 2 {
            return Err(Error::domain("a stratum needs at least 2 replications"));
        }
        Ok(())
    }
}

/// The four parameter rows of the published timing table.
pub const TABLE4_PARAMS: [([f64; 3], [f64; 3]); 4] = [
    ([1.8, 1.2, 1.5], [0.7, 1.0, 0.9]),
    ([0.7, 1.3, 1.9], [4.6, 0.5, 3.8]),
    ([2.1, 0.2, 0.6], [0.8, 2.9, 4.2]),
    ([0.8, 0.9, 0.4], [2.4, 1.7, 2.8]),
];

pub const TABLE4_SIZES: [usize; 3] = [25, 50, 100];

/// The 4 × 3 grid with `replications` per cell.
pub fn table4_strata(replications: usize) -> Vec<BenchStratum> {
    TABLE4_PARAMS
        .iter()
        .flat_map(|&(alpha, lambda)| {
            TABLE4_SIZES.iter().map(move |&series_size| BenchStratum {
                alpha,
                lambda,
                series_size,
                replications,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub stratum: BenchStratum,
    /// Seconds.
    pub mean_cncdir: f64,
    pub sd_cncdir: f64,
    pub mean_ncdir: f64,
    pub sd_ncdir: f64,
    /// Unpooled `(mean_cncdir - mean_ncdir) / se`.
    pub z_stat: f64,
    /// `P(Z <= z)` under `mu_cncdir - mu_ncdir >= 0`.
    pub p_value: f64,
    pub speedup_ratio: f64,
    /// Replications used after pairwise exclusion of failed fits.
    pub used: usize,
    pub failed: usize,
}

/// Measures one fit. The wall-clock implementation runs `fit` between two
/// monotonic clock readings; test doubles may return injected times.
pub trait FitTimer {
    fn time(&mut self, family: Family, fit: &mut dyn FnMut() -> Result<()>) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WallClock;

impl FitTimer for WallClock {
    fn time(&mut self, _family: Family, fit: &mut dyn FnMut() -> Result<()>) -> Result<f64> {
        let t = Instant::now();
        fit()?;
        Ok(t.elapsed().as_secs_f64())
    }
}

/// Settings shared by both models in every timed fit.
#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub fit: FitOptions,
    /// Series control of the data generators.
    pub sampler_ctl: SeriesControl,
}

impl Default for BenchOptions {
    /// A single optimizer start from the moment-based center, no standard
    /// errors, sequential log-likelihood.
    fn default() -> Self {
        BenchOptions {
            fit: FitOptions {
                starts: 1,
                standard_errors: false,
                parallel: false,
                ..FitOptions::default()
            },
            sampler_ctl: SeriesControl::exact(),
        }
    }
}

/// Series of both models for replication `rep`.
fn series(
    s: &BenchStratum,
    sampler: &CNcDirSampler,
    nc: &NcDirParams,
    seed: u64,
    rep: u64,
) -> Result<(Dataset2D, Dataset2D)> {
    let mut rng = RandomStream::new(seed).split(rep);
    let conditional = (0..s.series_size)
        .map(|_| sampler.sample_mixture(&mut rng))
        .collect::<Result<Vec<_>>>()?;
    let classical = (0..s.series_size)
        .map(|_| sample_ncdir(nc, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok((Dataset2D::new(conditional)?, Dataset2D::new(classical)?))
}

fn one_tailed_z(c: (f64, f64), n: (f64, f64), reps: usize) -> (f64, f64) {
    let diff = c.0 - n.0;
    let se = ((c.1 + n.1) / reps as f64).sqrt();
    let z = if diff == 0.0 { 0.0 } else { diff / se };
    (z, normal_sf(-z))
}

/// Time `replications` paired fits of one stratum. Replication `k` draws its
/// series from stream `k` of `seed`; one extra series warms up both models
/// and is not timed.
pub fn run_stratum_with(
    s: &BenchStratum,
    seed: u64,
    opts: &BenchOptions,
    timer: &mut dyn FitTimer,
) -> Result<BenchResult> {
    s.validate()?;
    let cp = CNcDirParams::new(s.alpha.to_vec(), s.lambda.to_vec())?;
    let np = NcDirParams::new(s.alpha.to_vec(), s.lambda.to_vec())?;
    let sampler = CNcDirSampler::new(&cp, opts.sampler_ctl)?;
    let c_spec = ModelSpec::unconstrained(Family::CNcDir);
    let n_spec = ModelSpec::unconstrained(Family::NcDir);

    let (wc, wn) = series(s, &sampler, &np, seed, s.replications as u64)?;
    // warmup failures are irrelevant to the timed replications
    let _ = fit_ml(&c_spec, &wc, &opts.fit);
    let _ = fit_ml(&n_spec, &wn, &opts.fit);

    let mut tc = Vec::with_capacity(s.replications);
    let mut tn = Vec::with_capacity(s.replications);
    let mut failed = 0;
    for rep in 0..s.replications {
        let (dc, dn) = series(s, &sampler, &np, seed, rep as u64)?;
        let c = timer.time(Family::CNcDir, &mut || {
            fit_ml(&c_spec, &dc, &opts.fit).map(|_| ())
        });
        let n = timer.time(Family::NcDir, &mut || {
            fit_ml(&n_spec, &dn, &opts.fit).map(|_| ())
        });
        match (c, n) {
            (Ok(c), Ok(n)) => {
                tc.push(c);
                tn.push(n);
            }
            (Err(e), _) | (_, Err(e)) if !e.is_convergence() => return Err(e),
            _ => failed += 1,
        }
    }
    if failed as f64 > MAX_FAILURE_SHARE * s.replications as f64 || tc.len() < 2 {
        return Err(Error::TooManyFailures {
            failed,
            total: s.replications,
        });
    }
    let c = mean_var(&tc);
    let n = mean_var(&tn);
    let (z_stat, p_value) = one_tailed_z(c, n, tc.len());
    Ok(BenchResult {
        stratum: s.clone(),
        mean_cncdir: c.0,
        sd_cncdir: c.1.sqrt(),
        mean_ncdir: n.0,
        sd_ncdir: n.1.sqrt(),
        z_stat,
        p_value,
        speedup_ratio: n.0 / c.0,
        used: tc.len(),
        failed,
    })
}

pub fn run_stratum(s: &BenchStratum, seed: u64, opts: &BenchOptions) -> Result<BenchResult> {
    run_stratum_with(s, seed, opts, &mut WallClock)
}

/// Results of a sequence of strata, run one after another.
#[derive(Debug, Clone, Serialize)]
pub struct BenchTable {
    pub seed: u64,
    pub results: Vec<BenchResult>,
}

impl BenchTable {
    /// `mean_ncdir / mean_cncdir` over all cells pooled with equal weight.
    pub fn aggregate_speedup(&self) -> f64 {
        let c: f64 = self.results.iter().map(|r| r.mean_cncdir).sum();
        let n: f64 = self.results.iter().map(|r| r.mean_ncdir).sum();
        n / c
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from(
            "| alpha | lambda | N | CNcDir mean (sd) | NcDir mean (sd) | ratio | Z | p-value |\n\
             |---|---|---|---|---|---|---|---|\n",
        );
        for r in &self.results {
            let st = &r.stratum;
            let p = if r.p_value < 1e-4 {
                "<.0001".to_string()
            } else {
                format!("{:.4}", r.p_value)
            };
            s.push_str(&format!(
                "| ({}, {}, {}) | ({}, {}, {}) | {} | {:.4} ({:.4}) | {:.4} ({:.4}) | {:.1} | {:.2} | {} |\n",
                st.alpha[0],
                st.alpha[1],
                st.alpha[2],
                st.lambda[0],
                st.lambda[1],
                st.lambda[2],
                st.series_size,
                r.mean_cncdir,
                r.sd_cncdir,
                r.mean_ncdir,
                r.sd_ncdir,
                r.speedup_ratio,
                r.z_stat,
                p
            ));
        }
        s.push_str(&format!(
            "\naggregate speedup: {:.1}\n",
            self.aggregate_speedup()
        ));
        s
    }
}

/// Run the given strata sequentially; cell `i` uses a seed derived from
/// `seed` and `i`.
pub fn run_grid(strata: &[BenchStratum], seed: u64, opts: &BenchOptions) -> Result<BenchTable> {
    let results = strata
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let cell_seed = RandomStream::new(seed).split(i as u64).next_u64();
            run_stratum(s, cell_seed, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchTable { seed, results })
}

pub fn run_table4(seed: u64, replications: usize, opts: &BenchOptions) -> Result<BenchTable> {
    run_grid(&table4_strata(replications), seed, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Returns injected times per family without running the fit.
    struct Scripted {
        cncdir: Vec<f64>,
        ncdir: Vec<f64>,
    }

    impl FitTimer for Scripted {
        fn time(&mut self, family: Family, _fit: &mut dyn FnMut() -> Result<()>) -> Result<f64> {
            let stream = if family == Family::CNcDir {
                &mut self.cncdir
            } else {
                &mut self.ncdir
            };
            Ok(stream.remove(0))
        }
    }

    fn stratum(n: usize) -> BenchStratum {
        BenchStratum::new([1.8, 1.2, 1.5], [0.7, 1.0, 0.9], 25, n).unwrap()
    }

    #[test]
    fn identical_streams_give_null_statistic() {
        let times: Vec<f64> = (0..30).map(|i| 0.1 + 0.01 * (i % 7) as f64).collect();
        let mut timer = Scripted {
            cncdir: times.clone(),
            ncdir: times,
        };
        let r = run_stratum_with(&stratum(30), 3, &BenchOptions::default(), &mut timer).unwrap();
        assert_eq!(r.z_stat, 0.0);
        assert!((r.p_value - 0.5).abs() < 1e-12);
        assert_eq!(r.speedup_ratio, 1.0);
        assert_eq!(r.used, 30);
    }

    #[test]
    fn unpooled_z_statistic() {
        let mut timer = Scripted {
            cncdir: vec![1.0, 2.0, 3.0],
            ncdir: vec![4.0, 6.0, 8.0],
        };
        let r = run_stratum_with(&stratum(3), 3, &BenchOptions::default(), &mut timer).unwrap();
        // means 2 and 6, variances 1 and 4
        let z = -4.0 / (5.0f64 / 3.0).sqrt();
        assert!((r.z_stat - z).abs() < 1e-12);
        assert!((r.speedup_ratio - 3.0).abs() < 1e-12);
        assert!((r.sd_ncdir - 2.0).abs() < 1e-12);
        assert!(r.p_value < 0.001);
    }

    #[test]
    fn failures_are_excluded_pairwise() {
        struct Failing(usize);
        impl FitTimer for Failing {
            fn time(
                &mut self,
                family: Family,
                _fit: &mut dyn FnMut() -> Result<()>,
            ) -> Result<f64> {
                self.0 += 1;
                if family == Family::NcDir && self.0 == 4 {
                    return Err(Error::NoConvergence { starts: 1 });
                }
                Ok(self.0 as f64)
            }
        }
        let r =
            run_stratum_with(&stratum(12), 1, &BenchOptions::default(), &mut Failing(0)).unwrap();
        assert_eq!((r.used, r.failed), (11, 1));
        let err = run_stratum_with(&stratum(5), 1, &BenchOptions::default(), &mut Failing(0))
            .unwrap_err();
        assert!(matches!(
            err,
            Error::TooManyFailures {
                failed: 1,
                total: 5
            }
        ));
    }

    #[test]
    fn grid_and_validation() {
        let g = table4_strata(30);
        assert_eq!(g.len(), 12);
        assert_eq!(g[5].series_size, 100);
        assert_eq!(g[5].alpha, [0.7, 1.3, 1.9]);
        assert!(BenchStratum::new([1.0, 0.0, 1.0], [0.0; 3], 25, 3).is_err());
        assert!(BenchStratum::new([1.0; 3], [0.0; 3], 25, 1).is_err());
    }

    #[test]
    fn wall_clock_run_is_reproducible_in_data() {
        let s = BenchStratum::new([1.8, 1.2, 1.5], [0.7, 1.0, 0.9], 25, 2).unwrap();
        let opts = BenchOptions::default();
        let r = run_stratum(&s, 9, &opts).unwrap();
        assert!(r.mean_cncdir > 0.0 && r.mean_ncdir > 0.0);
        let cp = CNcDirParams::new(s.alpha.to_vec(), s.lambda.to_vec()).unwrap();
        let np = NcDirParams::new(s.alpha.to_vec(), s.lambda.to_vec()).unwrap();
        let sampler = CNcDirSampler::new(&cp, opts.sampler_ctl).unwrap();
        let a = series(&s, &sampler, &np, 9, 0).unwrap();
        let b = series(&s, &sampler, &np, 9, 0).unwrap();
        assert_eq!(a, b);
        let table = BenchTable {
            seed: 9,
            results: vec![r],
        };
        assert_eq!(table.to_markdown().lines().count(), 5);
    }
}
