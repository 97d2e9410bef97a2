/// Settings of the simplex search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Converged when the spread of function values over the simplex is
    /// below `ftol · (|f_best| + ftol)`.
    pub ftol: f64,
    /// Iteration budget, shared by the restarts.
    pub max_iter: usize,
    /// Edge length of the initial simplex.
    pub step: f64,
    /// Fresh simplices built around the optimum after convergence; the search
    /// stops early once a restart no longer improves the value.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            ftol: 1e-8,
            max_iter: 5000,
            step: 0.25,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evals: usize,
    pub converged: bool,
}

/// Minimize `f` from `x0` by the Nelder–Mead simplex method with standard
/// coefficients (reflection 1, expansion 2, contraction ½, shrink ½).
/// Non-finite values are treated as `+∞`.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let v = eval(x0);
        return NelderMeadResult {
            x: vec![],
            f: v,
            iterations: 0,
            evals: 1,
            converged: v.is_finite(),
        };
    }

    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0);
    let mut iterations = 0;
    let mut converged = false;
    for round in 0..=opts.restarts {
        let start_f = best_f;
        let mut pts = vec![best_x.clone()];
        let mut vals = vec![best_f];
        for i in 0..n {
            let mut p = best_x.clone();
            p[i] += opts.step;
            vals.push(eval(&p));
            pts.push(p);
        }
        converged = false;
        while iterations < opts.max_iter {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();
            let (lo, hi) = (vals[0], vals[n]);
            if lo.is_finite() && hi - lo <= opts.ftol * (lo.abs() + opts.ftol) {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for p in &pts[..n] {
                for (c, v) in centroid.iter_mut().zip(p) {
                    *c += v / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&pts[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(1.0);
            let fr = eval(&xr);
            if fr < vals[0] {
                let xe = along(2.0);
                let fe = eval(&xe);
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
                continue;
            }
            // outside contraction when the reflection improved on the worst point
            let xc = if fr < vals[n] {
                along(0.5)
            } else {
                along(-0.5)
            };
            let fc = eval(&xc);
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
                continue;
            }
            // shrink toward the best vertex
            for i in 1..=n {
                let p: Vec<f64> = pts[0]
                    .iter()
                    .zip(&pts[i])
                    .map(|(b, v)| b + 0.5 * (v - b))
                    .collect();
                vals[i] = eval(&p);
                pts[i] = p;
            }
        }
        let i = (0..=n)
            .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
            .expect("nonempty simplex");
        if vals[i] <= best_f {
            best_f = vals[i];
            best_x = pts[i].clone();
        }
        if !converged || (round > 0 && start_f - best_f <= opts.ftol * (best_f.abs() + opts.ftol)) {
            break;
        }
    }
    NelderMeadResult {
        x: best_x,
        f: best_f,
        iterations,
        evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            NelderMeadOptions {
                ftol: 1e-14,
                ..Default::default()
            },
        );
        assert!(r.converged);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4,
            "{r:?}"
        );
    }

    #[test]
    fn quadratic_bowl() {
        let r = nelder_mead(
            |x| {
                3.0 + x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (i as f64 + 1.0) * (v - 0.5).powi(2))
                    .sum::<f64>()
            },
            &[2.0, -1.0, 0.0, 4.0],
            NelderMeadOptions::default(),
        );
        assert!(r.converged);
        assert!((r.f - 3.0).abs() < 1e-7);
        assert!(r.x.iter().all(|v| (v - 0.5).abs() < 1e-3));
    }

    #[test]
    fn infeasible_region_and_budget() {
        let r = nelder_mead(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 0.1).powi(2) + 1.0
                }
            },
            &[1.0],
            NelderMeadOptions::default(),
        );
        assert!(r.converged && (r.x[0] - 0.1).abs() < 1e-3);
        let r = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2) + 1.0,
            &[0.0, 0.0],
            NelderMeadOptions {
                max_iter: 3,
                ..Default::default()
            },
        );
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }
}
