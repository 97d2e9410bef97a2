//! Log-space sums over count vectors for the truncated mixture evaluators.

/// `c[s] = ln Σ_{i+j=s} exp(a[i] + b[j])`.
pub(crate) fn log_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len() + b.len() - 1;
    let mut out = vec![f64::NEG_INFINITY; n];
    for (s, slot) in out.iter_mut().enumerate() {
        let lo = s.saturating_sub(b.len() - 1);
        let hi = s.min(a.len() - 1);
        let mut max = f64::NEG_INFINITY;
        for i in lo..=hi {
            max = max.max(a[i] + b[s - i]);
        }
        if max == f64::NEG_INFINITY {
            continue;
        }
        let mut acc = 0.0;
        for i in lo..=hi {
            acc += (a[i] + b[s - i] - max).exp();
        }
        *slot = max + acc.ln();
    }
    out
}

/// `ln Σ_j exp(coupling(j⁺) + Σ_i tables[i][j_i])` over the box
/// `0 <= j_i < tables[i].len()`.
pub(crate) fn log_box_sum(tables: &[Vec<f64>], coupling: impl Fn(usize) -> f64) -> f64 {
    let mut acc = tables[0].clone();
    for t in &tables[1..] {
        acc = log_convolve(&acc, t);
    }
    let terms: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(s, &v)| {
            if v == f64::NEG_INFINITY {
                v
            } else {
                v + coupling(s)
            }
        })
        .collect();
    crate::specfun::log_sum_exp(&terms)
}
