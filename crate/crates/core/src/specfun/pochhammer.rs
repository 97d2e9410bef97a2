use statrs::function::gamma::ln_gamma;

/// Below this many factors the ascending factorial is a plain product.
const PRODUCT_CUTOFF: u64 = 64;

/// Ascending factorial `(a)_l = a (a+1) ... (a+l-1)`, with `(a)_0 = 1`.
///
/// Long products go through [`log_pochhammer`]; that path needs `a > 0`.
pub fn pochhammer(a: f64, l: u64) -> f64 {
    if l <= PRODUCT_CUTOFF || a <= 0.0 {
        (0..l).map(|i| a + i as f64).product()
    } else {
        log_pochhammer(a, l).exp()
    }
}

/// `ln (a)_l` for `a > 0`.
pub fn log_pochhammer(a: f64, l: u64) -> f64 {
    if l == 0 {
        return 0.0;
    }
    if l <= PRODUCT_CUTOFF {
        (0..l).map(|i| (a + i as f64).ln()).sum()
    } else {
        ln_gamma(a + l as f64) - ln_gamma(a)
    }
}

/// `(a)_{l1+l2}` computed as `(a)_{l1} (a+l1)_{l2}`.
pub fn poch_sum_split(a: f64, l1: u64, l2: u64) -> f64 {
    pochhammer(a, l1) * pochhammer(a + l1 as f64, l2)
}

/// `ln k!`.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// Generalized binomial coefficient `C(n, k)` for real `n`.
pub fn binomial(n: f64, k: u64) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= (n - i as f64) / (i as f64 + 1.0);
    }
    c
}
