//! One-sample Kolmogorov–Smirnov test.

use std::f64::consts::PI;

/// `D_n = sup |F_n - F|` for `sorted` samples and the model CDF at each of them.
pub fn ks_statistic(cdf_at_sorted: &[f64]) -> f64 {
    let n = cdf_at_sorted.len() as f64;
    cdf_at_sorted
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // P(K <= x) = sqrt(2π)/x Σ exp(-(2k-1)² π² / (8x²))
        let w = (2.0 * PI).sqrt() / x;
        let e = -PI * PI / (8.0 * x * x);
        let cdf: f64 = (1..=8)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (j * j * e).exp()
            })
            .sum::<f64>()
            * w;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let sf: f64 = (1..=20)
            .map(|k| {
                let kf = k as f64;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * kf * kf * x * x).exp()
            })
            .sum::<f64>()
            * 2.0;
        sf.clamp(0.0, 1.0)
    }
}

/// Asymptotic p-value for statistic `d` with `n` samples, with the
/// `sqrt(n) + 0.12 + 0.11/sqrt(n)` small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// Statistic and p-value of `samples` against `cdf`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let f: Vec<f64> = sorted.iter().map(|&x| cdf(x)).collect();
    let d = ks_statistic(&f);
    (d, ks_pvalue(d, samples.len()))
}
