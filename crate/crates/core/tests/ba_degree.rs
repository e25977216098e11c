use cvnet_core::netmodel::build_barabasi_albert;

const K_MIN: usize = 5;

/// Discrete power-law exponent estimate `1 + n / sum ln(k / (k_min - 1/2))`
/// over degrees `k >= k_min`, with each degree weighted by `weight(k)`.
fn tail_exponent(weights: impl Iterator<Item = (usize, f64)>) -> f64 {
    let (mut n, mut s) = (0.0, 0.0);
    for (k, w) in weights.filter(|&(k, _)| k >= K_MIN) {
        n += w;
        s += w * (k as f64 / (K_MIN as f64 - 0.5)).ln();
    }
    1.0 + n / s
}

#[test]
fn degree_tail_follows_preferential_attachment() {
    let (n, kappa) = (500, 2);
    let mut degrees = Vec::new();
    for seed in 0..100 {
        let g = build_barabasi_albert(n, kappa, kappa, 1.0, 0.25, seed).unwrap();
        degrees.extend(g.degrees());
    }
    let empirical = tail_exponent(degrees.iter().map(|&k| (k, 1.0)));

    // stationary degree law of linear preferential attachment
    let m = kappa as f64;
    let pmf = |k: usize| {
        let k = k as f64;
        2.0 * m * (m + 1.0) / (k * (k + 1.0) * (k + 2.0))
    };
    let oracle = tail_exponent((kappa..n).map(|k| (k, pmf(k))));

    assert!((empirical - oracle).abs() < 0.15, "empirical {empirical} vs oracle {oracle}");
    assert!((empirical - 3.0).abs() < 0.35, "empirical {empirical}");
}
