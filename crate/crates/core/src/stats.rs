//! Deterministic statistical acceptance bounds for trial runs: per-bin
//! binomial 5σ checks and total-variation distances.

/// Standard deviation of a Binomial(n, p) count.
pub fn binomial_sigma(n: u64, p: f64) -> f64 {
    (n as f64 * p * (1.0 - p)).sqrt()
}

/// |count − n·p| ≤ 5σ. Probability-zero bins must be exactly empty and
/// probability-one bins exactly full.
pub fn within_binomial_5sigma(count: u64, n: u64, p: f64) -> bool {
    if p <= 0.0 {
        return count == 0;
    }
    if p >= 1.0 {
        return count == n;
    }
    (count as f64 - n as f64 * p).abs() <= 5.0 * binomial_sigma(n, p)
}

/// Signed z-score of a binomial count; ±inf when p is degenerate and the
/// count disagrees.
pub fn binomial_z(count: u64, n: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return if count == 0 { 0.0 } else { f64::INFINITY };
    }
    if p >= 1.0 {
        return if count == n { 0.0 } else { f64::NEG_INFINITY };
    }
    (count as f64 - n as f64 * p) / binomial_sigma(n, p)
}

/// Total-variation distance ½·Σ|p − q| between two distributions.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must share support");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
