use statrs::distribution::{ContinuousCDF, Normal};

/// Binary relative entropy G(x, p) with 0·ln 0 = 0.
pub fn binary_kl(x: f64, p: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(x, p) + term(1.0 - x, 1.0 - p)
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Normal-approximation bracket for the binomial CDF:
/// C(n, p, k) ≤ P(X ≤ k) ≤ C(n, p, k + 1) for X ~ Bin(n, p), k < n.
///
/// C(n, p, k) = Φ(sign(k/n − p) √(2n G(k/n, p))). For k > n the CDF is 1 and
/// so is C; degenerate p ∈ {0, 1} returns the exact CDF.
pub fn zubkov_c(n: u64, p: f64, k: u64) -> f64 {
    if k > n || p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if k >= n { 1.0 } else { 0.0 };
    }
    let x = k as f64 / n as f64;
    let d = x - p;
    if d == 0.0 {
        return 0.5;
    }
    // Roundoff can push the divergence a hair below zero near x = p.
    let z = (2.0 * n as f64 * binary_kl(x, p).max(0.0)).sqrt();
    phi(if d > 0.0 { z } else { -z })
}

/// Hoeffding bound exp(−2r²/(n w²)) on P(Σ(Xᵢ − E Xᵢ) ≥ r) for n variables
/// each confined to an interval of width w.
pub fn hoeffding_tail(n: u64, r: f64, width: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    (-2.0 * r * r / (n as f64 * width * width)).exp()
}
