//! Sequential adversary: round i is won with probability at most μᵢ given
//! any history. The question is how likely at least c wins are.

fn check_mu(mu: &[f64]) {
    assert!(mu.iter().all(|m| (0.0..=1.0).contains(m)), "win probabilities must lie in [0, 1]: {mu:?}");
}

/// P(Σ Xᵢ ≥ c) for independent Xᵢ ~ Bernoulli(μᵢ), by dynamic programming
/// over the running count.
pub fn seq_adversary_value(mu: &[f64], c: usize) -> f64 {
    check_mu(mu);
    let mut dist = vec![1.0];
    for &m in mu {
        let mut next = vec![0.0; dist.len() + 1];
        for (k, p) in dist.iter().enumerate() {
            next[k] += p * (1.0 - m);
            next[k + 1] += p * m;
        }
        dist = next;
    }
    dist.iter().skip(c).sum::<f64>().min(1.0)
}

/// Best adaptive strategy where every history-conditional win probability
/// in round i is chosen from {k/(steps−1)} ∩ [0, μᵢ]. Exhaustive over the
/// history tree; meant for n ≤ 4.
pub fn seq_adversary_bruteforce(mu: &[f64], c: usize, grid_steps: usize) -> f64 {
    check_mu(mu);
    assert!(mu.len() <= 4, "brute force is limited to 4 rounds");
    assert!(grid_steps >= 2, "need at least the grid points 0 and 1");
    let grids: Vec<Vec<f64>> = mu
        .iter()
        .map(|&m| {
            (0..grid_steps).map(|k| k as f64 / (grid_steps - 1) as f64).filter(|&q| q <= m + 1e-12).collect()
        })
        .collect();
    let mut history = Vec::with_capacity(mu.len());
    best(&grids, c, &mut history)
}

fn best(grids: &[Vec<f64>], c: usize, history: &mut Vec<bool>) -> f64 {
    let i = history.len();
    if i == grids.len() {
        return f64::from(u8::from(history.iter().filter(|&&w| w).count() >= c));
    }
    history.push(true);
    let win = best(grids, c, history);
    history.pop();
    history.push(false);
    let loss = best(grids, c, history);
    history.pop();
    grids[i].iter().map(|q| q * win + (1.0 - q) * loss).fold(f64::NEG_INFINITY, f64::max)
}
