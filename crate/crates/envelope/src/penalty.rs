use serde_json::json;

use crate::{upper_concave_hull, write_knots_csv, EnvelopeError, KnotRecord, PiecewiseLinear};

/// Extra samples of h per interval between consecutive Ξ̂ knots.
pub const H_SUBDIVISIONS: usize = 4;
/// Geometric refinement toward the right end of the domain.
const RIGHT_REFINE: i32 = 20;

/// The concave non-increasing curve G_ε over a Bell-value domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyCurve {
    base: PiecewiseLinear,
    epsilon: f64,
    samples: Vec<(f64, f64)>,
}

impl PenaltyCurve {
    /// Constant extension on both sides.
    pub fn eval(&self, omega: f64) -> f64 {
        self.base.eval(omega)
    }

    pub fn base(&self) -> &PiecewiseLinear {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The (ω, h(ω)) samples the hull was built from.
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn to_json(&self, functional: &str) -> String {
        let knots: Vec<KnotRecord> =
            self.base.knots().iter().map(|&(omega, value)| KnotRecord { omega, value }).collect();
        let doc = json!({
            "functional": functional,
            "knots": knots,
            "meta": { "epsilon": self.epsilon },
        });
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), EnvelopeError> {
        write_knots_csv(out, self.base.knots())
    }
}

fn h_of(xi: f64, eps: f64) -> f64 {
    ((1.0 - xi.clamp(0.0, 1.0)).sqrt() - eps).max(0.0)
}

/// Builds G_ε from a lower bound Ξ̂ on extractability over `domain`.
///
/// h(ω) = max(√(1 − Ξ̂(ω)) − ε, 0) is sampled at every Ξ̂ knot, at
/// `H_SUBDIVISIONS` points per knot interval, where Ξ̂ crosses 1 − ε², and
/// geometrically toward the right end. Ξ̂ is linear between samples, so h is
/// monotone there and the larger endpoint value bounds it on the whole
/// interval; the upper concave hull of those steps dominates h everywhere
/// on the domain. Left of the domain the curve is constant, which is valid
/// whenever Ξ̂ is constant there.
pub fn build_g_epsilon(xi: &PiecewiseLinear, domain: (f64, f64), eps: f64) -> Result<PenaltyCurve, EnvelopeError> {
    if !(eps >= 0.0) {
        return Err(EnvelopeError::NegativeEpsilon(eps));
    }
    let (lo, hi) = domain;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(EnvelopeError::EmptyDomain(lo, hi));
    }

    let mut xs: Vec<f64> = vec![lo, hi];
    xs.extend(xi.knots().iter().map(|k| k.0).filter(|&x| x > lo && x < hi));
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let target = 1.0 - eps * eps;
    let mut fine = Vec::with_capacity(xs.len() * (H_SUBDIVISIONS + 1) + RIGHT_REFINE as usize);
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        for j in 0..H_SUBDIVISIONS {
            fine.push(a + (b - a) * j as f64 / H_SUBDIVISIONS as f64);
        }
        let (ya, yb) = (xi.eval(a), xi.eval(b));
        if (ya - target) * (yb - target) < 0.0 {
            fine.push(a + (b - a) * (target - ya) / (yb - ya));
        }
    }
    let width = xs[xs.len() - 1] - xs[xs.len() - 2];
    for k in 1..=RIGHT_REFINE {
        fine.push(hi - width * 2f64.powi(-k));
    }
    fine.push(hi);
    fine.retain(|&x| x >= lo && x <= hi);
    fine.sort_by(f64::total_cmp);
    fine.dedup();

    let samples: Vec<(f64, f64)> = fine.iter().map(|&x| (x, h_of(xi.eval(x), eps))).collect();
    let mut steps = Vec::with_capacity(2 * samples.len());
    for w in samples.windows(2) {
        let m = w[0].1.max(w[1].1);
        steps.push((w[0].0, m));
        steps.push((w[1].0, m));
    }
    let base = upper_concave_hull(&steps)?;
    Ok(PenaltyCurve { base, epsilon: eps, samples })
}
