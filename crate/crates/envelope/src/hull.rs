use crate::{EnvelopeError, Extension, PiecewiseLinear};

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn checked_sorted(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>, EnvelopeError> {
    if points.len() < 2 {
        return Err(EnvelopeError::TooFewPoints { needed: 2, got: points.len() });
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(EnvelopeError::NonFinite);
    }
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    // Only the lowest point at each abscissa can lie on a lower hull.
    p.dedup_by(|b, a| a.0 == b.0);
    Ok(p)
}

/// Greatest convex function below all points, on their x-range.
/// Collinear interior vertices are dropped. Extensions are constant.
pub fn lower_convex_hull(points: &[(f64, f64)]) -> Result<PiecewiseLinear, EnvelopeError> {
    let p = checked_sorted(points)?;
    let mut h: Vec<(f64, f64)> = Vec::with_capacity(p.len());
    for q in p {
        while h.len() >= 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
            h.pop();
        }
        h.push(q);
    }
    PiecewiseLinear::new(h, Extension::Constant, Extension::Constant)
}

/// Least concave function above all points, on their x-range.
pub fn upper_concave_hull(points: &[(f64, f64)]) -> Result<PiecewiseLinear, EnvelopeError> {
    let neg: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x, -y)).collect();
    let lower = lower_convex_hull(&neg)?;
    let knots = lower.knots().iter().map(|&(x, y)| (x, -y)).collect();
    PiecewiseLinear::new(knots, Extension::Constant, Extension::Constant)
}

/// Lower convex hull of the staircase through (x_i, y_i) and (x_{i+1}, y_i),
/// where y is first replaced by its running maximum. For a non-decreasing
/// function known only at the x_i this is the best convex lower bound that
/// is valid between knots as well. Points must have distinct abscissae.
pub fn lower_step_hull(points: &[(f64, f64)]) -> Result<PiecewiseLinear, EnvelopeError> {
    let mut p = checked_sorted(points)?;
    if p.len() != points.len() {
        return Err(EnvelopeError::NotAscending);
    }
    for i in 1..p.len() {
        p[i].1 = p[i].1.max(p[i - 1].1);
    }
    let mut stair = Vec::with_capacity(2 * p.len());
    for w in p.windows(2) {
        stair.push(w[0]);
        stair.push((w[1].0, w[0].1));
    }
    stair.push(p[p.len() - 1]);
    lower_convex_hull(&stair)
}
