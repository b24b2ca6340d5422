//! Piecewise-linear curves on the real line and their convex/concave hulls.

mod hull;
mod penalty;

pub use hull::{lower_convex_hull, lower_step_hull, upper_concave_hull};
pub use penalty::{build_g_epsilon, PenaltyCurve, H_SUBDIVISIONS};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EnvelopeError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("knot abscissae must be strictly ascending")]
    NotAscending,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(f64),
    #[error("empty domain [{0}, {1}]")]
    EmptyDomain(f64, f64),
    #[error("write failed: {0}")]
    Io(String),
}

/// How a curve continues beyond its outermost knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    Constant,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
    left: Extension,
    right: Extension,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>, left: Extension, right: Extension) -> Result<Self, EnvelopeError> {
        if knots.is_empty() {
            return Err(EnvelopeError::TooFewPoints { needed: 1, got: 0 });
        }
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(EnvelopeError::NonFinite);
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(EnvelopeError::NotAscending);
        }
        Ok(PiecewiseLinear { knots, left, right })
    }

    pub fn with_extensions(mut self, left: Extension, right: Extension) -> Self {
        self.left = left;
        self.right = right;
        self
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn extensions(&self) -> (Extension, Extension) {
        (self.left, self.right)
    }

    /// First and last knot abscissa.
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.knots.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let n = k.len();
        if n == 1 {
            return k[0].1;
        }
        let seg = |i: usize| {
            let (x0, y0) = k[i];
            let (x1, y1) = k[i + 1];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        };
        if x <= k[0].0 {
            return match self.left {
                Extension::Constant => k[0].1,
                Extension::Linear => seg(0),
            };
        }
        if x >= k[n - 1].0 {
            return match self.right {
                Extension::Constant => k[n - 1].1,
                Extension::Linear => seg(n - 2),
            };
        }
        let i = k.partition_point(|p| p.0 <= x) - 1;
        if x == k[i].0 {
            k[i].1
        } else {
            seg(i)
        }
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        self.slopes().windows(2).all(|s| s[1] >= s[0] - tol)
    }

    pub fn is_concave(&self, tol: f64) -> bool {
        self.slopes().windows(2).all(|s| s[1] <= s[0] + tol)
    }

    pub fn is_non_decreasing(&self, tol: f64) -> bool {
        self.knots.windows(2).all(|w| w[1].1 >= w[0].1 - tol)
    }

    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.knots.windows(2).all(|w| w[1].1 <= w[0].1 + tol)
    }
}

/// One row of the knot list in curve JSON files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnotRecord {
    pub omega: f64,
    pub value: f64,
}

/// Writes `omega,value` rows with a header.
pub fn write_knots_csv<W: std::io::Write>(out: W, knots: &[(f64, f64)]) -> Result<(), EnvelopeError> {
    let mut w = csv::Writer::from_writer(out);
    for &(omega, value) in knots {
        w.serialize(KnotRecord { omega, value }).map_err(|e| EnvelopeError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| EnvelopeError::Io(e.to_string()))
}
