//! Certified lower bounds on the LOCC extractability curve Ξ_B(ω).
//!
//! The measurement angles (a, b) ∈ [0, π/2]² are gridded; every grid point
//! whose Bell operator can reach ω − m(δ) is solved with the per-angle SDP
//! at the penalized value ω − m(δ), and the minimum over included points
//! bounds Ξ_B(ω) from below. Knot values are then floored at 1/2, capped at
//! 1, and convexified so that the curve is valid between knots too.

mod analytic;
mod curve;
mod grid;

pub use analytic::{analytic, omega_star, AnalyticKind};
pub use curve::{CurveMeta, ExtractabilityCurve, KnotDetail, FLOOR};
pub use grid::{
    default_knots, feasible_cells, grid_axis, knot_minimum, penalty, xi_lower_bound, xi_lower_bound_with, Grid,
    GridSpec, KnotMinimum, PenaltyMode, SweepOptions,
};

use envelope::EnvelopeError;

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("grid spacing must lie in (0, π/4], got {0}")]
    BadSpacing(f64),
    #[error("knot {omega} outside the quantum range [{lo}, {hi}]")]
    KnotOutOfRange { omega: f64, lo: f64, hi: f64 },
    #[error("knots must be finite and strictly ascending")]
    KnotsNotAscending,
    #[error("no knots given")]
    NoKnots,
    #[error("no knot has a feasible cell")]
    AllKnotsInfeasible,
    #[error("ω = {0} outside [2, 2√2]")]
    AnalyticOutOfRange(f64),
    #[error("curve file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Sdp(#[from] sdpcore::SdpError),
    #[error(transparent)]
    Mat(#[from] matqm::MatError),
}
