use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::ExtractError;

/// Published CHSH reference curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticKind {
    /// Tight LOCC extractability, linear from 1/2 at ω = 2 to 1 at 2√2.
    BardynLocc,
    /// LO lower bound, trivial below ω*.
    KaniewskiLo,
}

/// ω* = (16 + 14√2)/17 ≈ 2.1058.
pub fn omega_star() -> f64 {
    (16.0 + 14.0 * SQRT_2) / 17.0
}

pub fn analytic(kind: AnalyticKind, omega: f64) -> Result<f64, ExtractError> {
    let qmax = 2.0 * SQRT_2;
    // Allow knots computed as 2√2 by a different rounding path.
    if !(2.0 - 1e-12..=qmax + 1e-12).contains(&omega) {
        return Err(ExtractError::AnalyticOutOfRange(omega));
    }
    let omega = omega.clamp(2.0, qmax);
    Ok(match kind {
        AnalyticKind::BardynLocc => 0.5 * (1.0 + (omega - 2.0) / (qmax - 2.0)),
        AnalyticKind::KaniewskiLo => {
            let ws = omega_star();
            (0.5 * (1.0 + (omega - ws) / (qmax - ws))).max(0.5)
        }
    })
}
