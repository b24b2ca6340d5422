use std::path::Path;

use envelope::{build_g_epsilon, lower_step_hull, write_knots_csv, Extension, KnotRecord, PenaltyCurve, PiecewiseLinear};
use serde::{Deserialize, Serialize};

use crate::{analytic, omega_star, AnalyticKind, ExtractError, KnotMinimum, PenaltyMode};

/// Trivial extractability: the best fidelity of a product state with φ⁺.
pub const FLOOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub delta: f64,
    pub mode: PenaltyMode,
    pub penalty: f64,
    pub floor: f64,
}

/// Per-knot record kept from the sweep (not serialized).
#[derive(Debug, Clone)]
pub struct KnotDetail {
    /// Certified minimum clamped to [1/2, 1], before convexification.
    pub clamped: f64,
    pub result: KnotMinimum,
}

/// Convex non-decreasing lower bound on extractability. Left of the first
/// knot the value is the floor; right of the last knot it stays constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractabilityCurve {
    pub functional: String,
    pub knots: Vec<KnotRecord>,
    pub meta: CurveMeta,
    #[serde(skip)]
    details: Vec<KnotDetail>,
}

impl ExtractabilityCurve {
    /// Convexifies clamped knot values.
    ///
    /// Extractability is non-decreasing in ω, so each knot value holds up to
    /// the next knot; the lower convex hull of that staircase is valid at
    /// every ω. Unless the first knot sits at the bottom of the quantum
    /// range, only the floor is known just left of it, which pins the first
    /// value to the floor.
    pub(crate) fn from_knot_details(
        functional: &str,
        eta_q_min: f64,
        details: Vec<KnotDetail>,
        meta: CurveMeta,
    ) -> Result<Self, ExtractError> {
        let mut pts: Vec<(f64, f64)> = details.iter().map(|d| (d.result.omega, d.clamped)).collect();
        if pts[0].0 > eta_q_min + 1e-12 {
            pts[0].1 = meta.floor;
        }
        let values: Vec<f64> = if pts.len() == 1 {
            vec![pts[0].1]
        } else {
            let hull = lower_step_hull(&pts)?;
            pts.iter().map(|p| hull.eval(p.0).clamp(meta.floor, 1.0)).collect()
        };
        let knots = pts.iter().zip(values).map(|(p, value)| KnotRecord { omega: p.0, value }).collect();
        Ok(ExtractabilityCurve {
            functional: functional.to_string(),
            knots,
            meta,
            details,
        })
    }

    /// A reference curve as an extractability curve (CHSH only). Below ω = 2
    /// the floor applies; meta records zero spacing and zero penalty.
    pub fn from_analytic(kind: AnalyticKind) -> Self {
        let qmax = 2.0 * std::f64::consts::SQRT_2;
        let mut xs = vec![2.0];
        if kind == AnalyticKind::KaniewskiLo {
            xs.push(omega_star());
        }
        xs.push(qmax);
        let knots = xs
            .into_iter()
            .map(|omega| KnotRecord { omega, value: analytic(kind, omega).expect("in range") })
            .collect();
        ExtractabilityCurve {
            functional: "chsh".into(),
            knots,
            meta: CurveMeta { delta: 0.0, mode: PenaltyMode::Paper, penalty: 0.0, floor: FLOOR },
            details: Vec::new(),
        }
    }

    /// The floor at every knot: what a sweep yields once the penalty exceeds
    /// the whole range above the local bound.
    pub fn trivial(functional: &str, omegas: &[f64], meta: CurveMeta) -> Self {
        ExtractabilityCurve {
            functional: functional.to_string(),
            knots: omegas.iter().map(|&omega| KnotRecord { omega, value: meta.floor }).collect(),
            meta,
            details: Vec::new(),
        }
    }

    /// Sweep details per retained knot; empty for curves read from disk.
    pub fn details(&self) -> &[KnotDetail] {
        &self.details
    }

    pub fn eval(&self, omega: f64) -> f64 {
        if omega < self.knots[0].omega {
            return self.meta.floor;
        }
        self.as_piecewise().eval(omega)
    }

    pub fn as_piecewise(&self) -> PiecewiseLinear {
        let k: Vec<(f64, f64)> = self.knots.iter().map(|k| (k.omega, k.value)).collect();
        PiecewiseLinear::new(k, Extension::Constant, Extension::Constant).expect("validated knots")
    }

    /// G_ε over `domain`, typically the functional's quantum range.
    pub fn g_epsilon(&self, domain: (f64, f64), eps: f64) -> Result<PenaltyCurve, ExtractError> {
        let mut k: Vec<(f64, f64)> = self.knots.iter().map(|k| (k.omega, k.value)).collect();
        if k[0].1 > self.meta.floor && domain.0 < k[0].0 {
            // Only the floor is known left of an elevated first knot.
            k.insert(0, (domain.0, self.meta.floor));
        }
        let xi = PiecewiseLinear::new(k, Extension::Constant, Extension::Constant)?;
        Ok(build_g_epsilon(&xi, domain, eps)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, ExtractError> {
        let c: ExtractabilityCurve = serde_json::from_str(s)?;
        if c.knots.is_empty() {
            return Err(ExtractError::NoKnots);
        }
        if c.knots.iter().any(|k| !k.omega.is_finite() || !(0.0..=1.0).contains(&k.value))
            || c.knots.windows(2).any(|w| w[1].omega <= w[0].omega)
        {
            return Err(ExtractError::KnotsNotAscending);
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), ExtractError> {
        let k: Vec<(f64, f64)> = self.knots.iter().map(|k| (k.omega, k.value)).collect();
        Ok(write_knots_csv(out, &k)?)
    }
}
