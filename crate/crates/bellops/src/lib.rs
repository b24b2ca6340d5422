//! Bell functionals for the minimal (2 inputs, 2 outputs) scenario.
//!
//! Observables are restricted to the Z–X plane,
//! `A_x(a) = cos(a) Z + (−1)^x sin(a) X`, which after the qubit reduction
//! covers every pair of binary projective measurements up to local unitaries.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::path::Path;

use matqm::{real2, HermMat, MatError, Sym4};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum BellError {
    #[error("{what} = {value} is outside {range}")]
    OutOfRange { what: &'static str, value: f64, range: &'static str },
    #[error("invalid functional: {0}")]
    Invalid(String),
    #[error("cannot read functional: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse functional: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Classical and quantum extremes of a functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub eta_l_min: f64,
    pub eta_l_max: f64,
    pub eta_q_min: f64,
    pub eta_q_max: f64,
}

/// ω = Σ γ_xy ⟨A_x B_y⟩ + Σ c^A_x ⟨A_x⟩ + Σ c^B_y ⟨B_y⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct BellFunctional {
    id: String,
    gamma: [[f64; 2]; 2],
    c_a: [f64; 2],
    c_b: [f64; 2],
    bounds: Bounds,
    gamma_star: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct FunctionalDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    gamma: [[f64; 2]; 2],
    #[serde(rename = "cA", default)]
    c_a: [f64; 2],
    #[serde(rename = "cB", default)]
    c_b: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<Bounds>,
}

impl BellFunctional {
    /// The CHSH functional with exact bounds (−2√2, −2, 2, 2√2).
    pub fn chsh() -> Self {
        let two_root_two = 2.0 * SQRT_2;
        BellFunctional {
            id: "chsh".into(),
            gamma: [[1.0, 1.0], [1.0, -1.0]],
            c_a: [0.0; 2],
            c_b: [0.0; 2],
            bounds: Bounds { eta_l_min: -2.0, eta_l_max: 2.0, eta_q_min: -two_root_two, eta_q_max: two_root_two },
            gamma_star: 1.0,
        }
    }

    /// Builds a functional; missing bounds are computed (classical bounds
    /// exactly over deterministic strategies, quantum bounds numerically).
    pub fn new(
        id: impl Into<String>,
        gamma: [[f64; 2]; 2],
        c_a: [f64; 2],
        c_b: [f64; 2],
        bounds: Option<Bounds>,
    ) -> Result<Self, BellError> {
        let all = gamma.iter().flatten().chain(&c_a).chain(&c_b);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(BellError::Invalid("non-finite coefficient".into()));
        }
        let gamma_star = all.fold(0.0f64, |m, x| m.max(x.abs()));
        let mut f = BellFunctional {
            id: id.into(),
            gamma,
            c_a,
            c_b,
            bounds: Bounds { eta_l_min: 0.0, eta_l_max: 0.0, eta_q_min: 0.0, eta_q_max: 0.0 },
            gamma_star,
        };
        f.bounds = match bounds {
            Some(b) => b,
            None => {
                let (l_min, l_max) = f.classical_bounds();
                let (q_min, q_max) = f.numeric_quantum_bounds()?;
                // The quantum set contains the classical one; clamp away grid error.
                Bounds { eta_l_min: l_min, eta_l_max: l_max, eta_q_min: q_min.min(l_min), eta_q_max: q_max.max(l_max) }
            }
        };
        let b = f.bounds;
        if !(b.eta_q_min <= b.eta_l_min && b.eta_l_min <= b.eta_l_max && b.eta_l_max <= b.eta_q_max) {
            return Err(BellError::Invalid(format!("inconsistent bounds {b:?}")));
        }
        Ok(f)
    }

    /// Parses the JSON document format, or the builtin name `chsh`.
    pub fn from_json_str(s: &str) -> Result<Self, BellError> {
        let doc: FunctionalDoc = serde_json::from_str(s)?;
        Self::new(doc.id.unwrap_or_else(|| "custom".into()), doc.gamma, doc.c_a, doc.c_b, doc.bounds)
    }

    /// Resolves a builtin name or a path to a JSON file.
    pub fn load(spec: &str) -> Result<Self, BellError> {
        if spec.eq_ignore_ascii_case("chsh") {
            return Ok(Self::chsh());
        }
        Self::from_json_str(&std::fs::read_to_string(Path::new(spec))?)
    }

    pub fn to_json(&self) -> String {
        let doc = FunctionalDoc {
            id: Some(self.id.clone()),
            gamma: self.gamma,
            c_a: self.c_a,
            c_b: self.c_b,
            bounds: Some(self.bounds),
        };
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    pub fn gamma(&self) -> [[f64; 2]; 2] {
        self.gamma
    }
    pub fn c_a(&self) -> [f64; 2] {
        self.c_a
    }
    pub fn c_b(&self) -> [f64; 2] {
        self.c_b
    }
    pub fn bounds(&self) -> Bounds {
        self.bounds
    }
    /// Largest absolute coefficient.
    pub fn gamma_star(&self) -> f64 {
        self.gamma_star
    }

    pub fn has_marginals(&self) -> bool {
        self.c_a.iter().chain(&self.c_b).any(|&x| x != 0.0)
    }

    /// True when the correlator table is CHSH (up to the stored id) with no marginals.
    pub fn is_chsh(&self) -> bool {
        self.gamma == [[1.0, 1.0], [1.0, -1.0]] && !self.has_marginals()
    }

    /// Value of a deterministic local strategy a_x, b_y ∈ {±1}.
    fn deterministic_value(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mut v = 0.0;
        for x in 0..2 {
            v += self.c_a[x] * a[x] + self.c_b[x] * b[x];
            for y in 0..2 {
                v += self.gamma[x][y] * a[x] * b[y];
            }
        }
        v
    }

    fn classical_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for mask in 0..16u32 {
            let s = |bit: u32| if mask >> bit & 1 == 1 { -1.0 } else { 1.0 };
            let v = self.deterministic_value([s(0), s(1)], [s(2), s(3)]);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    fn numeric_quantum_bounds(&self) -> Result<(f64, f64), BellError> {
        let hi = extremize(|a, b| max_quantum_value(self, AnglePair::clamped(a, b)))?;
        let lo = -extremize(|a, b| min_quantum_value(self, AnglePair::clamped(a, b)).map(|v| -v))?;
        Ok((lo, hi))
    }
}

/// Maximizes a function over the angle box: 129×129 grid, then alternating
/// golden-section polish around the best grid point.
fn extremize(f: impl Fn(f64, f64) -> Result<f64, MatError>) -> Result<f64, BellError> {
    const N: usize = 128;
    let h = FRAC_PI_2 / N as f64;
    let (mut best, mut ba, mut bb) = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=N {
        for j in 0..=N {
            let (a, b) = (i as f64 * h, j as f64 * h);
            let v = f(a, b)?;
            if v > best {
                (best, ba, bb) = (v, a, b);
            }
        }
    }
    let golden = |g: &dyn Fn(f64) -> f64, lo: f64, hi: f64| -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..60 {
            let m1 = hi - r * (hi - lo);
            let m2 = lo + r * (hi - lo);
            if g(m1) < g(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        0.5 * (lo + hi)
    };
    for _ in 0..8 {
        let fa = |a: f64| f(a, bb).unwrap_or(f64::NEG_INFINITY);
        ba = golden(&fa, (ba - h).max(0.0), (ba + h).min(FRAC_PI_2));
        let fb = |b: f64| f(ba, b).unwrap_or(f64::NEG_INFINITY);
        bb = golden(&fb, (bb - h).max(0.0), (bb + h).min(FRAC_PI_2));
        best = best.max(f(ba, bb)?);
    }
    Ok(best)
}

/// Measurement angles (a, b) ∈ [0, π/2]².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePair {
    pub a: f64,
    pub b: f64,
}

impl AnglePair {
    pub fn new(a: f64, b: f64) -> Result<Self, BellError> {
        for (what, v) in [("a", a), ("b", b)] {
            if !(0.0..=FRAC_PI_2).contains(&v) {
                return Err(BellError::OutOfRange { what, value: v, range: "[0, π/2]" });
            }
        }
        Ok(AnglePair { a, b })
    }

    /// Projects onto the box (for grid points that overshoot by rounding).
    pub fn clamped(a: f64, b: f64) -> Self {
        AnglePair { a: a.clamp(0.0, FRAC_PI_2), b: b.clamp(0.0, FRAC_PI_2) }
    }
}

/// cos(θ) Z + (−1)^x sin(θ) X as a real 2×2 array.
pub fn observable_real(angle: f64, setting: u8) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    let s = if setting & 1 == 1 { -s } else { s };
    [[c, s], [s, -c]]
}

pub fn observable(angle: f64, setting: u8) -> HermMat {
    let m = observable_real(angle, setting);
    HermMat::from_real(2, &[m[0][0], m[0][1], m[1][0], m[1][1]]).expect("real symmetric 2x2")
}

/// B(a,b) as a real symmetric 4×4 matrix.
pub fn bell_operator_sym4(f: &BellFunctional, ab: AnglePair) -> Sym4 {
    let a = [observable_real(ab.a, 0), observable_real(ab.a, 1)];
    let b = [observable_real(ab.b, 0), observable_real(ab.b, 1)];
    let mut m = Sym4::ZERO;
    for x in 0..2 {
        for y in 0..2 {
            if f.gamma[x][y] != 0.0 {
                m = m.axpy(f.gamma[x][y], &Sym4::kron2(&a[x], &b[y]));
            }
        }
        if f.c_a[x] != 0.0 {
            m = m.axpy(f.c_a[x], &Sym4::kron2(&a[x], &real2::I));
        }
        if f.c_b[x] != 0.0 {
            m = m.axpy(f.c_b[x], &Sym4::kron2(&real2::I, &b[x]));
        }
    }
    m
}

pub fn bell_operator(f: &BellFunctional, ab: AnglePair) -> HermMat {
    HermMat::from_sym4(&bell_operator_sym4(f, ab))
}

/// (c₀, c₁) with c₀ = Σ|c^A_x| + Σ|γ_xy| and c₁ = Σ|c^B_y| + Σ|γ_xy|.
pub fn lipschitz_constants(f: &BellFunctional) -> (f64, f64) {
    let g: f64 = f.gamma.iter().flatten().map(|x| x.abs()).sum();
    let ca: f64 = f.c_a.iter().map(|x| x.abs()).sum();
    let cb: f64 = f.c_b.iter().map(|x| x.abs()).sum();
    (ca + g, cb + g)
}

/// λ_max(B(a,b)): the largest Bell value reachable with these angles.
pub fn max_quantum_value(f: &BellFunctional, ab: AnglePair) -> Result<f64, MatError> {
    bell_operator_sym4(f, ab).max_eigenvalue()
}

/// λ_min(B(a,b)).
pub fn min_quantum_value(f: &BellFunctional, ab: AnglePair) -> Result<f64, MatError> {
    bell_operator_sym4(f, ab).min_eigenvalue()
}

/// CHSH winning probability to correlator value: ω = 8p − 4.
pub fn score_to_value(p_win: f64) -> Result<f64, BellError> {
    if !(0.0..=1.0).contains(&p_win) {
        return Err(BellError::OutOfRange { what: "p_win", value: p_win, range: "[0, 1]" });
    }
    Ok(8.0 * p_win - 4.0)
}

/// Inverse of [`score_to_value`].
pub fn value_to_score(omega: f64) -> Result<f64, BellError> {
    if !(-4.0..=4.0).contains(&omega) {
        return Err(BellError::OutOfRange { what: "omega", value: omega, range: "[-4, 4]" });
    }
    Ok((omega + 4.0) / 8.0)
}
