use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use bellops::{observable, AnglePair};
use matqm::{pauli, Complex64, DensityMat, HermMat, Pauli};

use crate::SimError;

/// Per-round state preparation.
#[derive(Debug, Clone)]
pub enum SourceModel {
    /// (1−μ)φ⁺ + μ I/4 in every round.
    HonestIsotropic { mu: f64 },
    /// One explicit two-qubit state per round.
    Custom(Vec<DensityMat>),
    /// |00⟩⟨00| at round `t_sep`, φ⁺ everywhere else.
    AbortAttack { t_sep: usize },
}

/// |00⟩⟨00|.
pub fn product_zero() -> DensityMat {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    DensityMat::pure(&[o, z, z, z]).expect("unit vector")
}

/// A source resolved against a round count.
#[derive(Debug, Clone)]
pub(crate) enum StateTable {
    Uniform(DensityMat),
    PerRound(Vec<DensityMat>),
    OneOff { at: usize, special: DensityMat, rest: DensityMat },
}

impl StateTable {
    pub(crate) fn new(src: &SourceModel, n: usize) -> Result<Self, SimError> {
        Ok(match src {
            SourceModel::HonestIsotropic { mu } => {
                if !(0.0..=1.0).contains(mu) {
                    return Err(SimError::BadMixing(*mu));
                }
                StateTable::Uniform(DensityMat::isotropic(*mu)?)
            }
            SourceModel::Custom(states) => {
                if states.len() != n {
                    return Err(SimError::StateCount { expected: n, found: states.len() });
                }
                if let Some(i) = states.iter().position(|s| s.dim() != 4) {
                    return Err(SimError::NotTwoQubit(i));
                }
                StateTable::PerRound(states.clone())
            }
            SourceModel::AbortAttack { t_sep } => {
                if *t_sep >= n {
                    return Err(SimError::RoundOutOfRange { round: *t_sep, n });
                }
                StateTable::OneOff { at: *t_sep, special: product_zero(), rest: DensityMat::phi_plus() }
            }
        })
    }

    pub(crate) fn get(&self, i: usize) -> &DensityMat {
        match self {
            StateTable::Uniform(s) => s,
            StateTable::PerRound(v) => &v[i],
            StateTable::OneOff { at, special, rest } => {
                if i == *at {
                    special
                } else {
                    rest
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

/// One measured round as seen by one party.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideRecord {
    pub round: usize,
    pub input: u8,
    pub output: u8,
}

/// Everything a party's device may condition on.
///
/// `history` holds only that party's own earlier rounds, and is empty in the
/// parallel protocols where every round has its own memoryless device.
/// `stored` is the unmeasured round once the device can know it: always in
/// the parallel protocols (every other round receives an input), and only
/// after it has been skipped in the sequential ones.
#[derive(Debug, Clone, Copy)]
pub struct SideView<'a> {
    pub round: usize,
    pub stored: Option<usize>,
    pub history: &'a [SideRecord],
}

/// A measurement strategy that may adapt to its own side's transcript.
pub trait MeasurementScript: Send + Sync + fmt::Debug {
    /// ±1-valued qubit observable for `input`.
    fn observable(&self, party: Party, view: &SideView, input: u8) -> HermMat;
}

/// Binary observables for both settings of both parties.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSet {
    pub alice: [HermMat; 2],
    pub bob: [HermMat; 2],
}

fn check_observable(m: &HermMat) -> Result<(), SimError> {
    if m.dim() != 2 {
        return Err(SimError::BadObservable(format!("dimension {}", m.dim())));
    }
    let sq = m.matmul(m)?;
    let err = sq.sub(&HermMat::identity(2)?)?.frobenius();
    if err > 1e-9 {
        return Err(SimError::BadObservable(format!("A² differs from I by {err:.3e}")));
    }
    Ok(())
}

impl ObservableSet {
    pub fn new(alice: [HermMat; 2], bob: [HermMat; 2]) -> Result<Self, SimError> {
        for m in alice.iter().chain(&bob) {
            check_observable(m)?;
        }
        Ok(ObservableSet { alice, bob })
    }

    /// A₀ = Z, A₁ = X, B₀ = (Z+X)/√2, B₁ = (Z−X)/√2: CHSH value 2√2 on φ⁺.
    pub fn optimal_chsh() -> Self {
        ObservableSet {
            alice: [pauli(Pauli::Z), pauli(Pauli::X)],
            bob: [observable(FRAC_PI_2 / 2.0, 0), observable(FRAC_PI_2 / 2.0, 1)],
        }
    }

    /// Observables cos(θ)Z ± sin(θ)X with one angle per party.
    pub fn from_angles(ab: AnglePair) -> Self {
        ObservableSet {
            alice: [observable(ab.a, 0), observable(ab.a, 1)],
            bob: [observable(ab.b, 0), observable(ab.b, 1)],
        }
    }

    /// Alice's outputs relabeled; on φ⁺ the optimal set then scores −2√2.
    pub fn negate_alice(&self) -> Self {
        ObservableSet { alice: [self.alice[0].scale(-1.0), self.alice[1].scale(-1.0)], bob: self.bob.clone() }
    }

    pub fn get(&self, party: Party, input: u8) -> &HermMat {
        match party {
            Party::Alice => &self.alice[input as usize],
            Party::Bob => &self.bob[input as usize],
        }
    }
}

/// Measurement devices.
#[derive(Debug, Clone)]
pub enum DeviceModel {
    OptimalChsh,
    FixedAngles(AnglePair),
    Observables(ObservableSet),
    Adaptive(Arc<dyn MeasurementScript>),
}

impl DeviceModel {
    /// Always minimizes CHSH on φ⁺, so honest-looking thresholds are never met.
    pub fn anti_chsh() -> Self {
        DeviceModel::Observables(ObservableSet::optimal_chsh().negate_alice())
    }

    pub(crate) fn fixed(&self) -> Option<ObservableSet> {
        match self {
            DeviceModel::OptimalChsh => Some(ObservableSet::optimal_chsh()),
            DeviceModel::FixedAngles(ab) => Some(ObservableSet::from_angles(*ab)),
            DeviceModel::Observables(o) => Some(o.clone()),
            DeviceModel::Adaptive(_) => None,
        }
    }
}

/// Optimal measurements when the stored round is `t_sep` (where the source
/// put a separable state), anti-CHSH measurements otherwise. The protocol
/// then passes only when it keeps the separable state.
#[derive(Debug, Clone)]
pub struct AbortAttackScript {
    pub t_sep: usize,
    good: ObservableSet,
    bad: ObservableSet,
}

impl AbortAttackScript {
    pub fn new(t_sep: usize) -> Self {
        let good = ObservableSet::optimal_chsh();
        let bad = good.negate_alice();
        AbortAttackScript { t_sep, good, bad }
    }
}

impl MeasurementScript for AbortAttackScript {
    fn observable(&self, party: Party, view: &SideView, input: u8) -> HermMat {
        let set = if view.stored == Some(self.t_sep) { &self.good } else { &self.bad };
        set.get(party, input).clone()
    }
}
