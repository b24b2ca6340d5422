//! Monte Carlo simulation of the certification protocols.
//!
//! A trial draws the stored round T uniformly, measures every other round
//! with uniformly random inputs and Born-rule outcomes, and applies the
//! protocol's abort test. Parallel protocols score Wᵢ = ±γ̃ and abort when
//! ω_exp = (4/n) Σ Wᵢ ≤ ω♯ − κ; sequential ones count lost CHSH rounds and
//! abort above ⌊(n−1)(1 − p♯ + κ)⌋.

mod adversary;
mod io;
mod model;
mod run;

use bellops::BellFunctional;
use security::{Protocol, ProtocolConfig};

pub use adversary::{seq_adversary_bruteforce, seq_adversary_value};
pub use io::{DeviceSpec, Scenario, SourceSpec, StateDoc};
pub use model::{
    product_zero, AbortAttackScript, DeviceModel, MeasurementScript, ObservableSet, Party, SideRecord, SideView,
    SourceModel,
};
pub use run::{estimate_abort_rate, run_protocol, wilson_interval, Prepared, Round, TrialRecord};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("need at least 2 rounds, got {0}")]
    TooFewRounds(u64),
    #[error("κ must be finite and non-negative, got {0}")]
    BadKappa(f64),
    #[error("mixing weight {0} outside [0, 1]")]
    BadMixing(f64),
    #[error("{0:?} requires the CHSH functional")]
    NotChsh(Protocol),
    #[error("expected {expected} states, got {found}")]
    StateCount { expected: usize, found: usize },
    #[error("state {0} is not a two-qubit state")]
    NotTwoQubit(usize),
    #[error("round {round} outside 0..{n}")]
    RoundOutOfRange { round: usize, n: usize },
    #[error("not a ±1 observable: {0}")]
    BadObservable(String),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Matrix(#[from] matqm::MatError),
    #[error(transparent)]
    Bell(#[from] bellops::BellError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// The protocol parameters a simulation needs.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub protocol: Protocol,
    pub n: u64,
    pub kappa: f64,
    /// ω♯ for P1–P3, p♯ for P4–P5.
    pub threshold: f64,
    pub functional: BellFunctional,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n < 2 {
            return Err(SimError::TooFewRounds(self.n));
        }
        // κ = 0 is allowed here: it puts the honest mean right at the threshold.
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(SimError::BadKappa(self.kappa));
        }
        if self.protocol.is_sequential() && !self.functional.is_chsh() {
            return Err(SimError::NotChsh(self.protocol));
        }
        Ok(())
    }
}

impl From<&ProtocolConfig> for SimConfig {
    fn from(c: &ProtocolConfig) -> Self {
        SimConfig {
            protocol: c.protocol,
            n: c.n,
            kappa: c.kappa,
            threshold: c.threshold,
            functional: c.functional.clone(),
        }
    }
}
