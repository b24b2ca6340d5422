use std::path::Path;

use bellops::{AnglePair, BellFunctional};
use matqm::{Complex64, DensityMat, HermMat};
use security::Protocol;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::model::{AbortAttackScript, DeviceModel, SourceModel};
use crate::run::TrialRecord;
use crate::{SimConfig, SimError};

/// Row-major real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Option<Vec<f64>>,
}

impl StateDoc {
    pub fn from_state(s: &DensityMat) -> Self {
        let e = s.as_herm().entries();
        StateDoc { re: e.iter().map(|z| z.re).collect(), im: Some(e.iter().map(|z| z.im).collect()) }
    }

    pub fn to_state(&self) -> Result<DensityMat, SimError> {
        let im = self.im.clone().unwrap_or_else(|| vec![0.0; self.re.len()]);
        if im.len() != self.re.len() {
            return Err(SimError::Scenario("re and im lengths differ".into()));
        }
        let data: Vec<Complex64> = self.re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        let dim = (data.len() as f64).sqrt().round() as usize;
        Ok(DensityMat::new(HermMat::from_complex(dim, data)?)?)
    }
}

pub(crate) fn serialize_state<S: Serializer>(s: &DensityMat, ser: S) -> Result<S::Ok, S::Error> {
    let doc = StateDoc::from_state(s);
    let mut st = ser.serialize_struct("StateDoc", 2)?;
    st.serialize_field("re", &doc.re)?;
    st.serialize_field("im", &doc.im)?;
    st.end()
}

impl TrialRecord {
    /// Full record including every round.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    /// Everything except the per-round transcript.
    pub fn summary_json(&self) -> String {
        let v = serde_json::json!({
            "t": self.t,
            "measured_rounds": self.rounds.len(),
            "omega_exp": self.omega_exp,
            "failures": self.failures,
            "aborted": self.aborted,
            "stored_state": StateDoc::from_state(&self.stored_state),
        });
        serde_json::to_string_pretty(&v).expect("plain data serializes")
    }

    /// CSV with columns round,x,y,a,b,w.
    pub fn write_transcript_csv<W: std::io::Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rounds {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    HonestIsotropic { mu: f64 },
    Custom { states: Vec<StateDoc> },
    AbortAttack { t_sep: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeviceSpec {
    OptimalChsh,
    AntiChsh,
    FixedAngles { a: f64, b: f64 },
    AbortAttack { t_sep: usize },
}

fn default_functional() -> String {
    "chsh".into()
}

fn default_trials() -> u64 {
    1
}

/// A simulation scenario as stored in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub protocol: Protocol,
    pub n: u64,
    pub kappa: f64,
    pub threshold: f64,
    /// Builtin name or path to a functional JSON file.
    #[serde(default = "default_functional")]
    pub functional: String,
    pub source: SourceSpec,
    pub device: DeviceSpec,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self, SimError> {
        serde_json::from_str(s).map_err(|e| SimError::Scenario(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn config(&self) -> Result<SimConfig, SimError> {
        let cfg = SimConfig {
            protocol: self.protocol,
            n: self.n,
            kappa: self.kappa,
            threshold: self.threshold,
            functional: BellFunctional::load(&self.functional)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn source(&self) -> Result<SourceModel, SimError> {
        Ok(match &self.source {
            SourceSpec::HonestIsotropic { mu } => SourceModel::HonestIsotropic { mu: *mu },
            SourceSpec::Custom { states } => {
                SourceModel::Custom(states.iter().map(StateDoc::to_state).collect::<Result<_, _>>()?)
            }
            SourceSpec::AbortAttack { t_sep } => SourceModel::AbortAttack { t_sep: *t_sep },
        })
    }

    pub fn device(&self) -> Result<DeviceModel, SimError> {
        Ok(match &self.device {
            DeviceSpec::OptimalChsh => DeviceModel::OptimalChsh,
            DeviceSpec::AntiChsh => DeviceModel::anti_chsh(),
            DeviceSpec::FixedAngles { a, b } => DeviceModel::FixedAngles(AnglePair::new(*a, *b)?),
            DeviceSpec::AbortAttack { t_sep } => DeviceModel::Adaptive(std::sync::Arc::new(AbortAttackScript::new(*t_sep))),
        })
    }
}
