use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::bounds::CheckPolicy;
use crate::qmath::{Complex, ComplexVector};
use crate::state::{Bit, DensityMatrix, Ensemble, PureState, NORM_TOL};

pub const BUILTIN_PROTOCOLS: [&str; 2] = ["hbc2000", "fair_angle"];

/// A commitment protocol: one ensemble of pure commit states per bit, and
/// the probability `zeta` that Bob (rather than Alice) is checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub name: String,
    pub dim: usize,
    ensembles: [Ensemble; 2],
    pub zeta: CheckPolicy,
}

impl ProtocolSpec {
    pub fn new(
        name: impl Into<String>,
        commit0: Vec<(f64, PureState)>,
        commit1: Vec<(f64, PureState)>,
        zeta: f64,
    ) -> Result<Self, ProtocolError> {
        let doc = ProtocolDocument {
            name: name.into(),
            dim: commit0.first().map_or(0, |(_, s)| s.dim()),
            zeta,
            commit: CommitDocument {
                zero: commit0.iter().map(StateDocument::from_member).collect(),
                one: commit1.iter().map(StateDocument::from_member).collect(),
            },
        };
        doc.into_spec()
    }

    pub fn ensemble(&self, bit: Bit) -> &Ensemble {
        &self.ensembles[bit.index()]
    }

    pub fn density(&self, bit: Bit) -> Result<DensityMatrix, ProtocolError> {
        Ok(self.ensemble(bit).density()?)
    }

    pub fn with_zeta(mut self, zeta: f64) -> Result<Self, ProtocolError> {
        self.zeta = CheckPolicy::new(zeta)
            .map_err(|_| invalid("zeta", format!("{zeta} outside [0, 1]")))?;
        Ok(self)
    }

    pub fn to_document(&self) -> ProtocolDocument {
        let member_docs = |bit| {
            self.ensemble(bit)
                .members()
                .iter()
                .map(StateDocument::from_member)
                .collect()
        };
        ProtocolDocument {
            name: self.name.clone(),
            dim: self.dim,
            zeta: self.zeta.zeta(),
            commit: CommitDocument {
                zero: member_docs(Bit::Zero),
                one: member_docs(Bit::One),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serializes")
    }
}

/// On-disk protocol description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolDocument {
    pub name: String,
    pub dim: usize,
    pub zeta: f64,
    pub commit: CommitDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitDocument {
    #[serde(rename = "0")]
    pub zero: Vec<StateDocument>,
    #[serde(rename = "1")]
    pub one: Vec<StateDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub prob: f64,
    /// `[re, im]` pairs in computational-basis order.
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateDocument {
    fn from_member((prob, state): &(f64, PureState)) -> Self {
        Self {
            prob: *prob,
            amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ProtocolError {
    ProtocolError::Validation {
        path: path.into(),
        message: message.into(),
    }
}

impl ProtocolDocument {
    pub fn into_spec(self) -> Result<ProtocolSpec, ProtocolError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "empty"));
        }
        if self.dim == 0 || self.dim > 64 {
            return Err(invalid("dim", format!("{} outside 1..=64", self.dim)));
        }
        let zeta = CheckPolicy::new(self.zeta)
            .map_err(|_| invalid("zeta", format!("{} outside [0, 1]", self.zeta)))?;
        let dim = self.dim;
        let build = |key: &str, docs: Vec<StateDocument>| -> Result<Ensemble, ProtocolError> {
            let path = format!("commit.{key}");
            if docs.is_empty() {
                return Err(invalid(&path, "no commit states"));
            }
            if docs.len() > 64 {
                return Err(invalid(&path, "more than 64 commit states"));
            }
            let mut members = Vec::with_capacity(docs.len());
            for (i, doc) in docs.into_iter().enumerate() {
                let at = format!("{path}[{i}]");
                if !(0.0..=1.0).contains(&doc.prob) {
                    return Err(invalid(
                        format!("{at}.prob"),
                        format!("{} outside [0, 1]", doc.prob),
                    ));
                }
                if doc.amplitudes.len() != dim {
                    return Err(invalid(
                        format!("{at}.amplitudes"),
                        format!("{} amplitudes for dimension {dim}", doc.amplitudes.len()),
                    ));
                }
                let entries = doc
                    .amplitudes
                    .iter()
                    .map(|[re, im]| Complex::new(*re, *im))
                    .collect();
                let vector = ComplexVector::new(entries)
                    .map_err(|e| invalid(format!("{at}.amplitudes"), e.to_string()))?;
                let norm = vector.norm();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(invalid(
                        format!("{at}.amplitudes"),
                        format!("norm {norm} is not 1"),
                    ));
                }
                let state = PureState::new(vector)?;
                members.push((doc.prob, state));
            }
            let total: f64 = members.iter().map(|(p, _)| p).sum();
            if (total - 1.0).abs() > NORM_TOL {
                return Err(invalid(
                    &path,
                    format!("selection probabilities sum to {total}"),
                ));
            }
            Ensemble::new(members).map_err(|e| invalid(&path, e.to_string()))
        };
        let e0 = build("0", self.commit.zero)?;
        let e1 = build("1", self.commit.one)?;
        Ok(ProtocolSpec {
            name: self.name,
            dim,
            ensembles: [e0, e1],
            zeta,
        })
    }
}

/// Parses and validates a protocol JSON document.
pub fn load_protocol(document: &str) -> Result<ProtocolSpec, ProtocolError> {
    let doc: ProtocolDocument =
        serde_json::from_str(document).map_err(|e| ProtocolError::Parse(e.to_string()))?;
    doc.into_spec()
}

/// The built-in protocols.
///
/// * `hbc2000`: one qubit, `{|0>, |->}` for bit 0 and `{|1>, |+>}` for bit 1, `zeta = 1`.
/// * `fair_angle`: `cos t|0> ± sin t|1>` for bit 0 and `sin t|0> ± cos t|1>`
///   for bit 1 with `t = 19.85°`, `zeta = 0.469`.
pub fn builtin_protocol(name: &str) -> Result<ProtocolSpec, ProtocolError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ket = |a: f64, b: f64| PureState::from_real(&[a, b]);
    match name {
        "hbc2000" => ProtocolSpec::new(
            name,
            vec![(0.5, ket(1.0, 0.0)?), (0.5, ket(h, -h)?)],
            vec![(0.5, ket(0.0, 1.0)?), (0.5, ket(h, h)?)],
            1.0,
        ),
        "fair_angle" => {
            let (s, c) = 19.85f64.to_radians().sin_cos();
            ProtocolSpec::new(
                name,
                vec![(0.5, ket(c, s)?), (0.5, ket(c, -s)?)],
                vec![(0.5, ket(s, c)?), (0.5, ket(s, -c)?)],
                0.469,
            )
        }
        other => Err(ProtocolError::UnknownProtocol(other.to_string())),
    }
}
