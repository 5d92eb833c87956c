//! Canonical executable scenarios and scenario-file ingestion.
//!
//! The spin triad is the three-party sequence: Alice prepares a spin-half
//! along `prep_direction` (default +z), Claire measures projectively along
//! a direction at polar angle `theta` (azimuth `phi`, default the x-z
//! plane), and Bob later measures along `meas_direction` (default +x) and
//! postselects on the aligned outcome. Scenario files carry a general
//! ensemble/POVM setup as a JSON document.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{ComplexMatrix, MAX_DIM};
use crate::state::{
    DensityOperator, PostselectionBias, Povm, PreparationEnsemble, StateError, StateVector,
};

/// Unit-norm tolerance for direction vectors.
pub const DIRECTION_TOL: f64 = 1e-12;

/// Denominators at or below this make the triad conditional probability
/// degenerate (the preparation-to-postselection path has zero
/// probability).
pub const DEGENERATE_TOL: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("validation error at `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("degenerate conditioning: path probability {value:.3e} <= {DEGENERATE_TOL:.0e}")]
    DegenerateConditioning { value: f64 },
    #[error("direction vector has norm {norm:.12}, expected 1 within {DIRECTION_TOL:.0e}")]
    NotUnitNorm { norm: f64 },
}

fn validation(field: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Validation {
        field: field.into(),
        message: message.to_string(),
    }
}

/// Qubit state along a Bloch direction:
/// `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
pub fn bloch_ket(theta: f64, phi: f64) -> StateVector {
    StateVector::new(vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ])
    .expect("Bloch components are normalized by construction")
}

/// The orthogonal partner of [`bloch_ket`], pointing to the antipodal
/// Bloch point: `sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>`.
pub fn bloch_ket_perp(theta: f64, phi: f64) -> StateVector {
    StateVector::new(vec![
        C64::new((theta / 2.0).sin(), 0.0),
        -C64::from_polar((theta / 2.0).cos(), phi),
    ])
    .expect("Bloch components are normalized by construction")
}

fn direction_ket(direction: [f64; 3]) -> StateVector {
    let theta = direction[2].clamp(-1.0, 1.0).acos();
    let phi = direction[1].atan2(direction[0]);
    bloch_ket(theta, phi)
}

/// The Alice/Claire/Bob spin scenario: preparation, intermediate ideal
/// measurement along a tilted axis, and a later postselected measurement.
#[derive(Debug, Clone)]
pub struct SpinTriadScenario {
    prep_direction: [f64; 3],
    meas_direction: [f64; 3],
    claire_theta: f64,
    claire_phi: f64,
}

impl SpinTriadScenario {
    /// Default geometry: Alice prepares +z, Bob postselects +x, Claire
    /// measures at polar angle `theta` with azimuth `phi`.
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            prep_direction: [0.0, 0.0, 1.0],
            meas_direction: [1.0, 0.0, 0.0],
            claire_theta: theta,
            claire_phi: phi,
        }
    }

    /// Full geometry with explicit (unit-norm) preparation and
    /// postselection directions.
    pub fn with_directions(
        prep_direction: [f64; 3],
        meas_direction: [f64; 3],
        theta: f64,
        phi: f64,
    ) -> Result<Self, ScenarioError> {
        for direction in [prep_direction, meas_direction] {
            let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > DIRECTION_TOL {
                return Err(ScenarioError::NotUnitNorm { norm });
            }
        }
        Ok(Self {
            prep_direction,
            meas_direction,
            claire_theta: theta,
            claire_phi: phi,
        })
    }

    pub fn theta(&self) -> f64 {
        self.claire_theta
    }

    pub fn phi(&self) -> f64 {
        self.claire_phi
    }

    /// Alice's prepared state.
    pub fn prep_ket(&self) -> StateVector {
        direction_ket(self.prep_direction)
    }

    /// Bob's postselected state.
    pub fn meas_ket(&self) -> StateVector {
        direction_ket(self.meas_direction)
    }

    /// Claire's aligned outcome state.
    pub fn claire_ket(&self) -> StateVector {
        bloch_ket(self.claire_theta, self.claire_phi)
    }

    /// Claire's anti-aligned outcome state.
    pub fn claire_perp_ket(&self) -> StateVector {
        bloch_ket_perp(self.claire_theta, self.claire_phi)
    }
}

/// Probability of Claire's aligned outcome given only Alice's
/// preparation: `|<theta|prep>|^2` (`cos^2(theta/2)` in the default
/// geometry).
pub fn claire_alice_only(s: &SpinTriadScenario) -> f64 {
    s.claire_ket().inner(&s.prep_ket()).norm_sqr()
}

/// Probability of Claire's aligned outcome given only Bob's result:
/// `|<theta|meas>|^2` (`(1 + sin theta)/2` in the default geometry).
pub fn claire_bob_only(s: &SpinTriadScenario) -> f64 {
    s.claire_ket().inner(&s.meas_ket()).norm_sqr()
}

/// Probability of Claire's aligned outcome given both the preparation and
/// Bob's postselected result: the two-path Bayes combination
///
/// ```text
/// |<meas|theta>|^2 |<theta|prep>|^2
/// ---------------------------------------------------------------------
/// |<meas|theta>|^2 |<theta|prep>|^2 + |<meas|perp>|^2 |<perp|prep>|^2
/// ```
pub fn claire_both(s: &SpinTriadScenario) -> Result<f64, ScenarioError> {
    let prep = s.prep_ket();
    let meas = s.meas_ket();
    let theta = s.claire_ket();
    let perp = s.claire_perp_ket();

    let aligned = meas.inner(&theta).norm_sqr() * theta.inner(&prep).norm_sqr();
    let anti = meas.inner(&perp).norm_sqr() * perp.inner(&prep).norm_sqr();
    let denominator = aligned + anti;
    if denominator <= DEGENERATE_TOL {
        return Err(ScenarioError::DegenerateConditioning { value: denominator });
    }
    Ok(aligned / denominator)
}

/// Monte-Carlo settings carried by a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSettings {
    pub samples: u64,
    pub seed: u64,
}

/// Raw scenario document, matching the on-disk JSON layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    dimension: usize,
    ensemble: Vec<EnsembleMemberDoc>,
    povm: Vec<PovmElementDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hamiltonian: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    postselection_bias: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mc: Option<McSettings>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleMemberDoc {
    prior: f64,
    state: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmElementDoc {
    label: String,
    element: Vec<Vec<[f64; 2]>>,
}

/// A fully validated scenario: every matrix passed the quantum-state
/// validators when the document was loaded.
#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub dimension: usize,
    pub ensemble: PreparationEnsemble,
    pub povm: Povm,
    pub hamiltonian: Option<ComplexMatrix>,
    pub postselection_bias: Option<PostselectionBias>,
    pub mc: Option<McSettings>,
}

fn parse_matrix(
    field: &str,
    rows: &[Vec<[f64; 2]>],
    dimension: usize,
) -> Result<ComplexMatrix, ScenarioError> {
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|row| row.iter().map(|&[re, im]| C64::new(re, im)).collect())
        .collect();
    let matrix = ComplexMatrix::from_rows(&rows).map_err(|e| validation(field, e))?;
    if matrix.dim() != dimension {
        return Err(validation(
            field,
            format!(
                "matrix is {}x{} but the scenario dimension is {dimension}",
                matrix.dim(),
                matrix.dim()
            ),
        ));
    }
    Ok(matrix)
}

/// Parses and validates a serialized scenario document.
pub fn load_scenario(source: &str) -> Result<ScenarioFile, ScenarioError> {
    let doc: ScenarioDoc = serde_json::from_str(source)?;

    if doc.dimension == 0 || doc.dimension > MAX_DIM {
        return Err(validation(
            "dimension",
            format!("must be between 1 and {MAX_DIM}, got {}", doc.dimension),
        ));
    }

    let mut members = Vec::with_capacity(doc.ensemble.len());
    for (i, member) in doc.ensemble.iter().enumerate() {
        let field = format!("ensemble[{i}].state");
        let matrix = parse_matrix(&field, &member.state, doc.dimension)?;
        let state = DensityOperator::new(matrix).map_err(|e| validation(&field, e))?;
        members.push((member.prior, state));
    }
    let ensemble = PreparationEnsemble::new(members).map_err(|e| match e {
        StateError::PriorsNotNormalized { .. } | StateError::PriorOutOfRange { .. } => {
            validation("ensemble priors", e)
        }
        other => validation("ensemble", other),
    })?;

    let mut elements = Vec::with_capacity(doc.povm.len());
    let mut labels = Vec::with_capacity(doc.povm.len());
    for (m, entry) in doc.povm.iter().enumerate() {
        let field = format!("povm[{m}].element");
        elements.push(parse_matrix(&field, &entry.element, doc.dimension)?);
        labels.push(entry.label.clone());
    }
    let povm = Povm::with_labels(elements, labels).map_err(|e| match e {
        StateError::PovmIncomplete { .. } => validation("povm completeness", e),
        other => validation("povm", other),
    })?;

    let hamiltonian = doc
        .hamiltonian
        .as_ref()
        .map(|rows| {
            let matrix = parse_matrix("hamiltonian", rows, doc.dimension)?;
            if !matrix.is_hermitian() {
                return Err(validation("hamiltonian", "must be Hermitian"));
            }
            Ok(matrix)
        })
        .transpose()?;

    let postselection_bias = doc
        .postselection_bias
        .as_ref()
        .map(|weights| {
            if weights.len() != doc.povm.len() {
                return Err(validation(
                    "postselection_bias",
                    format!(
                        "{} weights for {} POVM outcomes",
                        weights.len(),
                        doc.povm.len()
                    ),
                ));
            }
            PostselectionBias::new(weights.clone())
                .map_err(|e| validation("postselection_bias", e))
        })
        .transpose()?;

    if let Some(mc) = &doc.mc {
        if mc.samples == 0 {
            return Err(validation("mc.samples", "must be at least 1"));
        }
    }

    Ok(ScenarioFile {
        dimension: doc.dimension,
        ensemble,
        povm,
        hamiltonian,
        postselection_bias,
        mc: doc.mc,
    })
}

impl ScenarioFile {
    /// Serializes back to the on-disk document layout.
    pub fn to_json_value(&self) -> serde_json::Value {
        let matrix_rows = |m: &ComplexMatrix| -> Vec<Vec<[f64; 2]>> {
            (0..m.dim())
                .map(|r| {
                    (0..m.dim())
                        .map(|c| {
                            let e = m.get(r, c);
                            [e.re, e.im]
                        })
                        .collect()
                })
                .collect()
        };
        let doc = ScenarioDoc {
            dimension: self.dimension,
            ensemble: self
                .ensemble
                .members()
                .iter()
                .map(|(prior, state)| EnsembleMemberDoc {
                    prior: *prior,
                    state: matrix_rows(state.matrix()),
                })
                .collect(),
            povm: self
                .povm
                .elements()
                .iter()
                .zip(self.povm.labels())
                .map(|(element, label)| PovmElementDoc {
                    label: label.clone(),
                    element: matrix_rows(element),
                })
                .collect(),
            hamiltonian: self.hamiltonian.as_ref().map(&matrix_rows),
            postselection_bias: self
                .postselection_bias
                .as_ref()
                .map(|b| b.weights().to_vec()),
            mc: self.mc,
        };
        serde_json::to_value(doc).expect("scenario document serializes")
    }
}
