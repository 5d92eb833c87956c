//! The rival symmetrized retrodictive formulation: square-root-transformed
//! retrodictive states `rho^(1/2) pi_m rho^(1/2) / Tr(rho pi_m)` paired
//! with retrodictive "measurement" operators
//! `rho^(-1/2) p_i rho_i rho^(-1/2)`.
//!
//! The rewriting reproduces the standard retrodictive probabilities
//! exactly, but its "retrodictive" state depends on the preparation: for
//! a rank-1 a priori state the FSB retrodictive state is the same for
//! every measurement outcome. [`outcome_dependence_report`] quantifies
//! that pathology by tabulating pairwise trace distances in both
//! formulations.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError};
use crate::state::{a_priori_state, retrodictive_state, DensityOperator, Povm, PreparationEnsemble};

/// Outcomes with `Tr(rho pi_m)` at or below this cannot be conditioned on.
pub const IMPOSSIBLE_OUTCOME_TOL: f64 = 1e-12;

/// Tolerance for the retro-POVM completeness check against the support
/// projector of the a priori state.
pub const RETRO_COMPLETENESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum FsbError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch: ensemble dim {left}, POVM dim {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("outcome {m} has probability {probability:.3e} <= {IMPOSSIBLE_OUTCOME_TOL:.0e} under the a priori state")]
    ImpossibleOutcome { m: usize, probability: f64 },
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("internal numerical consistency failure: {detail}")]
    InternalConsistency { detail: String },
}

/// The symmetrized decomposition: one retrodictive state per outcome, one
/// retrodictive measurement operator per preparation, and the support
/// projector the latter sum to.
#[derive(Debug, Clone)]
pub struct FsbDecomposition {
    retro_states: Vec<DensityOperator>,
    retro_povm: Vec<ComplexMatrix>,
    support_projector: ComplexMatrix,
}

impl FsbDecomposition {
    pub fn n_outcomes(&self) -> usize {
        self.retro_states.len()
    }

    pub fn n_preps(&self) -> usize {
        self.retro_povm.len()
    }

    pub fn retro_state(&self, m: usize) -> &DensityOperator {
        &self.retro_states[m]
    }

    pub fn retro_states(&self) -> &[DensityOperator] {
        &self.retro_states
    }

    pub fn retro_povm_element(&self, i: usize) -> &ComplexMatrix {
        &self.retro_povm[i]
    }

    pub fn retro_povm(&self) -> &[ComplexMatrix] {
        &self.retro_povm
    }

    pub fn support_projector(&self) -> &ComplexMatrix {
        &self.support_projector
    }
}

/// Builds the symmetrized decomposition for a scenario. A singular a
/// priori state is handled through its support pseudo-inverse.
pub fn fsb_decompose(
    ensemble: &PreparationEnsemble,
    povm: &Povm,
) -> Result<FsbDecomposition, FsbError> {
    if ensemble.dim() != povm.dim() {
        return Err(FsbError::DimMismatch {
            left: ensemble.dim(),
            right: povm.dim(),
        });
    }
    let rho = a_priori_state(ensemble);
    let sqrt_rho = linalg::psd_sqrt(rho.matrix())?;
    let pinv_sqrt_rho = linalg::psd_pinv_sqrt(rho.matrix())?;
    let support_projector = linalg::support_projector(rho.matrix())?;

    let mut retro_states = Vec::with_capacity(povm.len());
    for (m, element) in povm.elements().iter().enumerate() {
        let probability = linalg::trace_product(rho.matrix(), element)?.re;
        if probability <= IMPOSSIBLE_OUTCOME_TOL {
            return Err(FsbError::ImpossibleOutcome { m, probability });
        }
        let state = sqrt_rho
            .mul(element)
            .mul(&sqrt_rho)
            .hermitize()
            .scale(1.0 / probability);
        let state = DensityOperator::new(state).map_err(|e| FsbError::InternalConsistency {
            detail: format!("FSB retrodictive state {m} failed validation: {e}"),
        })?;
        retro_states.push(state);
    }

    let mut retro_povm = Vec::with_capacity(ensemble.len());
    let mut povm_sum = ComplexMatrix::zeros(ensemble.dim());
    for (prior, state) in ensemble.members() {
        let op = pinv_sqrt_rho
            .mul(&state.matrix().scale(*prior))
            .mul(&pinv_sqrt_rho)
            .hermitize();
        povm_sum = povm_sum.add(&op);
        retro_povm.push(op);
    }
    let completeness = povm_sum.sub(&support_projector).frobenius_norm();
    if completeness > RETRO_COMPLETENESS_TOL {
        return Err(FsbError::InternalConsistency {
            detail: format!(
                "retro measurement operators deviate from the support projector by {completeness:.3e}"
            ),
        });
    }

    Ok(FsbDecomposition {
        retro_states,
        retro_povm,
        support_projector,
    })
}

/// `P(a_i | b_m)` in the symmetrized form
/// `Tr(rho_m^ret pi_i^ret)`; equal to the standard Bayes value.
pub fn fsb_probability(d: &FsbDecomposition, i: usize, m: usize) -> Result<f64, FsbError> {
    if i >= d.n_preps() {
        return Err(FsbError::IndexOutOfRange {
            index: i,
            len: d.n_preps(),
        });
    }
    if m >= d.n_outcomes() {
        return Err(FsbError::IndexOutOfRange {
            index: m,
            len: d.n_outcomes(),
        });
    }
    let p = linalg::trace_product(d.retro_states[m].matrix(), &d.retro_povm[i])?;
    Ok(p.re.max(0.0))
}

/// Pairwise trace distances between retrodictive states for each pair of
/// outcomes, in both formulations. For a rank-1 a priori state all FSB
/// distances vanish while the standard distances generally do not.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeDependenceReport {
    pub outcome_labels: Vec<String>,
    /// `fsb[m][n]` = trace distance between FSB retro states `m` and `n`.
    pub fsb_distances: Vec<Vec<f64>>,
    /// Same pairs for the standard states `pi_m / Tr(pi_m)`.
    pub standard_distances: Vec<Vec<f64>>,
}

impl OutcomeDependenceReport {
    pub fn max_fsb_distance(&self) -> f64 {
        self.fsb_distances
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn max_standard_distance(&self) -> f64 {
        self.standard_distances
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }
}

pub fn outcome_dependence_report(
    ensemble: &PreparationEnsemble,
    povm: &Povm,
) -> Result<OutcomeDependenceReport, FsbError> {
    let decomposition = fsb_decompose(ensemble, povm)?;
    let standard: Vec<DensityOperator> = (0..povm.len())
        .map(|m| {
            retrodictive_state(povm, m)
                .expect("every possible outcome has trace above the zero-trace cutoff")
        })
        .collect();


    let n = povm.len();
    let mut fsb_distances = vec![vec![0.0; n]; n];
    let mut standard_distances = vec![vec![0.0; n]; n];
    for m in 0..n {
        for k in 0..n {
            fsb_distances[m][k] = linalg::trace_distance(
                decomposition.retro_states[m].matrix(),
                decomposition.retro_states[k].matrix(),
            )?;
            standard_distances[m][k] =
                linalg::trace_distance(standard[m].matrix(), standard[k].matrix())?;
        }
    }
    Ok(OutcomeDependenceReport {
        outcome_labels: povm.labels().to_vec(),
        fsb_distances,
        standard_distances,
    })
}
