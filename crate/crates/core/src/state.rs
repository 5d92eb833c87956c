//! Validated quantum domain types: density operators, preparation
//! ensembles, POVMs, postselection biases, and the standard retrodictive
//! state assigned from a measurement outcome alone.
//!
//! Every type validates its invariants at construction and is immutable
//! afterwards, so instances can be shared freely across threads.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError, MAX_DIM};

/// Unit-trace tolerance for density operators.
pub const TRACE_TOL: f64 = 1e-10;

/// Tolerance on the sum of ensemble priors.
pub const PRIOR_TOL: f64 = 1e-10;

/// Frobenius-norm tolerance for POVM completeness and for the unbiasedness
/// test against `I/D`.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Orthonormality tolerance for projective measurement bases.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// POVM elements with trace at or below this can never fire and cannot be
/// normalized into a retrodictive state.
pub const ZERO_TRACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Error)]
pub enum StateError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("density operator trace {trace:.12} differs from 1 beyond {TRACE_TOL:.0e}")]
    NotUnitTrace { trace: f64 },
    #[error("ensemble priors sum to {sum:.12}, expected 1 within {PRIOR_TOL:.0e}")]
    PriorsNotNormalized { sum: f64 },
    #[error("prior {value} at index {index} is outside [0, 1]")]
    PriorOutOfRange { index: usize, value: f64 },
    #[error("preparation ensemble has no members")]
    EmptyEnsemble,
    #[error("POVM has no elements")]
    EmptyPovm,
    #[error("member {index} has dimension {got}, expected {expected}")]
    MixedDimensions {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("POVM elements sum deviates from identity by {deviation:.3e} (Frobenius), tolerance {COMPLETENESS_TOL:.0e}")]
    PovmIncomplete { deviation: f64 },
    #[error("vectors {i} and {j} are not orthonormal: |<i|j> - delta| = {deviation:.3e}")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },
    #[error("basis spans only {got} of {dim} dimensions")]
    IncompleteBasis { got: usize, dim: usize },
    #[error("POVM element {index} has trace {trace:.3e} <= {ZERO_TRACE_TOL:.0e}: outcome can never occur")]
    ZeroTraceElement { index: usize, trace: f64 },
    #[error("state vector has norm {norm:.12}, expected 1")]
    VectorNotNormalized { norm: f64 },
    #[error("state vector entries must be finite")]
    VectorNotFinite,
    #[error("invalid vector dimension {dim}: must be between 1 and {MAX_DIM}")]
    InvalidVectorDimension { dim: usize },
    #[error("got {got} labels for {expected} entries")]
    LabelCountMismatch { got: usize, expected: usize },
    #[error("postselection bias weight {value} at index {index} is negative or non-finite")]
    InvalidWeight { index: usize, value: f64 },
    #[error("postselection bias needs at least one strictly positive weight")]
    NoPositiveWeight,
}

/// A normalized pure state, stored as a unit complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Validates finiteness and unit norm (within [`ORTHONORMALITY_TOL`]).
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, StateError> {
        let dim = amplitudes.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(StateError::InvalidVectorDimension { dim });
        }
        if !amplitudes
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
        {
            return Err(StateError::VectorNotFinite);
        }
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > ORTHONORMALITY_TOL {
            return Err(StateError::VectorNotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self, StateError> {
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(StateError::VectorNotNormalized { norm });
        }
        Self::new(amplitudes.into_iter().map(|c| c / norm).collect())
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Rank-1 projector `|self><self|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), |r, c| {
            self.amplitudes[r] * self.amplitudes[c].conj()
        })
    }

    /// The projector as a validated density operator.
    pub fn density(&self) -> DensityOperator {
        DensityOperator::new(self.projector())
            .expect("projector of a unit vector is a valid density operator")
    }
}

/// A Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace, and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self, StateError> {
        let spectrum = linalg::eig_hermitian(&matrix)?;
        let min = spectrum.min_eigenvalue();
        if min < -linalg::PSD_TOL {
            return Err(LinalgError::NotPsd { eigenvalue: min }.into());
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(StateError::NotUnitTrace { trace: trace.re });
        }
        Ok(Self { matrix })
    }

    /// Maximally mixed state `I/D`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Purity `Tr(rho^2)`; 1 for pure states, `1/D` for maximally mixed.
    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix)
            .expect("same dimension")
            .re
    }
}

/// A labelled set of preparations `(p_i, rho_i)` with priors summing to 1.
#[derive(Debug, Clone)]
pub struct PreparationEnsemble {
    members: Vec<(f64, DensityOperator)>,
    labels: Vec<String>,
}

impl PreparationEnsemble {
    /// Builds an ensemble with default labels `a0, a1, ...`.
    pub fn new(members: Vec<(f64, DensityOperator)>) -> Result<Self, StateError> {
        let labels = (0..members.len()).map(|i| format!("a{i}")).collect();
        Self::with_labels(members, labels)
    }

    pub fn with_labels(
        members: Vec<(f64, DensityOperator)>,
        labels: Vec<String>,
    ) -> Result<Self, StateError> {
        if members.is_empty() {
            return Err(StateError::EmptyEnsemble);
        }
        if labels.len() != members.len() {
            return Err(StateError::LabelCountMismatch {
                got: labels.len(),
                expected: members.len(),
            });
        }
        let dim = members[0].1.dim();
        for (index, (prior, state)) in members.iter().enumerate() {
            if !prior.is_finite() || *prior < 0.0 || *prior > 1.0 {
                return Err(StateError::PriorOutOfRange {
                    index,
                    value: *prior,
                });
            }
            if state.dim() != dim {
                return Err(StateError::MixedDimensions {
                    index,
                    got: state.dim(),
                    expected: dim,
                });
            }
        }
        let sum: f64 = members.iter().map(|(p, _)| p).sum();
        if (sum - 1.0).abs() > PRIOR_TOL {
            return Err(StateError::PriorsNotNormalized { sum });
        }
        Ok(Self { members, labels })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    pub fn prior(&self, i: usize) -> f64 {
        self.members[i].0
    }

    pub fn state(&self, i: usize) -> &DensityOperator {
        &self.members[i].1
    }

    pub fn priors(&self) -> Vec<f64> {
        self.members.iter().map(|(p, _)| *p).collect()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn members(&self) -> &[(f64, DensityOperator)] {
        &self.members
    }
}

/// The prior-weighted mixture `rho = sum_i p_i rho_i`.
pub fn a_priori_state(ensemble: &PreparationEnsemble) -> DensityOperator {
    let dim = ensemble.dim();
    let mut acc = ComplexMatrix::zeros(dim);
    for (prior, state) in ensemble.members() {
        acc = acc.add(&state.matrix().scale(*prior));
    }
    DensityOperator::new(acc).expect("convex mixture of density operators is a density operator")
}

/// True iff the a priori state equals `I/D` within [`COMPLETENESS_TOL`]
/// (Frobenius norm), i.e. the preparation is unbiased. Unbiasedness
/// restricted to a proper subspace of the full space is not considered.
pub fn is_unbiased(ensemble: &PreparationEnsemble) -> bool {
    let dim = ensemble.dim();
    let target = ComplexMatrix::identity(dim).scale(1.0 / dim as f64);
    a_priori_state(ensemble)
        .matrix()
        .sub(&target)
        .frobenius_norm()
        <= COMPLETENESS_TOL
}

/// A positive operator-valued measure: labelled positive operators summing
/// to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

impl Povm {
    /// Builds a POVM with default labels `m0, m1, ...`.
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self, StateError> {
        let labels = (0..elements.len()).map(|m| format!("m{m}")).collect();
        Self::with_labels(elements, labels)
    }

    pub fn with_labels(
        elements: Vec<ComplexMatrix>,
        labels: Vec<String>,
    ) -> Result<Self, StateError> {
        if elements.is_empty() {
            return Err(StateError::EmptyPovm);
        }
        if labels.len() != elements.len() {
            return Err(StateError::LabelCountMismatch {
                got: labels.len(),
                expected: elements.len(),
            });
        }
        let dim = elements[0].dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for (index, element) in elements.iter().enumerate() {
            if element.dim() != dim {
                return Err(StateError::MixedDimensions {
                    index,
                    got: element.dim(),
                    expected: dim,
                });
            }
            let spectrum = linalg::eig_hermitian(element)?;
            let min = spectrum.min_eigenvalue();
            if min < -linalg::PSD_TOL {
                return Err(LinalgError::NotPsd { eigenvalue: min }.into());
            }
            sum = sum.add(element);
        }
        // Non-complete POVMs are rejected outright, never auto-normalized.
        let deviation = sum.sub(&ComplexMatrix::identity(dim)).frobenius_norm();
        if deviation > COMPLETENESS_TOL {
            return Err(StateError::PovmIncomplete { deviation });
        }
        Ok(Self { elements, labels })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn element(&self, m: usize) -> &ComplexMatrix {
        &self.elements[m]
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Projective POVM `{|m><m|}` from a complete orthonormal basis.
pub fn projective_povm(basis: &[StateVector]) -> Result<Povm, StateError> {
    if basis.is_empty() {
        return Err(StateError::EmptyPovm);
    }
    let dim = basis[0].dim();
    for (i, v) in basis.iter().enumerate() {
        if v.dim() != dim {
            return Err(StateError::MixedDimensions {
                index: i,
                got: v.dim(),
                expected: dim,
            });
        }
        for (j, w) in basis.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            let deviation = (v.inner(w) - C64::new(target, 0.0)).norm();
            if deviation > ORTHONORMALITY_TOL {
                return Err(StateError::NotOrthonormal { i, j, deviation });
            }
        }
    }
    if basis.len() < dim {
        return Err(StateError::IncompleteBasis {
            got: basis.len(),
            dim,
        });
    }
    Povm::new(basis.iter().map(StateVector::projector).collect())
}

/// The standard retrodictive state assigned from outcome `m` alone:
/// `pi_m / Tr(pi_m)`. For a projective element this is the projector
/// itself.
pub fn retrodictive_state(povm: &Povm, outcome: usize) -> Result<DensityOperator, StateError> {
    assert!(outcome < povm.len(), "outcome index {outcome} out of range");
    let element = povm.element(outcome);
    let trace = element.trace().re;
    if trace <= ZERO_TRACE_TOL {
        return Err(StateError::ZeroTraceElement {
            index: outcome,
            trace,
        });
    }
    DensityOperator::new(element.scale(1.0 / trace))
}

/// Nonnegative recording weights, one per POVM outcome. Not required to
/// sum to 1; the biased-postselection formula is scale-invariant in them.
#[derive(Debug, Clone)]
pub struct PostselectionBias {
    weights: Vec<f64>,
}

impl PostselectionBias {
    pub fn new(weights: Vec<f64>) -> Result<Self, StateError> {
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(StateError::InvalidWeight { index, value });
            }
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(StateError::NoPositiveWeight);
        }
        Ok(Self { weights })
    }

    /// Uniform bias over `n` outcomes (ideal faithful recording).
    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[cfg(test)]
pub(crate) mod test_states {
    use super::*;

    pub fn ket_up() -> StateVector {
        StateVector::basis_state(2, 0)
    }

    pub fn ket_down() -> StateVector {
        StateVector::basis_state(2, 1)
    }

    pub fn ket_right() -> StateVector {
        let s = 1.0 / 2f64.sqrt();
        StateVector::new(vec![C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap()
    }

    pub fn ket_left() -> StateVector {
        let s = 1.0 / 2f64.sqrt();
        StateVector::new(vec![C64::new(s, 0.0), C64::new(-s, 0.0)]).unwrap()
    }

    pub fn z_basis_povm() -> Povm {
        projective_povm(&[ket_up(), ket_down()]).unwrap()
    }

    pub fn x_basis_povm() -> Povm {
        projective_povm(&[ket_right(), ket_left()]).unwrap()
    }

    /// Unbiased qubit ensemble: up/down with equal priors.
    pub fn unbiased_z_ensemble() -> PreparationEnsemble {
        PreparationEnsemble::new(vec![
            (0.5, ket_up().density()),
            (0.5, ket_down().density()),
        ])
        .unwrap()
    }

    /// Biased qubit ensemble: 3/4 up, 1/4 down.
    pub fn biased_z_ensemble() -> PreparationEnsemble {
        PreparationEnsemble::new(vec![
            (0.75, ket_up().density()),
            (0.25, ket_down().density()),
        ])
        .unwrap()
    }

    pub fn singleton_up_ensemble() -> PreparationEnsemble {
        PreparationEnsemble::new(vec![(1.0, ket_up().density())]).unwrap()
    }
}
