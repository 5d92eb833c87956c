//! Forward evolution of predictive states and backward evolution of
//! retrodictive states under a time-independent Hamiltonian (hbar = 1).
//!
//! Both directions use the same generator: a retrodictive state anchored
//! at its final boundary condition is conjugated by the unitary with a
//! negative duration rather than integrated by a separate solver, so the
//! evolution is exact. The transition amplitude between a forward-evolved
//! preparation and a backward-evolved outcome is independent of the
//! meeting time; that invariance is this module's consistency
//! certificate.

use num_complex::Complex64 as C64;
use std::fmt;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError};
use crate::state::{DensityOperator, Povm, StateVector, ORTHONORMALITY_TOL};

#[derive(Debug, Clone, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("time {t} violates {direction} evolution from anchor {anchor}")]
    TimeDirectionViolation {
        t: f64,
        anchor: f64,
        direction: TimeDirection,
    },
    #[error("time {t} outside evolution window [{t0}, {t1}]")]
    TimeOutOfRange { t: f64, t0: f64, t1: f64 },
    #[error("preparation basis vectors {i} and {j} are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },
    #[error("preparation basis spans {got} of {dim} dimensions")]
    IncompleteBasis { got: usize, dim: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
}

/// Whether a state runs forward from an initial boundary condition or
/// backward from a final one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDirection {
    Predictive,
    Retrodictive,
}

impl fmt::Display for TimeDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeDirection::Predictive => write!(f, "predictive"),
            TimeDirection::Retrodictive => write!(f, "retrodictive"),
        }
    }
}

/// A state pinned to a boundary time: predictive states evolve to later
/// times, retrodictive states to earlier ones.
#[derive(Debug, Clone)]
pub struct EvolvingState {
    state: DensityOperator,
    anchor_time: f64,
    direction: TimeDirection,
}

impl EvolvingState {
    pub fn predictive(state: DensityOperator, anchor_time: f64) -> Self {
        Self {
            state,
            anchor_time,
            direction: TimeDirection::Predictive,
        }
    }

    pub fn retrodictive(state: DensityOperator, anchor_time: f64) -> Self {
        Self {
            state,
            anchor_time,
            direction: TimeDirection::Retrodictive,
        }
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn anchor_time(&self) -> f64 {
        self.anchor_time
    }

    pub fn direction(&self) -> TimeDirection {
        self.direction
    }
}

/// Evolves the state to time `t` under Hamiltonian `h`:
/// `U rho U†` with `U = exp(-i h (t - anchor))`. Retrodictive states
/// thereby run backward from their final boundary condition.
pub fn evolve(
    s: &EvolvingState,
    h: &ComplexMatrix,
    t: f64,
) -> Result<DensityOperator, DynamicsError> {
    let anchor = s.anchor_time;
    let forward_ok = t >= anchor;
    let backward_ok = t <= anchor;
    let ok = match s.direction {
        TimeDirection::Predictive => forward_ok,
        TimeDirection::Retrodictive => backward_ok,
    };
    if !ok {
        return Err(DynamicsError::TimeDirectionViolation {
            t,
            anchor,
            direction: s.direction,
        });
    }
    if h.dim() != s.state.dim() {
        return Err(DynamicsError::DimMismatch {
            left: h.dim(),
            right: s.state.dim(),
        });
    }
    let u = linalg::exp_hermitian_generator(h, t - anchor)?;
    let evolved = s.state.matrix().conjugate_by(&u).hermitize();
    Ok(DensityOperator::new(evolved)
        .expect("unitary conjugation preserves density-operator invariants"))
}

fn evolve_vector(
    v: &StateVector,
    h: &ComplexMatrix,
    duration: f64,
) -> Result<Vec<C64>, DynamicsError> {
    if h.dim() != v.dim() {
        return Err(DynamicsError::DimMismatch {
            left: h.dim(),
            right: v.dim(),
        });
    }
    let u = linalg::exp_hermitian_generator(h, duration)?;
    Ok(u.apply(v.amplitudes()))
}

/// Amplitude `<m(t)|i(t)>` between the preparation `i` evolved forward
/// from `t0` and the measured state `m` evolved backward from `t1`,
/// sampled at a meeting time `t0 <= t <= t1`. Equals `<m|U(t1,t0)|i>`
/// for every such `t`.
pub fn transition_amplitude(
    i_state: &StateVector,
    m_state: &StateVector,
    h: &ComplexMatrix,
    t0: f64,
    t1: f64,
    t: f64,
) -> Result<C64, DynamicsError> {
    if !(t0..=t1).contains(&t) {
        return Err(DynamicsError::TimeOutOfRange { t, t0, t1 });
    }
    if i_state.dim() != m_state.dim() {
        return Err(DynamicsError::DimMismatch {
            left: i_state.dim(),
            right: m_state.dim(),
        });
    }
    let i_t = evolve_vector(i_state, h, t - t0)?;
    let m_t = evolve_vector(m_state, h, t - t1)?;
    Ok(m_t
        .iter()
        .zip(&i_t)
        .map(|(m_amp, i_amp)| m_amp.conj() * i_amp)
        .sum())
}

/// Probability, from the preparation side, that the measurement at `t1`
/// yields outcome `m`: `Tr(U rho U† pi_m)` with `U = U(t1, t0)`.
pub fn predictive_outcome_probability(
    i_state: &DensityOperator,
    h: &ComplexMatrix,
    t0: f64,
    t1: f64,
    povm: &Povm,
    m: usize,
) -> Result<f64, DynamicsError> {
    assert!(m < povm.len(), "outcome index {m} out of range");
    if t1 < t0 || t0.is_nan() || t1.is_nan() {
        return Err(DynamicsError::TimeOutOfRange { t: t1, t0, t1 });
    }
    if i_state.dim() != povm.dim() {
        return Err(DynamicsError::DimMismatch {
            left: i_state.dim(),
            right: povm.dim(),
        });
    }
    let evolved = evolve(&EvolvingState::predictive(i_state.clone(), t0), h, t1)?;
    let p = linalg::trace_product(evolved.matrix(), povm.element(m))?;
    debug_assert!(p.im.abs() < 1e-10);
    Ok(p.re.max(0.0))
}

/// Probability, from the measurement side, that the preparation drawn
/// uniformly from the orthonormal `basis` was `|i>`:
/// `|<i|U†(t1,t0)|m>|^2`. Numerically equal to the matching predictive
/// probability.
pub fn retrodictive_preparation_probability(
    m_state: &StateVector,
    h: &ComplexMatrix,
    t0: f64,
    t1: f64,
    basis: &[StateVector],
    i: usize,
) -> Result<f64, DynamicsError> {
    assert!(i < basis.len(), "preparation index {i} out of range");
    let dim = m_state.dim();
    for (a, v) in basis.iter().enumerate() {
        for (b, w) in basis.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            let deviation = (v.inner(w) - C64::new(target, 0.0)).norm();
            if deviation > ORTHONORMALITY_TOL {
                return Err(DynamicsError::NotOrthonormal {
                    i: a,
                    j: b,
                    deviation,
                });
            }
        }
    }
    if basis.len() < dim {
        return Err(DynamicsError::IncompleteBasis {
            got: basis.len(),
            dim,
        });
    }
    // U†(t1,t0)|m> is the measured state carried backward to t0.
    let m_at_t0 = evolve_vector(m_state, h, t0 - t1)?;
    let amp: C64 = basis[i]
        .amplitudes()
        .iter()
        .zip(&m_at_t0)
        .map(|(i_amp, m_amp)| i_amp.conj() * m_amp)
        .sum();
    Ok(amp.norm_sqr())
}
