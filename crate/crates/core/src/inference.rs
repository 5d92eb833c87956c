//! Exact classical and quantum Bayesian inference over discrete
//! preparation/outcome pairs.
//!
//! The central object is the [`ProbabilityTable`]: joint, marginal,
//! predictive, and retrodictive probabilities for a preparation ensemble
//! measured by a POVM. Conditionals on zero-probability events are
//! represented by an explicit `None`, never by 0 or NaN, so they cannot
//! silently corrupt downstream sums.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix};
use crate::state::{a_priori_state, is_unbiased, Povm, PostselectionBias, PreparationEnsemble};

/// Conditioning events with probability at or below this are treated as
/// impossible; conditionals on them are flagged undefined.
pub const MARGINAL_TOL: f64 = 1e-12;

/// Largest imaginary residue tolerated in `Tr(rho pi)` before the
/// computation is aborted as internally inconsistent. Both factors are
/// Hermitian PSD, so the trace is real analytically.
pub const IMAG_TOL: f64 = 1e-10;

/// Tolerance on the total joint probability.
pub const JOINT_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error)]
pub enum InferenceError {
    #[error("joint probabilities sum to {sum:.12}, expected 1 within {JOINT_SUM_TOL:.0e}")]
    NotNormalized { sum: f64 },
    #[error("joint probability at ({i}, {m}) is negative or non-finite: {value}")]
    BadEntry { i: usize, m: usize, value: f64 },
    #[error("joint table must be a non-empty rectangular matrix")]
    BadShape,
    #[error("dimension mismatch: ensemble dim {left}, POVM dim {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("preparation is not unbiased: a priori state is not proportional to the identity")]
    NotUnbiased,
    #[error("all outcomes discarded for preparation {i}: weighted normalization is {sum:.3e}")]
    AllOutcomesDiscarded { i: usize, sum: f64 },
    #[error("bias supplies {got} weights for {expected} outcomes")]
    WeightCountMismatch { got: usize, expected: usize },
    #[error("internal numerical consistency failure: {detail}")]
    InternalConsistency { detail: String },
}

/// Joint, marginal, and conditional probabilities for preparations
/// (rows) against measurement outcomes (columns).
///
/// `None` in a conditional cell marks a probability conditioned on an
/// event of probability <= [`MARGINAL_TOL`].
#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityTable {
    pub prep_labels: Vec<String>,
    pub outcome_labels: Vec<String>,
    /// `P(a_i, b_m)`.
    pub joint: Vec<Vec<f64>>,
    /// `P(a_i)`.
    pub prep_marginals: Vec<f64>,
    /// `P(b_m)`.
    pub outcome_marginals: Vec<f64>,
    /// `P(b_m | a_i)`.
    pub predictive: Vec<Vec<Option<f64>>>,
    /// `P(a_i | b_m)`.
    pub retrodictive: Vec<Vec<Option<f64>>>,
}

impl ProbabilityTable {
    pub fn n_preps(&self) -> usize {
        self.joint.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.joint.first().map_or(0, Vec::len)
    }

    /// Checks every structural invariant: entry bounds, joint
    /// normalization, marginal consistency, and conditional normalization
    /// over defined rows/columns.
    pub fn validate(&self) -> Result<(), InferenceError> {
        let ni = self.n_preps();
        let nm = self.n_outcomes();
        if ni == 0 || nm == 0 {
            return Err(InferenceError::BadShape);
        }
        let mut total = 0.0;
        for (i, row) in self.joint.iter().enumerate() {
            if row.len() != nm {
                return Err(InferenceError::BadShape);
            }
            for (m, &value) in row.iter().enumerate() {
                if !value.is_finite() || !(-MARGINAL_TOL..=1.0 + MARGINAL_TOL).contains(&value) {
                    return Err(InferenceError::BadEntry { i, m, value });
                }
                total += value;
            }
        }
        if (total - 1.0).abs() > JOINT_SUM_TOL {
            return Err(InferenceError::NotNormalized { sum: total });
        }
        for i in 0..ni {
            let row_sum: f64 = self.joint[i].iter().sum();
            if (row_sum - self.prep_marginals[i]).abs() > MARGINAL_TOL {
                return Err(InferenceError::InternalConsistency {
                    detail: format!("prep marginal {i} disagrees with joint row sum"),
                });
            }
        }
        for m in 0..nm {
            let col_sum: f64 = self.joint.iter().map(|row| row[m]).sum();
            if (col_sum - self.outcome_marginals[m]).abs() > MARGINAL_TOL {
                return Err(InferenceError::InternalConsistency {
                    detail: format!("outcome marginal {m} disagrees with joint column sum"),
                });
            }
        }
        for i in 0..ni {
            if self.prep_marginals[i] > MARGINAL_TOL {
                let sum: f64 = self.predictive[i].iter().flatten().sum();
                if (sum - 1.0).abs() > JOINT_SUM_TOL {
                    return Err(InferenceError::InternalConsistency {
                        detail: format!("predictive row {i} sums to {sum}"),
                    });
                }
            }
        }
        for m in 0..nm {
            if self.outcome_marginals[m] > MARGINAL_TOL {
                let sum: f64 = self.retrodictive.iter().filter_map(|row| row[m]).sum();
                if (sum - 1.0).abs() > JOINT_SUM_TOL {
                    return Err(InferenceError::InternalConsistency {
                        detail: format!("retrodictive column {m} sums to {sum}"),
                    });
                }
            }
        }
        Ok(())
    }
}

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

/// Builds the full table from a classical joint distribution: marginals
/// by summation, conditionals by Bayes' rule.
pub fn classical_table(joint: &[Vec<f64>]) -> Result<ProbabilityTable, InferenceError> {
    let ni = joint.len();
    let nm = joint.first().map_or(0, Vec::len);
    if ni == 0 || nm == 0 || joint.iter().any(|row| row.len() != nm) {
        return Err(InferenceError::BadShape);
    }
    let mut total = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (m, &value) in row.iter().enumerate() {
            if !value.is_finite() || value < -MARGINAL_TOL {
                return Err(InferenceError::BadEntry { i, m, value });
            }
            total += value;
        }
    }
    if (total - 1.0).abs() > JOINT_SUM_TOL {
        return Err(InferenceError::NotNormalized { sum: total });
    }

    let prep_marginals: Vec<f64> = joint.iter().map(|row| row.iter().sum()).collect();
    let outcome_marginals: Vec<f64> = (0..nm)
        .map(|m| joint.iter().map(|row| row[m]).sum())
        .collect();
    let predictive = (0..ni)
        .map(|i| {
            (0..nm)
                .map(|m| conditional(joint[i][m], prep_marginals[i]))
                .collect()
        })
        .collect();
    let retrodictive = (0..ni)
        .map(|i| {
            (0..nm)
                .map(|m| conditional(joint[i][m], outcome_marginals[m]))
                .collect()
        })
        .collect();

    Ok(ProbabilityTable {
        prep_labels: default_labels("a", ni),
        outcome_labels: default_labels("b", nm),
        joint: joint.to_vec(),
        prep_marginals,
        outcome_marginals,
        predictive,
        retrodictive,
    })
}

fn conditional(joint: f64, marginal: f64) -> Option<f64> {
    (marginal > MARGINAL_TOL).then(|| joint / marginal)
}

/// `Tr(a b)` for Hermitian PSD factors, demanding a numerically real
/// result.
fn real_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, InferenceError> {
    let t = linalg::trace_product(a, b).map_err(|_| InferenceError::DimMismatch {
        left: a.dim(),
        right: b.dim(),
    })?;
    if t.im.abs() >= IMAG_TOL {
        return Err(InferenceError::InternalConsistency {
            detail: format!("trace product has imaginary residue {:.3e}", t.im),
        });
    }
    Ok(t.re)
}

fn check_dims(ensemble: &PreparationEnsemble, povm: &Povm) -> Result<(), InferenceError> {
    if ensemble.dim() != povm.dim() {
        return Err(InferenceError::DimMismatch {
            left: ensemble.dim(),
            right: povm.dim(),
        });
    }
    Ok(())
}

/// Quantum joint distribution `P(a_i, b_m) = p_i Tr(rho_i pi_m)`.
pub fn quantum_joint(
    ensemble: &PreparationEnsemble,
    povm: &Povm,
) -> Result<Vec<Vec<f64>>, InferenceError> {
    check_dims(ensemble, povm)?;
    let mut joint = Vec::with_capacity(ensemble.len());
    for (prior, state) in ensemble.members() {
        let row = povm
            .elements()
            .iter()
            .map(|element| Ok(prior * real_trace_product(state.matrix(), element)?.max(0.0)))
            .collect::<Result<Vec<f64>, InferenceError>>()?;
        joint.push(row);
    }
    Ok(joint)
}

/// Predictive conditionals `P(b_m | a_i) = Tr(rho_i pi_m)`, defined for
/// every preparation regardless of its prior.
pub fn predictive(
    ensemble: &PreparationEnsemble,
    povm: &Povm,
) -> Result<Vec<Vec<f64>>, InferenceError> {
    check_dims(ensemble, povm)?;
    ensemble
        .members()
        .iter()
        .map(|(_, state)| {
            povm.elements()
                .iter()
                .map(|element| Ok(real_trace_product(state.matrix(), element)?.max(0.0)))
                .collect()
        })
        .collect()
}

/// Retrodictive conditionals
/// `P(a_i | b_m) = p_i Tr(rho_i pi_m) / Tr(rho pi_m)` with
/// `rho = sum_i p_i rho_i`. Columns whose outcome probability is at or
/// below [`MARGINAL_TOL`] are flagged undefined.
pub fn retrodictive(
    ensemble: &PreparationEnsemble,
    povm: &Povm,
) -> Result<Vec<Vec<Option<f64>>>, InferenceError> {
    check_dims(ensemble, povm)?;
    let rho = a_priori_state(ensemble);
    let outcome_probs: Vec<f64> = povm
        .elements()
        .iter()
        .map(|element| real_trace_product(rho.matrix(), element))
        .collect::<Result<_, _>>()?;
    let mut table = Vec::with_capacity(ensemble.len());
    for (prior, state) in ensemble.members() {
        let mut row = Vec::with_capacity(povm.len());
        for (m, element) in povm.elements().iter().enumerate() {
            if outcome_probs[m] > MARGINAL_TOL {
                let value = prior * real_trace_product(state.matrix(), element)?.max(0.0)
                    / outcome_probs[m];
                row.push(Some(value));
            } else {
                row.push(None);
            }
        }
        table.push(row);
    }
    Ok(table)
}

/// Retrodictive conditionals for an unbiased preparation, where Bayes'
/// rule collapses to Born-rule form `D p_i Tr(rho_i pi_m) / Tr(pi_m)`.
///
/// Both the general rule and the collapsed form are evaluated and must
/// agree within 1e-12.
pub fn unbiased_retrodictive(
    ensemble: &PreparationEnsemble,
    povm: &Povm,
) -> Result<Vec<Vec<Option<f64>>>, InferenceError> {
    check_dims(ensemble, povm)?;
    if !is_unbiased(ensemble) {
        return Err(InferenceError::NotUnbiased);
    }
    let general = retrodictive(ensemble, povm)?;
    let dim = ensemble.dim() as f64;
    for (i, (prior, state)) in ensemble.members().iter().enumerate() {
        for (m, element) in povm.elements().iter().enumerate() {
            let element_trace = element.trace().re;
            let born = if element_trace > MARGINAL_TOL {
                Some(dim * prior * real_trace_product(state.matrix(), element)?.max(0.0)
                    / element_trace)
            } else {
                None
            };
            match (born, general[i][m]) {
                (Some(b), Some(g)) if (b - g).abs() <= 1e-12 => {}
                // Outcome cannot occur: nothing for the Born form to match.
                (_, None) => {}
                _ => {
                    return Err(InferenceError::InternalConsistency {
                        detail: format!("unbiased Born form and Bayes rule disagree at ({i}, {m})"),
                    })
                }
            }
        }
    }
    Ok(general)
}

/// Predictive conditionals under biased postselection:
/// `P(b_m | a_i) = w_m Tr(rho_i pi_m) / sum_n w_n Tr(rho_i pi_n)`.
pub fn biased_postselection_predictive(
    ensemble: &PreparationEnsemble,
    povm: &Povm,
    bias: &PostselectionBias,
) -> Result<Vec<Vec<f64>>, InferenceError> {
    check_dims(ensemble, povm)?;
    if bias.len() != povm.len() {
        return Err(InferenceError::WeightCountMismatch {
            got: bias.len(),
            expected: povm.len(),
        });
    }
    let mut table = Vec::with_capacity(ensemble.len());
    for (i, (_, state)) in ensemble.members().iter().enumerate() {
        let weighted: Vec<f64> = povm
            .elements()
            .iter()
            .enumerate()
            .map(|(m, element)| {
                Ok(bias.weight(m) * real_trace_product(state.matrix(), element)?.max(0.0))
            })
            .collect::<Result<_, InferenceError>>()?;
        let sum: f64 = weighted.iter().sum();
        if sum <= MARGINAL_TOL {
            return Err(InferenceError::AllOutcomesDiscarded { i, sum });
        }
        table.push(weighted.into_iter().map(|w| w / sum).collect());
    }
    Ok(table)
}

/// Assembles the full quantum table for a scenario: joint by the Born
/// rule, preparation marginals equal to the priors, outcome marginals
/// `Tr(rho pi_m)`, predictive and retrodictive conditionals.
pub fn quantum_table(
    ensemble: &PreparationEnsemble,
    povm: &Povm,
) -> Result<ProbabilityTable, InferenceError> {
    let joint = quantum_joint(ensemble, povm)?;
    let rho = a_priori_state(ensemble);
    let outcome_marginals: Vec<f64> = povm
        .elements()
        .iter()
        .map(|element| real_trace_product(rho.matrix(), element).map(|p| p.max(0.0)))
        .collect::<Result<_, _>>()?;
    let predictive_rows = predictive(ensemble, povm)?;
    let retrodictive_rows = retrodictive(ensemble, povm)?;

    let table = ProbabilityTable {
        prep_labels: ensemble.labels().to_vec(),
        outcome_labels: povm.labels().to_vec(),
        joint,
        prep_marginals: ensemble.priors(),
        outcome_marginals,
        predictive: predictive_rows
            .into_iter()
            .map(|row| row.into_iter().map(Some).collect())
            .collect(),
        retrodictive: retrodictive_rows,
    };
    table.validate()?;
    Ok(table)
}

/// Consistency certificate: the largest violation of
/// `P(a_i|b_m) P(b_m) = P(b_m|a_i) P(a_i)` over all cells where both
/// conditionals are defined.
pub fn bayes_residual(table: &ProbabilityTable) -> f64 {
    let mut residual: f64 = 0.0;
    for i in 0..table.n_preps() {
        for m in 0..table.n_outcomes() {
            if let (Some(retro), Some(pred)) = (table.retrodictive[i][m], table.predictive[i][m]) {
                let violation =
                    (retro * table.outcome_marginals[m] - pred * table.prep_marginals[i]).abs();
                residual = residual.max(violation);
            }
        }
    }
    residual
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::test_states::*;
    use crate::state::{DensityOperator, StateVector};
    use num_complex::Complex64 as C64;

    #[test]
    fn classical_table_perfect_correlation() {
        let t = classical_table(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        for i in 0..2 {
            for m in 0..2 {
                let expected = if i == m { 1.0 } else { 0.0 };
                assert_eq!(t.predictive[i][m], Some(expected));
                assert_eq!(t.retrodictive[i][m], Some(expected));
            }
        }
        t.validate().unwrap();
    }

    #[test]
    fn classical_table_independence() {
        let t = classical_table(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        for i in 0..2 {
            for m in 0..2 {
                assert_eq!(t.predictive[i][m], Some(0.5));
                assert_eq!(t.retrodictive[i][m], Some(0.5));
            }
        }
    }

    #[test]
    fn classical_table_bayes_arithmetic() {
        let t = classical_table(&[vec![0.3, 0.1], vec![0.2, 0.4]]).unwrap();
        // P(a_0 | b_1) = 0.1 / 0.5 = 0.2.
        assert!((t.retrodictive[0][1].unwrap() - 0.2).abs() < 1e-15);
        assert!(bayes_residual(&t) < 1e-12);
    }

    #[test]
    fn classical_table_rejections_and_undefined() {
        assert!(matches!(
            classical_table(&[vec![0.6, 0.6]]),
            Err(InferenceError::NotNormalized { .. })
        ));
        assert!(matches!(
            classical_table(&[vec![1.2, -0.2]]),
            Err(InferenceError::BadEntry { .. })
        ));
        assert!(matches!(
            classical_table(&[]),
            Err(InferenceError::BadShape)
        ));

        // A zero-probability preparation row yields undefined predictive cells.
        let t = classical_table(&[vec![0.5, 0.5], vec![0.0, 0.0]]).unwrap();
        assert_eq!(t.predictive[1][0], None);
        assert_eq!(t.predictive[1][1], None);
        assert_eq!(t.retrodictive[1][0], Some(0.0));
        t.validate().unwrap();
    }

    #[test]
    fn quantum_joint_examples() {
        // Eigenstate measurement.
        let j = quantum_joint(&singleton_up_ensemble(), &z_basis_povm()).unwrap();
        assert!((j[0][0] - 1.0).abs() < 1e-12);
        assert!(j[0][1].abs() < 1e-12);

        // Unbiased z-ensemble against the x basis: all cells 1/4.
        let j = quantum_joint(&unbiased_z_ensemble(), &x_basis_povm()).unwrap();
        for row in &j {
            for &cell in row {
                assert!((cell - 0.25).abs() < 1e-12);
            }
        }

        // |up> against the x basis: 1/2 each.
        let j = quantum_joint(&singleton_up_ensemble(), &x_basis_povm()).unwrap();
        assert!((j[0][0] - 0.5).abs() < 1e-12);
        assert!((j[0][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quantum_joint_dim_mismatch() {
        let qutrit_povm = Povm::new(vec![ComplexMatrix::identity(3)]).unwrap();
        assert!(matches!(
            quantum_joint(&singleton_up_ensemble(), &qutrit_povm),
            Err(InferenceError::DimMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn predictive_examples() {
        let p = predictive(&singleton_up_ensemble(), &z_basis_povm()).unwrap();
        assert!((p[0][0] - 1.0).abs() < 1e-12 && p[0][1].abs() < 1e-12);

        let p = predictive(&singleton_up_ensemble(), &x_basis_povm()).unwrap();
        assert!((p[0][0] - 0.5).abs() < 1e-12 && (p[0][1] - 0.5).abs() < 1e-12);

        // Maximally mixed input: row entry Tr(pi_m)/2.
        let e =
            PreparationEnsemble::new(vec![(1.0, DensityOperator::maximally_mixed(2))]).unwrap();
        let p = predictive(&e, &z_basis_povm()).unwrap();
        assert!((p[0][0] - 0.5).abs() < 1e-12 && (p[0][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn retrodictive_examples() {
        // Singleton ensemble: the only hypothesis has posterior 1.
        let r = retrodictive(&singleton_up_ensemble(), &x_basis_povm()).unwrap();
        assert_eq!(r[0][0], Some(1.0));
        assert_eq!(r[0][1], Some(1.0));

        // Unbiased ensemble, x measurement: posterior 1/2 everywhere.
        let r = retrodictive(&unbiased_z_ensemble(), &x_basis_povm()).unwrap();
        for row in &r {
            for cell in row {
                assert!((cell.unwrap() - 0.5).abs() < 1e-12);
            }
        }

        // Biased (3/4, 1/4) ensemble, outcome right: P(up | right) = 3/4.
        let r = retrodictive(&biased_z_ensemble(), &x_basis_povm()).unwrap();
        assert!((r[0][0].unwrap() - 0.75).abs() < 1e-12);
        assert!((r[1][0].unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn retrodictive_flags_impossible_outcomes() {
        // POVM with a zero element: that outcome's column is undefined.
        let id = ComplexMatrix::identity(2);
        let zero = ComplexMatrix::zeros(2);
        let povm = Povm::new(vec![id, zero]).unwrap();
        let r = retrodictive(&biased_z_ensemble(), &povm).unwrap();
        assert_eq!(r[0][0], Some(0.75));
        assert_eq!(r[0][1], None);
        assert_eq!(r[1][1], None);
    }

    #[test]
    fn unbiased_retrodictive_examples() {
        // Entry (up, right) = |<right|up>|^2 = 1/2.
        let r = unbiased_retrodictive(&unbiased_z_ensemble(), &x_basis_povm()).unwrap();
        assert!((r[0][0].unwrap() - 0.5).abs() < 1e-12);

        // Same basis preparation and measurement: identity table.
        let r = unbiased_retrodictive(&unbiased_z_ensemble(), &z_basis_povm()).unwrap();
        assert!((r[0][0].unwrap() - 1.0).abs() < 1e-12);
        assert!(r[0][1].unwrap().abs() < 1e-12);

        assert!(matches!(
            unbiased_retrodictive(&biased_z_ensemble(), &x_basis_povm()),
            Err(InferenceError::NotUnbiased)
        ));
    }

    #[test]
    fn unbiased_retrodictive_qutrit_fourier() {
        // Unbiased qutrit basis ensemble measured in the Fourier basis:
        // every posterior is 1/3.
        let members = (0..3)
            .map(|k| (1.0 / 3.0, StateVector::basis_state(3, k).density()))
            .collect();
        let ensemble = PreparationEnsemble::new(members).unwrap();
        let omega = 2.0 * std::f64::consts::PI / 3.0;
        let fourier: Vec<StateVector> = (0..3)
            .map(|k| {
                StateVector::new(
                    (0..3)
                        .map(|j| C64::from_polar(1.0 / 3f64.sqrt(), omega * (j * k) as f64))
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let povm = crate::state::projective_povm(&fourier).unwrap();
        let r = unbiased_retrodictive(&ensemble, &povm).unwrap();
        for row in &r {
            for cell in row {
                assert!((cell.unwrap() - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn biased_postselection_examples() {
        let e = singleton_up_ensemble();
        let povm = x_basis_povm();

        // Uniform bias reduces to the plain predictive table.
        let uniform = PostselectionBias::uniform(2);
        let biased = biased_postselection_predictive(&e, &povm, &uniform).unwrap();
        let plain = predictive(&e, &povm).unwrap();
        for m in 0..2 {
            assert!((biased[0][m] - plain[0][m]).abs() < 1e-12);
        }

        // Bias (1, 0): all left outcomes discarded.
        let bias = PostselectionBias::new(vec![1.0, 0.0]).unwrap();
        let t = biased_postselection_predictive(&e, &povm, &bias).unwrap();
        assert!((t[0][0] - 1.0).abs() < 1e-12 && t[0][1].abs() < 1e-12);

        // Bias (2/3, 1/3) with equal overlaps: the bias dominates.
        let bias = PostselectionBias::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let t = biased_postselection_predictive(&e, &povm, &bias).unwrap();
        assert!((t[0][0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((t[0][1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn biased_postselection_all_discarded() {
        // Keep only the down outcome while preparing up: nothing survives.
        let e = singleton_up_ensemble();
        let povm = z_basis_povm();
        let bias = PostselectionBias::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            biased_postselection_predictive(&e, &povm, &bias),
            Err(InferenceError::AllOutcomesDiscarded { i: 0, .. })
        ));

        let bias = PostselectionBias::new(vec![1.0]).unwrap();
        assert!(matches!(
            biased_postselection_predictive(&e, &povm, &bias),
            Err(InferenceError::WeightCountMismatch {
                got: 1,
                expected: 2
            })
        ));
    }

    #[test]
    fn bayes_residual_detects_perturbation() {
        let mut t = quantum_table(&biased_z_ensemble(), &x_basis_povm()).unwrap();
        assert!(bayes_residual(&t) < 1e-12);
        // Perturb one retrodictive cell by 0.1; the residual must grow to
        // at least 0.1 * P(b_m).
        let pb = t.outcome_marginals[0];
        t.retrodictive[0][0] = t.retrodictive[0][0].map(|v| v + 0.1);
        assert!(bayes_residual(&t) >= 0.1 * pb - 1e-12);
    }

    #[test]
    fn quantum_table_matches_classical_route() {
        // The quantum rule is exactly classical Bayes over the quantum joint.
        let e = biased_z_ensemble();
        let povm = x_basis_povm();
        let qt = quantum_table(&e, &povm).unwrap();
        let ct = classical_table(&quantum_joint(&e, &povm).unwrap()).unwrap();
        for i in 0..qt.n_preps() {
            for m in 0..qt.n_outcomes() {
                match (qt.retrodictive[i][m], ct.retrodictive[i][m]) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                    (None, None) => {}
                    other => panic!("definedness mismatch at ({i},{m}): {other:?}"),
                }
            }
        }
        // Preparation marginals are the ensemble priors exactly.
        assert_eq!(qt.prep_marginals, e.priors());
        assert!(bayes_residual(&qt) < 1e-10);
    }
}
