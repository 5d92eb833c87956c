//! Independent frequentist oracle: samples preparation/measurement runs
//! with a seeded counter-based generator and estimates every conditional
//! probability by counting.
//!
//! Sampling reads only the ensemble priors and Born-rule traces computed
//! locally in this module; it never consults the analytic inference
//! engine, so agreement between the two is a genuine cross-check.
//!
//! Each run draws from its own ChaCha substream indexed by run number, so
//! parallel workers produce bit-identical aggregates to a serial pass
//! over the same seed.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::ComplexMatrix;
use crate::scenario::SpinTriadScenario;
use crate::state::{DensityOperator, Povm, PreparationEnsemble};

/// One simulated experimental run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub prep_index: usize,
    pub intermediate_outcome: Option<usize>,
    pub final_outcome: usize,
}

/// Counting estimates for a scenario: raw counts plus binomial point
/// estimates and standard errors for the joint and conditional tables.
///
/// `None` cells mark conditionals whose conditioning count is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalTable {
    pub prep_labels: Vec<String>,
    pub outcome_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
    pub prep_totals: Vec<u64>,
    pub outcome_totals: Vec<u64>,
    pub joint: Vec<Vec<f64>>,
    pub prep_marginals: Vec<f64>,
    pub outcome_marginals: Vec<f64>,
    pub predictive: Vec<Vec<Option<f64>>>,
    pub predictive_se: Vec<Vec<Option<f64>>>,
    pub retrodictive: Vec<Vec<Option<f64>>>,
    pub retrodictive_se: Vec<Vec<Option<f64>>>,
}

/// ChaCha substream for one run: same key for every run, stream index =
/// run index.
fn substream_rng(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// Inverse-CDF draw from a categorical distribution with one uniform.
/// Never returns an index with zero probability.
fn draw_categorical(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = k;
        }
        cumulative += p;
        if p > 0.0 && u < cumulative {
            return k;
        }
    }
    // Cumulative fell short of 1 by rounding; attribute the sliver to the
    // last outcome that can actually occur.
    last_positive
}

/// `Tr(rho pi)` computed directly from entries; the oracle's own Born
/// rule, kept separate from the inference path it validates.
fn born_trace(rho: &ComplexMatrix, element: &ComplexMatrix) -> f64 {
    let d = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            acc += rho.get(j, k) * element.get(k, j);
        }
    }
    acc.re.max(0.0)
}

fn born_row(state: &DensityOperator, povm: &Povm) -> Vec<f64> {
    povm.elements()
        .iter()
        .map(|element| born_trace(state.matrix(), element))
        .collect()
}

/// Samples one preparation-then-measurement run: the preparation label
/// with probability `p_i`, then the outcome with probability
/// `Tr(rho_i pi_m)`.
pub fn sample_run(
    ensemble: &PreparationEnsemble,
    povm: &Povm,
    rng: &mut ChaCha8Rng,
) -> RunRecord {
    let i = draw_categorical(rng, &ensemble.priors());
    let m = draw_categorical(rng, &born_row(ensemble.state(i), povm));
    RunRecord {
        prep_index: i,
        intermediate_outcome: None,
        final_outcome: m,
    }
}

/// Runs `n_samples` independent trials and tabulates the counts.
/// Reproducible: identical `(scenario, seed, n_samples)` give an
/// identical table bit for bit.
pub fn estimate(
    ensemble: &PreparationEnsemble,
    povm: &Povm,
    n_samples: u64,
    seed: u64,
) -> EmpiricalTable {
    assert!(n_samples >= 1, "need at least one sample");
    let ni = ensemble.len();
    let nm = povm.len();
    let priors = ensemble.priors();
    let born: Vec<Vec<f64>> = (0..ni)
        .map(|i| born_row(ensemble.state(i), povm))
        .collect();

    let counts = (0..n_samples)
        .into_par_iter()
        .fold(
            || vec![vec![0u64; nm]; ni],
            |mut acc, run| {
                let mut rng = substream_rng(seed, run);
                let i = draw_categorical(&mut rng, &priors);
                let m = draw_categorical(&mut rng, &born[i]);
                acc[i][m] += 1;
                acc
            },
        )
        .reduce(
            || vec![vec![0u64; nm]; ni],
            |mut a, b| {
                for (row_a, row_b) in a.iter_mut().zip(&b) {
                    for (cell_a, cell_b) in row_a.iter_mut().zip(row_b) {
                        *cell_a += cell_b;
                    }
                }
                a
            },
        );

    tabulate(
        ensemble.labels().to_vec(),
        povm.labels().to_vec(),
        counts,
        n_samples,
    )
}

fn tabulate(
    prep_labels: Vec<String>,
    outcome_labels: Vec<String>,
    counts: Vec<Vec<u64>>,
    total: u64,
) -> EmpiricalTable {
    let ni = counts.len();
    let nm = counts.first().map_or(0, Vec::len);
    let prep_totals: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
    let outcome_totals: Vec<u64> = (0..nm)
        .map(|m| counts.iter().map(|row| row[m]).sum())
        .collect();
    let n = total as f64;
    let joint: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / n).collect())
        .collect();
    let prep_marginals: Vec<f64> = prep_totals.iter().map(|&c| c as f64 / n).collect();
    let outcome_marginals: Vec<f64> = outcome_totals.iter().map(|&c| c as f64 / n).collect();

    let rate = |count: u64, base: u64| -> Option<(f64, f64)> {
        (base > 0).then(|| {
            let p = count as f64 / base as f64;
            (p, (p * (1.0 - p) / base as f64).sqrt())
        })
    };

    let mut predictive = vec![vec![None; nm]; ni];
    let mut predictive_se = vec![vec![None; nm]; ni];
    let mut retrodictive = vec![vec![None; nm]; ni];
    let mut retrodictive_se = vec![vec![None; nm]; ni];
    for i in 0..ni {
        for m in 0..nm {
            if let Some((p, se)) = rate(counts[i][m], prep_totals[i]) {
                predictive[i][m] = Some(p);
                predictive_se[i][m] = Some(se);
            }
            if let Some((p, se)) = rate(counts[i][m], outcome_totals[m]) {
                retrodictive[i][m] = Some(p);
                retrodictive_se[i][m] = Some(se);
            }
        }
    }

    EmpiricalTable {
        prep_labels,
        outcome_labels,
        counts,
        total,
        prep_totals,
        outcome_totals,
        joint,
        prep_marginals,
        outcome_marginals,
        predictive,
        predictive_se,
        retrodictive,
        retrodictive_se,
    }
}

/// Single-uniform Bernoulli draw: true with probability `p`.
fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// Samples one triad run: Claire's outcome from the Born rule on the
/// prepared state, ideal projective update to the corresponding
/// eigenstate, then Bob's outcome from the Born rule on that eigenstate.
pub fn sample_triad(s: &SpinTriadScenario, rng: &mut ChaCha8Rng) -> RunRecord {
    let prep = s.prep_ket();
    let p_aligned = s.claire_ket().inner(&prep).norm_sqr();
    let claire = if bernoulli(rng, p_aligned) { 0 } else { 1 };
    let claire_state = if claire == 0 {
        s.claire_ket()
    } else {
        s.claire_perp_ket()
    };
    let p_bob_aligned = s.meas_ket().inner(&claire_state).norm_sqr();
    let bob = if bernoulli(rng, p_bob_aligned) { 0 } else { 1 };
    RunRecord {
        prep_index: 0,
        intermediate_outcome: Some(claire),
        final_outcome: bob,
    }
}

/// Counts from repeated triad runs, indexed `[claire][bob]` with 0 the
/// aligned outcome on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TriadEstimate {
    pub counts: [[u64; 2]; 2],
    pub total: u64,
}

impl TriadEstimate {
    /// Frequency of Claire's aligned outcome among runs with Bob's
    /// outcome `bob`, with its binomial standard error.
    pub fn claire_given_bob(&self, bob: usize) -> Option<(f64, f64)> {
        let base = self.counts[0][bob] + self.counts[1][bob];
        (base > 0).then(|| {
            let p = self.counts[0][bob] as f64 / base as f64;
            (p, (p * (1.0 - p) / base as f64).sqrt())
        })
    }

    /// Unconditioned frequency of Claire's aligned outcome.
    pub fn claire_marginal(&self) -> (f64, f64) {
        let aligned = self.counts[0][0] + self.counts[0][1];
        let p = aligned as f64 / self.total as f64;
        (p, (p * (1.0 - p) / self.total as f64).sqrt())
    }
}

/// Repeated triad sampling with per-run substreams.
pub fn estimate_triad(s: &SpinTriadScenario, n_samples: u64, seed: u64) -> TriadEstimate {
    assert!(n_samples >= 1, "need at least one sample");
    // The chain only needs three Born probabilities; precompute them.
    let prep = s.prep_ket();
    let p_claire = s.claire_ket().inner(&prep).norm_sqr();
    let p_bob_given_aligned = s.meas_ket().inner(&s.claire_ket()).norm_sqr();
    let p_bob_given_anti = s.meas_ket().inner(&s.claire_perp_ket()).norm_sqr();

    let counts = (0..n_samples)
        .into_par_iter()
        .fold(
            || [[0u64; 2]; 2],
            |mut acc, run| {
                let mut rng = substream_rng(seed, run);
                let claire = if bernoulli(&mut rng, p_claire) { 0 } else { 1 };
                let p_bob = if claire == 0 {
                    p_bob_given_aligned
                } else {
                    p_bob_given_anti
                };
                let bob = if bernoulli(&mut rng, p_bob) { 0 } else { 1 };
                acc[claire][bob] += 1;
                acc
            },
        )
        .reduce(
            || [[0u64; 2]; 2],
            |mut a, b| {
                for (row_a, row_b) in a.iter_mut().zip(&b) {
                    for (cell_a, cell_b) in row_a.iter_mut().zip(row_b) {
                        *cell_a += cell_b;
                    }
                }
                a
            },
        );

    TriadEstimate {
        counts,
        total: n_samples,
    }
}
