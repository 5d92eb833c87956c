//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them all).

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64 as C64;

use retrodict_core::linalg::{self, ComplexMatrix};
use retrodict_core::state::{
    projective_povm, retrodictive_state, Povm, PostselectionBias, PreparationEnsemble, StateVector,
};
use retrodict_core::{dynamics, fsb, inference, mc, scenario};

fn report(number: u32, name: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("acceptance {number} ({name}): {verdict} [{detail}]");
    assert!(ok, "acceptance {number} ({name}) failed: {detail}");
}

fn load_fixture(name: &str) -> scenario::ScenarioFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    let source = fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"));
    scenario::load_scenario(&source).unwrap_or_else(|e| panic!("loading {name}: {e}"))
}

fn ket_up() -> StateVector {
    StateVector::basis_state(2, 0)
}

fn ket_right() -> StateVector {
    let s = 1.0 / 2f64.sqrt();
    StateVector::new(vec![C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap()
}

fn ket_left() -> StateVector {
    let s = 1.0 / 2f64.sqrt();
    StateVector::new(vec![C64::new(s, 0.0), C64::new(-s, 0.0)]).unwrap()
}

fn x_basis() -> Povm {
    projective_povm(&[ket_right(), ket_left()]).unwrap()
}

#[test]
fn criterion_01_bayes_consistency() {
    let start = Instant::now();
    let mut rng = common::rng(0xB41E5);
    let mut worst: f64 = 0.0;
    let mut scenarios = 0u32;
    for trial in 0..120 {
        let dim = 2 + (trial % 3);
        let members = 2 + (trial % 4);
        let outcomes = 2 + (trial % 3);
        let ensemble = common::random_ensemble(dim, members, &mut rng);
        let povm = common::random_povm(dim, outcomes, &mut rng);
        let table = inference::quantum_table(&ensemble, &povm).unwrap();
        worst = worst.max(inference::bayes_residual(&table));
        scenarios += 1;
    }
    let elapsed = start.elapsed();
    let ok = worst < 1e-10 && elapsed.as_secs_f64() < 5.0;
    report(
        1,
        "Bayes consistency",
        ok,
        &format!("max residual {worst:.3e} over {scenarios} scenarios in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_unbiased_reduction() {
    let mut rng = common::rng(0x23_0B1A5);
    let mut worst: f64 = 0.0;
    for trial in 0..40 {
        let dim = 2 + (trial % 3);
        let prep_basis = common::random_basis(dim, &mut rng);
        let meas_basis = common::random_basis(dim, &mut rng);
        let ensemble = PreparationEnsemble::new(
            prep_basis
                .iter()
                .map(|phi| (1.0 / dim as f64, phi.density()))
                .collect(),
        )
        .unwrap();
        let povm = projective_povm(&meas_basis).unwrap();
        let posterior = inference::retrodictive(&ensemble, &povm).unwrap();
        for (i, phi) in prep_basis.iter().enumerate() {
            for (m, meas) in meas_basis.iter().enumerate() {
                let born = meas.inner(phi).norm_sqr();
                let got = posterior[i][m].expect("projective outcomes all possible");
                worst = worst.max((got - born).abs());
            }
        }
    }
    report(
        2,
        "unbiased reduction to Born form",
        worst < 1e-12,
        &format!("max |posterior - overlap| = {worst:.3e}"),
    );
}

// Independent brute-force route for the triad conditional: scalar
// trigonometry only, no shared code with the scenario module.
fn brute_force_claire_both(theta: f64) -> f64 {
    let to_theta = (theta / 2.0).cos().powi(2);
    let to_perp = (theta / 2.0).sin().powi(2);
    let theta_to_right = (1.0 + theta.sin()) / 2.0;
    let perp_to_right = (1.0 - theta.sin()) / 2.0;
    theta_to_right * to_theta / (theta_to_right * to_theta + perp_to_right * to_perp)
}

#[test]
fn criterion_03_spin_triad() {
    let start = Instant::now();
    let at_zero = scenario::claire_both(&scenario::SpinTriadScenario::new(0.0, 0.0)).unwrap();
    let at_quarter_turn =
        scenario::claire_both(&scenario::SpinTriadScenario::new(FRAC_PI_2, 0.0)).unwrap();
    let at_eighth_turn =
        scenario::claire_both(&scenario::SpinTriadScenario::new(FRAC_PI_4, 0.0)).unwrap();

    // Frozen before the build from an independent symbolic evaluation:
    // (3 + 2 sqrt 2)/6.
    let frozen = 0.971_404_520_791_031_7;
    let analytic_ok = (at_zero - 1.0).abs() < 1e-12
        && (at_quarter_turn - 1.0).abs() < 1e-12
        && (at_eighth_turn - frozen).abs() < 1e-12
        && (at_eighth_turn - brute_force_claire_both(FRAC_PI_4)).abs() < 1e-12;

    let estimate = mc::estimate_triad(&scenario::SpinTriadScenario::new(FRAC_PI_4, 0.0), 1_000_000, 20260613);
    let (frequency, se) = estimate.claire_given_bob(0).expect("postselection not empty");
    let mc_ok = (frequency - at_eighth_turn).abs() <= 5.0 * se;

    let elapsed = start.elapsed();
    let ok = analytic_ok && mc_ok && elapsed.as_secs_f64() < 10.0;
    report(
        3,
        "spin triad",
        ok,
        &format!(
            "claire_both(0)={at_zero:.12}, (pi/2)={at_quarter_turn:.12}, (pi/4)={at_eighth_turn:.15} vs frozen {frozen:.15}, mc {frequency:.6}+-{se:.6} in {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_04_amplitude_invariance() {
    let mut rng = common::rng(0xA111);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let dim = 2 + (trial % 3);
        let h = common::random_hermitian(dim, &mut rng).scale(3.0);
        let i_state = common::random_ket(dim, &mut rng);
        let m_state = common::random_ket(dim, &mut rng);
        let t0 = -1.3;
        let t1 = 2.1;
        let reference =
            dynamics::transition_amplitude(&i_state, &m_state, &h, t0, t1, t0).unwrap();
        for k in 0..50 {
            let t = t0 + (t1 - t0) * (k as f64 + 0.5) / 50.0;
            let c = dynamics::transition_amplitude(&i_state, &m_state, &h, t0, t1, t).unwrap();
            worst = worst.max((c - reference).norm());
        }
    }
    report(
        4,
        "amplitude invariance",
        worst < 1e-9,
        &format!("max |c(t) - c(t0)| = {worst:.3e} over 100 draws x 50 times"),
    );
}

#[test]
fn criterion_05_forward_backward_equality() {
    let mut rng = common::rng(0x5B5B);
    let mut worst: f64 = 0.0;
    for trial in 0..30 {
        let dim = 2 + (trial % 3);
        let h = common::random_hermitian(dim, &mut rng).scale(2.0);
        let prep_basis = common::random_basis(dim, &mut rng);
        let meas_basis = common::random_basis(dim, &mut rng);
        let povm = projective_povm(&meas_basis).unwrap();
        let (t0, t1) = (0.4, 1.9);
        for (i, prep) in prep_basis.iter().enumerate() {
            for (m, meas) in meas_basis.iter().enumerate() {
                let forward = dynamics::predictive_outcome_probability(
                    &prep.density(),
                    &h,
                    t0,
                    t1,
                    &povm,
                    m,
                )
                .unwrap();
                let backward = dynamics::retrodictive_preparation_probability(
                    meas,
                    &h,
                    t0,
                    t1,
                    &prep_basis,
                    i,
                )
                .unwrap();
                worst = worst.max((forward - backward).abs());
            }
        }
    }
    report(
        5,
        "forward/backward equality",
        worst < 1e-12,
        &format!("max |P(m|i) - P(i|m)| = {worst:.3e}"),
    );
}

#[test]
fn criterion_06_fsb_equivalence() {
    let mut rng = common::rng(0xF5B);
    let mut worst: f64 = 0.0;
    let mut scenarios = 0u32;
    for trial in 0..110 {
        let dim = 2 + (trial % 3);
        let members = 2 + (trial % 3);
        let outcomes = 2 + (trial % 3);
        let ensemble = common::random_ensemble(dim, members, &mut rng);
        let povm = common::random_povm(dim, outcomes, &mut rng);
        let decomposition = fsb::fsb_decompose(&ensemble, &povm).unwrap();
        let reference = inference::retrodictive(&ensemble, &povm).unwrap();
        for (i, row) in reference.iter().enumerate() {
            for (m, cell) in row.iter().enumerate() {
                if let Some(expected) = cell {
                    let got = fsb::fsb_probability(&decomposition, i, m).unwrap();
                    worst = worst.max((got - expected).abs());
                }
            }
        }
        scenarios += 1;
    }
    report(
        6,
        "FSB probability equivalence",
        worst < 1e-10,
        &format!("max deviation {worst:.3e} over {scenarios} full-rank scenarios"),
    );
}

#[test]
fn criterion_07_fsb_pathology() {
    let ensemble = PreparationEnsemble::new(vec![(1.0, ket_up().density())]).unwrap();
    let povm = x_basis();
    let decomposition = fsb::fsb_decompose(&ensemble, &povm).unwrap();

    let up = ket_up().projector();
    let state_dev = decomposition
        .retro_state(0)
        .matrix()
        .max_abs_diff(&up)
        .max(decomposition.retro_state(1).matrix().max_abs_diff(&up));
    let fsb_distance = linalg::trace_distance(
        decomposition.retro_state(0).matrix(),
        decomposition.retro_state(1).matrix(),
    )
    .unwrap();

    let standard_right = retrodictive_state(&povm, 0).unwrap();
    let standard_left = retrodictive_state(&povm, 1).unwrap();
    let standard_distance =
        linalg::trace_distance(standard_right.matrix(), standard_left.matrix()).unwrap();
    let standard_dev = standard_right
        .matrix()
        .max_abs_diff(&ket_right().projector())
        .max(standard_left.matrix().max_abs_diff(&ket_left().projector()));

    let ok = state_dev < 1e-12
        && fsb_distance < 1e-10
        && standard_dev < 1e-12
        && (standard_distance - 1.0).abs() < 1e-12;
    report(
        7,
        "FSB preparation-dependence pathology",
        ok,
        &format!(
            "FSB states match |up><up| to {state_dev:.3e}, FSB distance {fsb_distance:.3e}, standard distance {standard_distance:.12}"
        ),
    );
}

#[test]
fn criterion_08_retrodictive_state_recovery() {
    let mut rng = common::rng(0x8E7);
    let mut worst: f64 = 0.0;
    for trial in 0..25 {
        let dim = 2 + (trial % 3);
        let basis = common::random_basis(dim, &mut rng);
        let povm = projective_povm(&basis).unwrap();
        for (m, vector) in basis.iter().enumerate() {
            let retro = retrodictive_state(&povm, m).unwrap();
            worst = worst.max(retro.matrix().max_abs_diff(&vector.projector()));
        }
    }
    // Canonical case from the communication scenario.
    let retro = retrodictive_state(&x_basis(), 0).unwrap();
    worst = worst.max(retro.matrix().max_abs_diff(&ket_right().projector()));
    report(
        8,
        "retrodictive state recovery",
        worst < 1e-12,
        &format!("max |retro - projector| = {worst:.3e}"),
    );
}

#[test]
fn criterion_09_monte_carlo_agreement() {
    let start = Instant::now();
    let names = [
        "unbiased-qubit.json",
        "biased-qubit.json",
        "singleton-up.json",
        "qutrit-fourier.json",
    ];
    let mut worst_pull: f64 = 0.0;
    for name in names {
        let s = load_fixture(name);
        let mc_settings = s.mc.expect("bundled scenarios carry mc settings");
        let empirical = mc::estimate(&s.ensemble, &s.povm, mc_settings.samples, mc_settings.seed);
        let analytic = inference::quantum_table(&s.ensemble, &s.povm).unwrap();

        for i in 0..analytic.n_preps() {
            for m in 0..analytic.n_outcomes() {
                for (kind, analytic_cell, empirical_cell, se_cell) in [
                    (
                        "predictive",
                        analytic.predictive[i][m],
                        empirical.predictive[i][m],
                        empirical.predictive_se[i][m],
                    ),
                    (
                        "retrodictive",
                        analytic.retrodictive[i][m],
                        empirical.retrodictive[i][m],
                        empirical.retrodictive_se[i][m],
                    ),
                ] {
                    if let Some(expected) = analytic_cell {
                        let observed = empirical_cell.unwrap_or_else(|| {
                            panic!("{name}: {kind} ({i},{m}) defined analytically but unobserved")
                        });
                        let se = se_cell.unwrap();
                        let deviation = (observed - expected).abs();
                        assert!(
                            deviation <= 5.0 * se,
                            "{name}: {kind} ({i},{m}) off by {deviation:.2e} > 5 x {se:.2e}"
                        );
                        if se > 0.0 {
                            worst_pull = worst_pull.max(deviation / se);
                        }
                    }
                }
            }
        }

        // Same seed reproduces the whole table bit for bit.
        let again = mc::estimate(&s.ensemble, &s.povm, mc_settings.samples, mc_settings.seed);
        assert_eq!(empirical, again, "{name}: seed {0} not reproducible", mc_settings.seed);
    }

    // Undefined analytic conditionals correspond to empty count cells.
    let biased = load_fixture("biased-qubit.json");
    let id = ComplexMatrix::identity(2);
    let zero = ComplexMatrix::zeros(2);
    let degenerate = Povm::new(vec![id, zero]).unwrap();
    let analytic = inference::retrodictive(&biased.ensemble, &degenerate).unwrap();
    let empirical = mc::estimate(&biased.ensemble, &degenerate, 50_000, 31);
    assert_eq!(analytic[0][1], None);
    assert_eq!(empirical.outcome_totals[1], 0);
    assert_eq!(empirical.retrodictive[0][1], None);

    let elapsed = start.elapsed();
    let ok = elapsed.as_secs_f64() < 60.0;
    report(
        9,
        "Monte-Carlo agreement",
        ok,
        &format!("worst pull {worst_pull:.2} sigma across 4 scenarios in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_10_biased_postselection() {
    let mut rng = common::rng(0x10AD);
    let mut worst_uniform: f64 = 0.0;
    let mut worst_forced: f64 = 0.0;
    for trial in 0..30 {
        let dim = 2 + (trial % 3);
        let members = 2 + (trial % 3);
        let outcomes = 2 + (trial % 3);
        let ensemble = common::random_ensemble(dim, members, &mut rng);
        let povm = common::random_povm(dim, outcomes, &mut rng);

        let uniform = PostselectionBias::uniform(outcomes);
        let biased =
            inference::biased_postselection_predictive(&ensemble, &povm, &uniform).unwrap();
        let plain = inference::predictive(&ensemble, &povm).unwrap();
        for i in 0..members {
            for m in 0..outcomes {
                worst_uniform = worst_uniform.max((biased[i][m] - plain[i][m]).abs());
            }
        }

        // Keep only outcome 0 (always possible for these full-rank
        // scenarios): every row collapses to [1, 0, ...].
        let mut weights = vec![0.0; outcomes];
        weights[0] = 1.0;
        let forced = inference::biased_postselection_predictive(
            &ensemble,
            &povm,
            &PostselectionBias::new(weights).unwrap(),
        )
        .unwrap();
        for row in &forced {
            worst_forced = worst_forced.max((row[0] - 1.0).abs());
            for &cell in &row[1..] {
                worst_forced = worst_forced.max(cell.abs());
            }
        }
    }
    let ok = worst_uniform < 1e-12 && worst_forced < 1e-12;
    report(
        10,
        "biased postselection",
        ok,
        &format!("uniform-bias deviation {worst_uniform:.3e}, forced-row deviation {worst_forced:.3e}"),
    );
}
