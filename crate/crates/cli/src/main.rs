//! Command-line front end: loads scenario documents, runs the inference,
//! dynamics, FSB, and Monte-Carlo pipelines, and emits machine-readable
//! reports (JSON or CSV) plus a one-line summary on stderr.
//!
//! Exit codes: 0 success, 1 internal numerical-consistency failure,
//! 2 user/input error.

mod report;

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use report::{
    digest_bytes, round_empirical_table, round_probability_table, sig12, triad_mc_section,
    DynamicsSection, ForwardBackwardPair, FsbSection, RunReport, TriadSection,
};
use retrodict_core::inference::{self, InferenceError};
use retrodict_core::linalg::{self, ComplexMatrix};
use retrodict_core::scenario::{self, ScenarioFile};
use retrodict_core::state::{PreparationEnsemble, Povm, StateVector};
use retrodict_core::{dynamics, fsb, mc};

#[derive(Parser)]
#[command(
    name = "retrodict",
    version,
    about = "Predictive and retrodictive inference for finite-dimensional quantum scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Joint, marginal, predictive, and retrodictive tables for a scenario.
    Infer {
        /// Scenario document (JSON).
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Also run the Monte-Carlo oracle; N overrides the scenario's
        /// sample count (plain `--mc` uses the scenario's, or 1e6).
        #[arg(long, num_args = 0..=1, default_missing_value = "0")]
        mc: Option<u64>,
        /// Seed for the Monte-Carlo oracle (default: scenario's, else 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The three-party spin scenario: preparation, tilted intermediate
    /// measurement, postselected final measurement.
    SpinTriad {
        /// Polar angle of the intermediate measurement (radians).
        #[arg(long)]
        theta: f64,
        /// Azimuthal angle (radians); 0 keeps the x-z plane.
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        /// Sample the triple-measurement chain N times.
        #[arg(long)]
        mc: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetrized (square-root-transformed) retrodictive decomposition
    /// with the preparation-dependence report.
    Fsb {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Amplitude-invariance certificate and the forward/backward
    /// probability pair under the scenario Hamiltonian.
    Dynamics {
        scenario: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        /// Number of interior times sampled for the invariance check.
        #[arg(long, default_value_t = 50)]
        samples: u64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario document.
    Validate { scenario: PathBuf },
}

enum Failure {
    User(String),
    Internal(String),
}

fn user(e: impl Display) -> Failure {
    Failure::User(e.to_string())
}

fn internal(e: impl Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn inference_failure(e: InferenceError) -> Failure {
    match e {
        InferenceError::InternalConsistency { .. } => internal(e),
        other => user(other),
    }
}

fn fsb_failure(e: fsb::FsbError) -> Failure {
    match e {
        fsb::FsbError::InternalConsistency { .. } | fsb::FsbError::Linalg(_) => internal(e),
        other => user(other),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(message)) => {
            eprintln!("internal error: {message}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<(ScenarioFile, String), Failure> {
    let bytes =
        fs::read(path).map_err(|e| user(format!("cannot read {}: {e}", path.display())))?;
    let digest = digest_bytes(&bytes);
    let source = String::from_utf8(bytes)
        .map_err(|_| user(format!("{} is not valid UTF-8", path.display())))?;
    let scenario = scenario::load_scenario(&source).map_err(user)?;
    Ok((scenario, digest))
}

fn emit(report: &RunReport, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let rendered = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match out {
        Some(path) => fs::write(path, rendered)
            .map_err(|e| user(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Infer {
            scenario,
            format,
            mc: mc_flag,
            seed,
            out,
        } => cmd_infer(&scenario, format, mc_flag, seed, out.as_deref()),
        Command::SpinTriad {
            theta,
            phi,
            mc: mc_flag,
            seed,
            format,
            out,
        } => cmd_spin_triad(theta, phi, mc_flag, seed, format, out.as_deref()),
        Command::Fsb {
            scenario,
            format,
            out,
        } => cmd_fsb(&scenario, format, out.as_deref()),
        Command::Dynamics {
            scenario,
            t0,
            t1,
            samples,
            format,
            out,
        } => cmd_dynamics(&scenario, t0, t1, samples, format, out.as_deref()),
        Command::Validate { scenario } => cmd_validate(&scenario),
    }
}

fn cmd_infer(
    path: &Path,
    format: Format,
    mc_flag: Option<u64>,
    seed_flag: Option<u64>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (scenario, digest) = load(path)?;
    let table = inference::quantum_table(&scenario.ensemble, &scenario.povm)
        .map_err(inference_failure)?;
    let residual = inference::bayes_residual(&table);

    let mut report = RunReport::new("infer", digest);
    report.analytic = Some(round_probability_table(&table));
    report.bayes_residual = Some(sig12(residual));

    if let Some(bias) = &scenario.postselection_bias {
        let biased =
            inference::biased_postselection_predictive(&scenario.ensemble, &scenario.povm, bias)
                .map_err(inference_failure)?;
        report.biased_postselection_predictive = Some(
            biased
                .iter()
                .map(|row| row.iter().copied().map(sig12).collect())
                .collect(),
        );
    }

    let mut empirical_note = String::new();
    if let Some(requested) = mc_flag {
        let samples = if requested > 0 {
            requested
        } else {
            scenario.mc.map(|m| m.samples).unwrap_or(1_000_000)
        };
        let seed = seed_flag.or(scenario.mc.map(|m| m.seed)).unwrap_or(0);
        let empirical = mc::estimate(&scenario.ensemble, &scenario.povm, samples, seed);
        empirical_note = format!(", mc {samples} samples (seed {seed})");
        report.empirical = Some(round_empirical_table(&empirical));
    }

    eprintln!(
        "infer: {} preparations x {} outcomes, bayes residual {:.3e}{empirical_note}",
        table.n_preps(),
        table.n_outcomes(),
        residual
    );
    emit(&report, format, out)
}

fn cmd_spin_triad(
    theta: f64,
    phi: f64,
    mc_flag: Option<u64>,
    seed_flag: Option<u64>,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(user("theta and phi must be finite"));
    }
    let triad = scenario::SpinTriadScenario::new(theta, phi);
    let alice = scenario::claire_alice_only(&triad);
    let bob = scenario::claire_bob_only(&triad);
    let both = scenario::claire_both(&triad).map_err(user)?;

    let digest = digest_bytes(format!("spin-triad?theta={theta:.17e}&phi={phi:.17e}").as_bytes());
    let mut report = RunReport::new("spin-triad", digest);
    let mut section = TriadSection {
        theta,
        phi,
        claire_alice_only: sig12(alice),
        claire_bob_only: sig12(bob),
        claire_both: sig12(both),
        empirical: None,
    };

    let mut empirical_note = String::new();
    if let Some(samples) = mc_flag {
        if samples == 0 {
            return Err(user("--mc needs at least 1 sample"));
        }
        let seed = seed_flag.unwrap_or(0);
        let estimate = mc::estimate_triad(&triad, samples, seed);
        if let Some((value, se)) = estimate.claire_given_bob(0) {
            empirical_note = format!(", mc {value:.6}+-{se:.6} ({samples} samples)");
        }
        section.empirical = Some(triad_mc_section(&estimate, samples, seed));
    }

    eprintln!(
        "spin-triad: theta={theta:.6}, claire_alice_only={alice:.9}, claire_bob_only={bob:.9}, claire_both={both:.9}{empirical_note}"
    );
    report.spin_triad = Some(section);
    emit(&report, format, out)
}

fn cmd_fsb(path: &Path, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let (scenario, digest) = load(path)?;
    let decomposition =
        fsb::fsb_decompose(&scenario.ensemble, &scenario.povm).map_err(fsb_failure)?;
    let dependence =
        fsb::outcome_dependence_report(&scenario.ensemble, &scenario.povm).map_err(fsb_failure)?;
    let reference =
        inference::retrodictive(&scenario.ensemble, &scenario.povm).map_err(inference_failure)?;

    let mut probabilities = vec![vec![0.0; scenario.povm.len()]; scenario.ensemble.len()];
    let mut residual: f64 = 0.0;
    for i in 0..scenario.ensemble.len() {
        for m in 0..scenario.povm.len() {
            let value = fsb::fsb_probability(&decomposition, i, m).map_err(fsb_failure)?;
            probabilities[i][m] = sig12(value);
            if let Some(expected) = reference[i][m] {
                residual = residual.max((value - expected).abs());
            }
        }
    }

    let rounded_dependence = fsb::OutcomeDependenceReport {
        outcome_labels: dependence.outcome_labels.clone(),
        fsb_distances: dependence
            .fsb_distances
            .iter()
            .map(|row| row.iter().copied().map(sig12).collect())
            .collect(),
        standard_distances: dependence
            .standard_distances
            .iter()
            .map(|row| row.iter().copied().map(sig12).collect())
            .collect(),
    };

    eprintln!(
        "fsb: equivalence residual {:.3e}, max FSB distance {:.6}, max standard distance {:.6}",
        residual,
        dependence.max_fsb_distance(),
        dependence.max_standard_distance()
    );

    let mut report = RunReport::new("fsb", digest);
    report.fsb = Some(FsbSection {
        retro_states: decomposition
            .retro_states()
            .iter()
            .map(|s| s.matrix().clone())
            .collect(),
        retro_povm: decomposition.retro_povm().to_vec(),
        support_projector: decomposition.support_projector().clone(),
        equivalence_residual: sig12(residual),
        probabilities,
        outcome_dependence: rounded_dependence,
    });
    emit(&report, format, out)
}

/// Unit eigenvector of the largest eigenvalue, when it carries any weight.
fn principal_vector(m: &ComplexMatrix) -> Option<StateVector> {
    let spectrum = linalg::eig_hermitian(m).ok()?;
    let d = spectrum.eigenvalues.len();
    if spectrum.eigenvalues[d - 1] <= 1e-12 {
        return None;
    }
    StateVector::new((0..d).map(|r| spectrum.eigenvectors.get(r, d - 1)).collect()).ok()
}

/// The scenario's preparations as kets, when they form an equal-prior
/// orthonormal pure basis.
fn pure_equal_prior_basis(ensemble: &PreparationEnsemble) -> Option<Vec<StateVector>> {
    let dim = ensemble.dim();
    if ensemble.len() != dim {
        return None;
    }
    let mut kets = Vec::with_capacity(dim);
    for (prior, state) in ensemble.members() {
        if (prior - 1.0 / dim as f64).abs() > 1e-10 || (state.purity() - 1.0).abs() > 1e-10 {
            return None;
        }
        kets.push(principal_vector(state.matrix())?);
    }
    for i in 0..dim {
        for j in 0..i {
            if kets[i].inner(&kets[j]).norm() > 1e-10 {
                return None;
            }
        }
    }
    Some(kets)
}

/// The POVM's outcomes as kets, when every element is a rank-1 projector.
fn projective_kets(povm: &Povm) -> Option<Vec<StateVector>> {
    povm.elements()
        .iter()
        .map(|element| {
            let trace = element.trace().re;
            let square_trace = linalg::trace_product(element, element).ok()?.re;
            if (trace - 1.0).abs() > 1e-10 || (square_trace - 1.0).abs() > 1e-10 {
                return None;
            }
            principal_vector(element)
        })
        .collect()
}

fn cmd_dynamics(
    path: &Path,
    t0: f64,
    t1: f64,
    samples: u64,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (scenario, digest) = load(path)?;
    let hamiltonian = scenario
        .hamiltonian
        .as_ref()
        .ok_or_else(|| user("scenario has no hamiltonian; dynamics needs one"))?;
    if !t0.is_finite() || !t1.is_finite() || t1 < t0 {
        return Err(user(format!("t1 ({t1}) must not precede t0 ({t0})")));
    }
    if samples == 0 {
        return Err(user("--samples must be at least 1"));
    }

    // Pure representatives: principal eigenvectors of each preparation
    // and of each POVM element that can fire.
    let prep_vectors: Vec<StateVector> = scenario
        .ensemble
        .members()
        .iter()
        .filter_map(|(_, state)| principal_vector(state.matrix()))
        .collect();
    let outcome_vectors: Vec<StateVector> = scenario
        .povm
        .elements()
        .iter()
        .filter_map(principal_vector)
        .collect();
    if prep_vectors.is_empty() || outcome_vectors.is_empty() {
        return Err(user("scenario has no usable preparation/outcome states"));
    }

    let mut deviation: f64 = 0.0;
    for i_state in &prep_vectors {
        for m_state in &outcome_vectors {
            let reference =
                dynamics::transition_amplitude(i_state, m_state, hamiltonian, t0, t1, t0)
                    .map_err(user)?;
            for k in 0..samples {
                let t = t0 + (t1 - t0) * (k as f64 + 0.5) / samples as f64;
                let c = dynamics::transition_amplitude(i_state, m_state, hamiltonian, t0, t1, t)
                    .map_err(user)?;
                deviation = deviation.max((c - reference).norm());
            }
        }
    }

    // Forward/backward pair: defined when the preparations form an
    // equal-prior orthonormal basis and the measurement is projective.
    let forward_backward = match (
        pure_equal_prior_basis(&scenario.ensemble),
        projective_kets(&scenario.povm),
    ) {
        (Some(basis), Some(meas_kets)) => {
            let mut pairs = Vec::new();
            for (i, _) in basis.iter().enumerate() {
                for (m, meas) in meas_kets.iter().enumerate() {
                    let forward = dynamics::predictive_outcome_probability(
                        scenario.ensemble.state(i),
                        hamiltonian,
                        t0,
                        t1,
                        &scenario.povm,
                        m,
                    )
                    .map_err(user)?;
                    let backward = dynamics::retrodictive_preparation_probability(
                        meas,
                        hamiltonian,
                        t0,
                        t1,
                        &basis,
                        i,
                    )
                    .map_err(user)?;
                    pairs.push(ForwardBackwardPair {
                        prep_label: scenario.ensemble.labels()[i].clone(),
                        outcome_label: scenario.povm.labels()[m].clone(),
                        forward: sig12(forward),
                        backward: sig12(backward),
                    });
                }
            }
            Some(pairs)
        }
        _ => None,
    };

    eprintln!(
        "dynamics: max amplitude deviation {:.3e} over {} interior times{}",
        deviation,
        samples,
        if forward_backward.is_some() {
            ", forward/backward pair included"
        } else {
            ""
        }
    );

    let mut report = RunReport::new("dynamics", digest);
    report.dynamics = Some(DynamicsSection {
        t0,
        t1,
        interior_samples: samples,
        max_amplitude_deviation: sig12(deviation),
        forward_backward,
    });
    emit(&report, format, out)
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let (scenario, digest) = load(path)?;
    println!(
        "OK: dimension {}, {} preparations, {} outcomes{}{}, digest {digest}",
        scenario.dimension,
        scenario.ensemble.len(),
        scenario.povm.len(),
        if scenario.hamiltonian.is_some() {
            ", hamiltonian"
        } else {
            ""
        },
        if scenario.postselection_bias.is_some() {
            ", postselection bias"
        } else {
            ""
        },
    );
    Ok(())
}
