//! Report assembly and rendering.
//!
//! Every command produces a [`RunReport`]; the JSON layout is fixed per
//! tool version and the CSV flattening uses a fixed column order
//! (`section,table,row,col,value`). Probabilities are rounded to 12
//! significant digits in both formats; matrices (states, operators) are
//! emitted at full precision and only in JSON.

use serde::Serialize;
use sha2::{Digest, Sha256};

use retrodict_core::fsb::OutcomeDependenceReport;
use retrodict_core::inference::ProbabilityTable;
use retrodict_core::linalg::ComplexMatrix;
use retrodict_core::mc::{EmpiricalTable, TriadEstimate};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rounds to 12 significant digits for stable, diffable output.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("scientific round-trip")
}

fn round_matrix(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    m.iter()
        .map(|row| row.iter().copied().map(sig12).collect())
        .collect()
}

fn round_opt_matrix(m: &[Vec<Option<f64>>]) -> Vec<Vec<Option<f64>>> {
    m.iter()
        .map(|row| row.iter().map(|cell| cell.map(sig12)).collect())
        .collect()
}

fn round_vec(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(sig12).collect()
}

pub fn round_probability_table(t: &ProbabilityTable) -> ProbabilityTable {
    ProbabilityTable {
        prep_labels: t.prep_labels.clone(),
        outcome_labels: t.outcome_labels.clone(),
        joint: round_matrix(&t.joint),
        prep_marginals: round_vec(&t.prep_marginals),
        outcome_marginals: round_vec(&t.outcome_marginals),
        predictive: round_opt_matrix(&t.predictive),
        retrodictive: round_opt_matrix(&t.retrodictive),
    }
}

pub fn round_empirical_table(t: &EmpiricalTable) -> EmpiricalTable {
    let mut rounded = t.clone();
    rounded.joint = round_matrix(&t.joint);
    rounded.prep_marginals = round_vec(&t.prep_marginals);
    rounded.outcome_marginals = round_vec(&t.outcome_marginals);
    rounded.predictive = round_opt_matrix(&t.predictive);
    rounded.predictive_se = round_opt_matrix(&t.predictive_se);
    rounded.retrodictive = round_opt_matrix(&t.retrodictive);
    rounded.retrodictive_se = round_opt_matrix(&t.retrodictive_se);
    rounded
}

/// Content hash binding a report to its input document (or, for
/// parameter-driven commands, to a canonical parameter string).
pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct FsbSection {
    pub retro_states: Vec<ComplexMatrix>,
    pub retro_povm: Vec<ComplexMatrix>,
    pub support_projector: ComplexMatrix,
    /// Max |Tr(rho_m^ret pi_i^ret) - P(a_i|b_m)| over defined cells.
    pub equivalence_residual: f64,
    pub probabilities: Vec<Vec<f64>>,
    pub outcome_dependence: OutcomeDependenceReport,
}

#[derive(Debug, Serialize)]
pub struct ForwardBackwardPair {
    pub prep_label: String,
    pub outcome_label: String,
    pub forward: f64,
    pub backward: f64,
}

#[derive(Debug, Serialize)]
pub struct DynamicsSection {
    pub t0: f64,
    pub t1: f64,
    pub interior_samples: u64,
    pub max_amplitude_deviation: f64,
    /// Present only when the scenario is an equal-prior orthonormal pure
    /// ensemble measured projectively, the setting in which the
    /// backward-evolution probability is defined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forward_backward: Option<Vec<ForwardBackwardPair>>,
}

#[derive(Debug, Serialize)]
pub struct TriadMcSection {
    pub samples: u64,
    pub seed: u64,
    /// Joint counts indexed `[claire][bob]`, 0 = aligned.
    pub counts: [[u64; 2]; 2],
    pub claire_given_bob_aligned: Option<f64>,
    pub standard_error: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct TriadSection {
    pub theta: f64,
    pub phi: f64,
    pub claire_alice_only: f64,
    pub claire_bob_only: f64,
    pub claire_both: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<TriadMcSection>,
}

/// Top-level machine-readable report emitted by every subcommand.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool_version: String,
    pub command: String,
    pub scenario_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<ProbabilityTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bayes_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub biased_postselection_predictive: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fsb: Option<FsbSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin_triad: Option<TriadSection>,
}

impl RunReport {
    pub fn new(command: &str, scenario_digest: String) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            scenario_digest,
            analytic: None,
            bayes_residual: None,
            biased_postselection_predictive: None,
            empirical: None,
            fsb: None,
            dynamics: None,
            spin_triad: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    /// Fixed-order CSV flattening: `section,table,row,col,value`.
    /// Undefined conditionals leave the value field empty. Operator
    /// matrices are JSON-only.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<[String; 5]> = Vec::new();
        let mut push = |section: &str, table: &str, row: &str, col: &str, value: String| {
            rows.push([
                section.to_string(),
                table.to_string(),
                row.to_string(),
                col.to_string(),
                value,
            ]);
        };
        let fmt = |x: f64| format!("{:.11e}", x);
        let fmt_opt = |x: Option<f64>| x.map(fmt).unwrap_or_default();

        push("meta", "tool_version", "", "", self.tool_version.clone());
        push("meta", "command", "", "", self.command.clone());
        push(
            "meta",
            "scenario_digest",
            "",
            "",
            self.scenario_digest.clone(),
        );

        if let Some(t) = &self.analytic {
            for (i, row_label) in t.prep_labels.iter().enumerate() {
                push(
                    "analytic",
                    "prep_marginal",
                    row_label,
                    "",
                    fmt(t.prep_marginals[i]),
                );
            }
            for (m, col_label) in t.outcome_labels.iter().enumerate() {
                push(
                    "analytic",
                    "outcome_marginal",
                    "",
                    col_label,
                    fmt(t.outcome_marginals[m]),
                );
            }
            for (table, joint) in [("joint", &t.joint)] {
                for (i, row_label) in t.prep_labels.iter().enumerate() {
                    for (m, col_label) in t.outcome_labels.iter().enumerate() {
                        push("analytic", table, row_label, col_label, fmt(joint[i][m]));
                    }
                }
            }
            for (table, cells) in [("predictive", &t.predictive), ("retrodictive", &t.retrodictive)]
            {
                for (i, row_label) in t.prep_labels.iter().enumerate() {
                    for (m, col_label) in t.outcome_labels.iter().enumerate() {
                        push("analytic", table, row_label, col_label, fmt_opt(cells[i][m]));
                    }
                }
            }
        }
        if let Some(r) = self.bayes_residual {
            push("analytic", "bayes_residual", "", "", fmt(r));
        }
        if let (Some(b), Some(t)) = (&self.biased_postselection_predictive, &self.analytic) {
            for (i, row_label) in t.prep_labels.iter().enumerate() {
                for (m, col_label) in t.outcome_labels.iter().enumerate() {
                    push(
                        "analytic",
                        "biased_postselection_predictive",
                        row_label,
                        col_label,
                        fmt(b[i][m]),
                    );
                }
            }
        }

        if let Some(e) = &self.empirical {
            push("empirical", "total", "", "", e.total.to_string());
            for (i, row_label) in e.prep_labels.iter().enumerate() {
                for (m, col_label) in e.outcome_labels.iter().enumerate() {
                    push(
                        "empirical",
                        "count",
                        row_label,
                        col_label,
                        e.counts[i][m].to_string(),
                    );
                }
            }
            for (table, cells) in [
                ("predictive", &e.predictive),
                ("predictive_se", &e.predictive_se),
                ("retrodictive", &e.retrodictive),
                ("retrodictive_se", &e.retrodictive_se),
            ] {
                for (i, row_label) in e.prep_labels.iter().enumerate() {
                    for (m, col_label) in e.outcome_labels.iter().enumerate() {
                        push("empirical", table, row_label, col_label, fmt_opt(cells[i][m]));
                    }
                }
            }
        }

        if let Some(f) = &self.fsb {
            push(
                "fsb",
                "equivalence_residual",
                "",
                "",
                fmt(f.equivalence_residual),
            );
            let labels = &f.outcome_dependence.outcome_labels;
            for (m, row_label) in labels.iter().enumerate() {
                for (k, col_label) in labels.iter().enumerate() {
                    push(
                        "fsb",
                        "fsb_distance",
                        row_label,
                        col_label,
                        fmt(f.outcome_dependence.fsb_distances[m][k]),
                    );
                    push(
                        "fsb",
                        "standard_distance",
                        row_label,
                        col_label,
                        fmt(f.outcome_dependence.standard_distances[m][k]),
                    );
                }
            }
            for (i, row) in f.probabilities.iter().enumerate() {
                for (m, col_label) in labels.iter().enumerate() {
                    push(
                        "fsb",
                        "probability",
                        &format!("a{i}"),
                        col_label,
                        fmt(row[m]),
                    );
                }
            }
        }

        if let Some(d) = &self.dynamics {
            push("dynamics", "t0", "", "", fmt(d.t0));
            push("dynamics", "t1", "", "", fmt(d.t1));
            push(
                "dynamics",
                "interior_samples",
                "",
                "",
                d.interior_samples.to_string(),
            );
            push(
                "dynamics",
                "max_amplitude_deviation",
                "",
                "",
                fmt(d.max_amplitude_deviation),
            );
            if let Some(pairs) = &d.forward_backward {
                for pair in pairs {
                    push(
                        "dynamics",
                        "forward",
                        &pair.prep_label,
                        &pair.outcome_label,
                        fmt(pair.forward),
                    );
                    push(
                        "dynamics",
                        "backward",
                        &pair.prep_label,
                        &pair.outcome_label,
                        fmt(pair.backward),
                    );
                }
            }
        }

        if let Some(s) = &self.spin_triad {
            push("spin_triad", "theta", "", "", fmt(s.theta));
            push("spin_triad", "phi", "", "", fmt(s.phi));
            push(
                "spin_triad",
                "claire_alice_only",
                "",
                "",
                fmt(s.claire_alice_only),
            );
            push("spin_triad", "claire_bob_only", "", "", fmt(s.claire_bob_only));
            push("spin_triad", "claire_both", "", "", fmt(s.claire_both));
            if let Some(mc) = &s.empirical {
                push("spin_triad", "mc_samples", "", "", mc.samples.to_string());
                push("spin_triad", "mc_seed", "", "", mc.seed.to_string());
                for claire in 0..2 {
                    for bob in 0..2 {
                        push(
                            "spin_triad",
                            "mc_count",
                            &format!("claire{claire}"),
                            &format!("bob{bob}"),
                            mc.counts[claire][bob].to_string(),
                        );
                    }
                }
                push(
                    "spin_triad",
                    "mc_claire_given_bob_aligned",
                    "",
                    "",
                    fmt_opt(mc.claire_given_bob_aligned),
                );
                push(
                    "spin_triad",
                    "mc_standard_error",
                    "",
                    "",
                    fmt_opt(mc.standard_error),
                );
            }
        }

        let mut out = String::from("section,table,row,col,value\n");
        for row in rows {
            let escaped: Vec<String> = row.iter().map(|field| csv_field(field)).collect();
            out.push_str(&escaped.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_field(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Convenience for triad MC sections.
pub fn triad_mc_section(estimate: &TriadEstimate, samples: u64, seed: u64) -> TriadMcSection {
    let (value, se) = match estimate.claire_given_bob(0) {
        Some((p, se)) => (Some(sig12(p)), Some(sig12(se))),
        None => (None, None),
    };
    TriadMcSection {
        samples,
        seed,
        counts: estimate.counts,
        claire_given_bob_aligned: value,
        standard_error: se,
    }
}
