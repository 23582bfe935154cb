//! Transient / null recurrent / positive recurrent classification.

use serde::Serialize;

use crate::series::ProductSeries;
use crate::walk::{Sign, WalkParams, WalkSpec};

/// Difference of `log(1 + Σ)` between `n_max/2` and `n_max` below which the
/// diagnostic calls the series convergent.
const CONVERGENCE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Transient,
    NullRecurrent,
    PositiveRecurrent,
}

impl Label {
    pub fn is_recurrent(self) -> bool {
        !matches!(self, Label::Transient)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Transient => "transient",
            Label::NullRecurrent => "null_recurrent",
            Label::PositiveRecurrent => "positive_recurrent",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a label was assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Justification {
    /// Directly from the recurrence criterion of the family.
    Criterion,
    /// Null (rather than positive) recurrence deduced from the adjoint chain:
    /// a chain is positive recurrent iff its adjoint is transient, and null
    /// recurrent iff its adjoint is.
    Adjoint,
    /// From the numeric partial sums.
    SeriesTest,
}

impl Justification {
    pub fn as_str(self) -> &'static str {
        match self {
            Justification::Criterion => "criterion",
            Justification::Adjoint => "adjoint",
            Justification::SeriesTest => "series_test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ApparentlyConvergent,
    ApparentlyDivergent,
}

/// Growth of the tabulated partial sums. Advisory only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesDiagnostic {
    /// `(n, log(1 + Σ_{j≤n} ρ_1⋯ρ_j))` at `n_max/4`, `n_max/2` and `n_max`.
    pub checkpoints: [(usize, f64); 3],
    /// Local power-law exponent of `Σ_{j≤n} ρ_1⋯ρ_j` between `n_max/2` and `n_max`.
    pub growth_exponent: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub label: Label,
    pub justification: Justification,
    pub series_diagnostic: Option<SeriesDiagnostic>,
}

/// Criterion-based label for a walk.
///
/// Boundary values of `B` (`±1`) are compared literally and belong to the
/// recurrent side.
pub fn classify(spec: &WalkSpec) -> Classification {
    use Justification::*;
    use Label::*;
    let (label, justification) = match spec.params() {
        WalkParams::Constant { p } => {
            let label = if p > 0.5 {
                Transient
            } else if p == 0.5 {
                NullRecurrent
            } else {
                PositiveRecurrent
            };
            (label, Criterion)
        }
        WalkParams::Perturbed { k: 1, b, sign } => {
            // minus sign with B behaves as plus sign with -B
            let b = if sign == Sign::Plus { b } else { -b };
            let label = if b > 1.0 {
                Transient
            } else if b >= -1.0 {
                NullRecurrent
            } else {
                PositiveRecurrent
            };
            (label, Criterion)
        }
        WalkParams::Perturbed { b, sign: Sign::Plus, .. } => {
            if b > 1.0 {
                (Transient, Criterion)
            } else {
                (NullRecurrent, Adjoint)
            }
        }
        WalkParams::Perturbed { b, sign: Sign::Minus, .. } => {
            if b > 1.0 {
                (PositiveRecurrent, Criterion)
            } else {
                (NullRecurrent, Criterion)
            }
        }
    };
    Classification { label, justification, series_diagnostic: None }
}

/// [`classify`] plus the numeric diagnostic of a tabulated series.
pub fn classify_with_series(series: &ProductSeries) -> Classification {
    Classification {
        series_diagnostic: Some(series_diagnostic(series)),
        ..classify(series.spec())
    }
}

/// Partial-sum growth at `n_max/4`, `n_max/2` and `n_max`.
///
/// Finite partial sums cannot separate slow divergence from convergence, so
/// this never overrides [`classify`].
pub fn series_diagnostic(series: &ProductSeries) -> SeriesDiagnostic {
    let n = series.n_max();
    let at = |m: usize| (m, series.log_prefix_sums()[m]);
    let checkpoints = [at((n / 4).max(1)), at((n / 2).max(1)), at(n)];
    let (n_half, l_half) = checkpoints[1];
    let (_, l_full) = checkpoints[2];
    // log Σ = log(e^L - 1)
    let log_sum = |l: f64| l + (-(-l).exp_m1()).ln();
    let growth_exponent = if n_half < n {
        (log_sum(l_full) - log_sum(l_half)) / (n as f64 / n_half as f64).ln()
    } else {
        0.0
    };
    let verdict = if l_full - l_half < CONVERGENCE_GAP {
        Verdict::ApparentlyConvergent
    } else {
        Verdict::ApparentlyDivergent
    };
    SeriesDiagnostic { checkpoints, growth_exponent, verdict }
}
