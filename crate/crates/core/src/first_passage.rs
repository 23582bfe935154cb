//! Hitting probabilities `P_k(a, b, -) = P(X hits a before b | X_0 = k)` and
//! the return probability `P(D < ∞ | X_0 = 1)`.

use serde::Serialize;

use crate::asymptotics::AsymptoticShape;
use crate::classify::classify;
use crate::error::{Error, Result};
use crate::numeric::{logaddexp, NeumaierSum};
use crate::series::ProductSeries;

/// Start `k` strictly between or on the barriers `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HittingQuery {
    a: usize,
    k: usize,
    b: usize,
}

impl HittingQuery {
    pub fn new(a: usize, k: usize, b: usize) -> Result<Self> {
        if !(a <= k && k <= b) {
            return Err(Error::Range(format!("need a <= k <= b, got a={a}, k={k}, b={b}")));
        }
        if a == b {
            return Err(Error::Range(format!("barriers coincide (a = b = {a})")));
        }
        Ok(Self { a, k, b })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn b(&self) -> usize {
        self.b
    }
}

/// Probability of hitting `a` before `b` from `k`:
///
/// `Σ_{j=k}^{b-1} ρ_{a+1}⋯ρ_j / (1 + Σ_{j=a+1}^{b-1} ρ_{a+1}⋯ρ_j)`.
///
/// Needs `ρ` tabulated up to `b - 1`.
pub fn hit_before(series: &ProductSeries, q: HittingQuery) -> Result<f64> {
    hitting_pair(series, q).map(|(lower, _)| lower)
}

/// Probability of hitting `b` before `a` from `k`, i.e. `1 - hit_before`,
/// summed directly so it keeps full relative accuracy when small:
///
/// `Σ_{j=a}^{k-1} ρ_{a+1}⋯ρ_j / Σ_{j=a}^{b-1} ρ_{a+1}⋯ρ_j`.
pub fn hit_after(series: &ProductSeries, q: HittingQuery) -> Result<f64> {
    hitting_pair(series, q).map(|(_, upper)| upper)
}

fn hitting_pair(series: &ProductSeries, q: HittingQuery) -> Result<(f64, f64)> {
    let HittingQuery { a, k, b } = q;
    if b - 1 > series.n_max() {
        return Err(Error::Range(format!(
            "barrier b = {b} needs the series up to {}, have {}",
            b - 1,
            series.n_max()
        )));
    }
    if k == a {
        return Ok((1.0, 0.0));
    }
    if k == b {
        return Ok((0.0, 1.0));
    }
    // log ρ_{a+1}⋯ρ_j for j = a..b-1 (j = a is the empty product)
    let lp = &series.log_products()[a..b];
    let base = lp[0];
    let shift = lp.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v - base));
    let sum = |terms: &[f64]| -> f64 {
        terms.iter().map(|&v| (v - base - shift).exp()).collect::<NeumaierSum>().value()
    };
    let below = sum(&lp[..k - a]);
    let above = sum(&lp[k - a..]);
    let total = below + above;
    Ok((above / total, below / total))
}

/// How [`return_prob`] truncates the infinite series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationOptions {
    /// Minimum number of tabulated terms for transient walks.
    pub min_terms: usize,
    /// Bracket width above which a warning is attached.
    pub tolerance: f64,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        Self { min_terms: 100_000, tolerance: 1e-6 }
    }
}

/// Where a [`ReturnProbability`]'s bracket came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    /// Recurrent walk: the series diverges and the value is exactly 1.
    Recurrent,
    /// Geometric tail bound, exact up to rounding.
    Geometric,
    /// Integral of the product shape with its constant fitted at the last
    /// tabulated term. A heuristic, not a rigorous bound.
    FittedShape,
}

/// Point estimate and bracket for `P(D < ∞ | X_0 = 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnProbability {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: TailMethod,
    pub terms: usize,
    /// Set when `upper - lower` exceeds the requested tolerance.
    pub warning: Option<String>,
}

impl ReturnProbability {
    pub fn is_exact(&self) -> bool {
        self.method == TailMethod::Recurrent
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn recurrent() -> Self {
        Self {
            value: 1.0,
            lower: 1.0,
            upper: 1.0,
            method: TailMethod::Recurrent,
            terms: 0,
            warning: None,
        }
    }
}

/// `P(D < ∞) = S/(1+S)` with `S = Σ_{j≥1} ρ_1⋯ρ_j` (1 when `S` diverges).
///
/// Recurrent walks return exactly 1. For transient walks the partial sum over
/// the tabulated range gives the lower bracket and partial sum plus tail
/// estimate gives the upper bracket, which is also the point estimate.
pub fn return_prob(series: &ProductSeries, opts: TruncationOptions) -> Result<ReturnProbability> {
    if classify(series.spec()).label.is_recurrent() {
        return Ok(ReturnProbability::recurrent());
    }
    let n = series.n_max();
    if n < opts.min_terms {
        return Err(Error::Range(format!(
            "series has {n} terms, at least {} required",
            opts.min_terms
        )));
    }
    let shape = AsymptoticShape::product(*series.spec())?;
    let log_sum = series.log_one_plus_sum(n)?;
    let last = series.log_product(n)?;
    let log_tail = shape
        .log_tail(n as u64)?
        .ok_or_else(|| Error::Domain(format!("no finite tail for {}", series.spec())))?;
    let method = if series.spec().is_constant() {
        TailMethod::Geometric
    } else {
        TailMethod::FittedShape
    };
    // constant fitted so that the shape matches ρ_1⋯ρ_n at the last term
    let log_tail = log_tail + last - shape.log_shape(n as u64)?;

    // S/(1+S) = 1 - 1/(1+S)
    let lower = -(-log_sum).exp_m1();
    let upper = -(-logaddexp(log_sum, log_tail)).exp_m1();
    let warning = (upper - lower > opts.tolerance).then(|| {
        format!(
            "bracket width {:e} exceeds tolerance {:e}; the tail estimate is heuristic",
            upper - lower,
            opts.tolerance
        )
    });
    Ok(ReturnProbability { value: upper, lower, upper, method, terms: n, warning })
}
