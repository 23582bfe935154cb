//! Decay shapes of `P(M = n, D < ∞)` and of `ρ_1⋯ρ_n`, with the unknown
//! multiplicative constant factored out, and numerical estimation of that
//! constant from the exact tables.
//!
//! Every shape is evaluated in log space. Iterated logarithms are natural
//! logarithms; `chain_j(n) = log_0 n · log_1 n ⋯ log_j n` with `chain_{-1} = 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::excursion;
use crate::series::ProductSeries;
use crate::walk::{iterated_log, Sign, WalkParams, WalkSpec};

/// Smallest value any iterated-log factor of a shape may take.
const LOG_FACTOR_FLOOR: f64 = 0.1;

/// What quantity the shape describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeTarget {
    /// `ρ_1⋯ρ_n`
    Product,
    /// `P(M = n, D < ∞)`
    MaxPmf,
}

/// Resolved asymptotic regime. `k` and `b` are the walk's `K` and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Branch {
    /// `1/(n(n+1))`, symmetric simple walk.
    SimpleNull,
    /// `(1-ρ)² ρⁿ`, simple walk with `ρ < 1`.
    SimpleTransient { rho: f64 },
    /// `(1-ρ)² ρ^{-(n+1)}`, simple walk with `ρ > 1`.
    SimplePositive { rho: f64 },
    /// `1/(chain_{K-1}(n) (log_K n)²)`, plus sign, `B = 1`.
    PlusCritical { k: u32 },
    /// `1/(chain_{K-2}(n) (log_{K-1} n)^B)`, plus sign, `B > 1`.
    PlusTransient { k: u32, b: f64 },
    /// `1/(chain_{K-2}(n) (log_{K-1} n)^{2-B})`, plus sign, `B < 1`.
    PlusRecurrent { k: u32, b: f64 },
    /// `n^{-(B+2)}`, minus sign, `K = 1`, `B > -1`.
    MinusPower { b: f64 },
    /// `1/(n (log n)²)`, minus sign, `K = 1`, `B = -1`.
    MinusCritical,
    /// `n^B`, minus sign, `K = 1`, `B < -1`.
    MinusTransient { b: f64 },
    /// `1/(n² chain_{K-2}(n) (log_{K-1} n)^B)`, minus sign, `K > 1`.
    MinusIterated { k: u32, b: f64 },
    /// `ρⁿ`
    GeometricProduct { rho: f64 },
    /// `1/(chain_{K-2}(n) (log_{K-1} n)^B)`, plus sign.
    ProductDecay { k: u32, b: f64 },
    /// `chain_{K-2}(n) (log_{K-1} n)^B`, minus sign.
    ProductGrowth { k: u32, b: f64 },
}

impl Branch {
    /// Depth of the deepest iterated logarithm the formula takes of `n`.
    fn depth(&self) -> u32 {
        match *self {
            Branch::SimpleNull
            | Branch::SimpleTransient { .. }
            | Branch::SimplePositive { .. }
            | Branch::MinusPower { .. }
            | Branch::MinusTransient { .. }
            | Branch::GeometricProduct { .. } => 0,
            Branch::MinusCritical => 1,
            Branch::PlusCritical { k } => k,
            Branch::PlusTransient { k, .. }
            | Branch::PlusRecurrent { k, .. }
            | Branch::MinusIterated { k, .. }
            | Branch::ProductDecay { k, .. }
            | Branch::ProductGrowth { k, .. } => k - 1,
        }
    }

    /// Human-readable formula.
    pub fn formula(&self) -> String {
        fn chain(k: u32) -> String {
            match k {
                0 => String::new(),
                1 => "n ".into(),
                2 => "n log n ".into(),
                _ => format!("n log n ... log_{} n ", k - 1),
            }
        }
        match *self {
            Branch::SimpleNull => "1/(n(n+1))".into(),
            Branch::SimpleTransient { .. } => "(1-rho)^2 rho^n".into(),
            Branch::SimplePositive { .. } => "(1-rho)^2 rho^-(n+1)".into(),
            Branch::PlusCritical { k } => format!("1/({}(log_{k} n)^2)", chain(k)),
            Branch::PlusTransient { k, b } => format!("1/({}(log_{} n)^{b})", chain(k - 1), k - 1),
            Branch::PlusRecurrent { k, b } => {
                format!("1/({}(log_{} n)^{})", chain(k - 1), k - 1, 2.0 - b)
            }
            Branch::MinusPower { b } => format!("n^-({})", b + 2.0),
            Branch::MinusCritical => "1/(n (log n)^2)".into(),
            Branch::MinusTransient { b } => format!("n^{b}"),
            Branch::MinusIterated { k, b } => {
                format!("1/(n^2 {}(log_{} n)^{b})", chain(k - 1), k - 1)
            }
            Branch::GeometricProduct { .. } => "rho^n".into(),
            Branch::ProductDecay { k, b } => format!("1/({}(log_{} n)^{b})", chain(k - 1), k - 1),
            Branch::ProductGrowth { k, b } => format!("{}(log_{} n)^{b}", chain(k - 1), k - 1),
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.formula())
    }
}

/// An n-dependent decay factor for one walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticShape {
    pub target: ShapeTarget,
    pub spec: WalkSpec,
    pub branch: Branch,
    pub n_min_valid: u64,
}

impl AsymptoticShape {
    /// Shape of `P(M = n, D < ∞)`.
    pub fn max_pmf(spec: WalkSpec) -> Result<Self> {
        let branch = match spec.params() {
            WalkParams::Constant { p } => {
                let rho = (1.0 - p) / p;
                if rho == 1.0 {
                    Branch::SimpleNull
                } else if rho < 1.0 {
                    Branch::SimpleTransient { rho }
                } else {
                    Branch::SimplePositive { rho }
                }
            }
            WalkParams::Perturbed { k, b, sign: Sign::Plus } => {
                if b == 1.0 {
                    Branch::PlusCritical { k }
                } else if b > 1.0 {
                    Branch::PlusTransient { k, b }
                } else {
                    Branch::PlusRecurrent { k, b }
                }
            }
            WalkParams::Perturbed { k, b, sign: Sign::Minus } => {
                if k > 1 {
                    Branch::MinusIterated { k, b }
                } else if b > -1.0 {
                    Branch::MinusPower { b }
                } else if b == -1.0 {
                    Branch::MinusCritical
                } else {
                    Branch::MinusTransient { b }
                }
            }
        };
        Self::resolve(ShapeTarget::MaxPmf, spec, branch)
    }

    /// Shape of `ρ_1⋯ρ_n`.
    pub fn product(spec: WalkSpec) -> Result<Self> {
        let branch = match spec.params() {
            WalkParams::Constant { p } => Branch::GeometricProduct { rho: (1.0 - p) / p },
            WalkParams::Perturbed { k, b, sign: Sign::Plus } => Branch::ProductDecay { k, b },
            WalkParams::Perturbed { k, b, sign: Sign::Minus } => Branch::ProductGrowth { k, b },
        };
        Self::resolve(ShapeTarget::Product, spec, branch)
    }

    pub fn new(target: ShapeTarget, spec: WalkSpec) -> Result<Self> {
        match target {
            ShapeTarget::Product => Self::product(spec),
            ShapeTarget::MaxPmf => Self::max_pmf(spec),
        }
    }

    fn resolve(target: ShapeTarget, spec: WalkSpec, branch: Branch) -> Result<Self> {
        let n_min_valid = min_valid_index(branch.depth())?;
        Ok(Self { target, spec, branch, n_min_valid })
    }

    /// Shape value at `n` (constant set to 1).
    pub fn shape(&self, n: u64) -> Result<f64> {
        self.log_shape(n).map(f64::exp)
    }

    /// Natural log of the shape value at `n`.
    pub fn log_shape(&self, n: u64) -> Result<f64> {
        if n < self.n_min_valid {
            return Err(Error::Domain(format!(
                "shape {} needs n >= {}, got {n}",
                self.branch, self.n_min_valid
            )));
        }
        let logs = log_chain(n, self.branch.depth())?;
        // Σ_{m=0}^{j} log(log_m n)
        let chain = |j: i64| -> f64 { (0..=j).map(|m| logs[m as usize]).sum() };
        let ln_n = logs[0];
        let v = match self.branch {
            Branch::SimpleNull => -(ln_n + (n as f64 + 1.0).ln()),
            Branch::SimpleTransient { rho } | Branch::SimplePositive { rho } => {
                let lead = 2.0 * (1.0 - rho).abs().ln();
                if rho < 1.0 {
                    lead + n as f64 * rho.ln()
                } else {
                    lead - (n as f64 + 1.0) * rho.ln()
                }
            }
            Branch::PlusCritical { k } => -(chain(k as i64 - 1) + 2.0 * logs[k as usize]),
            Branch::PlusTransient { k, b } | Branch::ProductDecay { k, b } => {
                -(chain(k as i64 - 2) + b * logs[k as usize - 1])
            }
            Branch::PlusRecurrent { k, b } => -(chain(k as i64 - 2) + (2.0 - b) * logs[k as usize - 1]),
            Branch::MinusPower { b } => -(b + 2.0) * ln_n,
            Branch::MinusCritical => -(ln_n + 2.0 * logs[1]),
            Branch::MinusTransient { b } => b * ln_n,
            Branch::MinusIterated { k, b } => {
                -(2.0 * ln_n + chain(k as i64 - 2) + b * logs[k as usize - 1])
            }
            Branch::GeometricProduct { rho } => n as f64 * rho.ln(),
            Branch::ProductGrowth { k, b } => chain(k as i64 - 2) + b * logs[k as usize - 1],
        };
        Ok(v)
    }

    /// Natural log of `Σ_{j>n} shape(j)`, when that tail is finite.
    ///
    /// Exact for geometric products; for the perturbed product shapes it is
    /// the integral `∫_n^∞ shape(x) dx`, which is only a heuristic for the
    /// sum. `None` when the tail diverges or the target is not a product.
    pub fn log_tail(&self, n: u64) -> Result<Option<f64>> {
        if self.target != ShapeTarget::Product {
            return Ok(None);
        }
        // for n^{-s}-type and iterated-log shapes: ∫_n^∞ = (log_{K-1} n)^{1-s}/(s-1)
        let decay_exponent = match self.branch {
            Branch::GeometricProduct { rho } => {
                if rho >= 1.0 {
                    return Ok(None);
                }
                // Σ_{j>n} ρ^j = ρ^{n+1}/(1-ρ)
                return Ok(Some((n as f64 + 1.0) * rho.ln() - (-rho).ln_1p()));
            }
            Branch::ProductDecay { k, b } => Some((k, b)),
            Branch::ProductGrowth { k: 1, b } => Some((1, -b)),
            _ => None,
        };
        let Some((k, s)) = decay_exponent else {
            return Ok(None);
        };
        if s <= 1.0 {
            return Ok(None);
        }
        let last = iterated_log(k - 1, n as f64)?;
        if !(last > 0.0) {
            return Err(Error::Domain(format!("log_{} {n} is not positive", k - 1)));
        }
        Ok(Some((1.0 - s) * last.ln() - (s - 1.0).ln()))
    }
}

/// `[ln(log_0 n), ln(log_1 n), …, ln(log_depth n)]`.
fn log_chain(n: u64, depth: u32) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(depth as usize + 1);
    let mut level = n as f64;
    for m in 0..=depth {
        if !(level > 0.0) {
            return Err(Error::Domain(format!("log_{m} {n} is not positive")));
        }
        let l = level.ln();
        out.push(l);
        level = l;
    }
    Ok(out)
}

/// Least `n ≥ 1` whose iterated logs up to `depth` are all at least
/// [`LOG_FACTOR_FLOOR`].
fn min_valid_index(depth: u32) -> Result<u64> {
    if depth == 0 {
        return Ok(1);
    }
    let valid = |n: u64| matches!(iterated_log(depth, n as f64), Ok(v) if v >= LOG_FACTOR_FLOOR);
    let mut threshold = LOG_FACTOR_FLOOR;
    for _ in 0..depth {
        threshold = threshold.exp();
    }
    if !threshold.is_finite() || threshold > 9.0e15 {
        return Err(Error::Domain(format!("log_{depth} n >= {LOG_FACTOR_FLOOR} needs n beyond u64")));
    }
    let mut n = (threshold.ceil() as u64).max(1);
    while !valid(n) {
        n += 1;
    }
    while n > 1 && valid(n - 1) {
        n -= 1;
    }
    Ok(n)
}

/// One sampled value of `ĉ(n) = exact(n)/shape(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantSample {
    pub n: u64,
    pub log_exact: f64,
    pub log_shape: f64,
    pub c_hat: f64,
}

impl ConstantSample {
    pub fn log_c_hat(&self) -> f64 {
        self.log_exact - self.log_shape
    }
}

/// Constant estimates at geometrically spaced `n` plus a convergence indicator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub branch: Branch,
    pub samples: Vec<ConstantSample>,
    /// `|ĉ(n_hi)/ĉ(n_hi/2) - 1|`
    pub drift: f64,
}

impl ConstantEstimate {
    pub fn last(&self) -> &ConstantSample {
        self.samples.last().expect("estimate has samples")
    }
}

/// Samples `ĉ(n)` at `n_lo, 2 n_lo, 4 n_lo, …` plus `n_hi/2` and `n_hi`.
///
/// The ratio is formed in log space, so exact values far below the smallest
/// positive double are handled.
pub fn estimate_constant(
    series: &ProductSeries,
    shape: &AsymptoticShape,
    n_lo: u64,
    n_hi: u64,
) -> Result<ConstantEstimate> {
    if n_lo < shape.n_min_valid || n_lo >= n_hi || n_hi as usize > series.n_max() {
        return Err(Error::Range(format!(
            "need {} <= n_lo < n_hi <= {}, got n_lo={n_lo}, n_hi={n_hi}",
            shape.n_min_valid,
            series.n_max()
        )));
    }
    let half = n_hi / 2;
    if half < shape.n_min_valid {
        return Err(Error::Range(format!(
            "n_hi/2 = {half} is below the shape's valid range (n >= {})",
            shape.n_min_valid
        )));
    }
    let mut grid = Vec::new();
    let mut n = n_lo;
    while n < n_hi {
        grid.push(n);
        n = n.saturating_mul(2);
    }
    grid.push(half);
    grid.push(n_hi);
    grid.sort_unstable();
    grid.dedup();

    let samples = grid
        .into_iter()
        .map(|n| {
            let log_exact = match shape.target {
                ShapeTarget::MaxPmf => excursion::log_max_pmf(series, n as usize)?,
                ShapeTarget::Product => series.log_product(n as usize)?,
            };
            let log_shape = shape.log_shape(n)?;
            Ok(ConstantSample { n, log_exact, log_shape, c_hat: (log_exact - log_shape).exp() })
        })
        .collect::<Result<Vec<_>>>()?;

    let at = |m: u64| samples.iter().find(|s| s.n == m).map(|s| s.log_c_hat());
    let (hi, lo) = (at(n_hi).expect("n_hi sampled"), at(half).expect("n_hi/2 sampled"));
    let drift = (hi - lo).exp_m1().abs();
    Ok(ConstantEstimate { branch: shape.branch, samples, drift })
}
