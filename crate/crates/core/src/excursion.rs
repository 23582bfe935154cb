//! Exact law of the excursion maximum `M` on `{D < ∞}`:
//!
//! `P(M = n, D < ∞) = ρ_1⋯ρ_n / ((1 + Σ_{j<n} ρ_1⋯ρ_j)(1 + Σ_{j≤n} ρ_1⋯ρ_j))`.

use std::time::SystemTime;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::first_passage::ReturnProbability;
use crate::numeric::NeumaierSum;
use crate::series::ProductSeries;
use crate::walk::WalkSpec;

/// `log P(M = n, D < ∞)` for `1 ≤ n ≤ n_max`.
pub fn log_max_pmf(series: &ProductSeries, n: usize) -> Result<f64> {
    if n == 0 || n > series.n_max() {
        return Err(Error::Range(format!("n = {n} outside 1..={}", series.n_max())));
    }
    let lp = series.log_products();
    let ls = series.log_prefix_sums();
    Ok(lp[n] - ls[n - 1] - ls[n])
}

/// `P(M = n, D < ∞)`; underflows to 0 where [`log_max_pmf`] stays finite.
pub fn max_pmf(series: &ProductSeries, n: usize) -> Result<f64> {
    log_max_pmf(series, n).map(f64::exp)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableMeta {
    pub spec: WalkSpec,
    pub n_max: usize,
    #[serde(skip)]
    pub built_at: SystemTime,
}

/// `P(M = n, D < ∞)` for `n = 1..=N`, in log and linear form, with
/// compensated cumulative sums.
#[derive(Debug, Clone)]
pub struct MaxPmfTable {
    log_pmf: Vec<f64>,
    pmf: Vec<f64>,
    /// `cumulative[n] = Σ_{m≤n} pmf(m)`, `cumulative[0] = 0`.
    cumulative: Vec<f64>,
    meta: TableMeta,
}

/// `P(M ≥ n, D < ∞)` with the bracket of the return probability it uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailMass {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl MaxPmfTable {
    pub fn build(series: &ProductSeries, n_max: usize) -> Result<Self> {
        if n_max == 0 || n_max > series.n_max() {
            return Err(Error::Range(format!(
                "table size {n_max} outside 1..={}",
                series.n_max()
            )));
        }
        let lp = series.log_products();
        let ls = series.log_prefix_sums();
        let log_pmf: Vec<f64> = (1..=n_max).map(|n| lp[n] - ls[n - 1] - ls[n]).collect();
        let pmf: Vec<f64> = log_pmf.iter().map(|l| l.exp()).collect();
        let mut cumulative = Vec::with_capacity(n_max + 1);
        cumulative.push(0.0);
        let mut acc = NeumaierSum::new();
        for &p in &pmf {
            acc += p;
            cumulative.push(acc.value());
        }
        let meta = TableMeta { spec: *series.spec(), n_max, built_at: SystemTime::now() };
        Ok(Self { log_pmf, pmf, cumulative, meta })
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    pub fn spec(&self) -> &WalkSpec {
        &self.meta.spec
    }

    /// Largest tabulated `n`.
    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn pmf(&self, n: usize) -> Result<f64> {
        self.check(n).map(|i| self.pmf[i])
    }

    pub fn log_pmf(&self, n: usize) -> Result<f64> {
        self.check(n).map(|i| self.log_pmf[i])
    }

    /// `Σ_{m≤n} P(M = m, D < ∞)` for `0 ≤ n ≤ N`.
    pub fn cumulative(&self, n: usize) -> Result<f64> {
        self.cumulative
            .get(n)
            .copied()
            .ok_or_else(|| Error::Range(format!("n = {n} outside 0..={}", self.len())))
    }

    /// Linear pmf values for `n = 1..=N`.
    pub fn pmf_values(&self) -> &[f64] {
        &self.pmf
    }

    pub fn log_pmf_values(&self) -> &[f64] {
        &self.log_pmf
    }

    /// Cumulative sums, index 0 holding the empty sum.
    pub fn cumulative_values(&self) -> &[f64] {
        &self.cumulative
    }

    /// `P(M ≥ n, D < ∞) = P(D < ∞) - Σ_{m<n} P(M = m, D < ∞)`.
    pub fn tail_mass(&self, ret: &ReturnProbability, n: usize) -> Result<TailMass> {
        self.check(n)?;
        let below = self.cumulative[n - 1];
        Ok(TailMass {
            value: ret.value - below,
            lower: ret.lower - below,
            upper: ret.upper - below,
            exact: ret.is_exact(),
        })
    }

    fn check(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.len() {
            return Err(Error::Range(format!("n = {n} outside 1..={}", self.len())));
        }
        Ok(n - 1)
    }
}
