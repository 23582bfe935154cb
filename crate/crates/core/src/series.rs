//! Log-space tabulation of `ρ_1⋯ρ_n` and `1 + Σ_{j≤n} ρ_1⋯ρ_j`.

use crate::error::{Error, Result};
use crate::numeric::{logaddexp, NeumaierSum};
use crate::walk::WalkSpec;

/// Default cap on the number of tabulated terms (two `f64` tables each).
pub const DEFAULT_MAX_TERMS: usize = 50_000_000;

/// Tabulated products and prefix sums for one walk, indices `0..=n_max`.
///
/// `log_product(0) = 0` and `log_one_plus_sum(0) = 0` (empty product and
/// empty sum).
#[derive(Debug, Clone)]
pub struct ProductSeries {
    spec: WalkSpec,
    log_prod: Vec<f64>,
    log_prefix_sum: Vec<f64>,
}

impl ProductSeries {
    /// Tabulates up to `n_max` under [`DEFAULT_MAX_TERMS`].
    pub fn build(spec: WalkSpec, n_max: usize) -> Result<Self> {
        Self::build_with_budget(spec, n_max, DEFAULT_MAX_TERMS)
    }

    pub fn build_with_budget(spec: WalkSpec, n_max: usize, max_terms: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::Range("n_max must be at least 1".into()));
        }
        if n_max > max_terms {
            return Err(Error::Resource(format!(
                "n_max = {n_max} exceeds the table budget of {max_terms} terms"
            )));
        }
        let mut log_prod = Vec::new();
        let mut log_prefix_sum = Vec::new();
        log_prod
            .try_reserve_exact(n_max + 1)
            .and_then(|_| log_prefix_sum.try_reserve_exact(n_max + 1))
            .map_err(|e| Error::Resource(format!("cannot allocate {n_max} terms: {e}")))?;

        log_prod.push(0.0);
        log_prefix_sum.push(0.0);
        let mut acc = NeumaierSum::new();
        let mut prefix = 0.0;
        for i in 1..=n_max {
            acc += spec.log_rho(i as u64);
            let lp = acc.value();
            prefix = logaddexp(prefix, lp);
            log_prod.push(lp);
            log_prefix_sum.push(prefix);
        }
        Ok(Self { spec, log_prod, log_prefix_sum })
    }

    pub fn spec(&self) -> &WalkSpec {
        &self.spec
    }

    pub fn n_max(&self) -> usize {
        self.log_prod.len() - 1
    }

    /// `log(ρ_1⋯ρ_n)`.
    pub fn log_product(&self, n: usize) -> Result<f64> {
        self.log_prod.get(n).copied().ok_or_else(|| self.out_of_range(n))
    }

    /// `log(1 + Σ_{j=1}^{n} ρ_1⋯ρ_j)`.
    pub fn log_one_plus_sum(&self, n: usize) -> Result<f64> {
        self.log_prefix_sum.get(n).copied().ok_or_else(|| self.out_of_range(n))
    }

    /// The whole `log(ρ_1⋯ρ_n)` table, index 0 included.
    pub fn log_products(&self) -> &[f64] {
        &self.log_prod
    }

    /// The whole `log(1 + Σ ρ_1⋯ρ_j)` table, index 0 included.
    pub fn log_prefix_sums(&self) -> &[f64] {
        &self.log_prefix_sum
    }

    fn out_of_range(&self, n: usize) -> Error {
        Error::Range(format!("index {n} outside 0..={}", self.n_max()))
    }
}
