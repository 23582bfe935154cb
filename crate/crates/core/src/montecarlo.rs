//! Seeded parallel excursion simulator.
//!
//! # Stream layout
//!
//! The `excursions` are cut into consecutive blocks of [`BLOCK_SIZE`] (the
//! last block may be shorter). Block `b` draws from a ChaCha8 generator
//! created by `ChaCha8Rng::seed_from_u64(seed)` and then switched to stream
//! `b` with `set_stream(b)`, word position 0. Each step consumes one `u64`
//! `w` and converts it to `u = (w >> 11) · 2⁻⁵³ ∈ [0, 1)`; the walk steps up
//! iff `u < p_x`. Blocks are independent of the number of workers and are
//! merged in block order, so a result depends only on the configuration and
//! the seed.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::excursion::MaxPmfTable;
use crate::walk::WalkSpec;

/// Excursions per random stream.
pub const BLOCK_SIZE: u64 = 4096;
pub const DEFAULT_CAP_STEPS: u64 = 1_000_000;
pub const DEFAULT_CAP_HEIGHT: u64 = 1_000;

/// Heights above this are evaluated on the fly rather than tabulated.
const MAX_TABULATED_HEIGHT: u64 = 1 << 22;

/// Bins whose expected count is below this are not tested.
pub const MIN_EXPECTED_COUNT: f64 = 50.0;
/// Flagging threshold in binomial standard errors.
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub spec: WalkSpec,
    pub excursions: u64,
    pub seed: u64,
    pub workers: usize,
    /// Per-excursion step budget.
    pub cap_steps: u64,
    /// Excursions reaching this height are censored.
    pub cap_height: u64,
}

impl SimConfig {
    /// Default caps, one worker per available core.
    pub fn new(spec: WalkSpec, excursions: u64, seed: u64) -> Self {
        Self {
            spec,
            excursions,
            seed,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cap_steps: DEFAULT_CAP_STEPS,
            cap_height: DEFAULT_CAP_HEIGHT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.excursions == 0 {
            return Err(Error::Config("excursions must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.cap_steps == 0 {
            return Err(Error::Config("cap_steps must be at least 1".into()));
        }
        if self.cap_height < 2 {
            return Err(Error::Config(format!("cap_height must be at least 2, got {}", self.cap_height)));
        }
        Ok(())
    }
}

/// Outcome counts of a simulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimResult {
    /// `counts[n - 1]`: excursions that returned to 0 with maximum `n`,
    /// for `n = 1..cap_height`.
    pub counts: Vec<u64>,
    /// Excursions that reached `cap_height`.
    pub censored_height: u64,
    /// Excursions that used up `cap_steps` below `cap_height`.
    pub censored_steps: u64,
    pub total: u64,
}

impl SimResult {
    fn empty(cap_height: u64) -> Self {
        Self {
            counts: vec![0; (cap_height - 1) as usize],
            censored_height: 0,
            censored_steps: 0,
            total: 0,
        }
    }

    /// Excursions that ended at 0 with maximum `n` (0 outside the range).
    pub fn count(&self, n: u64) -> u64 {
        n.checked_sub(1)
            .and_then(|i| self.counts.get(i as usize))
            .copied()
            .unwrap_or(0)
    }

    pub fn returned(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn merge(&mut self, other: &SimResult) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.censored_height += other.censored_height;
        self.censored_steps += other.censored_steps;
        self.total += other.total;
    }
}

/// Up-step probabilities, tabulated for small heights.
struct StepLaw<'a> {
    spec: &'a WalkSpec,
    table: Vec<f64>,
}

impl<'a> StepLaw<'a> {
    fn new(spec: &'a WalkSpec, cap_height: u64) -> Self {
        let top = cap_height.min(MAX_TABULATED_HEIGHT);
        Self { spec, table: (0..top).map(|i| spec.p_up(i)).collect() }
    }

    #[inline]
    fn p_up(&self, x: u64) -> f64 {
        match self.table.get(x as usize) {
            Some(&p) => p,
            None => self.spec.p_up(x),
        }
    }
}

#[inline]
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Generator for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn run_block(config: &SimConfig, law: &StepLaw<'_>, block: u64) -> SimResult {
    let start = block * BLOCK_SIZE;
    let len = BLOCK_SIZE.min(config.excursions - start);
    let mut rng = block_rng(config.seed, block);
    let mut out = SimResult::empty(config.cap_height);
    out.total = len;
    for _ in 0..len {
        let mut x = 1u64;
        let mut max = 1u64;
        let mut steps = 0u64;
        loop {
            if steps == config.cap_steps {
                out.censored_steps += 1;
                break;
            }
            steps += 1;
            if uniform(&mut rng) < law.p_up(x) {
                x += 1;
                if x > max {
                    max = x;
                    if x >= config.cap_height {
                        out.censored_height += 1;
                        break;
                    }
                }
            } else {
                x -= 1;
                if x == 0 {
                    out.counts[(max - 1) as usize] += 1;
                    break;
                }
            }
        }
    }
    out
}

/// Simulates the configured excursions from `X_0 = 1`.
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let law = StepLaw::new(&config.spec, config.cap_height);
    let blocks = config.excursions.div_ceil(BLOCK_SIZE);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", config.workers)))?;
    let parts: Vec<SimResult> =
        pool.install(|| (0..blocks).into_par_iter().map(|b| run_block(config, &law, b)).collect());
    let mut total = SimResult::empty(config.cap_height);
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

/// Empirical versus exact frequency in one bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinComparison {
    pub n: u64,
    pub exact: f64,
    pub empirical: f64,
    pub count: u64,
    pub expected: f64,
    pub stderr: f64,
    pub z: f64,
    /// Expected count at least [`MIN_EXPECTED_COUNT`].
    pub eligible: bool,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub bins: Vec<BinComparison>,
    /// `censored_steps / total`, added to every bin's tolerance.
    pub step_censoring_slack: f64,
    /// `Σ z²` over eligible bins.
    pub chi_square: f64,
    pub eligible_bins: usize,
    pub flagged: Vec<u64>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.flagged.is_empty()
    }

    pub fn bin(&self, n: u64) -> Option<&BinComparison> {
        n.checked_sub(1).and_then(|i| self.bins.get(i as usize))
    }
}

/// Per-bin z-scores of a simulation against an exact table.
///
/// A bin is flagged when it is eligible and
/// `|empirical - exact| > 4·stderr + censored_steps/total`.
pub fn compare(result: &SimResult, table: &MaxPmfTable) -> Result<Comparison> {
    let bins_needed = result.counts.len();
    if table.len() < bins_needed {
        return Err(Error::Range(format!(
            "table covers 1..={}, simulation needs 1..={bins_needed}",
            table.len()
        )));
    }
    if result.total == 0 {
        return Err(Error::Range("empty simulation".into()));
    }
    let total = result.total as f64;
    let slack = result.censored_steps as f64 / total;
    let mut bins = Vec::with_capacity(bins_needed);
    let mut chi_square = 0.0;
    let mut eligible_bins = 0;
    let mut flagged = Vec::new();
    for (i, &count) in result.counts.iter().enumerate() {
        let n = i as u64 + 1;
        let exact = table.pmf_values()[i];
        let empirical = count as f64 / total;
        let expected = exact * total;
        let stderr = (exact * (1.0 - exact) / total).sqrt();
        let diff = empirical - exact;
        let z = if stderr > 0.0 {
            diff / stderr
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        let eligible = expected >= MIN_EXPECTED_COUNT;
        let is_flagged = eligible && diff.abs() > Z_THRESHOLD * stderr + slack;
        if eligible {
            eligible_bins += 1;
            chi_square += z * z;
        }
        if is_flagged {
            flagged.push(n);
        }
        bins.push(BinComparison {
            n,
            exact,
            empirical,
            count,
            expected,
            stderr,
            z,
            eligible,
            flagged: is_flagged,
        });
    }
    Ok(Comparison { bins, step_censoring_slack: slack, chi_square, eligible_bins, flagged })
}
