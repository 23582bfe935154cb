//! Transition laws: constant drift and the iterated-logarithm perturbations
//! of the symmetric walk.
//!
//! A [`WalkSpec`] fixes `p_i = P(X_{k+1} = i+1 | X_k = i)` for every `i ≥ 1`
//! (`p_0 = 1`, the walk is reflected at the origin). The perturbed family is
//! `p_i = 1/2 ± r_i` with `r_i = Λ(K, i, B)/4` for `i ≥ i_0` and frozen at
//! `r_{i_0}` below it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported depth of the iterated logarithm.
///
/// `i_0` for `K = 5` is already past `e^{e^e} ≈ 3.8·10⁶`; for `K = 6` it lies
/// beyond `e^{3.8·10⁶}` and cannot be represented.
pub const MAX_K: u32 = 5;

/// Upper limit of the `i_0` scan.
const I0_SCAN_LIMIT: u64 = 1 << 32;

/// Which side of 1/2 the perturbation pushes `p_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// `p_i = 1/2 + r_i`
    Plus,
    /// `p_i = 1/2 - r_i`
    Minus,
}

impl Sign {
    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

/// User-facing parameters of a walk, before validation.
///
/// This is also the serialized form of a [`WalkSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WalkParams {
    Constant {
        p: f64,
    },
    Perturbed {
        #[serde(rename = "K")]
        k: u32,
        #[serde(rename = "B")]
        b: f64,
        sign: Sign,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Law {
    Constant { p: f64 },
    Perturbed { k: u32, b: f64, sign: Sign, i0: u64, r_i0: f64 },
}

/// A validated transition law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WalkParams", into = "WalkParams")]
pub struct WalkSpec {
    law: Law,
}

impl WalkSpec {
    /// Simple random walk with `p_i = p` for all `i ≥ 1`.
    pub fn constant(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0 && p < 1.0) {
            return Err(Error::Config(format!("p must lie in (0, 1), got {p}")));
        }
        Ok(Self { law: Law::Constant { p } })
    }

    /// Perturbed walk `p_i = 1/2 ± Λ(K, i, B)/4`.
    pub fn perturbed(k: u32, b: f64, sign: Sign) -> Result<Self> {
        if k == 0 || k > MAX_K {
            return Err(Error::Config(format!("K must lie in 1..={MAX_K}, got {k}")));
        }
        if !b.is_finite() {
            return Err(Error::Config(format!("B must be finite, got {b}")));
        }
        let i0 = compute_i0(k, b)?;
        let r_i0 = lambda(k, i0, b)? / 4.0;
        Ok(Self { law: Law::Perturbed { k, b, sign, i0, r_i0 } })
    }

    pub fn from_params(params: WalkParams) -> Result<Self> {
        match params {
            WalkParams::Constant { p } => Self::constant(p),
            WalkParams::Perturbed { k, b, sign } => Self::perturbed(k, b, sign),
        }
    }

    pub fn params(&self) -> WalkParams {
        match self.law {
            Law::Constant { p } => WalkParams::Constant { p },
            Law::Perturbed { k, b, sign, .. } => WalkParams::Perturbed { k, b, sign },
        }
    }

    /// The walk with up and down probabilities swapped at every `i ≥ 1`.
    pub fn adjoint(&self) -> Self {
        match self.law {
            Law::Constant { p } => Self { law: Law::Constant { p: 1.0 - p } },
            Law::Perturbed { k, b, sign, i0, r_i0 } => Self {
                law: Law::Perturbed { k, b, sign: sign.flipped(), i0, r_i0 },
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.law, Law::Constant { .. })
    }

    /// `i_0`; `None` for constant-drift walks.
    pub fn i0(&self) -> Option<u64> {
        match self.law {
            Law::Constant { .. } => None,
            Law::Perturbed { i0, .. } => Some(i0),
        }
    }

    /// The perturbation `r_i`; `None` for constant-drift walks.
    pub fn r(&self, i: u64) -> Option<f64> {
        match self.law {
            Law::Constant { .. } => None,
            Law::Perturbed { k, b, i0, r_i0, .. } => Some(if i >= i0 {
                // i ≥ i0 keeps every iterated log positive
                lambda_unchecked(k, i, b) / 4.0
            } else {
                r_i0
            }),
        }
    }

    /// Probability of stepping up from state `i`.
    pub fn p_up(&self, i: u64) -> f64 {
        if i == 0 {
            return 1.0;
        }
        match self.law {
            Law::Constant { p } => p,
            Law::Perturbed { sign, .. } => {
                let r = self.r(i).unwrap_or_default();
                match sign {
                    Sign::Plus => 0.5 + r,
                    Sign::Minus => 0.5 - r,
                }
            }
        }
    }

    /// Probability of stepping down from state `i` (0 at the origin).
    pub fn q_down(&self, i: u64) -> f64 {
        if i == 0 {
            return 0.0;
        }
        match self.law {
            Law::Constant { p } => 1.0 - p,
            Law::Perturbed { sign, .. } => {
                let r = self.r(i).unwrap_or_default();
                match sign {
                    Sign::Plus => 0.5 - r,
                    Sign::Minus => 0.5 + r,
                }
            }
        }
    }

    /// `ρ_i = q_i / p_i` for `i ≥ 1`.
    pub fn rho(&self, i: u64) -> f64 {
        match self.law {
            Law::Constant { p } => (1.0 - p) / p,
            Law::Perturbed { sign, .. } => {
                let r2 = 2.0 * self.r(i).unwrap_or_default();
                match sign {
                    Sign::Plus => (1.0 - r2) / (1.0 + r2),
                    Sign::Minus => (1.0 + r2) / (1.0 - r2),
                }
            }
        }
    }

    /// `log ρ_i`, accurate when `ρ_i` is close to 1.
    pub fn log_rho(&self, i: u64) -> f64 {
        match self.law {
            Law::Constant { p } => ((1.0 - p) / p).ln(),
            Law::Perturbed { sign, .. } => {
                let r2 = 2.0 * self.r(i).unwrap_or_default();
                match sign {
                    Sign::Plus => (-r2).ln_1p() - r2.ln_1p(),
                    Sign::Minus => r2.ln_1p() - (-r2).ln_1p(),
                }
            }
        }
    }
}

impl TryFrom<WalkParams> for WalkSpec {
    type Error = Error;

    fn try_from(params: WalkParams) -> Result<Self> {
        Self::from_params(params)
    }
}

impl From<WalkSpec> for WalkParams {
    fn from(spec: WalkSpec) -> Self {
        spec.params()
    }
}

impl std::fmt::Display for WalkSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.law {
            Law::Constant { p } => write!(f, "constant(p={p})"),
            Law::Perturbed { k, b, sign, .. } => write!(f, "perturbed({sign}, K={k}, B={b})"),
        }
    }
}

/// `log_m x`: the `m`-fold natural logarithm, with `log_0 x = x`.
///
/// Fails if `x ≤ 0` or if any iterate that still has to be logged is `≤ 0`.
pub fn iterated_log(m: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("iterated log of non-positive argument {x}")));
    }
    let mut v = x;
    for depth in 0..m {
        if !(v > 0.0) {
            return Err(Error::Domain(format!(
                "log_{depth} {x} = {v} is not positive, log_{} undefined",
                depth + 1
            )));
        }
        v = v.ln();
    }
    Ok(v)
}

/// `Λ(K, i, B) = 1/i + 1/(i log i) + … + 1/(i log i ⋯ log_{K-2} i) + B/(i log i ⋯ log_{K-1} i)`.
///
/// Requires `log_{K-1} i > 0`.
pub fn lambda(k: u32, i: u64, b: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    let last = iterated_log(k - 1, i as f64)?;
    if !(last > 0.0) {
        return Err(Error::Domain(format!("log_{} {i} = {last} is not positive", k - 1)));
    }
    Ok(lambda_unchecked(k, i, b))
}

fn lambda_unchecked(k: u32, i: u64, b: f64) -> f64 {
    let mut level = i as f64;
    let mut denom = 1.0;
    let mut sum = 0.0;
    for m in 0..k {
        denom *= level;
        if m + 1 < k {
            sum += 1.0 / denom;
            level = level.ln();
        }
    }
    sum + b / denom
}

/// `i_0 = min { i ≥ 1 : log_{K-1} i > 0 and |Λ(K, i, B)|/4 < 1/2 }`.
///
/// Indices where `log_{K-1} i` is undefined or non-positive fail the first
/// condition and are skipped.
pub fn compute_i0(k: u32, b: f64) -> Result<u64> {
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    // log_{K-1} i > 0 iff i > e↑↑(K-1) (tower of exponentials starting at 0)
    let mut tower = 0.0f64;
    for _ in 1..k {
        tower = tower.exp();
    }
    if !tower.is_finite() || tower >= I0_SCAN_LIMIT as f64 {
        return Err(Error::Config(format!("i0 for K={k} is not representable")));
    }
    let start = (tower.floor() as u64).max(1);
    for i in start..I0_SCAN_LIMIT {
        match lambda(k, i, b) {
            Ok(l) if l.abs() / 4.0 < 0.5 => return Ok(i),
            _ => continue,
        }
    }
    Err(Error::Config(format!("i0 for K={k}, B={b} exceeds {I0_SCAN_LIMIT}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn iterated_log_examples() {
        assert_eq!(iterated_log(0, 7.0).unwrap(), 7.0);
        assert!((iterated_log(1, E).unwrap() - 1.0).abs() < 1e-15);
        assert!((iterated_log(2, E.powf(E)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn iterated_log_domain_errors() {
        assert!(matches!(iterated_log(1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(iterated_log(0, -1.0), Err(Error::Domain(_))));
        // log 0.5 < 0, so log log 0.5 is undefined
        assert!(matches!(iterated_log(2, 0.5), Err(Error::Domain(_))));
        // log log 1 = log 0
        assert!(matches!(iterated_log(2, 1.0), Err(Error::Domain(_))));
        // the final iterate itself may be negative
        assert!(iterated_log(2, 2.0).unwrap() < 0.0);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda(1, 4, 2.0).unwrap(), 0.5);
        assert_eq!(lambda(1, 10, -1.0).unwrap(), -0.1);
        assert!((lambda(2, 10, 0.0).unwrap() - 0.1).abs() < 1e-16);
        let l3 = lambda(3, 20, 1.5).unwrap();
        let (l0, l1, l2) = (20.0f64, 20.0f64.ln(), 20.0f64.ln().ln());
        let want = 1.0 / l0 + 1.0 / (l0 * l1) + 1.5 / (l0 * l1 * l2);
        assert!((l3 - want).abs() < 1e-15);
    }

    #[test]
    fn lambda_domain() {
        // log 1 = 0 is not positive
        assert!(matches!(lambda(2, 1, 0.0), Err(Error::Domain(_))));
        // log log 2 < 0
        assert!(matches!(lambda(3, 2, 0.0), Err(Error::Domain(_))));
        assert!(lambda(3, 3, 0.0).is_ok());
    }

    #[test]
    fn i0_examples() {
        assert_eq!(compute_i0(1, 1.0).unwrap(), 1);
        assert_eq!(compute_i0(1, 4.0).unwrap(), 3);
        assert_eq!(compute_i0(2, 0.0).unwrap(), 2);
        // strict inequality at |Λ|/4 = 1/2 exactly: B = 2 gives |2/1|/4 = 1/2
        assert_eq!(compute_i0(1, 2.0).unwrap(), 2);
        assert_eq!(compute_i0(1, -2.0).unwrap(), 2);
        // log log i > 0 needs i > e
        assert!(compute_i0(3, 0.0).unwrap() >= 3);
    }

    #[test]
    fn i0_is_minimal() {
        for k in 1..=4u32 {
            for &b in &[-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 7.0] {
                let i0 = compute_i0(k, b).unwrap();
                let ok = |i: u64| matches!(lambda(k, i, b), Ok(l) if l.abs() / 4.0 < 0.5);
                assert!(ok(i0), "K={k} B={b}");
                assert!((1..i0).all(|i| !ok(i)), "K={k} B={b}");
            }
        }
    }

    #[test]
    fn k_out_of_range() {
        assert!(WalkSpec::perturbed(0, 1.0, Sign::Plus).is_err());
        assert!(WalkSpec::perturbed(MAX_K + 1, 1.0, Sign::Plus).is_err());
        assert!(WalkSpec::perturbed(1, f64::NAN, Sign::Plus).is_err());
        assert!(compute_i0(6, 0.0).is_err());
    }

    #[test]
    fn r_examples() {
        let s = WalkSpec::perturbed(1, 1.0, Sign::Plus).unwrap();
        assert_eq!(s.r(1), Some(0.25));
        assert_eq!(s.r(10), Some(0.025));
        let s = WalkSpec::perturbed(1, 4.0, Sign::Plus).unwrap();
        assert_eq!(s.i0(), Some(3));
        assert!((s.r(1).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(s.r(1), s.r(3));
    }

    #[test]
    fn rho_examples() {
        let half = WalkSpec::constant(0.5).unwrap();
        assert_eq!(half.rho(1), 1.0);
        assert_eq!(half.rho(1000), 1.0);
        let s = WalkSpec::perturbed(1, 1.0, Sign::Plus).unwrap();
        assert!((s.rho(1) - 1.0 / 3.0).abs() < 1e-16);
        let third = WalkSpec::constant(1.0 / 3.0).unwrap();
        assert!((third.rho(5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_constant() {
        for p in [0.0, 1.0, 1.5, -0.1, f64::NAN] {
            assert!(matches!(WalkSpec::constant(p), Err(Error::Config(_))), "p={p}");
        }
    }

    #[test]
    fn origin_is_reflecting() {
        let s = WalkSpec::perturbed(2, -1.0, Sign::Minus).unwrap();
        assert_eq!(s.p_up(0), 1.0);
        assert_eq!(s.q_down(0), 0.0);
    }

    #[test]
    fn serde_round_trip() {
        let s = WalkSpec::perturbed(2, -0.75, Sign::Minus).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"kind":"perturbed","K":2,"B":-0.75,"sign":"minus"}"#);
        let back: WalkSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<WalkSpec>(r#"{"kind":"constant","p":1.5}"#).is_err());
    }

    proptest! {
        #[test]
        fn sign_symmetry_k1_is_bitwise(b in -6.0f64..6.0, i in 1u64..5000) {
            let plus = WalkSpec::perturbed(1, b, Sign::Plus).unwrap();
            let minus = WalkSpec::perturbed(1, -b, Sign::Minus).unwrap();
            prop_assert_eq!(plus.i0(), minus.i0());
            prop_assert_eq!(plus.p_up(i).to_bits(), minus.p_up(i).to_bits());
            prop_assert_eq!(plus.rho(i).to_bits(), minus.rho(i).to_bits());
            prop_assert_eq!(plus.log_rho(i).to_bits(), minus.log_rho(i).to_bits());
        }

        #[test]
        fn probabilities_strictly_inside(k in 1u32..=4, b in -8.0f64..8.0, sign in prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]) {
            let s = WalkSpec::perturbed(k, b, sign).unwrap();
            let r0 = s.r(s.i0().unwrap()).unwrap().abs();
            let bound = ((0.5 + r0) / (0.5 - r0)).ln();
            for i in (1..2000u64).chain([10_000, 100_000, 1_000_000]) {
                let p = s.p_up(i);
                prop_assert!(p > 0.0 && p < 1.0, "p_{} = {}", i, p);
                let rho = s.rho(i);
                prop_assert!(rho > 0.0 && rho.is_finite());
                // |Λ| need not decrease past i0 once K ≥ 2 (it can start near a zero crossing)
                if k == 1 {
                    prop_assert!(s.log_rho(i).abs() <= bound + 1e-15, "i={} |log rho|={} bound={}", i, s.log_rho(i).abs(), bound);
                }
            }
        }

        #[test]
        fn adjoint_inverts_rho(k in 1u32..=3, b in -4.0f64..4.0, i in 1u64..10_000) {
            let s = WalkSpec::perturbed(k, b, Sign::Plus).unwrap();
            let t = s.adjoint();
            prop_assert_eq!(t.i0(), s.i0());
            prop_assert!((s.rho(i) * t.rho(i) - 1.0).abs() < 4.0 * f64::EPSILON);
            prop_assert_eq!(s.log_rho(i), -t.log_rho(i));
        }

        #[test]
        fn rho_tends_to_one(k in 1u32..=3, b in -4.0f64..4.0) {
            let s = WalkSpec::perturbed(k, b, Sign::Minus).unwrap();
            let i = 1_000_000u64;
            let bound = 8.0 * lambda(k, i, b).unwrap().abs() / 4.0 + 1e-12;
            prop_assert!((s.rho(i) - 1.0).abs() < bound);
        }
    }
}
