//! The Young function `phi(x) = exp(x^2) - 1` and Orlicz norms built on it.
//!
//! The empirical norm is the plug-in value on the empirical measure of a
//! batch: the smallest `c` with `mean(phi(|x_i| / c)) <= 1`. It is not an
//! unbiased estimator of the population norm. For heavy-tailed or small
//! batches it tends to sit below the population value because the largest
//! draws are underrepresented, and above it when a single large draw
//! dominates the mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents above this are treated as overflowing to `+inf`.
pub const EXP_CLAMP: f64 = 700.0;

/// Default absolute tolerance on the bisected norm.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Bracket expansion stops once the upper end exceeds this multiple of `max|x_i|`.
pub const BRACKET_CAP: f64 = 1e6;

/// `1 / (2 sqrt 2)`: lower constant of the `tau` / `phi`-norm equivalence.
pub const EQUIV_LOWER: f64 = 0.353_553_390_593_273_73;

/// `sqrt(2 + 2 sqrt 2)`: upper constant of the `tau` / `phi`-norm equivalence.
pub const EQUIV_UPPER: f64 = 2.197_368_226_935_62;

/// `sqrt(8/3)`: the `phi`-norm of a standard Gaussian.
pub const GAUSSIAN_NORM: f64 = 1.632_993_161_855_452;

/// The Young function `phi(x) = exp(x^2) - 1` as a stateless function object.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct YoungPhi;

impl YoungPhi {
    pub fn eval(self, x: f64) -> Result<f64> {
        phi(x)
    }

    pub fn inverse(self, y: f64) -> Result<f64> {
        phi_inv(y)
    }
}

/// `phi(x) = exp(x^2) - 1` for finite `x >= 0`.
pub fn phi(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!("phi requires finite x >= 0, got {x}")));
    }
    Ok(phi_unchecked(x))
}

/// `phi` without validation. `x^2 > 700` maps to `+inf`.
#[inline]
pub(crate) fn phi_unchecked(x: f64) -> f64 {
    let sq = x * x;
    if sq > EXP_CLAMP {
        f64::INFINITY
    } else {
        sq.exp_m1()
    }
}

/// `phi^{-1}(y) = sqrt(ln(1 + y))` for finite `y >= 0`.
pub fn phi_inv(y: f64) -> Result<f64> {
    if !y.is_finite() || y < 0.0 {
        return Err(Error::domain(format!("phi_inv requires finite y >= 0, got {y}")));
    }
    Ok(y.ln_1p().sqrt())
}

/// A nonempty batch of finite real samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SampleBatch {
    values: Vec<f64>,
}

impl SampleBatch {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sample batch must contain at least one value"));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::domain(format!("sample {i} is not finite ({v})")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }

    /// `mean(phi(|x_i| / c))`, summed in index order. Infinite when any term overflows.
    pub fn mean_phi(&self, c: f64) -> f64 {
        let sum: f64 = self.values.iter().map(|x| phi_unchecked(x.abs() / c)).sum();
        sum / self.values.len() as f64
    }
}

impl TryFrom<Vec<f64>> for SampleBatch {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<SampleBatch> for Vec<f64> {
    fn from(b: SampleBatch) -> Self {
        b.values
    }
}

/// Value of a norm computation: finite, or unbounded when the bracket cap was hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormValue {
    Finite(f64),
    Unbounded,
}

/// An empirical Orlicz norm together with its final bisection bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: NormValue,
    pub lower_bracket: f64,
    pub upper_bracket: f64,
    pub tolerance: f64,
    pub iterations: u32,
}

impl NormEstimate {
    /// The finite value, if any.
    pub fn finite(&self) -> Option<f64> {
        match self.value {
            NormValue::Finite(v) => Some(v),
            NormValue::Unbounded => None,
        }
    }
}

/// Empirical `phi`-Orlicz norm of `batch` by bisection on
/// `c -> mean(phi(|x_i| / c))`, which is nonincreasing in `c`.
///
/// The returned value is the upper end of the final bracket, so the
/// constraint `mean <= 1` holds at the reported value.
pub fn orlicz_norm_empirical(batch: &SampleBatch, tolerance: f64) -> Result<NormEstimate> {
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::domain(format!("tolerance must be positive, got {tolerance}")));
    }
    let max_abs = batch.max_abs();
    if max_abs == 0.0 {
        return Ok(NormEstimate {
            value: NormValue::Finite(0.0),
            lower_bracket: 0.0,
            upper_bracket: 0.0,
            tolerance,
            iterations: 0,
        });
    }
    let n = batch.count() as f64;

    // At c = max/phi_inv(n) the largest term alone contributes n/n = 1.
    let mut lo = max_abs / phi_unchecked_inv(n);
    while batch.mean_phi(lo) < 1.0 {
        lo *= 0.5;
        if lo == 0.0 {
            break;
        }
    }
    // At c = max/phi_inv(1/n) every term is at most 1/n.
    let mut hi = 2.0 * max_abs / phi_unchecked_inv(1.0 / n);
    let cap = BRACKET_CAP * max_abs;
    while batch.mean_phi(hi) > 1.0 {
        hi *= 2.0;
        if hi > cap {
            return Ok(NormEstimate {
                value: NormValue::Unbounded,
                lower_bracket: lo,
                upper_bracket: f64::INFINITY,
                tolerance,
                iterations: 0,
            });
        }
    }

    let mut iterations = 0u32;
    while hi - lo > tolerance && iterations < 2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if batch.mean_phi(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(NormEstimate {
        value: NormValue::Finite(hi),
        lower_bracket: lo,
        upper_bracket: hi,
        tolerance,
        iterations,
    })
}

#[inline]
fn phi_unchecked_inv(y: f64) -> f64 {
    y.ln_1p().sqrt()
}

/// Closed-form `phi`-norm of a centered Gaussian with standard deviation `sigma`.
///
/// `E exp(X^2/c^2) = (1 - 2 sigma^2/c^2)^{-1/2} = 2` gives `c = sigma sqrt(8/3)`.
pub fn orlicz_norm_gaussian(sigma: f64) -> Result<f64> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::domain(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    Ok(sigma * GAUSSIAN_NORM)
}

/// Outcome of comparing a subgaussian standard against a `phi`-norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub holds: bool,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `tau / (2 sqrt 2)`
    pub lower_bound: f64,
    /// `sqrt(2 + 2 sqrt 2) tau`
    pub upper_bound: f64,
}

/// Checks `tau/(2 sqrt 2) <= norm (1 + slack)` and `norm <= sqrt(2 + 2 sqrt 2) tau (1 + slack)`.
pub fn equivalence_check(tau: f64, phi_norm: f64, slack: f64) -> Result<EquivalenceReport> {
    for (name, v) in [("tau", tau), ("phi_norm", phi_norm), ("slack", slack)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let lower_bound = EQUIV_LOWER * tau;
    let upper_bound = EQUIV_UPPER * tau;
    let lower_ok = lower_bound <= phi_norm * (1.0 + slack);
    let upper_ok = phi_norm <= upper_bound * (1.0 + slack);
    Ok(EquivalenceReport {
        holds: lower_ok && upper_ok,
        lower_ok,
        upper_ok,
        lower_bound,
        upper_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0).unwrap(), 0.0);
        assert!((phi(1.0).unwrap() - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((phi(2f64.ln().sqrt()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(phi(30.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn phi_rejects_bad_input() {
        assert!(phi(-1e-300).is_err());
        assert!(phi(f64::NAN).is_err());
        assert!(phi(f64::INFINITY).is_err());
        assert!(phi_inv(-1.0).is_err());
        assert!(phi_inv(f64::NAN).is_err());
    }

    #[test]
    fn phi_inv_values() {
        assert_eq!(phi_inv(0.0).unwrap(), 0.0);
        assert!((phi_inv(std::f64::consts::E - 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((phi_inv(1.0).unwrap() - 0.832_554_611_157_697_7).abs() < 1e-12);
    }

    #[test]
    fn constants_match_their_definitions() {
        assert!((EQUIV_LOWER - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-16);
        assert!((EQUIV_UPPER - (2.0 + 2.0 * 2f64.sqrt()).sqrt()).abs() < 1e-15);
        assert!((GAUSSIAN_NORM - (8.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empirical_norm_of_constant_batch() {
        let batch = SampleBatch::new(vec![1.0; 17]).unwrap();
        let est = orlicz_norm_empirical(&batch, DEFAULT_TOLERANCE).unwrap();
        let expect = 1.0 / 2f64.ln().sqrt();
        assert!((est.finite().unwrap() - expect).abs() < 1e-8, "{est:?}");
        assert!((expect - 1.201_122_408_786_449_8).abs() < 1e-12);
    }

    #[test]
    fn empirical_norm_of_zero_batch() {
        let batch = SampleBatch::new(vec![0.0; 5]).unwrap();
        let est = orlicz_norm_empirical(&batch, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(est.value, NormValue::Finite(0.0));
    }

    #[test]
    fn single_sample_is_exact() {
        // One draw of size x: phi(x/c) = 1 gives c = x / sqrt(ln 2).
        let batch = SampleBatch::new(vec![-3.0]).unwrap();
        let est = orlicz_norm_empirical(&batch, 1e-12).unwrap();
        assert!((est.finite().unwrap() - 3.0 / 2f64.ln().sqrt()).abs() < 1e-10);
    }

    #[test]
    fn batch_validation() {
        assert!(SampleBatch::new(vec![]).is_err());
        assert!(SampleBatch::new(vec![1.0, f64::NAN]).is_err());
        assert!(SampleBatch::new(vec![f64::NEG_INFINITY]).is_err());
        let b: std::result::Result<SampleBatch, _> = serde_json::from_str("[1.0, 2.0]");
        assert_eq!(b.unwrap().count(), 2);
        let bad: std::result::Result<SampleBatch, _> = serde_json::from_str("[]");
        assert!(bad.is_err());
    }

    #[test]
    fn bad_tolerance() {
        let batch = SampleBatch::new(vec![1.0]).unwrap();
        assert!(orlicz_norm_empirical(&batch, 0.0).is_err());
        assert!(orlicz_norm_empirical(&batch, f64::NAN).is_err());
    }

    #[test]
    fn huge_samples_stay_finite() {
        let batch = SampleBatch::new(vec![1e150, -1e150, 0.0]).unwrap();
        let est = orlicz_norm_empirical(&batch, 1e-9 * 1e150).unwrap();
        let v = est.finite().unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(batch.mean_phi(v) <= 1.0);
    }

    #[test]
    fn gaussian_closed_form() {
        assert_eq!(orlicz_norm_gaussian(0.0).unwrap(), 0.0);
        assert!((orlicz_norm_gaussian(1.0).unwrap() - 1.632_993_2).abs() < 1e-7);
        assert!((orlicz_norm_gaussian(2.0).unwrap() - 3.265_986_3).abs() < 1e-7);
        assert!(orlicz_norm_gaussian(-1.0).is_err());
    }

    #[test]
    fn equivalence_examples() {
        assert!(equivalence_check(1.0, 1.633, 0.0).unwrap().holds);
        assert!(equivalence_check(0.0, 0.0, 0.0).unwrap().holds);
        let r = equivalence_check(1.0, 3.0, 0.0).unwrap();
        assert!(!r.holds && r.lower_ok && !r.upper_ok);
        let r = equivalence_check(1.0, 0.1, 0.0).unwrap();
        assert!(!r.holds && !r.lower_ok);
        assert!(equivalence_check(-1.0, 0.0, 0.0).is_err());
    }

    fn batch_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0f64..50.0, 1..60)
    }

    proptest! {
        #[test]
        fn round_trip(x in 0.0f64..5.0) {
            let y = phi(x).unwrap();
            prop_assert!((phi_inv(y).unwrap() - x).abs() <= 1e-12);
        }

        #[test]
        fn phi_is_increasing_and_convex(a in 0.0f64..5.0, b in 0.0f64..5.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(phi(lo).unwrap() <= phi(hi).unwrap());
            let mid = 0.5 * (lo + hi);
            prop_assert!(phi(mid).unwrap() <= 0.5 * (phi(lo).unwrap() + phi(hi).unwrap()) * (1.0 + 1e-12));
        }

        #[test]
        fn bracket_invariants(values in batch_strategy()) {
            let batch = SampleBatch::new(values).unwrap();
            let est = orlicz_norm_empirical(&batch, 1e-9).unwrap();
            let v = est.finite().unwrap();
            prop_assert!(est.lower_bracket <= v && v <= est.upper_bracket);
            if v > 0.0 {
                prop_assert!(est.upper_bracket - est.lower_bracket <= est.tolerance);
                prop_assert!(batch.mean_phi(est.lower_bracket) >= 1.0);
                prop_assert!(batch.mean_phi(est.upper_bracket) <= 1.0);
            }
        }

        #[test]
        fn mean_phi_is_monotone(values in batch_strategy(), c1 in 0.1f64..100.0, dc in 0.0f64..100.0) {
            let batch = SampleBatch::new(values).unwrap();
            prop_assert!(batch.mean_phi(c1) >= batch.mean_phi(c1 + dc));
        }

        #[test]
        fn homogeneity(values in batch_strategy(), lambda in 0.01f64..100.0) {
            let batch = SampleBatch::new(values).unwrap();
            let tol = 1e-10;
            let base = orlicz_norm_empirical(&batch, tol).unwrap().finite().unwrap();
            let scaled = orlicz_norm_empirical(&batch.scaled(lambda).unwrap(), tol * lambda)
                .unwrap()
                .finite()
                .unwrap();
            prop_assert!((scaled - lambda * base).abs() <= 2.0 * tol * lambda + 1e-12 * scaled);
        }

        #[test]
        fn subadditivity(pairs in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 1..60)) {
            let tol = 1e-9;
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let s: Vec<f64> = pairs.iter().map(|p| p.0 + p.1).collect();
            let nx = orlicz_norm_empirical(&SampleBatch::new(x).unwrap(), tol).unwrap().finite().unwrap();
            let ny = orlicz_norm_empirical(&SampleBatch::new(y).unwrap(), tol).unwrap().finite().unwrap();
            let ns = orlicz_norm_empirical(&SampleBatch::new(s).unwrap(), tol).unwrap().finite().unwrap();
            prop_assert!(ns <= nx + ny + 2.0 * tol);
        }
    }
}
