//! Subgaussian standards.
//!
//! `tau(X)` is the smallest `c >= 0` such that `E exp(tX) <= exp(c^2 t^2 / 2)`
//! for every real `t`. This module knows `tau` in closed form for a handful of
//! marginal laws, estimates it from samples on a finite `t`-grid, and checks
//! empirical moment generating functions against a claimed `tau`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::SampleBatch;

/// Marginal law descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    /// Centered normal with standard deviation `sigma > 0`.
    Gaussian { sigma: f64 },
    /// Uniform on `{-1, +1}`.
    Rademacher,
    /// Uniform on `[-half_width, half_width]`.
    UniformSym { half_width: f64 },
    /// A mean-zero law supported on `[lo, hi]`, chosen by `density_id`:
    /// `"two_point"` (masses at `lo` and `hi` balancing the mean) or
    /// `"uniform"` (requires `lo = -hi`).
    BoundedCentered { lo: f64, hi: f64, density_id: String },
    /// `factor * inner`.
    Scaled { inner: Box<DistributionSpec>, factor: f64 },
}

impl DistributionSpec {
    pub fn standard_gaussian() -> Self {
        DistributionSpec::Gaussian { sigma: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Gaussian { sigma } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::domain(format!("gaussian sigma must be positive, got {sigma}")));
                }
            }
            DistributionSpec::Rademacher => {}
            DistributionSpec::UniformSym { half_width } => {
                if !(half_width.is_finite() && *half_width > 0.0) {
                    return Err(Error::domain(format!("half_width must be positive, got {half_width}")));
                }
            }
            DistributionSpec::BoundedCentered { lo, hi, density_id } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::domain(format!("bounded law needs lo < hi, got [{lo}, {hi}]")));
                }
                match density_id.as_str() {
                    "two_point" => {
                        if !(*lo < 0.0 && *hi > 0.0) {
                            return Err(Error::domain("a mean-zero two-point law needs lo < 0 < hi"));
                        }
                    }
                    "uniform" => {
                        if (lo + hi).abs() > 1e-12 * (hi - lo) {
                            return Err(Error::domain("a centered uniform law needs lo = -hi"));
                        }
                    }
                    other => return Err(Error::Unsupported(format!("density_id {other:?}"))),
                }
            }
            DistributionSpec::Scaled { inner, factor } => {
                if !(factor.is_finite() && *factor != 0.0) {
                    return Err(Error::domain(format!("scale factor must be finite and nonzero, got {factor}")));
                }
                inner.validate()?;
            }
        }
        Ok(())
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DistributionSpec::Gaussian { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                sigma * z
            }
            DistributionSpec::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DistributionSpec::UniformSym { half_width } => half_width * (2.0 * rng.random::<f64>() - 1.0),
            DistributionSpec::BoundedCentered { lo, hi, density_id } => match density_id.as_str() {
                "two_point" => {
                    let p_hi = -lo / (hi - lo);
                    if rng.random::<f64>() < p_hi {
                        *hi
                    } else {
                        *lo
                    }
                }
                _ => lo + (hi - lo) * rng.random::<f64>(),
            },
            DistributionSpec::Scaled { inner, factor } => factor * inner.sample(rng),
        }
    }

    /// The exact moment generating function `E exp(tX)`.
    pub fn mgf(&self, t: f64) -> f64 {
        self.log_mgf(t).exp()
    }

    /// `ln E exp(tX)`, evaluated without overflow.
    pub fn log_mgf(&self, t: f64) -> f64 {
        match self {
            DistributionSpec::Gaussian { sigma } => 0.5 * sigma * sigma * t * t,
            DistributionSpec::Rademacher => ln_cosh(t),
            DistributionSpec::UniformSym { half_width } => ln_sinhc(half_width * t),
            DistributionSpec::BoundedCentered { lo, hi, density_id } => match density_id.as_str() {
                "two_point" => {
                    let p_hi = -lo / (hi - lo);
                    let (a, b) = ((p_hi).ln() + t * hi, (1.0 - p_hi).ln() + t * lo);
                    let m = a.max(b);
                    m + ((a - m).exp() + (b - m).exp()).ln()
                }
                _ => ln_sinhc(hi * t),
            },
            DistributionSpec::Scaled { inner, factor } => inner.log_mgf(factor * t),
        }
    }
}

fn ln_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln(sinh(x) / x)` with the removable singularity filled in.
fn ln_sinhc(x: f64) -> f64 {
    let a = x.abs();
    if a < 1e-4 {
        a * a / 6.0
    } else if a < 20.0 {
        (a.sinh() / a).ln()
    } else {
        a + (-(-2.0 * a).exp()).ln_1p() - std::f64::consts::LN_2 - a.ln()
    }
}

/// How a subgaussian standard was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    UpperBound,
    /// Estimated from samples; carries the `t`-grid used.
    Empirical { t_grid: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgaussianStandard {
    pub value: f64,
    pub exactness: Exactness,
}

/// Closed-form `tau` for each supported law.
pub fn tau_analytic(spec: &DistributionSpec) -> Result<SubgaussianStandard> {
    spec.validate()?;
    Ok(tau_of_valid(spec))
}

fn tau_of_valid(spec: &DistributionSpec) -> SubgaussianStandard {
    match spec {
        DistributionSpec::Gaussian { sigma } => SubgaussianStandard { value: *sigma, exactness: Exactness::Exact },
        DistributionSpec::Rademacher => SubgaussianStandard { value: 1.0, exactness: Exactness::Exact },
        // Certified by `certify_uniform_tau`.
        DistributionSpec::UniformSym { half_width } => SubgaussianStandard {
            value: half_width / 3f64.sqrt(),
            exactness: Exactness::Exact,
        },
        // Hoeffding's lemma.
        DistributionSpec::BoundedCentered { lo, hi, .. } => SubgaussianStandard {
            value: 0.5 * (hi - lo),
            exactness: Exactness::UpperBound,
        },
        DistributionSpec::Scaled { inner, factor } => {
            let base = tau_of_valid(inner);
            SubgaussianStandard { value: factor.abs() * base.value, exactness: base.exactness }
        }
    }
}

/// Numerically certifies `sinh(t)/t <= exp(t^2/6)` on `(0, 50]`, which makes
/// `h / sqrt(3)` an upper bound for the symmetric uniform law on `[-h, h]`;
/// it is also a lower bound since the second moment is `h^2/3`.
///
/// Points below `1e-3` are covered by the series
/// `ln(sinh t / t) = t^2/6 - t^4/180 + O(t^6)`.
pub fn certify_uniform_tau() -> bool {
    let steps = 200_000;
    (1..=steps).all(|i| {
        let t = 1e-3 + (50.0 - 1e-3) * i as f64 / steps as f64;
        (t.sinh() / t).ln() <= t * t / 6.0
    })
}

/// Symmetric geometric grid `+-2^k`, `k = -4..=3`.
pub fn default_t_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (-4..=3).map(|k| -(2f64.powi(k))).rev().collect();
    grid.extend((-4..=3).map(|k| 2f64.powi(k)));
    grid
}

fn validate_grid(t_grid: &[f64], allow_zero: bool) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::domain("t-grid must be nonempty"));
    }
    for &t in t_grid {
        if !t.is_finite() || (!allow_zero && t == 0.0) {
            return Err(Error::domain(format!("invalid t-grid entry {t}")));
        }
    }
    Ok(())
}

/// `ln( mean_i exp(t x_i) )`, evaluated with the log-sum-exp shift so large
/// `t x_i` never overflow.
pub fn log_mgf_empirical(batch: &SampleBatch, t: f64) -> f64 {
    let xs = batch.values();
    let shift = xs.iter().fold(f64::NEG_INFINITY, |m, x| m.max(t * x));
    let sum: f64 = xs.iter().map(|x| (t * x - shift).exp()).sum();
    shift + (sum / xs.len() as f64).ln()
}

/// `sup_t sqrt(max(0, 2 ln m(t)) / t^2)` over the grid, `m` the empirical mgf.
pub fn tau_empirical(batch: &SampleBatch, t_grid: &[f64]) -> Result<SubgaussianStandard> {
    validate_grid(t_grid, false)?;
    let value = t_grid
        .iter()
        .map(|&t| (2.0 * log_mgf_empirical(batch, t)).max(0.0).sqrt() / t.abs())
        .fold(0.0_f64, f64::max);
    Ok(SubgaussianStandard { value, exactness: Exactness::Empirical { t_grid: t_grid.to_vec() } })
}

/// Allowance for sampling error in [`mgf_dominated`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MgfSlack {
    /// Multiply the bound by `1 + r`.
    Relative(f64),
    /// Subtract `k` standard errors from the empirical mean before comparing.
    StandardErrors(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfRow {
    pub t: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfReport {
    pub dominated: bool,
    pub rows: Vec<MgfRow>,
}

/// Checks `m(t) <= exp(tau^2 t^2 / 2)` at every grid point, up to `slack`.
pub fn mgf_dominated(batch: &SampleBatch, tau: f64, t_grid: &[f64], slack: MgfSlack) -> Result<MgfReport> {
    validate_grid(t_grid, true)?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::domain(format!("tau must be finite and >= 0, got {tau}")));
    }
    let n = batch.count() as f64;
    let rows: Vec<MgfRow> = t_grid
        .iter()
        .map(|&t| {
            let (mean, sq) = batch
                .values()
                .iter()
                .map(|x| (t * x).exp())
                .fold((0.0, 0.0), |(s, q), e| (s + e, q + e * e));
            let empirical = mean / n;
            let var = (sq / n - empirical * empirical).max(0.0);
            let std_error = (var / n).sqrt();
            let bound = (0.5 * tau * tau * t * t).exp();
            let ok = match slack {
                MgfSlack::Relative(r) => empirical <= bound * (1.0 + r),
                MgfSlack::StandardErrors(k) => empirical - k * std_error <= bound,
            };
            MgfRow { t, empirical, std_error, bound, ok }
        })
        .collect();
    Ok(MgfReport { dominated: rows.iter().all(|r| r.ok), rows })
}

/// `sum_k tau_k`: the subgaussian standard bound for a sum of arbitrarily
/// dependent summands, by the triangle inequality.
pub fn tau_triangle_bound(taus: &[f64]) -> Result<f64> {
    if let Some(t) = taus.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::domain(format!("tau entries must be finite and >= 0, got {t}")));
    }
    Ok(taus.iter().sum())
}
