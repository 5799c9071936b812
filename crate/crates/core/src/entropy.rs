//! Cumulative-weight pseudo-metrics on the integers, their covering numbers,
//! the entropy integral for `phi`, and the chaining constant `C(alpha)`.
//!
//! For positive weights `u_1, u_2, ...` with partial sums `U_0 = 0`,
//! `U_n = u_1 + ... + u_n`, the map `d(i, j) = |U_j - U_i|^alpha` is a
//! pseudo-metric on `{0, 1, 2, ...}` whenever `0 < alpha <= 1`.
//! Indices past the last stored weight sit at `U = total` (zero tail).

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quadrature;

/// Weights `u_k` (1-based) with their running sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightSequence {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl WeightSequence {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((k, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::domain(format!("weight u_{} must be finite and >= 0, got {w}", k + 1)));
        }
        let mut cumulative = Vec::with_capacity(weights.len() + 1);
        let mut acc = 0.0;
        cumulative.push(acc);
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        Ok(Self { weights, cumulative })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `U_n`; equals `total()` for `n` past the stored weights.
    pub fn cumulative(&self, n: usize) -> f64 {
        self.cumulative[n.min(self.weights.len())]
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("U_0 is always stored")
    }

    /// `u_{n+1} + ... + u_m` for `n <= m`.
    pub fn range_sum(&self, n: usize, m: usize) -> f64 {
        (self.cumulative(m) - self.cumulative(n)).max(0.0)
    }
}

impl TryFrom<Vec<f64>> for WeightSequence {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightSequence> for Vec<f64> {
    fn from(w: WeightSequence) -> Self {
        w.weights
    }
}

/// `d(i, j) = (u_{i^j+1} + ... + u_{i v j})^alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaMetric {
    weights: WeightSequence,
    alpha: f64,
}

impl AlphaMetric {
    pub fn new(weights: WeightSequence, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { weights, alpha })
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The triangle inequality is only guaranteed for `alpha <= 1`.
    pub fn is_metric(&self) -> bool {
        self.alpha <= 1.0
    }

    pub fn eval(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        self.weights.range_sum(lo, hi).powf(self.alpha)
    }

    /// Diameter of `{0, ..., max_index}`.
    pub fn diameter(&self, max_index: usize) -> f64 {
        self.eval(0, max_index)
    }
}

/// Distance between two indices, validating that both are nonnegative.
pub fn metric_eval(metric: &AlphaMetric, i: i64, j: i64) -> Result<f64> {
    if i < 0 || j < 0 {
        return Err(Error::domain(format!("indices must be >= 0, got ({i}, {j})")));
    }
    Ok(metric.eval(i as usize, j as usize))
}

/// A minimal cover of `{0, ..., max_index}` by open balls centered in the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringResult {
    pub epsilon: f64,
    pub count: usize,
    pub centers: Vec<usize>,
}

impl CoveringResult {
    /// Whether every index in `0..=max_index` lies in some open ball.
    pub fn covers(&self, metric: &AlphaMetric, max_index: usize) -> bool {
        (0..=max_index).all(|p| self.centers.iter().any(|&c| metric.eval(p, c) < self.epsilon))
    }
}

/// Exact covering number of `{0, ..., max_index}` by open `epsilon`-balls.
///
/// The points are ordered along the line by their cumulative weight, so a
/// left-to-right sweep is optimal: take the leftmost uncovered point, center
/// a ball at the rightmost point still within `epsilon` of it, and skip
/// everything that ball reaches.
pub fn covering_number(metric: &AlphaMetric, epsilon: f64, max_index: usize) -> Result<CoveringResult> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut centers = Vec::new();
    let mut p = 0usize;
    loop {
        let mut c = p;
        while c < max_index && metric.eval(p, c + 1) < epsilon {
            c += 1;
        }
        centers.push(c);
        let mut q = c + 1;
        while q <= max_index && metric.eval(c, q) < epsilon {
            q += 1;
        }
        if q > max_index {
            break;
        }
        p = q;
    }
    Ok(CoveringResult { epsilon, count: centers.len(), centers })
}

/// `2 u epsilon^{-1/alpha}`: covering bound for the full index set, valid on
/// `0 < epsilon < u^alpha`.
pub fn covering_bound(total: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    if !(total > 0.0 && total.is_finite()) || !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("need total > 0 and alpha > 0, got ({total}, {alpha})")));
    }
    if !(epsilon > 0.0 && epsilon < total.powf(alpha)) {
        return Err(Error::domain(format!(
            "epsilon must lie in (0, total^alpha) = (0, {}), got {epsilon}",
            total.powf(alpha)
        )));
    }
    Ok(2.0 * total * epsilon.powf(-1.0 / alpha))
}

/// Controls for [`dudley_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Uniform panels before adaptive refinement.
    pub initial_panels: usize,
    /// Refinement stops when successive estimates agree to this relative tolerance.
    pub rel_tol: f64,
    /// Maximum number of halvings.
    pub max_levels: u32,
    /// Dyadic levels probed near zero for blow-up detection.
    pub probe_levels: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { initial_panels: 64, rel_tol: 1e-6, max_levels: 48, probe_levels: 48 }
    }
}

/// Result of an entropy-integral evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DudleyIntegral {
    Converged {
        value: f64,
        /// Estimate at the previous refinement level.
        previous: f64,
        levels: u32,
    },
    /// The covering function grows too fast near zero for the integral to exist.
    Divergent { probe_terms: Vec<f64> },
}

impl DudleyIntegral {
    pub fn value(&self) -> Option<f64> {
        match self {
            DudleyIntegral::Converged { value, .. } => Some(*value),
            DudleyIntegral::Divergent { .. } => None,
        }
    }
}

fn integrand<F: Fn(f64) -> f64>(covering: &F, eps: f64) -> f64 {
    covering(eps).ln_1p().sqrt()
}

/// `int_0^diam sqrt(ln(N(eps) + 1)) d eps` for a nonincreasing covering function `N`.
///
/// The integrand is piecewise constant with jumps where `N` changes. Each
/// refinement level halves every panel whose endpoint counts differ and
/// treats panels with equal endpoint counts as flat, so the estimate at a
/// level is exact up to the jump panels still unresolved. Refinement stops
/// once two consecutive levels agree to `rel_tol`.
///
/// Before integrating, `N` is probed at `diam 2^{-k}`; if the dyadic terms
/// `2^{-k} sqrt(ln(N + 1))` stop shrinking geometrically the integral is
/// reported as divergent.
pub fn dudley_integral<F: Fn(f64) -> f64>(covering: F, diam: f64, config: QuadratureConfig) -> Result<DudleyIntegral> {
    if !diam.is_finite() || diam < 0.0 {
        return Err(Error::domain(format!("diameter must be finite and >= 0, got {diam}")));
    }
    if diam == 0.0 {
        return Ok(DudleyIntegral::Converged { value: 0.0, previous: 0.0, levels: 0 });
    }

    let probe_terms: Vec<f64> = (0..=config.probe_levels)
        .map(|k| {
            let eps = diam * 0.5f64.powi(k as i32);
            eps * integrand(&covering, eps)
        })
        .collect();
    if probe_terms.iter().any(|t| !t.is_finite()) {
        return Ok(DudleyIntegral::Divergent { probe_terms });
    }
    let tail = &probe_terms[probe_terms.len().saturating_sub(8)..];
    if tail.windows(2).all(|w| w[0] > 0.0 && w[1] >= 0.9 * w[0]) {
        return Ok(DudleyIntegral::Divergent { probe_terms });
    }

    // Panels (a, b, N(a) integrand, N(b) integrand) covering (0, diam].
    // The leftmost panel starts at the smallest probe radius; below that the
    // integrand is bounded by its value there.
    let floor = diam * 0.5f64.powi(config.probe_levels as i32);
    let n0 = config.initial_panels.max(1);
    let mut grid: Vec<f64> = (0..=n0).map(|i| floor + (diam - floor) * i as f64 / n0 as f64).collect();
    let mut vals: Vec<f64> = grid.iter().map(|&e| integrand(&covering, e)).collect();
    let head = floor * integrand(&covering, floor);

    // A flat panel takes its right-end value (N is left-continuous for open balls
    // only in the limit, so use the larger left value on unresolved jumps).
    let estimate = |grid: &[f64], vals: &[f64]| -> f64 {
        head + grid
            .windows(2)
            .zip(vals.windows(2))
            .map(|(g, v)| (g[1] - g[0]) * if v[0] == v[1] { v[0] } else { 0.5 * (v[0] + v[1]) })
            .sum::<f64>()
    };

    let mut previous = estimate(&grid, &vals);
    for level in 1..=config.max_levels {
        let mut next_grid = Vec::with_capacity(grid.len() * 2);
        let mut next_vals = Vec::with_capacity(grid.len() * 2);
        let mut refined = false;
        for i in 0..grid.len() - 1 {
            next_grid.push(grid[i]);
            next_vals.push(vals[i]);
            if vals[i] != vals[i + 1] {
                let mid = 0.5 * (grid[i] + grid[i + 1]);
                if mid > grid[i] && mid < grid[i + 1] {
                    next_grid.push(mid);
                    next_vals.push(integrand(&covering, mid));
                    refined = true;
                }
            }
        }
        next_grid.push(*grid.last().expect("nonempty"));
        next_vals.push(*vals.last().expect("nonempty"));
        grid = next_grid;
        vals = next_vals;
        let value = estimate(&grid, &vals);
        let converged = (value - previous).abs() <= config.rel_tol * value.abs().max(f64::MIN_POSITIVE);
        if converged || !refined {
            return Ok(DudleyIntegral::Converged { value, previous, levels: level });
        }
        previous = value;
    }
    let value = estimate(&grid, &vals);
    Ok(DudleyIntegral::Converged { value, previous, levels: config.max_levels })
}

/// Entropy integral of `{0, ..., max_index}` under `metric`.
pub fn dudley_integral_for(metric: &AlphaMetric, max_index: usize, config: QuadratureConfig) -> Result<DudleyIntegral> {
    let diam = metric.diameter(max_index);
    dudley_integral(
        |eps| covering_number(metric, eps, max_index).map(|c| c.count as f64).unwrap_or(f64::INFINITY),
        diam,
        config,
    )
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// `2^{2 alpha + 2} / sqrt(alpha)`
fn constant_prefactor(alpha: f64) -> f64 {
    2f64.powf(2.0 * alpha + 2.0) / alpha.sqrt()
}

/// Lower limit `sqrt(alpha ln 3)` of the tail integral in `C(alpha)`.
fn constant_lower_limit(alpha: f64) -> f64 {
    (alpha * 3f64.ln()).sqrt()
}

/// `C(alpha) = 2^{2 alpha + 2} / sqrt(alpha) * int_{sqrt(alpha ln 3)}^inf x^2 e^{-x^2} dx`,
/// using `int_a^inf x^2 e^{-x^2} dx = (a/2) e^{-a^2} + (sqrt(pi)/4) erfc(a)`.
pub fn constant_c(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let a = constant_lower_limit(alpha);
    let tail = 0.5 * a * (-a * a).exp() + 0.25 * std::f64::consts::PI.sqrt() * erfc(a);
    Ok(constant_prefactor(alpha) * tail)
}

/// `C(alpha)` by adaptive Gauss-Kronrod quadrature of the tail integral,
/// truncated where `x^2 e^{-x^2} < 1e-16`.
pub fn constant_c_quadrature(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let a = constant_lower_limit(alpha);
    let mut upper = a.max(1.0);
    while upper * upper * (-upper * upper).exp() >= 1e-16 {
        upper += 0.25;
    }
    let tail = quadrature::integrate(|x| x * x * (-x * x).exp(), a, upper, 1e-15, 1e-13)?;
    Ok(constant_prefactor(alpha) * tail)
}

/// `sqrt(2/alpha) [ (4/3)^alpha sqrt(2 alpha ln 3) + 4^alpha sqrt(pi/2) ]`,
/// a closed-form upper bound on `C(alpha)`.
pub fn constant_c_upper(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let first = (4.0f64 / 3.0).powf(alpha) * (2.0 * alpha * 3f64.ln()).sqrt();
    let second = 4f64.powf(alpha) * (std::f64::consts::PI / 2.0).sqrt();
    Ok((2.0 / alpha).sqrt() * (first + second))
}

/// The published reference value for `C(1/2)`.
pub const PRINTED_C_HALF: f64 = 8.26;

/// One row of the constants table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub alpha: f64,
    pub c_computed: f64,
    pub c_quadrature: f64,
    pub c_upper: f64,
    /// Only defined for `alpha = 1/2`.
    pub c_printed: Option<f64>,
}

pub fn constants_row(alpha: f64) -> Result<ConstantsRow> {
    Ok(ConstantsRow {
        alpha,
        c_computed: constant_c(alpha)?,
        c_quadrature: constant_c_quadrature(alpha)?,
        c_upper: constant_c_upper(alpha)?,
        c_printed: (alpha == 0.5).then_some(PRINTED_C_HALF),
    })
}
