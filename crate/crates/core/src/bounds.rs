//! Right-hand sides of the maximal, limit and tail inequalities.
//!
//! Every maximal bound takes a [`ConstantChoice`] so the same inequality can
//! be evaluated with the computed `C(alpha)` and with the printed `C(1/2)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::entropy::{constant_c, WeightSequence, PRINTED_C_HALF};
use crate::error::{Error, Result};
use crate::orlicz::EQUIV_UPPER;
use crate::quadrature::integrate_to_infinity;

/// Which value of `C(alpha)` a bound is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    Computed,
    PaperPrinted,
}

impl ConstantMode {
    pub fn label(self) -> &'static str {
        match self {
            ConstantMode::Computed => "computed",
            ConstantMode::PaperPrinted => "paper_printed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantChoice {
    pub mode: ConstantMode,
    pub value: f64,
}

impl ConstantChoice {
    pub fn computed(alpha: f64) -> Result<Self> {
        Ok(Self { mode: ConstantMode::Computed, value: constant_c(alpha)? })
    }

    /// The printed constant exists only for `alpha = 1/2`.
    pub fn printed(alpha: f64) -> Result<Self> {
        if alpha == 0.5 {
            Ok(Self { mode: ConstantMode::PaperPrinted, value: PRINTED_C_HALF })
        } else {
            Err(Error::Unsupported(format!("no printed C({alpha}); only C(1/2) is printed")))
        }
    }

    pub fn new(mode: ConstantMode, alpha: f64) -> Result<Self> {
        match mode {
            ConstantMode::Computed => Self::computed(alpha),
            ConstantMode::PaperPrinted => Self::printed(alpha),
        }
    }

    /// An arbitrary positive constant, labelled as computed.
    pub fn explicit(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::domain(format!("constant must be positive, got {value}")));
        }
        Ok(Self { mode: ConstantMode::Computed, value })
    }
}

/// One evaluated right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_id: String,
    pub rhs: f64,
    pub inputs: BTreeMap<String, f64>,
    pub citation: String,
    pub constant_mode: Option<ConstantMode>,
}

impl BoundReport {
    fn new(bound_id: &str, citation: &str, rhs: f64, inputs: &[(&str, f64)], mode: Option<ConstantMode>) -> Self {
        Self {
            bound_id: bound_id.to_string(),
            rhs,
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            citation: citation.to_string(),
            constant_mode: mode,
        }
    }
}

/// `16 sqrt(1 + sqrt 2)`, about 24.860.
pub fn nd_max_factor() -> f64 {
    16.0 * (1.0 + 2f64.sqrt()).sqrt()
}

/// `8 sqrt(2 + 2 sqrt 2)`, about 17.579.
pub fn subgaussian_max_factor() -> f64 {
    8.0 * EQUIV_UPPER
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

fn check_range(n: usize, m: usize) -> Result<()> {
    if n >= m {
        return Err(Error::domain(format!("need n < m, got n = {n}, m = {m}")));
    }
    Ok(())
}

/// `8 C(alpha) (U_m - U_n)^alpha`: the entropy-chaining bound on the
/// `phi`-norm of the maximal partial-sum increment over `(n, m]`.
pub fn chaining_max_bound(weights: &WeightSequence, alpha: f64, n: usize, m: usize, c: ConstantChoice) -> Result<BoundReport> {
    check_alpha(alpha)?;
    check_range(n, m)?;
    let s = weights.range_sum(n, m);
    let rhs = 8.0 * c.value * s.powf(alpha);
    Ok(BoundReport::new(
        "chaining_max",
        "entropy-chaining maximal inequality",
        rhs,
        &[("alpha", alpha), ("n", n as f64), ("m", m as f64), ("weight_sum", s), ("c", c.value)],
        Some(c.mode),
    ))
}

/// `u^alpha`: bound on the `phi`-norm of the limit of the series.
pub fn limit_norm_bound(weights: &WeightSequence, alpha: f64) -> Result<BoundReport> {
    check_alpha(alpha)?;
    let u = weights.total();
    Ok(BoundReport::new(
        "limit_norm",
        "entropy-chaining limit norm",
        u.powf(alpha),
        &[("alpha", alpha), ("total", u)],
        None,
    ))
}

/// `8 sqrt(2 + 2 sqrt 2) C(alpha) (U_m - U_n)^alpha` for processes with
/// `d_{u,alpha}`-subgaussian increments, `0 < alpha <= 1`.
pub fn subgaussian_max_bound(weights: &WeightSequence, alpha: f64, n: usize, m: usize, c: ConstantChoice) -> Result<BoundReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    check_range(n, m)?;
    let s = weights.range_sum(n, m);
    let rhs = subgaussian_max_factor() * c.value * s.powf(alpha);
    Ok(BoundReport::new(
        "subgaussian_max",
        "maximal inequality for subgaussian increments",
        rhs,
        &[("alpha", alpha), ("n", n as f64), ("m", m as f64), ("weight_sum", s), ("c", c.value)],
        Some(c.mode),
    ))
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::domain("sequences must be finite"));
    }
    Ok(())
}

fn check_nonnegative(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| *x < 0.0) {
        return Err(Error::domain(format!("{name} must be nonnegative")));
    }
    Ok(())
}

/// Limit bounds under absolute summability: `tau <= sum |a_k| tau_k`
/// and `||.||_phi <= sqrt(2 + 2 sqrt 2) tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsoluteSumBounds {
    pub tau_limit: BoundReport,
    pub phi_limit: BoundReport,
}

pub fn absolute_sum_bounds(a_seq: &[f64], tau_seq: &[f64]) -> Result<AbsoluteSumBounds> {
    check_pair(a_seq, tau_seq)?;
    check_nonnegative("tau_seq", tau_seq)?;
    let s: f64 = a_seq.iter().zip(tau_seq).map(|(a, t)| a.abs() * t).sum();
    Ok(AbsoluteSumBounds {
        tau_limit: BoundReport::new("absolute_sum_tau", "triangle inequality for tau", s, &[("abs_sum", s)], None),
        phi_limit: BoundReport::new(
            "absolute_sum_phi",
            "triangle inequality for tau with norm equivalence",
            EQUIV_UPPER * s,
            &[("abs_sum", s)],
            None,
        ),
    })
}

/// Maximal, subgaussian-standard and `phi`-norm bounds for a weighted series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesBounds {
    /// `A` for the ND class, `B` for the conditionally subgaussian class.
    pub scale: f64,
    pub max_norm: BoundReport,
    pub tau_limit: BoundReport,
    pub phi_limit: BoundReport,
}

fn weighted_l2(a_seq: &[f64], s_seq: &[f64]) -> f64 {
    a_seq.iter().zip(s_seq).map(|(a, s)| a * a * s * s).sum::<f64>().sqrt()
}

/// Negatively dependent summands with standards `tau_k`, `A^2 = sum a_k^2 tau_k^2`:
/// `max_norm = 16 sqrt(1 + sqrt 2) C A`, `tau_limit = sqrt 2 A`,
/// `phi_limit = 2 sqrt(1 + sqrt 2) A`.
pub fn nd_series_bounds(a_seq: &[f64], tau_seq: &[f64], c: ConstantChoice) -> Result<SeriesBounds> {
    check_pair(a_seq, tau_seq)?;
    check_nonnegative("tau_seq", tau_seq)?;
    let a = weighted_l2(a_seq, tau_seq);
    let inputs = [("scale", a), ("c", c.value)];
    let citation = "maximal inequality for negatively dependent series";
    Ok(SeriesBounds {
        scale: a,
        max_norm: BoundReport::new("nd_max_norm", citation, nd_max_factor() * c.value * a, &inputs, Some(c.mode)),
        tau_limit: BoundReport::new("nd_tau_limit", citation, 2f64.sqrt() * a, &inputs[..1], None),
        phi_limit: BoundReport::new("nd_phi_limit", citation, 2.0 * (1.0 + 2f64.sqrt()).sqrt() * a, &inputs[..1], None),
    })
}

/// Conditionally subgaussian summands with bounds `c_k`, `B^2 = sum a_k^2 c_k^2`:
/// `max_norm = 8 sqrt(2 + 2 sqrt 2) C B`, `tau_limit = B`,
/// `phi_limit = sqrt(2 + 2 sqrt 2) B`.
pub fn cs_series_bounds(a_seq: &[f64], c_seq: &[f64], c: ConstantChoice) -> Result<SeriesBounds> {
    check_pair(a_seq, c_seq)?;
    check_nonnegative("c_seq", c_seq)?;
    let b = weighted_l2(a_seq, c_seq);
    let inputs = [("scale", b), ("c", c.value)];
    let citation = "maximal inequality for conditionally subgaussian series";
    Ok(SeriesBounds {
        scale: b,
        max_norm: BoundReport::new("cs_max_norm", citation, subgaussian_max_factor() * c.value * b, &inputs, Some(c.mode)),
        tau_limit: BoundReport::new("cs_tau_limit", citation, b, &inputs[..1], None),
        phi_limit: BoundReport::new("cs_phi_limit", citation, EQUIV_UPPER * b, &inputs[..1], None),
    })
}

/// `sqrt(2 max(p, p') sum (a_k^2 + b_k^2))` for `R = sum a_k g_k + b_k g'_k`.
pub fn stationary_pair_tau_bound(a_seq: &[f64], b_seq: &[f64], p_g: f64, p_gp: f64) -> Result<BoundReport> {
    check_pair(a_seq, b_seq)?;
    if !(p_g >= 1.0 && p_gp >= 1.0) || !p_g.is_finite() || !p_gp.is_finite() {
        return Err(Error::domain(format!("decoupling coefficients must be finite and >= 1, got {p_g}, {p_gp}")));
    }
    let s: f64 = a_seq.iter().zip(b_seq).map(|(a, b)| a * a + b * b).sum();
    let p = p_g.max(p_gp);
    Ok(BoundReport::new(
        "stationary_pair_tau",
        "decoupled stationary Gaussian pair",
        (2.0 * p * s).sqrt(),
        &[("p_g", p_g), ("p_gp", p_gp), ("square_sum", s)],
        None,
    ))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v <= 0.0 {
        return Err(Error::domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// `2 exp(-t^2 / (4 A^2))`.
pub fn tail_bound_nd(t: f64, a: f64) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("A", a)?;
    Ok(2.0 * (-t * t / (4.0 * a * a)).exp())
}

/// `2 exp(-t^2 / (2 B^2))`.
pub fn tail_bound_cs(t: f64, b: f64) -> Result<f64> {
    check_positive("t", t)?;
    check_positive("B", b)?;
    Ok(2.0 * (-t * t / (2.0 * b * b)).exp())
}

/// Which tail exponent a summability check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    /// `exp(-t^2 / (4 A_n^2))`
    Nd,
    /// `exp(-t^2 / (2 B_n^2))`
    Cs,
}

impl TailKind {
    fn divisor(self) -> f64 {
        match self {
            TailKind::Nd => 4.0,
            TailKind::Cs => 2.0,
        }
    }
}

/// Caller-declared domination of the squared scales beyond the supplied
/// prefix: `scale_n^2 <= coef * n^{-p} * (ln n)^{-q}` for every later `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailEnvelope {
    PowerLog { coef: f64, p: f64, q: f64 },
}

impl TailEnvelope {
    fn validate(&self) -> Result<()> {
        let TailEnvelope::PowerLog { coef, p, q } = *self;
        if !(coef.is_finite() && coef > 0.0 && p.is_finite() && p >= 0.0 && q.is_finite() && q >= 0.0) {
            return Err(Error::domain("power-log envelope needs coef > 0 and p, q >= 0"));
        }
        Ok(())
    }

    fn squared_scale(&self, n: f64) -> f64 {
        let TailEnvelope::PowerLog { coef, p, q } = *self;
        coef * n.powf(-p) * n.ln().powf(-q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVerdict {
    Convergent,
    /// The envelope-dominated series diverges, so convergence is not established.
    Divergent,
    /// No envelope was declared.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub verdict: SeriesVerdict,
    /// Partial sums of the supplied terms.
    pub partial_sums: Vec<f64>,
    /// Upper bound on the sum of all terms beyond the supplied prefix.
    pub tail_bound: Option<f64>,
    /// Supplied indices `n >= 2` whose squared scale exceeds the envelope.
    pub envelope_violations: usize,
}

impl SummabilityReport {
    pub fn holds(&self) -> Option<bool> {
        match self.verdict {
            SeriesVerdict::Convergent => Some(true),
            SeriesVerdict::Divergent => Some(false),
            SeriesVerdict::Indeterminate => None,
        }
    }
}

/// Decides whether `sum_n exp(-t^2 / (k scale_n^2))` is finite, with `k = 4`
/// for the ND kind and `k = 2` for the conditionally subgaussian kind.
///
/// The supplied scales cover `n = 1..=N`. Beyond that the envelope is used;
/// with envelope terms `f(x) = exp(-kappa x^p (ln x)^q)`, `kappa = t^2 / (k coef)`,
/// the tail is bounded by `f(N') + int_{N'}^inf f`, `N' = max(N + 1, 2)`.
pub fn tail_summability_check(scale_seq: &[f64], t: f64, kind: TailKind, envelope: Option<TailEnvelope>) -> Result<SummabilityReport> {
    check_positive("t", t)?;
    if scale_seq.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::domain("scales must be finite and >= 0"));
    }
    let k = kind.divisor();
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = scale_seq
        .iter()
        .map(|s| {
            acc += (-t * t / (k * s * s)).exp();
            acc
        })
        .collect();

    let Some(env) = envelope else {
        let verdict = if scale_seq.is_empty() { SeriesVerdict::Convergent } else { SeriesVerdict::Indeterminate };
        let tail_bound = scale_seq.is_empty().then_some(0.0);
        return Ok(SummabilityReport { verdict, partial_sums, tail_bound, envelope_violations: 0 });
    };
    env.validate()?;
    let envelope_violations = scale_seq
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(i, s)| *s * *s > env.squared_scale((i + 1) as f64) * (1.0 + 1e-12))
        .count();

    let TailEnvelope::PowerLog { coef, p, q } = env;
    let kappa = t * t / (k * coef);
    // The n = 1 term is at most 1 when no prefix is supplied.
    let first_free = if scale_seq.is_empty() { 1.0 } else { 0.0 };
    let start = (scale_seq.len() + 1).max(2) as f64;
    let convergent = p > 0.0 || q > 1.0 || (q == 1.0 && kappa > 1.0);
    if !convergent {
        return Ok(SummabilityReport { verdict: SeriesVerdict::Divergent, partial_sums, tail_bound: None, envelope_violations });
    }
    let term = |x: f64| (-kappa * x.powf(p) * x.ln().powf(q)).exp();
    // x = e^y turns the tail integral into a rapidly decaying one.
    let integral = integrate_to_infinity(|y: f64| (y - kappa * (p * y).exp() * y.powf(q)).exp(), start.ln(), 1e-14, 1e-10)?;
    Ok(SummabilityReport {
        verdict: SeriesVerdict::Convergent,
        partial_sums,
        tail_bound: Some(first_free + term(start) + integral),
        envelope_violations,
    })
}

/// `(n (ln n)^{1 + beta})^{-1/2}`, the normalizer in the strong law for
/// subgaussian series with bounded standards.
pub fn slln_normalizer(n: f64, beta: f64) -> Result<f64> {
    if n.is_nan() || n < 2.0 {
        return Err(Error::domain(format!("normalizer needs n >= 2, got {n}")));
    }
    check_positive("beta", beta)?;
    Ok((n * n.ln().powf(1.0 + beta)).powf(-0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ws(v: &[f64]) -> WeightSequence {
        WeightSequence::new(v.to_vec()).unwrap()
    }

    fn unit() -> ConstantChoice {
        ConstantChoice::explicit(1.0).unwrap()
    }

    #[test]
    fn factors() {
        assert!((nd_max_factor() - 24.860).abs() < 1e-3);
        assert!((subgaussian_max_factor() - 17.579).abs() < 1e-3);
    }

    #[test]
    fn constant_choices() {
        assert_eq!(ConstantChoice::printed(0.5).unwrap().value, 8.26);
        assert!(ConstantChoice::printed(1.0).is_err());
        assert_eq!(ConstantChoice::computed(0.5).unwrap().value, constant_c(0.5).unwrap());
        assert!(ConstantChoice::explicit(0.0).is_err());
    }

    #[test]
    fn chaining_examples() {
        let c1 = ConstantChoice::computed(1.0).unwrap();
        assert_eq!(chaining_max_bound(&ws(&[0.0, 0.0]), 1.0, 0, 2, c1).unwrap().rhs, 0.0);
        let r = chaining_max_bound(&ws(&[0.25; 4]), 1.0, 0, 4, c1).unwrap();
        assert!((r.rhs - 8.0 * constant_c(1.0).unwrap()).abs() < 1e-12);
        let c = ConstantChoice::explicit(3.0).unwrap();
        assert!((chaining_max_bound(&ws(&[1.0; 4]), 0.5, 0, 4, c).unwrap().rhs - 48.0).abs() < 1e-12);
        assert!(chaining_max_bound(&ws(&[1.0]), 0.5, 1, 1, c).is_err());
    }

    #[test]
    fn limit_norm_examples() {
        assert!((limit_norm_bound(&ws(&[1.0]), 0.5).unwrap().rhs - 1.0).abs() < 1e-15);
        assert!((limit_norm_bound(&ws(&[2.0, 2.0]), 0.5).unwrap().rhs - 2.0).abs() < 1e-15);
        assert_eq!(limit_norm_bound(&ws(&[]), 0.7).unwrap().rhs, 0.0);
    }

    #[test]
    fn subgaussian_max_examples() {
        let c = ConstantChoice::computed(1.0).unwrap();
        let r = subgaussian_max_bound(&ws(&[1.0]), 1.0, 0, 1, c).unwrap();
        assert!((r.rhs / c.value - 17.579).abs() < 1e-3);
        assert_eq!(subgaussian_max_bound(&ws(&[0.0, 0.0]), 1.0, 0, 2, c).unwrap().rhs, 0.0);
        assert!((subgaussian_max_bound(&ws(&[1.0]), 0.5, 0, 1, unit()).unwrap().rhs - 17.579).abs() < 1e-3);
        assert!(subgaussian_max_bound(&ws(&[1.0]), 1.5, 0, 1, unit()).is_err());
    }

    #[test]
    fn absolute_sum_examples() {
        let a: Vec<f64> = (1..=60).map(|k| 0.5f64.powi(k)).collect();
        let r = absolute_sum_bounds(&a, &[1.0; 60]).unwrap();
        assert!((r.tau_limit.rhs - 1.0).abs() < 1e-15);
        assert_eq!(absolute_sum_bounds(&[0.0; 3], &[1.0; 3]).unwrap().tau_limit.rhs, 0.0);
        let r = absolute_sum_bounds(&[1.0, 1.0], &[2.0, 3.0]).unwrap();
        assert_eq!(r.tau_limit.rhs, 5.0);
        assert!((r.phi_limit.rhs - 5.0 * EQUIV_UPPER).abs() < 1e-12);
        assert!(absolute_sum_bounds(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn nd_examples() {
        let printed = ConstantChoice::printed(0.5).unwrap();
        let r = nd_series_bounds(&[1.0], &[1.0], printed).unwrap();
        assert!((r.max_norm.rhs - 205.35).abs() < 0.01, "{}", r.max_norm.rhs);
        assert_eq!(r.max_norm.constant_mode, Some(ConstantMode::PaperPrinted));
        let computed = ConstantChoice::computed(0.5).unwrap();
        let r = nd_series_bounds(&[1.0], &[1.0], computed).unwrap();
        assert!((r.max_norm.rhs - nd_max_factor() * constant_c(0.5).unwrap()).abs() < 1e-12);
        assert!((r.tau_limit.rhs - 2f64.sqrt()).abs() < 1e-15);
        assert!((r.phi_limit.rhs - 3.1075).abs() < 1e-4);
        let z = nd_series_bounds(&[0.0, 0.0], &[1.0, 2.0], computed).unwrap();
        assert_eq!((z.max_norm.rhs, z.tau_limit.rhs, z.phi_limit.rhs), (0.0, 0.0, 0.0));
    }

    #[test]
    fn cs_examples() {
        let c = unit();
        assert_eq!(cs_series_bounds(&[1.0], &[1.0], c).unwrap().tau_limit.rhs, 1.0);
        assert!((cs_series_bounds(&[1.0, 2.0], &[2.0, 1.0], c).unwrap().scale - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(cs_series_bounds(&[0.0], &[1.0], c).unwrap().max_norm.rhs, 0.0);
        assert!((cs_series_bounds(&[1.0], &[1.0], c).unwrap().phi_limit.rhs - 2.1974).abs() < 1e-4);
    }

    #[test]
    fn stationary_pair_examples() {
        assert!((stationary_pair_tau_bound(&[1.0], &[0.0], 1.0, 1.0).unwrap().rhs - 2f64.sqrt()).abs() < 1e-15);
        assert!((stationary_pair_tau_bound(&[1.0], &[1.0], 2.0, 1.0).unwrap().rhs - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(stationary_pair_tau_bound(&[0.0], &[0.0], 1.0, 1.0).unwrap().rhs, 0.0);
        assert!(stationary_pair_tau_bound(&[1.0], &[1.0], 0.9, 1.0).is_err());
    }

    #[test]
    fn tail_examples() {
        assert!((tail_bound_nd(2.0, 1.0).unwrap() - 0.735_758_882_342_885).abs() < 1e-12);
        assert!((tail_bound_cs(2.0, 1.0).unwrap() - 0.270_670_566_473_225_4).abs() < 1e-12);
        assert_eq!(tail_bound_nd(1e200, 1.0).unwrap(), 0.0);
        assert!(tail_bound_nd(0.0, 1.0).is_err());
        assert!(tail_bound_cs(1.0, -1.0).is_err());
        assert!((tail_bound_nd(1.5, 1.0).unwrap() - 1.139_6).abs() < 1e-4);
        assert!((tail_bound_nd(3.0, 1.0).unwrap() - 0.2108).abs() < 1e-3);
    }

    #[test]
    fn tail_optimization_identity() {
        // min over lambda > 0 of 2 exp(-lambda t + A^2 lambda^2) is attained at lambda = t / (2 A^2).
        for (t, a) in [(2.0, 1.0), (1.0, 0.5), (3.0, 2.0), (0.3, 1.7)] {
            let closed = tail_bound_nd(t, a).unwrap();
            let lam_star = t / (2.0 * a * a);
            let grid_min = (1..=200_000)
                .map(|i| lam_star * 2.0 * i as f64 / 200_000.0)
                .map(|l| 2.0 * (-l * t + a * a * l * l).exp())
                .fold(f64::INFINITY, f64::min);
            assert!(grid_min >= closed - 1e-15 && grid_min - closed < 1e-9, "{t} {a}");
        }
    }

    #[test]
    fn summability_examples() {
        let n_max = 1000;
        let scales: Vec<f64> = (1..=n_max).map(|n| if n == 1 { 1.0 } else { 1.0 / (n as f64).ln() }).collect();
        let env = TailEnvelope::PowerLog { coef: 1.0, p: 0.0, q: 2.0 };
        let r = tail_summability_check(&scales, 1.0, TailKind::Nd, Some(env)).unwrap();
        assert_eq!(r.holds(), Some(true));
        assert_eq!(r.envelope_violations, 0);
        // Oracle: int_N^inf exp(-ln^2 x / 4) dx.
        let oracle = integrate_to_infinity(|x: f64| (-(x.ln().powi(2)) / 4.0).exp(), (n_max + 1) as f64, 1e-12, 1e-10).unwrap();
        let tail = r.tail_bound.unwrap();
        assert!(tail >= oracle && tail <= oracle + 1.0, "{tail} {oracle}");

        let ones = vec![1.0; 50];
        let flat = TailEnvelope::PowerLog { coef: 1.0, p: 0.0, q: 0.0 };
        assert_eq!(tail_summability_check(&ones, 3.0, TailKind::Cs, Some(flat)).unwrap().holds(), Some(false));
        assert_eq!(tail_summability_check(&ones, 3.0, TailKind::Cs, None).unwrap().holds(), None);
        assert_eq!(tail_summability_check(&[], 1.0, TailKind::Nd, None).unwrap().holds(), Some(true));
        let r = tail_summability_check(&ones, 1.0, TailKind::Nd, None).unwrap();
        assert!((r.partial_sums[49] - 50.0 * (-0.25f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn summability_power_log_boundary() {
        // q = 1: terms n^{-kappa}; kappa = t^2 / 4 for coef = 1.
        let env = TailEnvelope::PowerLog { coef: 1.0, p: 0.0, q: 1.0 };
        assert_eq!(tail_summability_check(&[], 1.0, TailKind::Nd, Some(env)).unwrap().holds(), Some(false));
        let r = tail_summability_check(&[], 4.0, TailKind::Nd, Some(env)).unwrap();
        assert_eq!(r.holds(), Some(true));
        // kappa = 4: 1 + 2^-4 + int_2^inf x^-4 dx = 1 + 1/16 + 1/24.
        assert!((r.tail_bound.unwrap() - (1.0 + 1.0 / 16.0 + 1.0 / 24.0)).abs() < 1e-8);
    }

    #[test]
    fn normalizer_examples() {
        let e2 = std::f64::consts::E.powi(2);
        assert!((slln_normalizer(e2, 1.0).unwrap() - (e2 * 4.0).powf(-0.5)).abs() < 1e-15);
        assert!(slln_normalizer(1.5, 1.0).is_err());
        let seq: Vec<f64> = (2..200).map(|n| slln_normalizer(n as f64, 1.0).unwrap()).collect();
        assert!(seq.windows(2).all(|w| w[1] < w[0]));
        assert!(slln_normalizer(100.0, 2.0).unwrap() < slln_normalizer(100.0, 1.0).unwrap());
    }

    #[test]
    fn report_json_field_names() {
        let r = nd_series_bounds(&[1.0], &[1.0], unit()).unwrap().max_norm;
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["bound_id", "rhs", "inputs", "citation", "constant_mode"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["constant_mode"], "computed");
    }

    proptest! {
        #[test]
        fn nd_chain_consistency(pairs in proptest::collection::vec((-3.0f64..3.0, 0.0f64..2.0), 1..30)) {
            let (a, tau): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let c = ConstantChoice::computed(0.5).unwrap();
            let direct = nd_series_bounds(&a, &tau, c).unwrap().max_norm.rhs;
            let u: Vec<f64> = a.iter().zip(&tau).map(|(a, t)| 2.0 * a * a * t * t).collect();
            let chained = subgaussian_max_bound(&ws(&u), 0.5, 0, u.len(), c).unwrap().rhs;
            prop_assert!((direct - chained).abs() <= 1e-12 * direct.max(1.0));
        }

        #[test]
        fn cs_chain_consistency(pairs in proptest::collection::vec((-3.0f64..3.0, 0.0f64..2.0), 1..30)) {
            let (a, cs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let c = ConstantChoice::computed(0.5).unwrap();
            let direct = cs_series_bounds(&a, &cs, c).unwrap().max_norm.rhs;
            let u: Vec<f64> = a.iter().zip(&cs).map(|(a, c)| a * a * c * c).collect();
            let chained = subgaussian_max_bound(&ws(&u), 0.5, 0, u.len(), c).unwrap().rhs;
            prop_assert!((direct - chained).abs() <= 1e-12 * direct.max(1.0));
        }

        #[test]
        fn bounds_monotone_in_weights(
            pairs in proptest::collection::vec((-3.0f64..3.0, 0.0f64..2.0), 1..20),
            idx in 0usize..20,
            bump in 0.0f64..2.0,
            cval in 0.1f64..10.0,
            cbump in 0.0f64..5.0,
        ) {
            let (a, tau): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let mut a2 = a.clone();
            let i = idx % a.len();
            a2[i] = a2[i].signum() * (a2[i].abs() + bump);
            let c = ConstantChoice::explicit(cval).unwrap();
            let c2 = ConstantChoice::explicit(cval + cbump).unwrap();
            let base = nd_series_bounds(&a, &tau, c).unwrap();
            let more = nd_series_bounds(&a2, &tau, c2).unwrap();
            prop_assert!(base.max_norm.rhs >= 0.0);
            prop_assert!(more.max_norm.rhs >= base.max_norm.rhs);
            prop_assert!(more.tau_limit.rhs >= base.tau_limit.rhs);
            let cs_base = cs_series_bounds(&a, &tau, c).unwrap();
            let cs_more = cs_series_bounds(&a2, &tau, c2).unwrap();
            prop_assert!(cs_more.max_norm.rhs >= cs_base.max_norm.rhs);
            prop_assert!(absolute_sum_bounds(&a2, &tau).unwrap().tau_limit.rhs >= absolute_sum_bounds(&a, &tau).unwrap().tau_limit.rhs);
            prop_assert!(stationary_pair_tau_bound(&a2, &tau, 1.0, 1.5).unwrap().rhs >= stationary_pair_tau_bound(&a, &tau, 1.0, 1.5).unwrap().rhs);
        }
    }
}
