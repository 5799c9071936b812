//! Monte Carlo and linear-algebra checks of the inequalities against simulated series.
//!
//! Paths are simulated in parallel, one [`RngStream`] per path, and every
//! reduction runs sequentially in path order. Reports are therefore
//! bit-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::bounds::{
    cs_series_bounds, nd_series_bounds, slln_normalizer, stationary_pair_tau_bound, subgaussian_max_bound, tail_bound_cs,
    tail_bound_nd, ConstantChoice, ConstantMode,
};
use crate::entropy::constants_row;
use crate::error::{Error, Result};
use crate::orlicz::{orlicz_norm_empirical, NormEstimate, SampleBatch, DEFAULT_TOLERANCE};
use crate::rng::{mix_seed, RngStream};
use crate::series::{decoupling_coefficient, weighted, CorrelationSpec, ModelClass, PathSampler, SequenceSpec, SeriesModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Informational => "informational",
        }
    }
}

/// One comparison inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub n: Option<usize>,
    pub m: Option<usize>,
    /// The swept parameter (lambda, t, checkpoint, ...), if any.
    pub parameter: Option<f64>,
    pub empirical: f64,
    pub std_error: Option<f64>,
    pub ci_upper: Option<f64>,
    pub bound_computed_c: Option<f64>,
    pub bound_paper_c: Option<f64>,
    pub verdict: Verdict,
}

impl ReportRow {
    fn new(label: impl Into<String>, empirical: f64, verdict: Verdict) -> Self {
        Self {
            label: label.into(),
            n: None,
            m: None,
            parameter: None,
            empirical,
            std_error: None,
            ci_upper: None,
            bound_computed_c: None,
            bound_paper_c: None,
            verdict,
        }
    }

    fn range(mut self, n: usize, m: usize) -> Self {
        self.n = Some(n);
        self.m = Some(m);
        self
    }

    fn param(mut self, p: f64) -> Self {
        self.parameter = Some(p);
        self
    }

    fn bound(mut self, b: f64) -> Self {
        self.bound_computed_c = Some(b);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub verdict: Verdict,
    pub n_paths: usize,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    /// Informational findings that never affect the verdict.
    pub flags: Vec<String>,
}

impl VerificationReport {
    fn new(check_id: &str, n_paths: usize, seed: u64, rows: Vec<ReportRow>, flags: Vec<String>) -> Self {
        let verdict = if rows.iter().any(|r| r.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if !rows.is_empty() && rows.iter().all(|r| r.verdict == Verdict::Informational) {
            Verdict::Informational
        } else {
            Verdict::Pass
        };
        Self { check_id: check_id.to_string(), verdict, n_paths, seed, rows, flags }
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// Header of the summary table.
pub const CSV_HEADER: &str = "check_id,n,m,empirical,ci_upper,bound_computed_C,bound_paper_C,verdict";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Summary rows (no header) for `reports`, LF-terminated.
pub fn csv_rows(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    for r in reports {
        for row in &r.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.check_id,
                opt(row.n),
                opt(row.m),
                row.empirical,
                opt(row.ci_upper),
                opt(row.bound_computed_c),
                opt(row.bound_paper_c),
                row.verdict.as_str()
            ));
        }
    }
    out
}

/// Runs `f` once per path and returns the results in path order.
fn per_path<T: Send>(n_paths: usize, seed: u64, f: impl Fn(RngStream) -> T + Sync + Send) -> Vec<T> {
    (0..n_paths as u64).into_par_iter().map(|i| f(RngStream::new(seed, i))).collect()
}

/// Prefix sums `P_0 = 0, P_k = x_1 + ... + x_k`.
fn prefix_sums(x: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(x.len() + 1);
    let mut acc = 0.0;
    p.push(0.0);
    for v in x {
        acc += v;
        p.push(acc);
    }
    p
}

/// `max_{n <= s < t <= m} |x_{s+1} + ... + x_t|`, as `max - min` of `P_n..P_m`.
pub fn maximal_over_range(path: &[f64], n: usize, m: usize) -> Result<f64> {
    if n >= m || m > path.len() {
        return Err(Error::domain(format!("need n < m <= {}, got n = {n}, m = {m}", path.len())));
    }
    let mut acc: f64 = path[..n].iter().sum();
    let (mut lo, mut hi) = (acc, acc);
    for v in &path[n..m] {
        acc += v;
        lo = lo.min(acc);
        hi = hi.max(acc);
    }
    Ok(hi - lo)
}

fn weight_row(a_seq: &[f64], len: usize) -> Result<&[f64]> {
    a_seq.get(..len).ok_or(Error::LengthMismatch { expected: len, actual: a_seq.len() })
}

/// The printed constant applies only at `alpha = 1/2`, which every series bound uses.
fn both_constants() -> Result<(ConstantChoice, ConstantChoice)> {
    Ok((ConstantChoice::new(ConstantMode::Computed, 0.5)?, ConstantChoice::new(ConstantMode::PaperPrinted, 0.5)?))
}

/// Maximal-increment bound for `sum a_k X_k` over `(n, m]` in both constant modes.
pub fn star_norm_bound(model: &SeriesModel, a_seq: &[f64], n: usize, m: usize) -> Result<(f64, f64)> {
    let a = weight_row(a_seq, m)?;
    let (computed, printed) = both_constants()?;
    let scales = model.scales(m)?;
    match (model.class(), scales) {
        (ModelClass::Independent | ModelClass::NegativelyDependent, Some(tau)) => Ok((
            nd_series_bounds(&a[n..m], &tau[n..m], computed)?.max_norm.rhs,
            nd_series_bounds(&a[n..m], &tau[n..m], printed)?.max_norm.rhs,
        )),
        (ModelClass::ConditionallySubgaussian, Some(c)) => Ok((
            cs_series_bounds(&a[n..m], &c[n..m], computed)?.max_norm.rhs,
            cs_series_bounds(&a[n..m], &c[n..m], printed)?.max_norm.rhs,
        )),
        _ => {
            let u = model.increment_weights(a, m)?;
            Ok((
                subgaussian_max_bound(&u, 0.5, n, m, computed)?.rhs,
                subgaussian_max_bound(&u, 0.5, n, m, printed)?.rhs,
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarNormResult {
    pub estimate: NormEstimate,
    pub report: VerificationReport,
}

/// Empirical `phi`-norm of the maximal weighted increment over `(n, m]`,
/// compared with the bound for the model's class.
pub fn estimate_star_norm(model: &SeriesModel, a_seq: &[f64], n: usize, m: usize, n_paths: usize, seed: u64) -> Result<StarNormResult> {
    if n_paths < 100 {
        return Err(Error::domain(format!("need at least 100 paths, got {n_paths}")));
    }
    if n >= m {
        return Err(Error::domain(format!("need n < m, got n = {n}, m = {m}")));
    }
    let a = weight_row(a_seq, m)?.to_vec();
    let sampler = PathSampler::new(model, m)?;
    let maxima = per_path(n_paths, seed, |s| {
        let x = weighted(&sampler.sample(s), &a).expect("lengths agree");
        maximal_over_range(&x, n, m).expect("range checked")
    });
    let estimate = orlicz_norm_empirical(&SampleBatch::new(maxima)?, DEFAULT_TOLERANCE)?;
    let empirical = estimate.finite().unwrap_or(f64::INFINITY);
    let (computed, printed) = star_norm_bound(model, &a, n, m)?;
    let mut row = ReportRow::new("star_norm", empirical, Verdict::from_bool(empirical <= computed)).range(n, m).bound(computed);
    row.bound_paper_c = Some(printed);
    row.ci_upper = Some(empirical);
    let flags = if empirical <= printed { vec![] } else { vec!["empirical norm exceeds the printed-constant bound".into()] };
    Ok(StarNormResult { estimate, report: VerificationReport::new("star_norm", n_paths, seed, vec![row], flags) })
}

/// The lambda values of an increment check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaGrid {
    /// Values of `lambda * d(n, m)`; rescaled per pair.
    Scaled(Vec<f64>),
    Absolute(Vec<f64>),
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid::Scaled(vec![-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0])
    }
}

/// `E exp(lambda (S_m - S_n)) <= exp(d^2 lambda^2 / 2)` for every pair and
/// lambda, `d^2` being the model's claimed increment variance proxy.
/// A point passes iff `mean <= bound (1 + 3 se / mean)`.
pub fn increment_mgf_check(
    model: &SeriesModel,
    a_seq: &[f64],
    pairs: &[(usize, usize)],
    grid: &LambdaGrid,
    n_paths: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if n_paths < 10_000 {
        return Err(Error::domain(format!("need at least 10^4 paths, got {n_paths}")));
    }
    let len = pairs.iter().map(|&(_, m)| m).max().ok_or_else(|| Error::domain("no index pairs"))?;
    if let Some(&(n, m)) = pairs.iter().find(|(n, m)| n >= m) {
        return Err(Error::domain(format!("need n < m, got ({n}, {m})")));
    }
    let a = weight_row(a_seq, len)?.to_vec();
    let u = model.increment_weights(&a, len)?;

    let mut points = Vec::new();
    for &(n, m) in pairs {
        let d = u.range_sum(n, m).sqrt();
        let lambdas: Vec<f64> = match grid {
            LambdaGrid::Scaled(v) => v.iter().map(|x| if d > 0.0 { x / d } else { *x }).collect(),
            LambdaGrid::Absolute(v) => v.clone(),
        };
        for lambda in lambdas {
            if !lambda.is_finite() || (lambda * d).abs() > 2.0 + 1e-12 {
                return Err(Error::domain(format!("lambda * d = {} exceeds 2 for pair ({n}, {m})", lambda * d)));
            }
            points.push((n, m, d, lambda));
        }
    }

    let sampler = PathSampler::new(model, len)?;
    let increments: Vec<Vec<f64>> = per_path(n_paths, seed, |s| {
        let p = prefix_sums(&weighted(&sampler.sample(s), &a).expect("lengths agree"));
        pairs.iter().map(|&(n, m)| p[m] - p[n]).collect()
    });

    let rows = points
        .iter()
        .map(|&(n, m, d, lambda)| {
            let k = pairs.iter().position(|&p| p == (n, m)).expect("pair listed");
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for inc in &increments {
                let e = (lambda * inc[k]).exp();
                sum += e;
                sum_sq += e * e;
            }
            let count = n_paths as f64;
            let mean = sum / count;
            let var = ((sum_sq / count - mean * mean) * count / (count - 1.0)).max(0.0);
            let se = (var / count).sqrt();
            let bound = (d * d * lambda * lambda / 2.0).exp();
            let ok = mean <= bound * (1.0 + 3.0 * se / mean);
            let mut row = ReportRow::new(format!("lambda={lambda}"), mean, Verdict::from_bool(ok)).range(n, m).param(lambda).bound(bound);
            row.std_error = Some(se);
            row.ci_upper = Some(mean + 3.0 * se);
            row
        })
        .collect();
    Ok(VerificationReport::new("increment_mgf", n_paths, seed, rows, vec![]))
}

/// One-sided upper confidence limit for a binomial proportion (Clopper-Pearson).
pub fn clopper_pearson_upper(successes: usize, trials: usize, confidence: f64) -> Result<f64> {
    if trials == 0 || successes > trials || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain("need 0 <= successes <= trials, trials > 0, confidence in (0, 1)"));
    }
    if successes == trials {
        return Ok(1.0);
    }
    // Upper limit p solves P(Bin(trials, p) <= successes) = 1 - confidence,
    // i.e. I_p(successes + 1, trials - successes) = confidence.
    let (a, b) = ((successes + 1) as f64, (trials - successes) as f64);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < confidence {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(hi)
}

/// Tail bound for `T = sum b_k X_k` under the model's class.
pub fn tail_bound_for(model: &SeriesModel, b_row: &[f64], t: f64) -> Result<f64> {
    let len = b_row.len();
    match (model, model.scales(len)?) {
        (SeriesModel::StationaryPair { corr_g, corr_gp, a_seq, b_seq, .. }, _) => {
            let wa: Vec<f64> = b_row.iter().zip(a_seq).map(|(w, a)| w * a).collect();
            let wb: Vec<f64> = b_row.iter().zip(b_seq).map(|(w, b)| w * b).collect();
            let tau = stationary_pair_tau_bound(&wa, &wb, decoupling_coefficient(corr_g)?, decoupling_coefficient(corr_gp)?)?.rhs;
            if tau == 0.0 {
                return Ok(0.0);
            }
            tail_bound_cs(t, tau)
        }
        (_, Some(s)) => {
            let scale = b_row.iter().zip(&s).map(|(b, s)| b * b * s * s).sum::<f64>().sqrt();
            if scale == 0.0 {
                return Ok(0.0);
            }
            match model.class() {
                ModelClass::Independent | ModelClass::NegativelyDependent => tail_bound_nd(t, scale),
                _ => tail_bound_cs(t, scale),
            }
        }
        (_, None) => unreachable!("only the stationary pair lacks scales"),
    }
}

/// Exceedance frequencies of `|T| >= t` with 99% Clopper-Pearson upper limits.
/// A point passes iff its upper limit is below the bound or no path exceeds `t`.
pub fn tail_curve(model: &SeriesModel, b_row: &[f64], t_grid: &[f64], n_paths: usize, seed: u64) -> Result<VerificationReport> {
    if n_paths < 10_000 {
        return Err(Error::domain(format!("need at least 10^4 paths, got {n_paths}")));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::domain("t grid must be nonempty and positive"));
    }
    let len = b_row.len();
    let sampler = PathSampler::new(model, len)?;
    let totals = per_path(n_paths, seed, |s| {
        sampler.sample(s).iter().zip(b_row).map(|(x, b)| x * b).sum::<f64>().abs()
    });
    let rows = t_grid
        .iter()
        .map(|&t| {
            let hits = totals.iter().filter(|v| **v >= t).count();
            let upper = clopper_pearson_upper(hits, n_paths, 0.99)?;
            let bound = tail_bound_for(model, b_row, t)?;
            // With no exceedances there is nothing to contradict the bound,
            // however small it is.
            let ok = hits == 0 || upper <= bound;
            let mut row = ReportRow::new(format!("t={t}"), hits as f64 / n_paths as f64, Verdict::from_bool(ok))
                .param(t)
                .bound(bound);
            row.ci_upper = Some(upper);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::new("tail_curve", n_paths, seed, rows, vec![]))
}

fn quantile_95(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let idx = ((0.95 * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

fn violations(seq: &[f64]) -> usize {
    seq.windows(2).filter(|w| w[1] > w[0]).count()
}

/// 95th percentile of `sup_{k <= r} |S_{n+k} - S_n|` per checkpoint `n`;
/// passes iff the sequence is nonincreasing with at most one violation.
pub fn convergence_diagnostic(
    model: &SeriesModel,
    a_seq: &[f64],
    checkpoints: &[usize],
    window: usize,
    n_paths: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("checkpoints must be nonempty and increasing"));
    }
    if window == 0 || n_paths == 0 {
        return Err(Error::domain("window and n_paths must be positive"));
    }
    let len = checkpoints.last().expect("nonempty") + window;
    let a = weight_row(a_seq, len)?.to_vec();
    let sampler = PathSampler::new(model, len)?;
    let sups: Vec<Vec<f64>> = per_path(n_paths, seed, |s| {
        let p = prefix_sums(&weighted(&sampler.sample(s), &a).expect("lengths agree"));
        checkpoints
            .iter()
            .map(|&n| p[n + 1..=n + window].iter().map(|v| (v - p[n]).abs()).fold(0.0, f64::max))
            .collect()
    });
    let q: Vec<f64> = (0..checkpoints.len()).map(|j| quantile_95(sups.iter().map(|s| s[j]).collect())).collect();
    let ok = violations(&q) <= 1;
    let mut rows: Vec<ReportRow> = checkpoints
        .iter()
        .zip(&q)
        .map(|(&n, &v)| ReportRow::new(format!("checkpoint={n}"), v, Verdict::Informational).range(n, n + window).param(n as f64))
        .collect();
    rows.push(ReportRow::new("nonincreasing", violations(&q) as f64, Verdict::from_bool(ok)).bound(1.0));
    Ok(VerificationReport::new("convergence", n_paths, seed, rows, vec![]))
}

/// Strong-law statistic `max_paths |S_n| (n (ln n)^{1+beta})^{-1/2}` at dyadic `n = 2^k`,
/// `k_min <= k <= k_max`. Passes iff the final value is below 0.5 and the
/// values from `2^14` on are nonincreasing with at most one violation.
pub fn slln_experiment(model: &SeriesModel, beta: f64, k_min: u32, k_max: u32, n_paths: usize, seed: u64) -> Result<VerificationReport> {
    match model.class() {
        ModelClass::Independent | ModelClass::NegativelyDependent | ModelClass::ConditionallySubgaussian => {}
        other => return Err(Error::Unsupported(format!("strong-law check needs bounded standards, not {other:?}"))),
    }
    if k_min < 1 || k_min > k_max || k_max > 40 || n_paths == 0 {
        return Err(Error::domain("need 1 <= k_min <= k_max <= 40 and n_paths > 0"));
    }
    let len = 1usize << k_max;
    let sampler = PathSampler::new(model, len)?;
    let ks: Vec<u32> = (k_min..=k_max).collect();
    let per: Vec<Vec<f64>> = per_path(n_paths, seed, |s| {
        let x = sampler.sample(s);
        let mut out = Vec::with_capacity(ks.len());
        let mut acc = 0.0;
        let mut next = 0;
        for (i, v) in x.iter().enumerate() {
            acc += v;
            if next < ks.len() && i + 1 == 1usize << ks[next] {
                out.push(acc.abs());
                next += 1;
            }
        }
        out
    });
    let stats: Vec<f64> = ks
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let n = (1u64 << k) as f64;
            Ok(per.iter().map(|p| p[j]).fold(0.0, f64::max) * slln_normalizer(n, beta)?)
        })
        .collect::<Result<_>>()?;
    let late: Vec<f64> = ks.iter().zip(&stats).filter(|(k, _)| **k >= 14).map(|(_, s)| *s).collect();
    let final_value = *stats.last().expect("nonempty");
    let mut rows: Vec<ReportRow> = ks
        .iter()
        .zip(&stats)
        .map(|(&k, &s)| ReportRow::new(format!("n=2^{k}"), s, Verdict::Informational).range(0, 1 << k).param(k as f64))
        .collect();
    rows.push(ReportRow::new("final_below_half", final_value, Verdict::from_bool(final_value < 0.5)).bound(0.5));
    rows.push(ReportRow::new("nonincreasing_from_2^14", violations(&late) as f64, Verdict::from_bool(violations(&late) <= 1)).bound(1.0));
    Ok(VerificationReport::new("strong_law", n_paths, seed, rows, vec![]))
}

/// Largest eigenvalue of the `n x n` Toeplitz correlation matrix against the
/// two-sided sum `2p - 1` (pass/fail) and the one-sided `p` (informational),
/// for `n` in the powers of two up to `n_max` and `n_max` itself.
pub fn kls_exponential_gap(corr: &CorrelationSpec, n_max: usize) -> Result<VerificationReport> {
    if n_max == 0 {
        return Err(Error::domain("n_max must be positive"));
    }
    let p = decoupling_coefficient(corr)?;
    let two_sided = 2.0 * p - 1.0;
    let mut ns: Vec<usize> = (0..usize::BITS).map(|k| 1usize << k).take_while(|&n| n < n_max).collect();
    ns.push(n_max);
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for n in ns {
        let eig = corr.toeplitz(n).symmetric_eigenvalues();
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::domain(format!("Toeplitz correlation of order {n} is not PSD (min eigenvalue {min})")));
        }
        let lmax = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rows.push(ReportRow::new("two_sided", lmax, Verdict::from_bool(lmax <= two_sided + 1e-9)).range(0, n).bound(two_sided));
        let mut one = ReportRow::new("one_sided", lmax, Verdict::Informational).range(0, n);
        one.bound_paper_c = Some(p);
        rows.push(one);
        if lmax > p + 1e-12 {
            flags.push(format!("lambda_max {lmax} exceeds one-sided p = {p} at n = {n}"));
        }
    }
    Ok(VerificationReport::new("exponential_gap", 0, 0, rows, flags))
}

/// Two-route agreement and upper-bound checks on `C(alpha)`, plus the
/// informational comparison with the printed `C(1/2)`.
pub fn constants_check(alphas: &[f64]) -> Result<VerificationReport> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        let r = constants_row(alpha)?;
        let diff = (r.c_computed - r.c_quadrature).abs();
        rows.push(ReportRow::new(format!("two_route alpha={alpha}"), diff, Verdict::from_bool(diff <= 1e-8)).param(alpha).bound(1e-8));
        // The upper bound is only claimed for alpha <= 1.
        let verdict = if alpha <= 1.0 { Verdict::from_bool(r.c_computed <= r.c_upper) } else { Verdict::Informational };
        rows.push(ReportRow::new(format!("upper alpha={alpha}"), r.c_computed, verdict).param(alpha).bound(r.c_upper));
        if let Some(printed) = r.c_printed {
            let mut row = ReportRow::new(format!("printed alpha={alpha}"), r.c_computed, Verdict::Informational).param(alpha);
            row.bound_paper_c = Some(printed);
            rows.push(row);
        }
    }
    let flags = rows
        .iter()
        .filter_map(|r| r.bound_paper_c.map(|p| format!("computed C(1/2) = {} differs from printed {p}", r.empirical)))
        .collect();
    Ok(VerificationReport::new("constants", 0, 0, rows, flags))
}

/// A single check, as read from an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Constants {
        alphas: Vec<f64>,
    },
    StarNorm {
        model: SeriesModel,
        a_seq: SequenceSpec,
        n: usize,
        m: usize,
        n_paths: usize,
    },
    IncrementMgf {
        model: SeriesModel,
        a_seq: SequenceSpec,
        pairs: Vec<(usize, usize)>,
        #[serde(default)]
        lambda_grid: LambdaGrid,
        n_paths: usize,
    },
    TailCurve {
        model: SeriesModel,
        b_row: SequenceSpec,
        t_grid: Vec<f64>,
        n_paths: usize,
    },
    Convergence {
        model: SeriesModel,
        a_seq: SequenceSpec,
        checkpoints: Vec<usize>,
        window: usize,
        n_paths: usize,
    },
    StrongLaw {
        model: SeriesModel,
        beta: f64,
        k_min: u32,
        k_max: u32,
        n_paths: usize,
    },
    ExponentialGap {
        corr: CorrelationSpec,
        n_max: usize,
    },
}

impl CheckSpec {
    /// Runs the check; `seed` is the check's own seed.
    pub fn run(&self, seed: u64) -> Result<VerificationReport> {
        match self {
            CheckSpec::Constants { alphas } => constants_check(alphas),
            CheckSpec::StarNorm { model, a_seq, n, m, n_paths } => {
                Ok(estimate_star_norm(model, &a_seq.materialize()?, *n, *m, *n_paths, seed)?.report)
            }
            CheckSpec::IncrementMgf { model, a_seq, pairs, lambda_grid, n_paths } => {
                increment_mgf_check(model, &a_seq.materialize()?, pairs, lambda_grid, *n_paths, seed)
            }
            CheckSpec::TailCurve { model, b_row, t_grid, n_paths } => tail_curve(model, &b_row.materialize()?, t_grid, *n_paths, seed),
            CheckSpec::Convergence { model, a_seq, checkpoints, window, n_paths } => {
                convergence_diagnostic(model, &a_seq.materialize()?, checkpoints, *window, *n_paths, seed)
            }
            CheckSpec::StrongLaw { model, beta, k_min, k_max, n_paths } => slln_experiment(model, *beta, *k_min, *k_max, *n_paths, seed),
            CheckSpec::ExponentialGap { corr, n_max } => kls_exponential_gap(corr, *n_max),
        }
    }
}

/// Runs `checks` in order; check `i` uses the seed `mix_seed(seed, i)`.
pub fn run_suite(checks: &[CheckSpec], seed: u64) -> Result<Vec<VerificationReport>> {
    checks.iter().enumerate().map(|(i, c)| c.run(mix_seed(seed, i as u64))).collect()
}

/// The built-in suite covering every inequality family.
pub fn default_suite() -> Vec<CheckSpec> {
    use crate::series::{CsDriver, ItoDriver, SequenceRule};
    use crate::subgaussian::DistributionSpec;

    let gaussian = SeriesModel::Independent { specs: vec![DistributionSpec::standard_gaussian()] };
    let ones = |len| SequenceSpec::Rule(SequenceRule::Constant { value: 1.0, len });
    let len = 16;
    let rho = -0.06;
    let nd = SeriesModel::NdGaussian {
        covariance: (0..len).map(|i| (0..len).map(|j| if i == j { 1.0 } else { rho }).collect()).collect(),
    };
    let mgf_models = vec![
        gaussian.clone(),
        nd,
        SeriesModel::CondSubgaussian { c_seq: vec![1.0], driver: CsDriver::Sine },
        SeriesModel::StationaryPair {
            corr_g: CorrelationSpec::Ar1 { rho: 0.5 },
            corr_gp: CorrelationSpec::FiniteLags { rho_list: vec![1.0, 0.3] },
            coupling: 0.5,
            a_seq: vec![1.0; len],
            b_seq: vec![1.0; len],
        },
        SeriesModel::Ito { h_spec: ItoDriver::ClampedSine, cap_k: 1.0, dt: 0.1 },
    ];

    let mut checks = vec![
        CheckSpec::Constants { alphas: vec![0.25, 0.5, 1.0, 2.0] },
        CheckSpec::StarNorm {
            model: gaussian.clone(),
            a_seq: SequenceSpec::Rule(SequenceRule::Power { len: 10_000, power: 1.0, scale: 1.0 }),
            n: 0,
            m: 10_000,
            n_paths: 2000,
        },
        CheckSpec::TailCurve { model: gaussian.clone(), b_row: SequenceSpec::Explicit(vec![0.6, 0.8]), t_grid: vec![1.5, 2.0, 3.0], n_paths: 100_000 },
    ];
    checks.extend(mgf_models.into_iter().map(|model| CheckSpec::IncrementMgf {
        model,
        a_seq: ones(len),
        pairs: vec![(0, 4), (2, 10), (0, 16)],
        lambda_grid: LambdaGrid::Scaled(vec![-1.0, -0.5, 0.5, 1.0]),
        n_paths: 100_000,
    }));
    checks.push(CheckSpec::Convergence {
        model: gaussian,
        a_seq: SequenceSpec::Rule(SequenceRule::Geometric { len: 40, ratio: 0.5, scale: 1.0 }),
        checkpoints: vec![5, 10, 20],
        window: 20,
        n_paths: 10_000,
    });
    checks.push(CheckSpec::StrongLaw {
        model: SeriesModel::Independent { specs: vec![DistributionSpec::Rademacher] },
        beta: 1.0,
        k_min: 1,
        k_max: 20,
        n_paths: 100,
    });
    checks.extend(
        [
            CorrelationSpec::Ar1 { rho: 0.3 },
            CorrelationSpec::Ar1 { rho: 0.5 },
            CorrelationSpec::Ar1 { rho: 0.8 },
            CorrelationSpec::FiniteLags { rho_list: vec![1.0, 0.3] },
        ]
        .into_iter()
        .map(|corr| CheckSpec::ExponentialGap { corr, n_max: 512 }),
    );
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subgaussian::DistributionSpec;
    use proptest::prelude::*;

    fn gaussian() -> SeriesModel {
        SeriesModel::Independent { specs: vec![DistributionSpec::standard_gaussian()] }
    }

    fn brute_max(path: &[f64], n: usize, m: usize) -> f64 {
        let mut best = 0.0_f64;
        for s in n..m {
            for t in s + 1..=m {
                best = best.max(path[s..t].iter().sum::<f64>().abs());
            }
        }
        best
    }

    #[test]
    fn maximal_examples() {
        // Prefix sums (0, 1, -1, 2).
        assert_eq!(maximal_over_range(&[1.0, -2.0, 3.0], 0, 3).unwrap(), 3.0);
        assert_eq!(maximal_over_range(&[0.0; 5], 0, 5).unwrap(), 0.0);
        assert_eq!(maximal_over_range(&[5.0], 0, 1).unwrap(), 5.0);
        assert!(maximal_over_range(&[1.0], 1, 1).is_err());
        assert!(maximal_over_range(&[1.0], 0, 2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn maximal_matches_enumeration(path in proptest::collection::vec(-5.0f64..5.0, 1..=50), a in 0usize..50, b in 0usize..50) {
            let len = path.len();
            let (n, m) = (a.min(b) % len, (a.max(b) % len) + 1);
            prop_assume!(n < m);
            let fast = maximal_over_range(&path, n, m).unwrap();
            prop_assert!((fast - brute_max(&path, n, m)).abs() < 1e-9);
        }
    }

    #[test]
    fn clopper_pearson_examples() {
        // k = 0: 1 - 0.01^{1/N}.
        let u = clopper_pearson_upper(0, 1000, 0.99).unwrap();
        assert!((u - (1.0 - 0.01f64.powf(1e-3))).abs() < 1e-12);
        assert_eq!(clopper_pearson_upper(5, 5, 0.99).unwrap(), 1.0);
        // k = N - 1: p^N = 0.01 at the upper limit fails; I_p(N, 1) = p^N = 0.99.
        let u = clopper_pearson_upper(9, 10, 0.99).unwrap();
        assert!((u - 0.99f64.powf(0.1)).abs() < 1e-12);
        assert!(clopper_pearson_upper(3, 2, 0.99).is_err());
    }

    #[test]
    fn zero_weights_star_norm() {
        let r = estimate_star_norm(&gaussian(), &[0.0; 10], 0, 10, 100, 1).unwrap();
        assert_eq!(r.report.rows[0].empirical, 0.0);
        assert_eq!(r.report.rows[0].bound_computed_c, Some(0.0));
        assert_eq!(r.report.verdict, Verdict::Pass);
    }

    #[test]
    fn star_norm_is_deterministic_and_monotone() {
        let a: Vec<f64> = (1..=200).map(|k| 1.0 / k as f64).collect();
        let r1 = estimate_star_norm(&gaussian(), &a, 0, 100, 300, 7).unwrap();
        let r2 = estimate_star_norm(&gaussian(), &a, 0, 100, 300, 7).unwrap();
        assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
        let wider = estimate_star_norm(&gaussian(), &a, 0, 200, 300, 7).unwrap();
        assert!(wider.report.rows[0].empirical >= r1.report.rows[0].empirical);
        assert_eq!(r1.report.verdict, Verdict::Pass);
    }

    #[test]
    fn star_norm_rejects_few_paths() {
        assert!(estimate_star_norm(&gaussian(), &[1.0; 4], 0, 4, 99, 0).is_err());
    }

    #[test]
    fn mgf_lambda_zero_and_range() {
        let r = increment_mgf_check(&gaussian(), &[1.0; 4], &[(0, 4)], &LambdaGrid::Absolute(vec![0.0]), 10_000, 3).unwrap();
        assert_eq!(r.rows[0].empirical, 1.0);
        assert_eq!(r.rows[0].bound_computed_c, Some(1.0));
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(increment_mgf_check(&gaussian(), &[1.0; 4], &[(0, 4)], &LambdaGrid::Absolute(vec![1.5]), 10_000, 3).is_err());
        assert!(increment_mgf_check(&gaussian(), &[1.0; 4], &[(0, 4)], &LambdaGrid::default(), 9_999, 3).is_err());
    }

    #[test]
    fn mgf_nd_strictly_below() {
        let c = vec![vec![1.0, -0.2, -0.2, -0.2], vec![-0.2, 1.0, -0.2, -0.2], vec![-0.2, -0.2, 1.0, -0.2], vec![-0.2, -0.2, -0.2, 1.0]];
        let model = SeriesModel::NdGaussian { covariance: c };
        let r = increment_mgf_check(&model, &[1.0; 4], &[(0, 4)], &LambdaGrid::Absolute(vec![0.5]), 100_000, 5).unwrap();
        let row = &r.rows[0];
        // Var(S_4) = 4 - 12 * 0.2 = 1.6, so the exact mgf is e^{0.2}, far below e^{1}.
        assert!((row.bound_computed_c.unwrap() - 1f64.exp()).abs() < 1e-12);
        assert!(row.ci_upper.unwrap() < 1f64.exp());
        assert!((row.empirical - 0.2f64.exp()).abs() < 4.0 * row.std_error.unwrap());
    }

    #[test]
    fn tail_examples() {
        let b = [0.6, 0.8];
        let r = tail_curve(&gaussian(), &b, &[2.0, 3.0, 50.0], 20_000, 9).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.rows[2].empirical, 0.0);
        assert!((r.rows[0].bound_computed_c.unwrap() - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
        assert!((r.rows[0].empirical - 0.0455).abs() < 0.006);
    }

    #[test]
    fn convergence_zero_weights() {
        let r = convergence_diagnostic(&gaussian(), &[0.0; 30], &[5, 10, 20], 10, 200, 1).unwrap();
        assert!(r.rows.iter().take(3).all(|row| row.empirical == 0.0));
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn convergence_geometric_halves() {
        let a: Vec<f64> = (1..=60).map(|k| 0.5f64.powi(k)).collect();
        let r = convergence_diagnostic(&gaussian(), &a, &[5, 10, 20], 30, 20_000, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        // The window sum has standard deviation ~ sqrt(sum_{k>n} 4^{-k}) = 2^{-n} / sqrt 3,
        // so five more indices shrink the percentile by about 2^5.
        let ratio = r.rows[0].empirical / r.rows[1].empirical;
        assert!((ratio / 32.0 - 1.0).abs() < 0.15, "{ratio}");
    }

    #[test]
    fn convergence_harmonic_decreases() {
        let a: Vec<f64> = (1..=400).map(|k| 1.0 / k as f64).collect();
        let r = convergence_diagnostic(&gaussian(), &a, &[10, 50, 100, 200], 200, 5_000, 4).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn slln_zero_and_beta() {
        let zero = SeriesModel::CondSubgaussian { c_seq: vec![0.0], driver: crate::series::CsDriver::Constant };
        let r = slln_experiment(&zero, 1.0, 1, 10, 5, 1).unwrap();
        assert!(r.rows.iter().filter(|r| r.verdict == Verdict::Informational).all(|r| r.empirical == 0.0));
        let rad = SeriesModel::Independent { specs: vec![DistributionSpec::Rademacher] };
        let b1 = slln_experiment(&rad, 1.0, 1, 12, 20, 3).unwrap();
        let b2 = slln_experiment(&rad, 2.0, 1, 12, 20, 3).unwrap();
        assert!(b2.rows[11].empirical < b1.rows[11].empirical);
        let ito = SeriesModel::Ito { h_spec: crate::series::ItoDriver::Constant, cap_k: 1.0, dt: 1.0 };
        assert!(slln_experiment(&ito, 1.0, 1, 4, 1, 1).is_err());
    }

    #[test]
    fn exponential_gap_examples() {
        let iid = kls_exponential_gap(&CorrelationSpec::Ar1 { rho: 0.0 }, 8).unwrap();
        assert!(iid.rows.iter().all(|r| (r.empirical - 1.0).abs() < 1e-12));
        assert_eq!(iid.verdict, Verdict::Pass);
        assert!(iid.flags.is_empty());

        let lags = kls_exponential_gap(&CorrelationSpec::FiniteLags { rho_list: vec![1.0, 0.3] }, 64).unwrap();
        assert_eq!(lags.verdict, Verdict::Pass);
        // Tridiagonal Toeplitz: 1 + 0.6 cos(pi / (n + 1)).
        let last = lags.rows.iter().rev().find(|r| r.label == "two_sided").unwrap();
        assert!((last.empirical - (1.0 + 0.6 * (std::f64::consts::PI / 65.0).cos())).abs() < 1e-10);
        assert!(kls_exponential_gap(&CorrelationSpec::FiniteLags { rho_list: vec![1.0, 0.9, -0.9] }, 8).is_err());
    }

    #[test]
    fn csv_shape() {
        let r = kls_exponential_gap(&CorrelationSpec::Ar1 { rho: 0.0 }, 2).unwrap();
        let csv = csv_rows(&[r]);
        assert!(csv.lines().all(|l| l.split(',').count() == CSV_HEADER.split(',').count()));
        assert!(csv.starts_with("exponential_gap,0,1,1,,1,,pass\n"), "{csv}");
    }

    #[test]
    fn check_spec_from_toml() {
        let src = r#"
            check = "tail_curve"
            b_row = [0.6, 0.8]
            t_grid = [2.0]
            n_paths = 10000
            [model]
            type = "independent"
            specs = ["rademacher"]
        "#;
        let c: CheckSpec = toml::from_str(src).unwrap();
        assert!(matches!(c, CheckSpec::TailCurve { .. }));
        assert!(toml::from_str::<CheckSpec>("check = \"constants\"\nalphas = [0.5]\nbogus = 1").is_err());
    }
}
