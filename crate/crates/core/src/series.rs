//! Seeded generators for the dependence classes of subgaussian series.
//!
//! Every generator is a pure function of `(model, n, stream)`. Models that
//! need a matrix factorization are prepared once through [`PathSampler`] and
//! then sampled per stream.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::entropy::WeightSequence;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::subgaussian::{tau_analytic, DistributionSpec};

/// Correlation structure of a stationary, unit-variance Gaussian sequence.
///
/// `r(0) = 1` always; `r(k)` is the correlation at lag `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorrelationSpec {
    /// `r(k) = rho^k`.
    Ar1 { rho: f64 },
    /// `r(k) = rho_list[k]` for `k < len`, zero beyond; `rho_list[0]` must be 1.
    FiniteLags { rho_list: Vec<f64> },
}

impl CorrelationSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            CorrelationSpec::Ar1 { rho } => {
                if !(rho.is_finite() && rho.abs() < 1.0) {
                    return Err(Error::domain(format!("AR(1) needs |rho| < 1, got {rho}")));
                }
            }
            CorrelationSpec::FiniteLags { rho_list } => {
                if rho_list.first() != Some(&1.0) {
                    return Err(Error::domain("finite-lag correlations must start with 1"));
                }
                if rho_list.iter().any(|r| !r.is_finite() || r.abs() > 1.0) {
                    return Err(Error::domain("correlations must be finite and in [-1, 1]"));
                }
            }
        }
        Ok(())
    }

    /// Correlation at lag `k`.
    pub fn lag(&self, k: usize) -> f64 {
        match self {
            CorrelationSpec::Ar1 { rho } => rho.powi(k as i32),
            CorrelationSpec::FiniteLags { rho_list } => rho_list.get(k).copied().unwrap_or(0.0),
        }
    }

    /// The `n x n` Toeplitz correlation matrix.
    pub fn toeplitz(&self, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| self.lag(i.abs_diff(j)))
    }
}

/// `sum_{k >= 0} |r(k)|`: the decoupling coefficient of a stationary Gaussian sequence.
pub fn decoupling_coefficient(corr: &CorrelationSpec) -> Result<f64> {
    corr.validate()?;
    Ok(match corr {
        CorrelationSpec::Ar1 { rho } => 1.0 / (1.0 - rho.abs()),
        CorrelationSpec::FiniteLags { rho_list } => rho_list.iter().map(|r| r.abs()).sum(),
    })
}

/// Predictable driver for the conditionally subgaussian construction
/// `X_k = H_{k-1} Z_k`, `|H_{k-1}| <= c_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsDriver {
    /// `H_{k-1} = c_k sin(S_{k-1} + pi/2)`; the phase keeps the path from
    /// sticking at `S = 0`, where an unshifted sine driver vanishes forever.
    Sine,
    /// `H_{k-1} = c_k`; reduces to independent Gaussians.
    Constant,
}

/// Integrand rule for the Euler scheme of `M_t = int_0^t H dB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItoDriver {
    /// `H = K`.
    Constant,
    /// `H = K sin(M_t)`.
    ClampedSine,
    /// `H = K sign(B_t)`, with `sign(0) = 1`.
    ClampedSign,
}

/// The dependence classes that can be simulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeriesModel {
    /// Independent summands; a single spec is reused for every index.
    Independent { specs: Vec<DistributionSpec> },
    /// A centered Gaussian vector with nonpositive correlations.
    NdGaussian { covariance: Vec<Vec<f64>> },
    /// Martingale differences `X_k = H_{k-1} Z_k`; a single `c` is reused for every index.
    CondSubgaussian { c_seq: Vec<f64>, driver: CsDriver },
    /// Increments `a_k g_k + b_k g'_k` of two dependent stationary Gaussian sequences.
    StationaryPair {
        corr_g: CorrelationSpec,
        corr_gp: CorrelationSpec,
        coupling: f64,
        a_seq: Vec<f64>,
        b_seq: Vec<f64>,
    },
    /// Euler increments of a bounded stochastic integral.
    Ito { h_spec: ItoDriver, cap_k: f64, dt: f64 },
}

/// Broad class of a model, used to pick the applicable inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelClass {
    Independent,
    NegativelyDependent,
    ConditionallySubgaussian,
    StationaryPair,
    Ito,
}

fn broadcast<T: Clone>(seq: &[T], k: usize) -> T {
    if seq.len() == 1 {
        seq[0].clone()
    } else {
        seq[k].clone()
    }
}

fn check_len(name: &str, len: usize, n: usize) -> Result<()> {
    if len == 1 || len >= n {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} has {len} entries; need 1 or at least {n}")))
    }
}

impl SeriesModel {
    pub fn class(&self) -> ModelClass {
        match self {
            SeriesModel::Independent { .. } => ModelClass::Independent,
            SeriesModel::NdGaussian { .. } => ModelClass::NegativelyDependent,
            SeriesModel::CondSubgaussian { .. } => ModelClass::ConditionallySubgaussian,
            SeriesModel::StationaryPair { .. } => ModelClass::StationaryPair,
            SeriesModel::Ito { .. } => ModelClass::Ito,
        }
    }

    /// Checks that the model can produce paths of length `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            SeriesModel::Independent { specs } => {
                if specs.is_empty() {
                    return Err(Error::domain("independent model needs at least one spec"));
                }
                check_len("specs", specs.len(), n)?;
                specs.iter().try_for_each(DistributionSpec::validate)
            }
            SeriesModel::NdGaussian { covariance } => {
                let check = validate_nd_covariance(covariance)?;
                if !check.ok {
                    return Err(Error::domain(format!("covariance is not a valid ND Gaussian covariance: {check:?}")));
                }
                if covariance.len() < n {
                    return Err(Error::domain(format!("covariance is {0}x{0}; need at least {n}", covariance.len())));
                }
                Ok(())
            }
            SeriesModel::CondSubgaussian { c_seq, .. } => {
                if c_seq.is_empty() || c_seq.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                    return Err(Error::domain("c_seq must be nonempty, finite and >= 0"));
                }
                check_len("c_seq", c_seq.len(), n)
            }
            SeriesModel::StationaryPair { corr_g, corr_gp, coupling, a_seq, b_seq } => {
                corr_g.validate()?;
                corr_gp.validate()?;
                if !(coupling.is_finite() && coupling.abs() <= 1.0) {
                    return Err(Error::domain(format!("coupling must lie in [-1, 1], got {coupling}")));
                }
                if a_seq.len() != b_seq.len() {
                    return Err(Error::LengthMismatch { expected: a_seq.len(), actual: b_seq.len() });
                }
                if a_seq.len() < n {
                    return Err(Error::domain(format!("a_seq/b_seq have {} entries; need {n}", a_seq.len())));
                }
                if a_seq.iter().chain(b_seq).any(|v| !v.is_finite()) {
                    return Err(Error::domain("a_seq/b_seq must be finite"));
                }
                Ok(())
            }
            SeriesModel::Ito { cap_k, dt, .. } => {
                if !(cap_k.is_finite() && *cap_k >= 0.0) {
                    return Err(Error::domain(format!("cap_k must be finite and >= 0, got {cap_k}")));
                }
                if !(dt.is_finite() && *dt > 0.0) {
                    return Err(Error::domain(format!("dt must be positive, got {dt}")));
                }
                Ok(())
            }
        }
    }

    /// Per-index subgaussian scale: `tau_k` for independent and ND models,
    /// `c_k` for the martingale-difference models (`K sqrt(dt)` for Ito).
    /// `None` for the stationary pair, whose increments have no such scale.
    pub fn scales(&self, n: usize) -> Result<Option<Vec<f64>>> {
        self.validate(n)?;
        Ok(match self {
            SeriesModel::Independent { specs } => Some(
                (0..n)
                    .map(|k| tau_analytic(&broadcast(specs, k)).map(|t| t.value))
                    .collect::<Result<Vec<_>>>()?,
            ),
            SeriesModel::NdGaussian { covariance } => Some((0..n).map(|k| covariance[k][k].sqrt()).collect()),
            SeriesModel::CondSubgaussian { c_seq, .. } => Some((0..n).map(|k| broadcast(c_seq, k)).collect()),
            SeriesModel::Ito { cap_k, dt, .. } => Some(vec![cap_k * dt.sqrt(); n]),
            SeriesModel::StationaryPair { .. } => None,
        })
    }

    /// Weights `u_k` such that the weighted partial sums `sum a_k X_k` have
    /// `d_{u,1/2}`-subgaussian increments, i.e.
    /// `E exp(l (S_m - S_n)) <= exp(l^2 (u_{n+1} + ... + u_m) / 2)`.
    pub fn increment_weights(&self, a_seq: &[f64], n: usize) -> Result<WeightSequence> {
        if a_seq.len() < n {
            return Err(Error::LengthMismatch { expected: n, actual: a_seq.len() });
        }
        let a = &a_seq[..n];
        let u: Vec<f64> = match self {
            SeriesModel::StationaryPair { corr_g, corr_gp, a_seq: ia, b_seq: ib, .. } => {
                self.validate(n)?;
                let p = decoupling_coefficient(corr_g)?.max(decoupling_coefficient(corr_gp)?);
                (0..n).map(|k| 2.0 * p * a[k] * a[k] * (ia[k] * ia[k] + ib[k] * ib[k])).collect()
            }
            _ => {
                let scales = self.scales(n)?.expect("only the stationary pair lacks scales");
                let factor = if self.class() == ModelClass::NegativelyDependent { 2.0 } else { 1.0 };
                (0..n).map(|k| factor * a[k] * a[k] * scales[k] * scales[k]).collect()
            }
        };
        WeightSequence::new(u)
    }
}

/// Result of [`validate_nd_covariance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdCheck {
    pub ok: bool,
    pub min_eigenvalue: f64,
    /// Off-diagonal entries `(i, j, value)` with `i < j` and `value > 0`.
    pub positive_off_diagonal: Vec<(usize, usize, f64)>,
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::LengthMismatch { expected: n, actual: r.len() });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// A Gaussian vector with nonpositive correlations is negatively dependent;
/// this checks positive semidefiniteness (smallest eigenvalue `>= -1e-10`)
/// and the sign of every off-diagonal entry.
pub fn validate_nd_covariance(rows: &[Vec<f64>]) -> Result<NdCheck> {
    let m = to_matrix(rows)?;
    let n = m.nrows();
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("covariance entries must be finite"));
    }
    for i in 0..n {
        for j in 0..i {
            if m[(i, j)] != m[(j, i)] {
                return Err(Error::domain(format!("covariance is not symmetric at ({i}, {j})")));
            }
        }
    }
    let min_eigenvalue = if n == 0 {
        0.0
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    };
    let positive_off_diagonal: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| m[(i, j)] > 0.0)
        .map(|(i, j)| (i, j, m[(i, j)]))
        .collect();
    Ok(NdCheck { ok: min_eigenvalue >= -1e-10 && positive_off_diagonal.is_empty(), min_eigenvalue, positive_off_diagonal })
}

/// Lower Cholesky factor, allowing singular PSD matrices by dropping
/// directions whose pivot is below `1e-12` of the diagonal scale.
fn lower_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d < -1e-10 * scale {
            return Err(Error::Factorization(format!("matrix is not positive semidefinite (pivot {j} = {d})")));
        }
        if d <= 1e-12 * scale {
            continue;
        }
        let pivot = d.sqrt();
        l[(j, j)] = pivot;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / pivot;
        }
    }
    Ok(l)
}

fn strict_lower_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Factorization("Toeplitz correlation matrix is not positive definite".into()))
}

fn normals(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// A model prepared for repeated sampling at a fixed length.
#[derive(Debug, Clone)]
pub struct PathSampler {
    n: usize,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Independent(Vec<DistributionSpec>),
    Gaussian(DMatrix<f64>),
    CondSubgaussian(Vec<f64>, CsDriver),
    StationaryPair { lg: DMatrix<f64>, lgp: DMatrix<f64>, coupling: f64, a: Vec<f64>, b: Vec<f64> },
    Ito { h: ItoDriver, k: f64, dt: f64 },
}

impl PathSampler {
    pub fn new(model: &SeriesModel, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("path length must be positive"));
        }
        model.validate(n)?;
        let kind = match model {
            SeriesModel::Independent { specs } => SamplerKind::Independent(specs.clone()),
            SeriesModel::NdGaussian { covariance } => {
                let full = to_matrix(covariance)?;
                SamplerKind::Gaussian(lower_factor(&full.view((0, 0), (n, n)).into_owned())?)
            }
            SeriesModel::CondSubgaussian { c_seq, driver } => SamplerKind::CondSubgaussian(c_seq.clone(), *driver),
            SeriesModel::StationaryPair { corr_g, corr_gp, coupling, a_seq, b_seq } => SamplerKind::StationaryPair {
                lg: strict_lower_factor(&corr_g.toeplitz(n))?,
                lgp: strict_lower_factor(&corr_gp.toeplitz(n))?,
                coupling: *coupling,
                a: a_seq[..n].to_vec(),
                b: b_seq[..n].to_vec(),
            },
            SeriesModel::Ito { h_spec, cap_k, dt } => SamplerKind::Ito { h: *h_spec, k: *cap_k, dt: *dt },
        };
        Ok(Self { n, kind })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// One path `X_1, ..., X_n` drawn from `stream`.
    pub fn sample(&self, stream: RngStream) -> Vec<f64> {
        let mut rng = stream.rng();
        let n = self.n;
        match &self.kind {
            SamplerKind::Independent(specs) => (0..n).map(|k| broadcast(specs, k).sample(&mut rng)).collect(),
            SamplerKind::Gaussian(l) => (l * normals(&mut rng, n)).iter().copied().collect(),
            SamplerKind::CondSubgaussian(c, driver) => simulate_cs(c, *driver, n, &mut rng).0,
            SamplerKind::StationaryPair { lg, lgp, coupling, a, b } => {
                let z1 = normals(&mut rng, n);
                let z2 = normals(&mut rng, n);
                let g = lg * &z1;
                let w = z1 * *coupling + z2 * (1.0 - coupling * coupling).max(0.0).sqrt();
                let gp = lgp * w;
                (0..n).map(|k| a[k] * g[k] + b[k] * gp[k]).collect()
            }
            SamplerKind::Ito { h, k, dt } => simulate_ito(*h, *k, *dt, n, &mut rng).0,
        }
    }
}

/// One realization `X_1..X_n` of `model`; deterministic in `(model, n, stream)`.
pub fn sample_path(model: &SeriesModel, n: usize, stream: RngStream) -> Result<Vec<f64>> {
    Ok(PathSampler::new(model, n)?.sample(stream))
}

/// Exact stationary Gaussian sample: the lower Cholesky factor of the
/// order-`n` Toeplitz correlation matrix applied to iid standard normals.
pub fn stationary_gaussian_path(corr: &CorrelationSpec, n: usize, stream: RngStream) -> Result<Vec<f64>> {
    corr.validate()?;
    let l = strict_lower_factor(&corr.toeplitz(n))?;
    let mut rng = stream.rng();
    Ok((l * normals(&mut rng, n)).iter().copied().collect())
}

fn simulate_cs(c: &[f64], driver: CsDriver, n: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut s = 0.0_f64;
    let mut xs = Vec::with_capacity(n);
    let mut hs = Vec::with_capacity(n);
    for k in 0..n {
        let ck = broadcast(c, k);
        let h = match driver {
            CsDriver::Sine => ck * (s + std::f64::consts::FRAC_PI_2).sin(),
            CsDriver::Constant => ck,
        };
        let z: f64 = rng.sample(StandardNormal);
        let x = h * z;
        s += x;
        xs.push(x);
        hs.push(h);
    }
    (xs, hs)
}

/// A conditionally subgaussian path with the realized predictable drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivenPath {
    pub increments: Vec<f64>,
    pub drivers: Vec<f64>,
}

pub fn cond_subgaussian_path(c_seq: &[f64], driver: CsDriver, n: usize, stream: RngStream) -> Result<DrivenPath> {
    SeriesModel::CondSubgaussian { c_seq: c_seq.to_vec(), driver }.validate(n)?;
    let (increments, drivers) = simulate_cs(c_seq, driver, n, &mut stream.rng());
    Ok(DrivenPath { increments, drivers })
}

fn simulate_ito(h: ItoDriver, cap: f64, dt: f64, n: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let sd = dt.sqrt();
    let (mut m, mut b) = (0.0_f64, 0.0_f64);
    let mut dm = Vec::with_capacity(n);
    let mut hs = Vec::with_capacity(n);
    for _ in 0..n {
        let raw = match h {
            ItoDriver::Constant => cap,
            ItoDriver::ClampedSine => cap * m.sin(),
            ItoDriver::ClampedSign => {
                if b >= 0.0 {
                    cap
                } else {
                    -cap
                }
            }
        };
        let hv = raw.clamp(-cap, cap);
        let z: f64 = rng.sample(StandardNormal);
        let db = sd * z;
        let inc = hv * db;
        m += inc;
        b += db;
        dm.push(inc);
        hs.push(hv);
    }
    (dm, hs)
}

/// Euler increments `H_{t_{k-1}} (B_{t_k} - B_{t_{k-1}})` with `|H| <= cap_k`.
pub fn ito_increments(h_spec: ItoDriver, cap_k: f64, dt: f64, n: usize, stream: RngStream) -> Result<Vec<f64>> {
    Ok(ito_path(h_spec, cap_k, dt, n, stream)?.increments)
}

/// Like [`ito_increments`], also returning the integrand values used.
pub fn ito_path(h_spec: ItoDriver, cap_k: f64, dt: f64, n: usize, stream: RngStream) -> Result<DrivenPath> {
    SeriesModel::Ito { h_spec, cap_k, dt }.validate(n)?;
    let (increments, drivers) = simulate_ito(h_spec, cap_k, dt, n, &mut stream.rng());
    Ok(DrivenPath { increments, drivers })
}

/// A weight row given explicitly or by a closed-form rule, indexed from `k = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceSpec {
    Explicit(Vec<f64>),
    Rule(SequenceRule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceRule {
    /// `a_k = value`.
    Constant { value: f64, len: usize },
    /// `a_k = scale * k^{-power}`.
    Power {
        len: usize,
        power: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `a_k = scale * ratio^k`.
    Geometric {
        len: usize,
        ratio: f64,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl SequenceSpec {
    pub fn materialize(&self) -> Result<Vec<f64>> {
        let v: Vec<f64> = match self {
            SequenceSpec::Explicit(v) => v.clone(),
            SequenceSpec::Rule(SequenceRule::Constant { value, len }) => vec![*value; *len],
            SequenceSpec::Rule(SequenceRule::Power { len, power, scale }) => {
                (1..=*len).map(|k| scale * (k as f64).powf(-power)).collect()
            }
            SequenceSpec::Rule(SequenceRule::Geometric { len, ratio, scale }) => {
                (1..=*len).map(|k| scale * ratio.powi(k as i32)).collect()
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("sequence values must be finite"));
        }
        Ok(v)
    }
}

/// Elementwise `a_k x_k`.
pub fn weighted(path: &[f64], a_seq: &[f64]) -> Result<Vec<f64>> {
    if path.len() != a_seq.len() {
        return Err(Error::LengthMismatch { expected: path.len(), actual: a_seq.len() });
    }
    Ok(path.iter().zip(a_seq).map(|(x, a)| a * x).collect())
}
