//! Command-line front end: constants tables, coverings, norms, simulation,
//! verification suites and report summaries.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::entropy::{constants_row, covering_number, dudley_integral_for, AlphaMetric, QuadratureConfig, WeightSequence};
use crate::error::{Error, Result};
use crate::orlicz::{equivalence_check, orlicz_norm_empirical, SampleBatch, DEFAULT_TOLERANCE};
use crate::rng::{mix_seed, RngStream};
use crate::series::{weighted, PathSampler, SequenceSpec, SeriesModel};
use crate::subgaussian::{default_t_grid, tau_analytic, tau_empirical, DistributionSpec};
use crate::verify::{csv_rows, default_suite, run_suite, CheckSpec, VerificationReport, CSV_HEADER};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "SUBSERIES_SEED";

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantModeArg {
    Computed,
    Paper,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "subseries", version, about = "Bounds and Monte Carlo checks for series of subgaussian random variables")]
pub struct Cli {
    /// Experiment config (TOML, or JSON by extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Falls back to the config, then SUBSERIES_SEED, then 42.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for path simulation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Which C(alpha) bound columns to emit.
    #[arg(long, global = true, value_enum)]
    pub constant_mode: Option<ConstantModeArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of C(alpha), its upper bound and the printed C(1/2).
    Constants {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5, 1.0, 2.0])]
        alpha: Vec<f64>,
    },
    /// Covering numbers (and optionally the entropy integral) of a weighted index set.
    Covering {
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<f64>,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Defaults to the number of weights.
        #[arg(long)]
        max_index: Option<usize>,
        #[arg(long)]
        dudley: bool,
    },
    /// Empirical Orlicz norm and subgaussian standard of a sample.
    Norms {
        /// Distribution as JSON, e.g. '{"gaussian": {"sigma": 1.0}}'.
        #[arg(long, conflicts_with = "samples")]
        distribution: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        /// File with one value per line.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Simulate paths of the configured model.
    Simulate,
    /// Run the configured verification checks, or the built-in suite.
    Verify,
    /// Summarize a verify.json written by `verify`.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

/// Path simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub model: SeriesModel,
    pub n: usize,
    pub n_paths: usize,
    #[serde(default)]
    pub a_seq: Option<SequenceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub constant_mode: Option<ConstantModeArg>,
    #[serde(default)]
    pub checks: Option<Vec<CheckSpec>>,
    #[serde(default)]
    pub simulate: Option<SimulateSpec>,
}

impl ExperimentConfig {
    /// Parses TOML, or JSON when `path` ends in `.json`; errors carry line and field.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg: Self = if is_json {
            serde_json::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "{}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
                path.display(),
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `--seed` beats the config, which beats `SUBSERIES_SEED`, which beats 42.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>, env: Option<&str>) -> Result<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match env {
        Some(v) => v.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not a u64"))),
        None => Ok(DEFAULT_SEED),
    }
}

struct Context {
    config: Option<ExperimentConfig>,
    config_hash: String,
    seed: u64,
    mode: ConstantModeArg,
    out: Option<PathBuf>,
}

impl Context {
    fn header_comment(&self) -> String {
        format!("# schema_version={SCHEMA_VERSION} config_hash={} seed={}\n", self.config_hash, self.seed)
    }

    /// Writes `name` under `--out`, or to `stdout` when no directory was given.
    fn emit(&self, name: &str, body: &str, stdout: &mut dyn Write) -> Result<()> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(name), body)?;
                writeln!(stdout, "wrote {}", dir.join(name).display())?;
            }
            None => stdout.write_all(body.as_bytes())?,
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs; returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match execute(&cli, env_seed.as_deref(), stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs a parsed command. Errors are usage or config errors.
pub fn execute(cli: &Cli, env_seed: Option<&str>, stdout: &mut dyn Write) -> Result<i32> {
    let (config, config_hash) = match &cli.config {
        Some(path) => {
            let bytes = fs::read(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Config(format!("{}: not UTF-8", path.display())))?;
            (Some(ExperimentConfig::parse(&text, path)?), sha256_hex(&bytes))
        }
        None => (None, String::new()),
    };
    let seed = resolve_seed(cli.seed, config.as_ref().and_then(|c| c.seed), env_seed)?;
    let threads = cli.threads.or(config.as_ref().and_then(|c| c.threads));
    let mode = cli.constant_mode.or(config.as_ref().and_then(|c| c.constant_mode)).unwrap_or(ConstantModeArg::Both);
    let ctx = Context { config, config_hash, seed, mode, out: cli.out.clone() };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    // Output is buffered so the pool's worker never holds the caller's writer.
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(&cli.command, ctx, &mut buf));
    stdout.write_all(&buf)?;
    result
}

fn dispatch(command: &Command, mut ctx: Context, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Constants { alpha } => {
            let mut body = String::from("alpha,c_computed,c_upper,c_paper\n");
            for &a in alpha {
                let r = constants_row(a)?;
                body.push_str(&format!("{},{},{},{}\n", r.alpha, r.c_computed, r.c_upper, r.c_printed.map(|v| v.to_string()).unwrap_or_default()));
            }
            ctx.emit("constants.csv", &body, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Covering { weights, alpha, eps, max_index, dudley } => {
            let metric = AlphaMetric::new(WeightSequence::new(weights.clone())?, *alpha)?;
            let max_index = max_index.unwrap_or(weights.len());
            let mut body = String::from("epsilon,count,centers\n");
            for &e in eps {
                let c = covering_number(&metric, e, max_index)?;
                let centers: Vec<String> = c.centers.iter().map(|i| i.to_string()).collect();
                body.push_str(&format!("{},{},{}\n", e, c.count, centers.join(";")));
            }
            if *dudley {
                match dudley_integral_for(&metric, max_index, QuadratureConfig::default())?.value() {
                    Some(v) => body.push_str(&format!("# dudley_integral={v}\n")),
                    None => body.push_str("# dudley_integral=divergent\n"),
                }
            }
            ctx.emit("covering.csv", &body, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Norms { distribution, n, samples } => {
            let (values, spec) = match (distribution, samples) {
                (Some(json), None) => {
                    let spec: DistributionSpec =
                        serde_json::from_str(json).map_err(|e| Error::Config(format!("--distribution: {e}")))?;
                    spec.validate()?;
                    let mut rng = RngStream::new(ctx.seed, 0).rng();
                    ((0..*n).map(|_| spec.sample(&mut rng)).collect::<Vec<f64>>(), Some(spec))
                }
                (None, Some(path)) => (read_samples(path)?, None),
                _ => return Err(Error::Config("give exactly one of --distribution or --samples".into())),
            };
            let batch = SampleBatch::new(values)?;
            let norm = orlicz_norm_empirical(&batch, DEFAULT_TOLERANCE)?;
            let tau_hat = tau_empirical(&batch, &default_t_grid())?;
            let tau = spec.as_ref().map(tau_analytic).transpose()?;
            let equivalence = match (&tau, norm.finite()) {
                (Some(t), Some(v)) => Some(equivalence_check(t.value, v, 0.05)?),
                _ => None,
            };
            let doc = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "config_hash": ctx.config_hash,
                "seed": ctx.seed,
                "count": batch.count(),
                "orlicz_norm": norm,
                "tau_empirical": tau_hat,
                "tau_analytic": tau,
                "equivalence": equivalence,
            });
            ctx.emit("norms.json", &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Simulate => {
            let spec = ctx
                .config
                .take()
                .and_then(|c| c.simulate)
                .ok_or_else(|| Error::Config("simulate needs a config with a [simulate] table".into()))?;
            let sampler = PathSampler::new(&spec.model, spec.n)?;
            let a = spec.a_seq.as_ref().map(SequenceSpec::materialize).transpose()?;
            let seed = mix_seed(ctx.seed, 0);
            use rayon::prelude::*;
            let paths: Vec<Result<Vec<f64>>> = (0..spec.n_paths as u64)
                .into_par_iter()
                .map(|i| {
                    let x = sampler.sample(RngStream::new(seed, i));
                    match &a {
                        Some(a) => weighted(&x, a.get(..spec.n).ok_or(Error::LengthMismatch { expected: spec.n, actual: a.len() })?),
                        None => Ok(x),
                    }
                })
                .collect();
            let mut body = ctx.header_comment();
            body.push_str("path,k,x,partial_sum\n");
            for (i, p) in paths.into_iter().enumerate() {
                let mut s = 0.0;
                for (k, x) in p?.iter().enumerate() {
                    s += x;
                    body.push_str(&format!("{i},{},{x},{s}\n", k + 1));
                }
            }
            ctx.emit("paths.csv", &body, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Verify => {
            let checks = match ctx.config.as_ref().and_then(|c| c.checks.clone()) {
                Some(c) => c,
                None => {
                    let suite = default_suite();
                    if ctx.config_hash.is_empty() {
                        ctx.config_hash = sha256_hex(serde_json::to_string(&suite).expect("serializable").as_bytes());
                    }
                    suite
                }
            };
            let reports = run_suite(&checks, ctx.seed)?;
            let failed = reports.iter().any(VerificationReport::failed);
            let (csv, json) = render_verify(&ctx, &reports);
            match &ctx.out {
                Some(_) => {
                    ctx.emit("verify.csv", &csv, stdout)?;
                    ctx.emit("verify.json", &json, stdout)?;
                }
                None => ctx.emit("verify.csv", &csv, stdout)?,
            }
            Ok(if failed { EXIT_FAILED_CHECK } else { EXIT_OK })
        }
        Command::Report { input } => {
            let text = fs::read_to_string(input).map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
            let doc: VerifyDocument = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
            let mut body = format!("# schema_version={} config_hash={} seed={}\n", doc.schema_version, doc.config_hash, doc.seed);
            body.push_str("check_id,verdict,rows,failed_rows,flags\n");
            for r in &doc.reports {
                let failed_rows = r.rows.iter().filter(|row| row.verdict == crate::verify::Verdict::Fail).count();
                body.push_str(&format!("{},{},{},{},{}\n", r.check_id, r.verdict.as_str(), r.rows.len(), failed_rows, csv_field(&r.flags.join("; "))));
            }
            ctx.emit("summary.csv", &body, stdout)?;
            let failed = doc.reports.iter().any(VerificationReport::failed);
            Ok(if failed { EXIT_FAILED_CHECK } else { EXIT_OK })
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// The JSON written by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub constant_mode: ConstantModeArg,
    pub reports: Vec<VerificationReport>,
}

fn render_verify(ctx: &Context, reports: &[VerificationReport]) -> (String, String) {
    let mut shown = reports.to_vec();
    for row in shown.iter_mut().flat_map(|r| r.rows.iter_mut()) {
        match ctx.mode {
            ConstantModeArg::Computed => row.bound_paper_c = None,
            ConstantModeArg::Paper => row.bound_computed_c = None,
            ConstantModeArg::Both => {}
        }
    }
    let csv = format!("{}{CSV_HEADER}\n{}", ctx.header_comment(), csv_rows(&shown));
    let doc = VerifyDocument {
        schema_version: SCHEMA_VERSION,
        config_hash: ctx.config_hash.clone(),
        seed: ctx.seed,
        constant_mode: ctx.mode,
        reports: shown,
    };
    (csv, serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
}

fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.trim().parse().map_err(|_| Error::Config(format!("{}:{}: not a number: {l:?}", path.display(), i + 1))))
        .collect()
}
