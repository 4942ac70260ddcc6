//! Replication engine.
//!
//! Replication `r` draws everything (bulk eigenvalues, initial state, noise)
//! from its own ChaCha8 stream keyed by `(seed, r, attempt)`, so results do not
//! depend on scheduling or on the number of workers.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    chi1_cdf, ks_chi1, normalized_error_real, scalar_statistic_complex, z_squared, TAIL_THRESHOLD,
};
use crate::estimation::{empirical_covariance_check, ols};
use crate::linalg::real_matrix_json;
use crate::process::{simulate, InitialStatePolicy, NoiseModel};
use crate::spectrum::{
    companion_model, sample_bulk_eigenvalues, ComplexDoc, EigenSpec, RateSchedule, UnitRootMode,
};
use crate::{Complex64, Error, RMat, Result};

/// Redraws allowed per replication after a failed attempt.
pub const MAX_RETRIES: u64 = 10;
pub const HIST_BINS: usize = 60;
pub const HIST_MAX: f64 = 12.0;
pub const QUANTILE_LEVELS: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Statistic {
    /// `Z_n^2`, asymptotically chi-square(1).
    #[default]
    Z2,
    /// `sqrt(n) V_n^{-1/2} P_n^T (theta_hat - theta_n)`.
    RealVector,
    /// `sqrt(n v_n) <L_n, theta_hat - theta_n>`.
    ComplexScalar,
    /// `(1 - rho_n) ||S_n / n - Gamma_n||_F`.
    CovarianceGap,
    /// `||theta_hat - theta_n||_2`.
    CoefficientError,
}

impl Statistic {
    pub fn label(self) -> &'static str {
        match self {
            Statistic::Z2 => "Z2",
            Statistic::RealVector => "RealVector",
            Statistic::ComplexScalar => "ComplexScalar",
            Statistic::CovarianceGap => "CovarianceGap",
            Statistic::CoefficientError => "CoefficientError",
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "z2" => Ok(Statistic::Z2),
            "realvector" | "real" => Ok(Statistic::RealVector),
            "complexscalar" | "scalar" => Ok(Statistic::ComplexScalar),
            "covariancegap" => Ok(Statistic::CovarianceGap),
            "coefficienterror" => Ok(Statistic::CoefficientError),
            _ => Err(Error::Parse(format!("unknown statistic '{s}'"))),
        }
    }
}

fn default_c() -> f64 {
    1.0
}
fn default_eps() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: usize,
    pub alpha: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    pub n: u64,
    pub reps: usize,
    #[serde(alias = "lambda1")]
    pub unit_root_mode: UnitRootMode,
    /// Rate of the negative root under two unit roots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub statistic: Statistic,
    #[serde(default)]
    pub init: InitialStatePolicy,
    /// Fixed bulk; when absent a fresh bulk is drawn per replication.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bulk: Option<Vec<ComplexDoc>>,
    /// Thread count; `None` uses the available parallelism. Never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Headline configuration: `alpha = 1/2`, `c = 1`, `n = 5000`, 3000 replications.
    pub fn headline(p: usize, mode: UnitRootMode, seed: u64) -> Self {
        ExperimentConfig {
            p,
            alpha: 0.5,
            c: 1.0,
            n: 5000,
            reps: 3000,
            unit_root_mode: mode,
            d: None,
            beta: None,
            eps: 0.1,
            noise: NoiseModel::default(),
            seed,
            statistic: Statistic::Z2,
            init: InitialStatePolicy::ZeroState,
            bulk: None,
            workers: None,
        }
    }

    fn schedules(&self) -> Result<(RateSchedule, Option<RateSchedule>)> {
        let first = RateSchedule::new(self.c, self.alpha)?;
        let second = match (self.unit_root_mode, self.d, self.beta) {
            (UnitRootMode::Both, d, beta) => Some(RateSchedule::new(d.unwrap_or(self.c), beta.unwrap_or(self.alpha))?),
            (_, None, None) => None,
            _ => return Err(Error::Parameter("'d'/'beta' only apply to two unit roots".into())),
        };
        Ok((first, second))
    }

    fn fixed_bulk(&self) -> Option<Vec<Complex64>> {
        self.bulk.as_ref().map(|b| b.iter().map(|&z| z.into()).collect())
    }

    /// Spec for one replication, given its bulk.
    pub fn spec_with_bulk(&self, bulk: Vec<Complex64>) -> Result<EigenSpec> {
        let (first, second) = self.schedules()?;
        EigenSpec::new(self.p, self.unit_root_mode, first, second, bulk, self.eps)
    }

    /// Modulus bound for sampled bulk values at this `n`.
    fn bulk_radius(&self) -> Result<f64> {
        let (first, second) = self.schedules()?;
        first.check(self.n)?;
        let mut r = first.rho(self.n);
        if let Some(s) = second {
            s.check(self.n)?;
            r = r.min(s.rho(self.n));
        }
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Parameter("reps must be >= 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Parameter("workers must be >= 1".into()));
        }
        self.noise.validate()?;
        if matches!(self.statistic, Statistic::Z2 | Statistic::RealVector | Statistic::ComplexScalar) {
            self.noise.check_moment(0.5)?;
        }
        if self.statistic == Statistic::Z2 && self.unit_root_mode == UnitRootMode::Both {
            return Err(Error::Branch("Z2 needs a single unit root".into()));
        }
        if let InitialStatePolicy::FixedVector(v) = &self.init {
            if v.len() != self.p {
                return Err(Error::Dimension(format!("fixed initial state must have length {}", self.p)));
            }
        }
        let radius = self.bulk_radius()?;
        match self.fixed_bulk() {
            Some(b) => {
                let spec = self.spec_with_bulk(b)?;
                companion_model(&spec, self.n)?;
            }
            None => {
                // the bulk draw must be feasible and EigenSpec must accept it
                if !(self.eps > 0.0 && self.eps < radius) {
                    return Err(Error::Parameter(format!(
                        "eps = {} must lie in (0, {radius}) at n = {}",
                        self.eps, self.n
                    )));
                }
                if self.p == self.unit_root_mode.unit_roots() {
                    self.spec_with_bulk(Vec::new())?;
                } else if self.p < self.unit_root_mode.unit_roots() {
                    return Err(Error::Parameter("order p too small for the unit roots".into()));
                }
            }
        }
        if self.statistic == Statistic::RealVector {
            if let Some(b) = self.fixed_bulk() {
                if b.iter().any(|z| z.im != 0.0) {
                    return Err(Error::Branch("RealVector needs a real spectrum".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Samples {
    Scalar(Vec<f64>),
    Vector(Vec<Vec<f64>>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Scalar(v) => v.len(),
            Samples::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scalar(&self) -> Option<&[f64]> {
        match self {
            Samples::Scalar(v) => Some(v),
            Samples::Vector(_) => None,
        }
    }

    pub fn vectors(&self) -> Option<&[Vec<f64>]> {
        match self {
            Samples::Vector(v) => Some(v),
            Samples::Scalar(_) => None,
        }
    }
}

/// Equal-width bins on `[0, HIST_MAX)`; values outside land in the tails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn build(values: &[f64]) -> Self {
        let width = HIST_MAX / HIST_BINS as f64;
        let mut h = Histogram { lo: 0.0, hi: HIST_MAX, counts: vec![0; HIST_BINS], underflow: 0, overflow: 0 };
        for &v in values {
            if v < 0.0 {
                h.underflow += 1;
            } else if v >= HIST_MAX {
                h.overflow += 1;
            } else {
                let k = ((v / width) as usize).min(HIST_BINS - 1);
                h.counts[k] += 1;
            }
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub samples: Samples,
    /// Share of values above 6.5 (scalar statistics only).
    pub tail_freq_6p5: Option<f64>,
    /// KS distance to chi-square(1) (Z2 only).
    pub ks_chi1: Option<f64>,
    pub histogram: Option<Histogram>,
    pub sample_variance: Option<f64>,
    #[serde(serialize_with = "ser_opt_matrix")]
    pub sample_cov: Option<RMat>,
    pub quantiles: Vec<(f64, f64)>,
    /// Redraws performed across all replications.
    pub retries: u64,
    pub wall_time: f64,
}

fn ser_opt_matrix<S: serde::Serializer>(m: &Option<RMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.as_ref().map(real_matrix_json).serialize(s)
}

impl ExperimentReport {
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "tail_freq_6p5": self.tail_freq_6p5,
            "ks_chi1": self.ks_chi1,
            "quantiles": self.quantiles.iter().map(|(q, v)| serde_json::json!({"q": q, "value": v})).collect::<Vec<_>>(),
            "sample_variance": self.sample_variance,
            "sample_cov": self.sample_cov.as_ref().map(real_matrix_json),
            "histogram": self.histogram,
            "retries": self.retries,
            "reps": self.samples.len(),
            "wall_time": self.wall_time,
        })
    }
}

/// One attempt of one replication.
fn replicate(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let bulk = match cfg.fixed_bulk() {
        Some(b) => b,
        None => {
            let count = cfg.p - cfg.unit_root_mode.unit_roots();
            sample_bulk_eigenvalues(rng, count + 1, cfg.bulk_radius()?, cfg.eps)?
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect()
        }
    };
    let spec = cfg.spec_with_bulk(bulk)?;
    let model = companion_model(&spec, cfg.n)?;
    let path = simulate(&model, &cfg.noise, &cfg.init, rng)?;
    let est = ols(&path)?;
    let out = match cfg.statistic {
        Statistic::Z2 => vec![z_squared(&est, &model)?],
        Statistic::RealVector => normalized_error_real(&est, &model)?,
        Statistic::ComplexScalar => vec![scalar_statistic_complex(&est, &model)?],
        Statistic::CovarianceGap => vec![empirical_covariance_check(&est, &model, cfg.noise.variance())?],
        Statistic::CoefficientError => {
            vec![est.theta_hat.iter().zip(&model.theta).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()]
        }
    };
    if out.iter().any(|v| !v.is_finite()) || est.degenerate {
        return Err(Error::Numerical("non-finite or degenerate replication".into()));
    }
    Ok(out)
}

/// Stream for replication `r`, attempt `attempt`.
pub fn replication_rng(seed: u64, r: u64, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((r << 4) | attempt);
    rng
}

fn run_replication(cfg: &ExperimentConfig, r: usize) -> Result<(Vec<f64>, u64)> {
    let mut last = None;
    for attempt in 0..=MAX_RETRIES {
        let mut rng = replication_rng(cfg.seed, r as u64, attempt);
        match replicate(cfg, &mut rng) {
            Ok(v) => return Ok((v, attempt)),
            Err(e) => last = Some(e),
        }
    }
    let e = last.expect("at least one attempt");
    Err(Error::Sampling(format!("replication {r} failed after {MAX_RETRIES} redraws: {e}")))
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn variance(v: &[f64]) -> Option<f64> {
    if v.len() < 2 {
        return None;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    Some(v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64)
}

fn covariance(rows: &[Vec<f64>]) -> Option<RMat> {
    if rows.len() < 2 {
        return None;
    }
    let p = rows[0].len();
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    Some(RMat::from_fn(p, p, |i, j| {
        rows.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / (n - 1.0)
    }))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<(Vec<f64>, u64)>> =
        pool.install(|| (0..cfg.reps).into_par_iter().map(|r| run_replication(cfg, r)).collect());

    let mut values = Vec::with_capacity(cfg.reps);
    let mut retries = 0;
    for o in outcomes {
        let (v, a) = o?;
        values.push(v);
        retries += a;
    }

    let (samples, scalars) = if cfg.statistic == Statistic::RealVector {
        (Samples::Vector(values), None)
    } else {
        let s: Vec<f64> = values.into_iter().map(|v| v[0]).collect();
        (Samples::Scalar(s.clone()), Some(s))
    };
    let mut report = ExperimentReport {
        config: cfg.clone(),
        tail_freq_6p5: None,
        ks_chi1: None,
        histogram: None,
        sample_variance: None,
        sample_cov: None,
        quantiles: Vec::new(),
        retries,
        wall_time: 0.0,
        samples,
    };
    match scalars {
        Some(s) => {
            let tail = s.iter().filter(|&&x| x > TAIL_THRESHOLD).count();
            report.tail_freq_6p5 = Some(tail as f64 / s.len() as f64);
            if cfg.statistic == Statistic::Z2 {
                report.ks_chi1 = Some(ks_chi1(&s)?);
            }
            report.histogram = Some(Histogram::build(&s));
            report.sample_variance = variance(&s);
            let mut sorted = s;
            sorted.sort_by(f64::total_cmp);
            report.quantiles = QUANTILE_LEVELS.iter().map(|&q| (q, quantile(&sorted, q))).collect();
        }
        None => {
            report.sample_cov = covariance(report.samples.vectors().unwrap_or(&[]));
        }
    }
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs each configuration independently; failures do not stop the sweep.
pub fn sweep(configs: &[ExperimentConfig]) -> Result<Vec<Result<ExperimentReport>>> {
    if configs.is_empty() {
        return Err(Error::Parameter("sweep needs at least one configuration".into()));
    }
    Ok(configs.iter().map(run_experiment).collect())
}

/// Long-format CSV of the samples of several reports. A `coord` column is
/// added when any report carries vector samples.
pub fn reports_csv<'a, I>(reports: I) -> String
where
    I: IntoIterator<Item = &'a ExperimentReport>,
    I::IntoIter: Clone,
{
    let it = reports.into_iter();
    let with_coord = it.clone().any(|r| r.samples.vectors().is_some());
    let mut out = String::new();
    out.push_str(if with_coord {
        "rep,p,alpha,c,n,lambda1_mode,statistic,coord,value\n"
    } else {
        "rep,p,alpha,c,n,lambda1_mode,statistic,value\n"
    });
    for rep in it {
        let cfg = &rep.config;
        let prefix = |r: usize| {
            format!(
                "{r},{},{},{},{},{},{}",
                cfg.p,
                cfg.alpha,
                cfg.c,
                cfg.n,
                cfg.unit_root_mode.label(),
                cfg.statistic.label()
            )
        };
        match &rep.samples {
            Samples::Scalar(v) => {
                for (r, x) in v.iter().enumerate() {
                    let sep = if with_coord { ",," } else { "," };
                    let _ = writeln!(out, "{}{sep}{x:.16e}", prefix(r));
                }
            }
            Samples::Vector(rows) => {
                for (r, row) in rows.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        let _ = writeln!(out, "{},{j},{x:.16e}", prefix(r));
                    }
                }
            }
        }
    }
    out
}

fn grid(alphas: &[f64], ps: &[usize], seed: u64, reps: usize) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for &mode in &[UnitRootMode::PlusOne, UnitRootMode::MinusOne] {
        for &p in ps {
            for &alpha in alphas {
                let mut cfg = ExperimentConfig::headline(p, mode, seed);
                cfg.alpha = alpha;
                cfg.reps = reps;
                out.push(cfg);
            }
        }
    }
    out
}

/// `p in {2, 3, 4}`, both signs, `alpha = 1/2`.
pub fn tail_grid(seed: u64, reps: usize) -> Vec<ExperimentConfig> {
    grid(&[0.5], &[2, 3, 4], seed, reps)
}

/// `p = 3`, both signs, `alpha in {1/5, 1/4, 1/3, 1/2}`.
pub fn slow_rate_grid(seed: u64, reps: usize) -> Vec<ExperimentConfig> {
    grid(&[1.0 / 5.0, 1.0 / 4.0, 1.0 / 3.0, 1.0 / 2.0], &[3], seed, reps)
}

/// `p = 3`, both signs, `alpha in {1/2, 2/3, 3/4, 4/5}`.
pub fn fast_rate_grid(seed: u64, reps: usize) -> Vec<ExperimentConfig> {
    grid(&[1.0 / 2.0, 2.0 / 3.0, 3.0 / 4.0, 4.0 / 5.0], &[3], seed, reps)
}

/// `1 - F(6.5)` for the chi-square(1) reference.
pub fn reference_tail() -> f64 {
    1.0 - chi1_cdf(TAIL_THRESHOLD).expect("positive argument")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(stat: Statistic) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::headline(3, UnitRootMode::PlusOne, 7);
        cfg.n = 400;
        cfg.reps = 40;
        cfg.statistic = stat;
        cfg
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let mut a = small(Statistic::Z2);
        a.workers = Some(1);
        let mut b = a.clone();
        b.workers = Some(3);
        let ra = run_experiment(&a).unwrap();
        let rb = run_experiment(&b).unwrap();
        assert_eq!(ra.samples, rb.samples);
        assert_eq!(reports_csv([&ra]), {
            let mut rb2 = rb.clone();
            rb2.config.workers = Some(1);
            reports_csv([&rb2])
        });
        let one = ExperimentConfig { reps: 1, ..a.clone() };
        assert_eq!(run_experiment(&one).unwrap().samples, run_experiment(&one).unwrap().samples);
    }

    #[test]
    fn report_fields() {
        let r = run_experiment(&small(Statistic::Z2)).unwrap();
        assert_eq!(r.samples.len(), 40);
        let tail = r.tail_freq_6p5.unwrap();
        assert!((0.0..=1.0).contains(&tail));
        let h = r.histogram.as_ref().unwrap();
        assert_eq!(h.counts.len(), HIST_BINS);
        assert_eq!(h.counts.iter().sum::<u64>() + h.overflow + h.underflow, 40);
        assert!(r.ks_chi1.unwrap() > 0.0);
        let j = r.summary_json();
        assert_eq!(j["quantiles"].as_array().unwrap().len(), QUANTILE_LEVELS.len());
    }

    #[test]
    fn vector_reports() {
        let mut cfg = small(Statistic::RealVector);
        cfg.p = 2;
        cfg.bulk = Some(vec![ComplexDoc { re: 0.5, im: 0.0 }]);
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.samples.vectors().unwrap()[0].len(), 2);
        assert_eq!(r.sample_cov.as_ref().unwrap().shape(), (2, 2));
        let csv = reports_csv([&r]);
        assert!(csv.starts_with("rep,p,alpha,c,n,lambda1_mode,statistic,coord,value\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * 40);
    }

    #[test]
    fn csv_layout() {
        let r = run_experiment(&small(Statistic::ComplexScalar)).unwrap();
        let csv = reports_csv([&r]);
        let row = csv.lines().nth(1).unwrap();
        assert!(row.starts_with("0,3,0.5,1,400,+1,ComplexScalar,"), "{row}");
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig { reps: 0, ..small(Statistic::Z2) }.validate().is_err());
        let mut cfg = small(Statistic::Z2);
        cfg.unit_root_mode = UnitRootMode::Both;
        cfg.p = 3;
        assert!(matches!(cfg.validate(), Err(Error::Branch(_))));
        cfg.statistic = Statistic::ComplexScalar;
        assert!(cfg.validate().is_ok());
        assert!(run_experiment(&ExperimentConfig { reps: 5, ..cfg }).is_ok());
        let mut cfg = small(Statistic::Z2);
        cfg.noise = NoiseModel::StudentT { df: 2.4 };
        assert!(cfg.validate().is_err());
        let mut cfg = small(Statistic::Z2);
        cfg.eps = 0.99;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json() {
        let text = r#"{"p":3,"alpha":0.5,"n":5000,"reps":10,"lambda1":"-1","seed":42}"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.unit_root_mode, UnitRootMode::MinusOne);
        assert_eq!(cfg.c, 1.0);
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<ExperimentConfig>(&text.replace("}", ",\"zzz\":1}")).is_err());
    }

    #[test]
    fn sweep_grids() {
        assert_eq!(tail_grid(1, 10).len(), 6);
        assert_eq!(slow_rate_grid(1, 10).len(), 8);
        assert_eq!(fast_rate_grid(1, 10).len(), 8);
        assert!(sweep(&[]).is_err());
        let cfg = small(Statistic::Z2);
        let out = sweep(&[cfg.clone(), cfg]).unwrap();
        assert_eq!(out[0].as_ref().unwrap().samples, out[1].as_ref().unwrap().samples);
    }

    #[test]
    fn quantile_interpolates() {
        let s = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile(&s, 0.5), 1.5);
        assert_eq!(quantile(&s, 1.0), 3.0);
        assert!((reference_tail() - 0.0108).abs() < 5e-5);
    }
}
