//! Simulation of one row `X_{n,0..n}` of the triangular array.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::linalg::stationary_covariance;
use crate::spectrum::{companion_matrix, CompanionModel};
use crate::{Error, Result};

/// Zero-mean i.i.d. innovation law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Gaussian { sigma2: f64 },
    Laplace { scale: f64 },
    StudentT { df: f64 },
    Rademacher { scale: f64 },
    /// Point mass at zero; only useful to exercise the deterministic part.
    Zero,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::Gaussian { sigma2: 1.0 }
    }
}

impl NoiseModel {
    pub fn variance(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma2 } => sigma2,
            NoiseModel::Laplace { scale } => 2.0 * scale * scale,
            NoiseModel::StudentT { df } => df / (df - 2.0),
            NoiseModel::Rademacher { scale } => scale * scale,
            NoiseModel::Zero => 0.0,
        }
    }

    /// Finite positive variance (the `Zero` hook is let through).
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseModel::Gaussian { sigma2 } => sigma2.is_finite() && sigma2 > 0.0,
            NoiseModel::Laplace { scale } | NoiseModel::Rademacher { scale } => {
                scale.is_finite() && scale > 0.0
            }
            NoiseModel::StudentT { df } => df.is_finite() && df > 2.0,
            NoiseModel::Zero => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("noise {self:?} needs a finite positive variance")))
        }
    }

    /// Requires a finite moment of order `2 + nu`.
    pub fn check_moment(&self, nu: f64) -> Result<()> {
        self.validate()?;
        match *self {
            NoiseModel::StudentT { df } if df <= 2.0 + nu => Err(Error::Parameter(format!(
                "Student-t with {df} degrees of freedom lacks a moment of order {}",
                2.0 + nu
            ))),
            _ => Ok(()),
        }
    }

    fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match *self {
            NoiseModel::Gaussian { sigma2 } => Sampler::Gaussian(sigma2.sqrt()),
            NoiseModel::Laplace { scale } => Sampler::Laplace(scale),
            NoiseModel::StudentT { df } => Sampler::StudentT(
                StudentT::new(df).map_err(|e| Error::Parameter(e.to_string()))?,
            ),
            NoiseModel::Rademacher { scale } => Sampler::Rademacher(scale),
            NoiseModel::Zero => Sampler::Zero,
        })
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    /// `gaussian[:sigma2]`, `laplace:scale`, `student:df`, `rademacher[:scale]`, `zero`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let num = |default: Option<f64>| -> Result<f64> {
            match (arg, default) {
                (Some(a), _) => a
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad noise parameter '{a}'"))),
                (None, Some(d)) => Ok(d),
                (None, None) => Err(Error::Parse(format!("noise '{kind}' needs a parameter"))),
            }
        };
        let model = match kind.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => NoiseModel::Gaussian { sigma2: num(Some(1.0))? },
            "laplace" => NoiseModel::Laplace { scale: num(None)? },
            "student" | "student_t" | "t" => NoiseModel::StudentT { df: num(None)? },
            "rademacher" => NoiseModel::Rademacher { scale: num(Some(1.0))? },
            "zero" if arg.is_none() => NoiseModel::Zero,
            other => return Err(Error::Parse(format!("unknown noise model '{other}'"))),
        };
        model.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(model)
    }
}

enum Sampler {
    Gaussian(f64),
    Laplace(f64),
    StudentT(StudentT<f64>),
    Rademacher(f64),
    Zero,
}

impl Sampler {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gaussian(sd) => {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            }
            Sampler::Laplace(b) => {
                let u: f64 = rng.random::<f64>() - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            Sampler::StudentT(t) => t.sample(rng),
            Sampler::Rademacher(s) => {
                if rng.random::<bool>() {
                    *s
                } else {
                    -*s
                }
            }
            Sampler::Zero => 0.0,
        }
    }
}

/// Initial state `Phi_{n,0} = (X_0, X_{-1}, ..., X_{-p+1})`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum InitialStatePolicy {
    #[default]
    ZeroState,
    /// Gaussian draw with the stationary covariance of the row.
    StationaryDraw,
    FixedVector(Vec<f64>),
}

impl FromStr for InitialStatePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(InitialStatePolicy::ZeroState),
            "stationary" => Ok(InitialStatePolicy::StationaryDraw),
            other => {
                let body = other.strip_prefix("fixed:").ok_or_else(|| {
                    Error::Parse(format!("unknown initial state '{other}' (zero|stationary|fixed:x0,x-1,...)"))
                })?;
                body.split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad value '{t}'"))))
                    .collect::<Result<Vec<_>>>()
                    .map(InitialStatePolicy::FixedVector)
            }
        }
    }
}

/// One simulated row. `x[k] = X_{n,k}` for `k = 0..=n`; lags before zero come
/// from `phi0`, so `x[0] == phi0[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularPath {
    p: usize,
    x: Vec<f64>,
    phi0: Vec<f64>,
    noise: Option<Vec<f64>>,
}

impl TriangularPath {
    /// `noise`, when known, holds `eps_1..eps_n`.
    pub fn new(p: usize, x: Vec<f64>, phi0: Vec<f64>, noise: Option<Vec<f64>>) -> Result<Self> {
        if p == 0 || phi0.len() != p {
            return Err(Error::Dimension(format!("initial state must have length p = {p}")));
        }
        if x.is_empty() || x[0] != phi0[0] {
            return Err(Error::Dimension("x[0] must equal the first entry of the initial state".into()));
        }
        if let Some(e) = &noise {
            if e.len() + 1 != x.len() {
                return Err(Error::Dimension("noise must hold one value per step".into()));
            }
        }
        if x.iter().chain(&phi0).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("path contains non-finite values".into()));
        }
        Ok(Self { p, x, phi0, noise })
    }

    /// Uses the first `p` values as the initial state and the rest as the
    /// sample, i.e. `Phi_0 = (obs[p-1], ..., obs[0])`.
    pub fn from_observations(obs: &[f64], p: usize) -> Result<Self> {
        if p == 0 || obs.len() < p + 1 {
            return Err(Error::Dimension(format!(
                "need at least p + 1 = {} observations, got {}",
                p + 1,
                obs.len()
            )));
        }
        let phi0: Vec<f64> = obs[..p].iter().rev().copied().collect();
        Self::new(p, obs[p - 1..].to_vec(), phi0, None)
    }

    pub fn n(&self) -> usize {
        self.x.len() - 1
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn phi0(&self) -> &[f64] {
        &self.phi0
    }

    pub fn noise(&self) -> Option<&[f64]> {
        self.noise.as_deref()
    }

    /// `X_{n,t}` for `t >= -(p - 1)`.
    pub fn value(&self, t: isize) -> f64 {
        if t >= 0 {
            self.x[t as usize]
        } else {
            self.phi0[(-t) as usize]
        }
    }

    /// State vector `Phi_k = (X_k, ..., X_{k-p+1})`.
    pub fn state(&self, k: usize) -> DVector<f64> {
        DVector::from_fn(self.p, |i, _| self.value(k as isize - i as isize))
    }

    /// Full series from `X_{-(p-1)}` to `X_n`.
    pub fn extended(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.phi0[1..].iter().rev().copied().collect();
        out.extend_from_slice(&self.x);
        out
    }

    /// `k,x` CSV with one row per value from `k = -(p-1)` to `n`; values carry
    /// 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.x.len() + self.p));
        out.push_str("k,x\n");
        let first = -(self.p as isize - 1);
        for (i, v) in self.extended().iter().enumerate() {
            let _ = writeln!(out, "{},{:.16e}", first + i as isize, v);
        }
        out
    }

    /// Reads a `k,x` CSV with contiguous increasing `k`. The first `p` rows
    /// form the initial state.
    pub fn from_csv(text: &str, p: usize) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        match lines.next() {
            Some(h) if h.replace(' ', "") == "k,x" => {}
            Some(h) => return Err(Error::Parse(format!("expected header 'k,x', got '{h}'"))),
            None => return Err(Error::Parse("empty CSV".into())),
        }
        let mut values = Vec::new();
        let mut prev: Option<i64> = None;
        for (lineno, line) in lines.enumerate() {
            let (k, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("row {}: expected 'k,x'", lineno + 2)))?;
            let k: i64 = k
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad index '{k}'", lineno + 2)))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad value '{v}'", lineno + 2)))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("row {}: non-finite value", lineno + 2)));
            }
            if let Some(pk) = prev {
                if pk.checked_add(1) != Some(k) {
                    return Err(Error::Parse(format!("row {}: index {k} does not follow {pk}", lineno + 2)));
                }
            }
            prev = Some(k);
            values.push(v);
        }
        Self::from_observations(&values, p)
    }
}

/// Simulates `X_k = sum_i theta_i X_{k-i} + eps_k` for `k = 1..=n`.
pub fn simulate_coefficients<R: Rng + ?Sized>(
    theta: &[f64],
    n: usize,
    noise: &NoiseModel,
    init: &InitialStatePolicy,
    rng: &mut R,
) -> Result<TriangularPath> {
    let p = theta.len();
    if p == 0 || n < p {
        return Err(Error::Parameter(format!("need n >= p >= 1, got n = {n}, p = {p}")));
    }
    let sampler = noise.sampler()?;
    let phi0 = match init {
        InitialStatePolicy::ZeroState => vec![0.0; p],
        InitialStatePolicy::FixedVector(v) => {
            if v.len() != p {
                return Err(Error::Dimension(format!("fixed initial state must have length {p}")));
            }
            v.clone()
        }
        InitialStatePolicy::StationaryDraw => {
            if noise.variance() == 0.0 {
                vec![0.0; p]
            } else {
                stationary_draw(theta, noise.variance(), rng)?
            }
        }
    };

    // ext[j] = X_{j - (p - 1)}
    let mut ext = Vec::with_capacity(n + p);
    ext.extend(phi0.iter().rev());
    let mut eps = Vec::with_capacity(n);
    for _ in 0..n {
        let e = sampler.draw(rng);
        let len = ext.len();
        let ar: f64 = theta.iter().enumerate().map(|(i, t)| t * ext[len - 1 - i]).sum();
        ext.push(ar + e);
        eps.push(e);
    }
    let x = ext.split_off(p - 1);
    TriangularPath::new(p, x, phi0, Some(eps))
}

/// Simulates row `model.n` of the array.
pub fn simulate<R: Rng + ?Sized>(
    model: &CompanionModel,
    noise: &NoiseModel,
    init: &InitialStatePolicy,
    rng: &mut R,
) -> Result<TriangularPath> {
    let n = usize::try_from(model.n).map_err(|_| Error::Parameter("n too large".into()))?;
    simulate_coefficients(&model.theta, n, noise, init, rng)
}

fn stationary_draw<R: Rng + ?Sized>(theta: &[f64], sigma2: f64, rng: &mut R) -> Result<Vec<f64>> {
    let p = theta.len();
    let gamma = stationary_covariance(&companion_matrix(theta), sigma2)?;
    let chol = nalgebra::Cholesky::new(gamma.clone())
        .or_else(|| {
            let jitter = 1e-12 * gamma.trace().max(1.0);
            nalgebra::Cholesky::new(gamma + crate::RMat::identity(p, p) * jitter)
        })
        .ok_or_else(|| Error::Numerical("stationary covariance is not positive definite".into()))?;
    let z = DVector::from_fn(p, |_, _| {
        let v: f64 = StandardNormal.sample(rng);
        v
    });
    Ok((chol.l() * z).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{coefficients_from_eigenvalues, companion_model, EigenSpec, UnitRootMode};
    use crate::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn zero_noise_zero_state_is_zero() {
        let path = simulate_coefficients(
            &[0.5, 0.2],
            50,
            &NoiseModel::Zero,
            &InitialStatePolicy::ZeroState,
            &mut rng(1),
        )
        .unwrap();
        assert!(path.x().iter().all(|&v| v == 0.0));
        assert_eq!(path.n(), 50);
    }

    #[test]
    fn white_noise_when_theta_is_zero() {
        let path = simulate_coefficients(
            &[0.0],
            100,
            &NoiseModel::default(),
            &InitialStatePolicy::ZeroState,
            &mut rng(2),
        )
        .unwrap();
        let eps = path.noise().unwrap();
        for k in 1..=100 {
            assert_eq!(path.x()[k], eps[k - 1]);
        }
    }

    #[test]
    fn matches_scalar_loop_oracle() {
        let theta = coefficients_from_eigenvalues(&[Complex64::new(0.9, 0.0), Complex64::new(0.5, 0.0)]).unwrap();
        let init = InitialStatePolicy::FixedVector(vec![0.3, -1.2]);
        let path = simulate_coefficients(&theta, 500, &NoiseModel::default(), &init, &mut rng(3)).unwrap();

        // independent scalar recursion on the recorded innovations
        let eps = path.noise().unwrap();
        let (mut xm1, mut xm2) = (0.3, -1.2);
        for k in 1..=500 {
            let xk = theta[0] * xm1 + theta[1] * xm2 + eps[k - 1];
            assert!((xk - path.x()[k]).abs() < 1e-12);
            xm2 = xm1;
            xm1 = xk;
        }
    }

    #[test]
    fn vector_and_scalar_forms_agree() {
        let theta = [0.4, -0.2, 0.1];
        let a = companion_matrix(&theta);
        let path = simulate_coefficients(
            &theta,
            200,
            &NoiseModel::Laplace { scale: 0.8 },
            &InitialStatePolicy::FixedVector(vec![1.0, 2.0, 3.0]),
            &mut rng(4),
        )
        .unwrap();
        let eps = path.noise().unwrap();
        let mut phi = path.state(0);
        for k in 1..=200 {
            let mut e = DVector::zeros(3);
            e[0] = eps[k - 1];
            phi = &a * &phi + e;
            assert_eq!(phi, path.state(k));
        }
    }

    #[test]
    fn determinism() {
        let spec = EigenSpec::single(3, UnitRootMode::MinusOne, 1.0, 0.5, &[0.4, -0.6]).unwrap();
        let m = companion_model(&spec, 1000).unwrap();
        let run = |s| simulate(&m, &NoiseModel::default(), &InitialStatePolicy::StationaryDraw, &mut rng(s)).unwrap();
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn stationary_variance_of_long_path() {
        // rho fixed at 0.9 through the schedule at n = 1e5
        let n = 100_000u64;
        let c = 0.1 * (n as f64).sqrt();
        let spec = EigenSpec::single(2, UnitRootMode::PlusOne, c, 0.5, &[0.3]).unwrap();
        let m = companion_model(&spec, n).unwrap();
        assert!((m.rho() - 0.9).abs() < 1e-12);
        let path = simulate(&m, &NoiseModel::default(), &InitialStatePolicy::StationaryDraw, &mut rng(5)).unwrap();
        let xs = path.x();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let gamma = stationary_covariance(&m.a, 1.0).unwrap()[(0, 0)];
        assert!((var / gamma - 1.0).abs() < 0.05, "var {var} vs {gamma}");
    }

    #[test]
    fn noise_variances() {
        let mut r = rng(6);
        for noise in [
            NoiseModel::Gaussian { sigma2: 2.0 },
            NoiseModel::Laplace { scale: 0.5 },
            NoiseModel::StudentT { df: 6.0 },
            NoiseModel::Rademacher { scale: 1.5 },
        ] {
            let s = noise.sampler().unwrap();
            let n = 200_000;
            let draws: Vec<f64> = (0..n).map(|_| s.draw(&mut r)).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|v| v * v).sum::<f64>() / n as f64;
            assert!(mean.abs() < 0.02, "{noise:?} mean {mean}");
            assert!((var / noise.variance() - 1.0).abs() < 0.03, "{noise:?} var {var}");
        }
    }

    #[test]
    fn noise_validation_and_parsing() {
        assert!(NoiseModel::StudentT { df: 2.0 }.validate().is_err());
        assert!(NoiseModel::StudentT { df: 2.4 }.check_moment(0.5).is_err());
        assert!(NoiseModel::StudentT { df: 3.0 }.check_moment(0.5).is_ok());
        assert!(NoiseModel::Gaussian { sigma2: 0.0 }.validate().is_err());
        assert_eq!("gaussian".parse::<NoiseModel>().unwrap(), NoiseModel::default());
        assert_eq!("student:5".parse::<NoiseModel>().unwrap(), NoiseModel::StudentT { df: 5.0 });
        assert!("laplace".parse::<NoiseModel>().is_err());
        assert!("cauchy:1".parse::<NoiseModel>().is_err());
        assert_eq!(
            "fixed:1,2".parse::<InitialStatePolicy>().unwrap(),
            InitialStatePolicy::FixedVector(vec![1.0, 2.0])
        );
    }

    #[test]
    fn csv_round_trip_keeps_initial_state() {
        let path = simulate_coefficients(
            &[0.5, -0.3, 0.1],
            40,
            &NoiseModel::default(),
            &InitialStatePolicy::StationaryDraw,
            &mut rng(7),
        )
        .unwrap();
        let csv = path.to_csv();
        assert_eq!(csv.lines().count(), 1 + 40 + 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("-2,"));
        let back = TriangularPath::from_csv(&csv, 3).unwrap();
        assert_eq!(back.x(), path.x());
        assert_eq!(back.phi0(), path.phi0());
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(TriangularPath::from_csv("", 1).is_err());
        assert!(TriangularPath::from_csv("a,b\n0,1\n", 1).is_err());
        assert!(TriangularPath::from_csv("k,x\n0,1\n2,3\n", 1).is_err());
        assert!(TriangularPath::from_csv("k,x\n0,1\n1,nan\n", 1).is_err());
        assert!(TriangularPath::from_csv("k,x\n0,1\n", 1).is_err());
        assert!(TriangularPath::from_csv("k,x\n0,1\n1,2\n", 1).is_ok());
    }
}
