//! Normalized estimation errors and the chi-square reference.

use nalgebra::DVector;
use serde::Serialize;
use statrs::function::erf::erf;

use crate::estimation::EstimationResult;
use crate::linalg::rate_matrices;
use crate::spectrum::{pi_column, sort_spectrum, CompanionModel, UnitRootMode, REAL_TOL};
use crate::{Complex64, Error, Result};

/// `P(chi2_1 > 6.5)`, the tail mass compared against in the experiments.
pub const TAIL_THRESHOLD: f64 = 6.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedError {
    /// Present only for real spectra.
    pub real_case: Option<Vec<f64>>,
    pub scalar_complex: f64,
    /// Absent under two unit roots.
    pub z_squared: Option<f64>,
}

fn error_vector(result: &EstimationResult, model: &CompanionModel) -> Result<Vec<f64>> {
    if result.p() != model.p() {
        return Err(Error::Dimension(format!("model has order {}, estimate has {}", model.p(), result.p())));
    }
    Ok(result.theta_hat.iter().zip(&model.theta).map(|(h, t)| h - t).collect())
}

/// `sqrt(n) V_n^{-1/2} P_n^T (theta_hat - theta_n)`.
pub fn normalized_error_real(result: &EstimationResult, model: &CompanionModel) -> Result<Vec<f64>> {
    if !model.has_real_spectrum() {
        return Err(Error::Branch(
            "spectrum is complex; use the scalar statistic instead".into(),
        ));
    }
    let delta = DVector::from_vec(error_vector(result, model)?);
    let (v, _) = rate_matrices(model);
    let pt = model.p_mat.transpose().map(|z| z.re);
    let raw = pt * delta;
    let scale = (result.n as f64).sqrt();
    Ok(raw.iter().enumerate().map(|(i, x)| scale * x / v[(i, i)].sqrt()).collect())
}

/// `sum_i lambda_{n,1}^{-(i-1)} (theta_hat_i - theta_i)`.
fn weighted_error(result: &EstimationResult, model: &CompanionModel) -> Result<f64> {
    let delta = error_vector(result, model)?;
    let lambda1 = model.eigenvalues[0];
    if lambda1.im.abs() > REAL_TOL {
        return Err(Error::Branch("leading eigenvalue is not real".into()));
    }
    let inv = 1.0 / lambda1.re;
    let mut w = 1.0;
    let mut acc = 0.0;
    for d in delta {
        acc += w * d;
        w *= inv;
    }
    Ok(acc)
}

/// `sqrt(n v_n) <L_n, theta_hat - theta_n>` with `L_n = (lambda_{n,1}^{-(i-1)})_i`.
pub fn scalar_statistic_complex(result: &EstimationResult, model: &CompanionModel) -> Result<f64> {
    Ok((result.n as f64 * model.v()).sqrt() * weighted_error(result, model)?)
}

/// `Z_n^2 = pi_11^2 n v_n / (2c) [sum_i lambda_{n,1}^{-(i-1)} (theta_hat_i - theta_i)]^2`.
pub fn z_squared(result: &EstimationResult, model: &CompanionModel) -> Result<f64> {
    if model.mode == UnitRootMode::Both {
        return Err(Error::Branch("the Z^2 statistic needs a single unit root".into()));
    }
    let s = scalar_statistic_complex(result, model)?;
    Ok(model.pi11().powi(2) / (2.0 * model.c()) * s * s)
}

/// Limit variance `2c / pi_11^2` of the scalar statistic.
pub fn scalar_limit_variance(model: &CompanionModel) -> f64 {
    2.0 * model.c() / model.pi11().powi(2)
}

/// `Z_n^2` with `lambda_{n,1}` and `pi_11` replaced by values computed from the
/// eigenvalues of the fitted companion matrix. Not used by the acceptance runs.
pub fn z_squared_plugin(result: &EstimationResult, model: &CompanionModel) -> Result<f64> {
    if model.mode == UnitRootMode::Both {
        return Err(Error::Branch("the Z^2 statistic needs a single unit root".into()));
    }
    let delta = error_vector(result, model)?;
    let a_hat = crate::spectrum::companion_matrix(&result.theta_hat);
    let mut eig: Vec<Complex64> = a_hat.complex_eigenvalues().iter().copied().collect();
    sort_spectrum(&mut eig);
    let pi = pi_column(&eig)?;
    let inv = eig[0].inv();
    let mut w = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for d in delta {
        acc += w * d;
        w *= inv;
    }
    let scale = result.n as f64 * model.v() / (2.0 * model.c());
    Ok(pi[0].norm_sqr() * scale * acc.norm_sqr())
}

/// All statistics that apply to `model`.
pub fn normalized_error(result: &EstimationResult, model: &CompanionModel) -> Result<NormalizedError> {
    let real_case = if model.has_real_spectrum() {
        Some(normalized_error_real(result, model)?)
    } else {
        None
    };
    let z = if model.mode == UnitRootMode::Both { None } else { Some(z_squared(result, model)?) };
    Ok(NormalizedError { real_case, scalar_complex: scalar_statistic_complex(result, model)?, z_squared: z })
}

/// CDF of the chi-square law with one degree of freedom.
pub fn chi1_cdf(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("chi-square CDF needs x >= 0, got {x}")));
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(erf((x / 2.0).sqrt()))
}

/// Sup distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance<F>(samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if samples.is_empty() {
        return Err(Error::Domain("KS distance needs at least one sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// KS distance to the chi-square(1) law.
pub fn ks_chi1(samples: &[f64]) -> Result<f64> {
    ks_distance(samples, chi1_cdf)
}
