//! Least-squares fit of the AR coefficients and the second-moment sums that
//! enter the error decomposition.

use nalgebra::{Cholesky, DVector};
use serde::{Serialize, Serializer};

use crate::linalg::{b_inverse, kron, real_matrix_json, stationary_covariance, vec};
use crate::process::TriangularPath;
use crate::spectrum::CompanionModel;
use crate::{Error, RMat, Result};

/// Relative ridge used only when the Gram matrix is numerically singular.
pub const RIDGE_SCALE: f64 = 1e-10;
const NORMAL_EQ_TOL: f64 = 1e-8;
/// Squared pivot ratio of the Cholesky factor below which `S` counts as singular.
const SINGULAR_RCOND: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub n: usize,
    pub theta_hat: Vec<f64>,
    /// `S_{n,n-1} = sum_{k=0}^{n-1} Phi_k Phi_k^T`.
    pub s: RMat,
    /// `S_n`, which also includes `k = n`.
    pub s_full: RMat,
    /// `sum_k Phi_{k-1} E_k^T`; only available when the innovations are known.
    pub z: Option<RMat>,
    /// `sum_k E_k E_k^T`; supported on the `(0, 0)` entry.
    pub l_noise: Option<RMat>,
    /// `Phi_0 Phi_0^T - Phi_n Phi_n^T`.
    pub t_iso: RMat,
    /// `sum_k Phi_{k-1} X_k`.
    pub cross: Vec<f64>,
    pub ridge_used: f64,
    /// Set when the Gram matrix vanishes; `theta_hat` is then zero.
    pub degenerate: bool,
}

impl EstimationResult {
    pub fn p(&self) -> usize {
        self.theta_hat.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let opt = |m: &Option<RMat>| m.as_ref().map_or(serde_json::Value::Null, real_matrix_json);
        serde_json::json!({
            "n": self.n,
            "p": self.p(),
            "theta_hat": self.theta_hat,
            "S": real_matrix_json(&self.s),
            "S_full": real_matrix_json(&self.s_full),
            "Z": opt(&self.z),
            "L_noise": opt(&self.l_noise),
            "T_iso": real_matrix_json(&self.t_iso),
            "ridge_used": self.ridge_used,
            "degenerate": self.degenerate,
        })
    }
}

impl Serialize for EstimationResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

/// OLS regression of `X_k` on `Phi_{k-1}` over `k = 1..=n`.
pub fn ols(path: &TriangularPath) -> Result<EstimationResult> {
    let p = path.p();
    let n = path.n();
    if n <= p {
        return Err(Error::Parameter(format!("need n > p, got n = {n}, p = {p}")));
    }
    let ext = path.extended();
    // ext[k + p - 1] = X_k
    let state = |k: usize, i: usize| ext[k + p - 1 - i];

    let mut s = vec![0.0; p * p];
    let mut cross = vec![0.0; p];
    let mut z_col = vec![0.0; p];
    let mut l00 = 0.0;
    let noise = path.noise();
    let mut phi = vec![0.0; p];
    for k in 0..n {
        for (i, slot) in phi.iter_mut().enumerate() {
            *slot = state(k, i);
        }
        for i in 0..p {
            let fi = phi[i];
            for j in i..p {
                s[i * p + j] += fi * phi[j];
            }
        }
        let next = ext[k + p];
        for i in 0..p {
            cross[i] += phi[i] * next;
        }
        if let Some(eps) = noise {
            let e = eps[k];
            for i in 0..p {
                z_col[i] += phi[i] * e;
            }
            l00 += e * e;
        }
    }
    let s = RMat::from_fn(p, p, |i, j| if i <= j { s[i * p + j] } else { s[j * p + i] });
    let phi_n = path.state(n);
    let phi_0 = path.state(0);
    let s_full = &s + &phi_n * phi_n.transpose();
    let t_iso = &phi_0 * phi_0.transpose() - &phi_n * phi_n.transpose();
    let (z, l_noise) = if noise.is_some() {
        let mut z = RMat::zeros(p, p);
        z.column_mut(0).copy_from_slice(&z_col);
        let mut l = RMat::zeros(p, p);
        l[(0, 0)] = l00;
        (Some(z), Some(l))
    } else {
        (None, None)
    };

    let mut result = EstimationResult {
        n,
        theta_hat: vec![0.0; p],
        s,
        s_full,
        z,
        l_noise,
        t_iso,
        cross,
        ridge_used: 0.0,
        degenerate: false,
    };
    if result.s.iter().all(|&v| v == 0.0) {
        result.degenerate = true;
        return Ok(result);
    }
    let b = DVector::from_column_slice(&result.cross);
    if let Some(theta) = solve_checked(&result.s, &b) {
        result.theta_hat = theta.iter().copied().collect();
        return Ok(result);
    }
    let ridge = RIDGE_SCALE * result.s.trace() / p as f64;
    let shifted = &result.s + RMat::identity(p, p) * ridge;
    let theta = solve_checked(&shifted, &b)
        .ok_or_else(|| Error::Numerical("Gram matrix is singular even after the ridge".into()))?;
    result.theta_hat = theta.iter().copied().collect();
    result.ridge_used = ridge;
    Ok(result)
}

fn solve_checked(s: &RMat, b: &DVector<f64>) -> Option<DVector<f64>> {
    let chol = Cholesky::new(s.clone())?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    if lo.is_nan() || lo <= 0.0 || (lo / hi).powi(2) < SINGULAR_RCOND {
        return None;
    }
    let theta = chol.solve(b);
    if theta.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let resid = (s * &theta - b).norm();
    let scale = s.norm() * theta.norm() + b.norm();
    (resid <= NORMAL_EQ_TOL * scale).then_some(theta)
}

/// Relative Frobenius residual of
/// `vec(S) = B^{-1}[vec(T) + (I (x) A) vec(Z) + (A (x) I) vec(Z^T) + vec(L)]`.
pub fn decomposition_residual(result: &EstimationResult, model: &CompanionModel) -> Result<f64> {
    let p = result.p();
    if model.p() != p {
        return Err(Error::Dimension(format!("model has order {}, estimate has {p}", model.p())));
    }
    let (z, l) = match (&result.z, &result.l_noise) {
        (Some(z), Some(l)) => (z, l),
        _ => {
            return Err(Error::Parameter(
                "innovations unknown for this path; the decomposition needs Z and L".into(),
            ))
        }
    };
    let a = &model.a;
    let eye = RMat::identity(p, p);
    let rhs = vec(&result.t_iso) + kron(&eye, a) * vec(z) + kron(a, &eye) * vec(&z.transpose()) + vec(l);
    let lhs = vec(&result.s);
    let fitted = b_inverse(a)? * rhs;
    let denom = lhs.norm();
    if denom == 0.0 {
        return Ok(fitted.norm());
    }
    Ok((lhs - fitted).norm() / denom)
}

/// `(1 - rho_n) ||S_n / n - Gamma_n||_F`.
pub fn empirical_covariance_check(result: &EstimationResult, model: &CompanionModel, sigma2: f64) -> Result<f64> {
    let gamma = stationary_covariance(&model.a, sigma2)?;
    let gap = &result.s_full / result.n as f64 - gamma;
    Ok((1.0 - model.rho()) * gap.norm())
}
