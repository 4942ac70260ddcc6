//! Kronecker/vec calculus and the second-order objects of a companion model.
//!
//! `vec` stacks columns, so `vec(K_p) = e_{p^2}` where `K_p` has a single one
//! in position `(1, 1)`. All objects are small (`p <= 12`), dense and built
//! from nalgebra LU factorizations.

use nalgebra::{DMatrix, DVector, Scalar};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::spectrum::{pi_column, vandermonde_basis, CompanionModel, UnitRootMode, MAX_ORDER};
use crate::{CMat, Complex64, Error, RMat, Result};

const INVERSE_RESIDUAL_TOL: f64 = 1e-9;
const LYAPUNOV_TOL: f64 = 1e-9;

pub fn kron<T>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T>
where
    T: Scalar + nalgebra::ClosedMulAssign + nalgebra::ClosedAddAssign + Copy + num_traits::Zero + num_traits::One,
{
    a.kronecker(b)
}

/// Column-major stacking.
pub fn vec<T: Scalar + Copy>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`] into a matrix with `rows` rows.
pub fn vec_inv<T: Scalar + Copy>(v: &DVector<T>, rows: usize) -> Result<DMatrix<T>> {
    if rows == 0 || !v.len().is_multiple_of(rows) {
        return Err(Error::Dimension(format!(
            "cannot reshape a vector of length {} into {rows} rows",
            v.len()
        )));
    }
    Ok(DMatrix::from_column_slice(rows, v.len() / rows, v.as_slice()))
}

/// `K_p`: single one at `(1, 1)`.
pub fn k_matrix(p: usize) -> RMat {
    let mut k = RMat::zeros(p, p);
    k[(0, 0)] = 1.0;
    k
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Real part of `m` when every imaginary residue is below `1e-12` (relative to
/// the entry magnitude, floored at one).
pub fn real_view(m: &CMat) -> Option<RMat> {
    m.iter()
        .all(|z| z.im.abs() <= 1e-12 * z.re.abs().max(1.0))
        .then(|| m.map(|z| z.re))
}

fn real_view_with_tol(m: &CMat, tol: f64, what: &str) -> Result<RMat> {
    let worst = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst > tol * m.norm().max(1.0) {
        return Err(Error::Numerical(format!("{what} has imaginary residue {worst:.3e}")));
    }
    Ok(m.map(|z| z.re))
}

fn check_square(a: &RMat, what: &str) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{what} must be square, got {}x{}", a.nrows(), a.ncols())));
    }
    if a.nrows() == 0 || a.nrows() > MAX_ORDER {
        return Err(Error::Dimension(format!("{what} order {} outside 1..={MAX_ORDER}", a.nrows())));
    }
    Ok(a.nrows())
}

/// `B^{-1} = (I - A (x) A)^{-1}` by dense LU.
pub fn b_inverse(a: &RMat) -> Result<RMat> {
    let p = check_square(a, "A")?;
    let q = p * p;
    let b = RMat::identity(q, q) - kron(a, a);
    let x = b
        .clone()
        .lu()
        .solve(&RMat::identity(q, q))
        .ok_or_else(|| Error::Numerical("I - A(x)A is singular; spectral radius of A must be < 1".into()))?;
    let residual = (&b * &x - RMat::identity(q, q)).norm();
    if !residual.is_finite() || residual > INVERSE_RESIDUAL_TOL {
        return Err(Error::Numerical(format!("B^-1 residual {residual:.3e} too large")));
    }
    Ok(x)
}

/// Stationary covariance `Gamma_n(0)` through `vec(Gamma) = sigma2 B^{-1} e_{p^2}`.
pub fn stationary_covariance(a: &RMat, sigma2: f64) -> Result<RMat> {
    let p = check_square(a, "A")?;
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::Parameter(format!("sigma2 must be > 0, got {sigma2}")));
    }
    let binv = b_inverse(a)?;
    let g = vec_inv(&(binv.column(0).into_owned() * sigma2), p)?;
    let g = (&g + g.transpose()) * 0.5;
    let resid = lyapunov_residual(a, &g, sigma2);
    if resid > LYAPUNOV_TOL * g.norm().max(1.0) {
        return Err(Error::Numerical(format!("Lyapunov residual {resid:.3e} too large")));
    }
    Ok(g)
}

/// `|| Gamma - A Gamma A^T - sigma2 K_p ||_F`.
pub fn lyapunov_residual(a: &RMat, gamma: &RMat, sigma2: f64) -> f64 {
    (gamma - a * gamma * a.transpose() - k_matrix(a.nrows()) * sigma2).norm()
}

/// `Gamma(h) = A^h Gamma(0)` for `h >= 0` and `Gamma(h)^T` for negative lags.
pub fn autocovariance(a: &RMat, gamma0: &RMat, h: i64) -> Result<RMat> {
    check_square(a, "A")?;
    if gamma0.shape() != a.shape() {
        return Err(Error::Dimension("Gamma(0) and A must have the same shape".into()));
    }
    let g = a.pow(h.unsigned_abs() as u32) * gamma0;
    Ok(if h >= 0 { g } else { g.transpose() })
}

/// `sum_{h in Z} Gamma(h) = Gamma0 + A (I - A)^{-1} Gamma0 + (A (I - A)^{-1} Gamma0)^T`.
pub fn memory_sum(a: &RMat, gamma0: &RMat) -> Result<RMat> {
    let p = check_square(a, "A")?;
    if gamma0.shape() != a.shape() {
        return Err(Error::Dimension("Gamma(0) and A must have the same shape".into()));
    }
    let resolvent = (RMat::identity(p, p) - a)
        .lu()
        .solve(gamma0)
        .ok_or_else(|| Error::Numerical("I - A is singular".into()))?;
    let tail = a * resolvent;
    Ok(gamma0 + &tail + tail.transpose())
}

fn unit_root_count(mode: UnitRootMode, limit: &[Complex64]) -> Result<usize> {
    let k = mode.unit_roots();
    if limit.len() < k {
        return Err(Error::Spectrum(format!("mode '{mode}' needs at least {k} eigenvalues")));
    }
    for (z, &r) in limit.iter().zip(mode.limit_roots()) {
        if (z - Complex64::new(r, 0.0)).norm() > 1e-12 {
            return Err(Error::Spectrum(format!("expected limit unit root {r}, found {z}")));
        }
    }
    if limit[k..].iter().any(|z| z.norm() >= 1.0) {
        return Err(Error::Spectrum("bulk limit eigenvalues must lie strictly inside the unit disc".into()));
    }
    Ok(k)
}

/// The Cauchy-like block `Lambda_{ij} = pi_i pi_j / (1 - lambda_i lambda_j)` over
/// the indices past the unit roots.
pub fn lambda_block(limit: &[Complex64], mode: UnitRootMode) -> Result<CMat> {
    let k = unit_root_count(mode, limit)?;
    let pi = pi_column(limit)?;
    let m = limit.len() - k;
    Ok(CMat::from_fn(m, m, |i, j| {
        let (i, j) = (i + k, j + k);
        pi[i] * pi[j] / (Complex64::new(1.0, 0.0) - limit[i] * limit[j])
    }))
}

/// Limit precision matrix `H0`: `pi_11^2 / 2` (and `pi_21^2 / 2` with two unit
/// roots) on the leading diagonal, `Lambda` below-right.
pub fn h0_matrix(limit: &[Complex64], mode: UnitRootMode) -> Result<CMat> {
    let k = unit_root_count(mode, limit)?;
    let pi = pi_column(limit)?;
    let p = limit.len();
    let lam = lambda_block(limit, mode)?;
    let mut h = CMat::zeros(p, p);
    for i in 0..k {
        h[(i, i)] = pi[i] * pi[i] / 2.0;
    }
    h.view_mut((k, k), (p - k, p - k)).copy_from(&lam);
    Ok(h)
}

/// Closed-form leading minors `d_2, ..., d_p` of `Lambda` for one unit root:
/// `d_k = prod_{j=2}^k pi_j^2 / (1 - lambda_j^2) * prod_{2 <= i < j <= k} (lambda_i - lambda_j)^2 / (1 - lambda_i lambda_j)^2`.
pub fn lambda_det_recurrence(limit: &[Complex64]) -> Result<Vec<Complex64>> {
    let p = limit.len();
    if p < 2 {
        return Err(Error::Spectrum("the Lambda block needs p >= 2".into()));
    }
    let pi = pi_column(limit)?;
    let one = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(p - 1);
    let mut d = one;
    for k in 1..p {
        let own = one - limit[k] * limit[k];
        if own.norm() < 1e-300 {
            return Err(Error::Spectrum(format!("1 - lambda^2 vanishes for {}", limit[k])));
        }
        d *= pi[k] * pi[k] / own;
        for i in 1..k {
            let cross = one - limit[i] * limit[k];
            if cross.norm() < 1e-300 {
                return Err(Error::Spectrum("1 - lambda_i lambda_j vanishes".into()));
            }
            let diff = limit[i] - limit[k];
            d *= diff * diff / (cross * cross);
        }
        out.push(d);
    }
    Ok(out)
}

/// Rate matrix `V_n` and `W_n = (V^{1/2} P_n^{-1}) (x) (V^{1/2} P_n^{-1})`.
///
/// With one unit root `V_n = diag(1 - rho_n, 1, ..., 1)`; with two,
/// `V_n = diag(1 - lambda_{n,1}, 1 + lambda_{n,2}, 1, ..., 1)`.
pub fn rate_matrices(model: &CompanionModel) -> (RMat, CMat) {
    let p = model.p();
    let mut v = RMat::identity(p, p);
    match model.mode {
        UnitRootMode::PlusOne | UnitRootMode::MinusOne => v[(0, 0)] = 1.0 - model.rho(),
        UnitRootMode::Both => {
            v[(0, 0)] = 1.0 - model.eigenvalues[0].re;
            v[(1, 1)] = 1.0 + model.eigenvalues[1].re;
        }
    }
    let half = to_complex(&v.map(f64::sqrt));
    let left = half * &model.p_inv;
    let w = kron(&left, &left);
    (v, w)
}

/// `A* = P K_p P^{-1}` on the limit eigenbasis.
pub fn a_star(limit: &[Complex64]) -> Result<CMat> {
    let p = limit.len();
    let basis = vandermonde_basis(limit);
    let inv = basis
        .clone()
        .lu()
        .solve(&CMat::identity(p, p))
        .ok_or_else(|| Error::Numerical("limit eigenbasis is singular".into()))?;
    Ok(&basis * to_complex(&k_matrix(p)) * inv)
}

/// `lim (1 - rho_n) B_n^{-1}`: `(1/2) A* (x) A*` with one unit root; with two,
/// `(1/2)(P (x) P) K* (P^{-1} (x) P^{-1})` where `K*` keeps the `(1,1)` and
/// `(2,2)` eigen-pairs (valid for matching rates `c / v_n = d / w_n`).
pub fn scaled_b_inverse_limit(limit: &[Complex64]) -> Result<CMat> {
    let p = limit.len();
    let two_roots = p >= 2
        && (limit[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12
        && (limit[1] + Complex64::new(1.0, 0.0)).norm() < 1e-12;
    if !two_roots {
        let s = a_star(limit)?;
        return Ok(kron(&s, &s) * Complex64::new(0.5, 0.0));
    }
    let basis = vandermonde_basis(limit);
    let inv = basis
        .clone()
        .lu()
        .solve(&CMat::identity(p, p))
        .ok_or_else(|| Error::Numerical("limit eigenbasis is singular".into()))?;
    let mut kstar = CMat::zeros(p * p, p * p);
    kstar[(0, 0)] = Complex64::new(1.0, 0.0);
    kstar[(p + 1, p + 1)] = Complex64::new(1.0, 0.0);
    Ok(kron(&basis, &basis) * kstar * kron(&inv, &inv) * Complex64::new(0.5, 0.0))
}

/// `Gamma = sigma2 vec^{-1}(lim (1 - rho_n) B_n^{-1} e_{p^2})`, the limit of
/// `(1 - rho_n) S_n / n`.
pub fn limit_covariance(limit: &[Complex64], sigma2: f64) -> Result<RMat> {
    let p = limit.len();
    let l = scaled_b_inverse_limit(limit)?;
    let g = vec_inv(&(l.column(0).into_owned() * Complex64::new(sigma2, 0.0)), p)?;
    real_view_with_tol(&g, 1e-10, "limit covariance")
}

/// `H* = lim W_n B_n^{-1} = diag(K_p / 2, Delta_2, ..., Delta_p)(P^{-1} (x) P^{-1})`,
/// for one unit root.
pub fn limit_wb(limit: &[Complex64], mode: UnitRootMode) -> Result<CMat> {
    if mode == UnitRootMode::Both {
        return Err(Error::Branch("the W B^-1 limit is only tabulated for a single unit root".into()));
    }
    unit_root_count(mode, limit)?;
    let p = limit.len();
    let inv = vandermonde_basis(limit)
        .lu()
        .solve(&CMat::identity(p, p))
        .ok_or_else(|| Error::Numerical("limit eigenbasis is singular".into()))?;
    let mut diag = DVector::from_element(p * p, Complex64::new(0.0, 0.0));
    diag[0] = Complex64::new(0.5, 0.0);
    for i in 1..p {
        for j in 1..p {
            diag[i * p + j] = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - limit[i] * limit[j]);
        }
    }
    Ok(CMat::from_diagonal(&diag) * kron(&inv, &inv))
}

/// Every matrix object attached to one model row.
#[derive(Debug, Clone)]
pub struct TheoryBundle {
    pub b_inv: RMat,
    pub gamma_n: RMat,
    pub gamma_limit: RMat,
    pub a_star: CMat,
    pub h0: CMat,
    pub v: RMat,
    pub w: CMat,
    pub memory_sum: RMat,
    pub pi_col: Vec<Complex64>,
    pub det_recurrence: Vec<Complex64>,
}

pub fn theory_bundle(model: &CompanionModel, sigma2: f64) -> Result<TheoryBundle> {
    let b_inv = b_inverse(&model.a)?;
    let gamma_n = stationary_covariance(&model.a, sigma2)?;
    let gamma_limit = limit_covariance(&model.limit_eigenvalues, sigma2)?;
    let a_star = a_star(&model.limit_eigenvalues)?;
    let h0 = h0_matrix(&model.limit_eigenvalues, model.mode)?;
    let (v, w) = rate_matrices(model);
    let memory_sum = memory_sum(&model.a, &gamma_n)?;
    let det_recurrence = if model.p() >= 2 && model.mode != UnitRootMode::Both {
        lambda_det_recurrence(&model.limit_eigenvalues)?
    } else {
        Vec::new()
    };
    Ok(TheoryBundle {
        b_inv,
        gamma_n,
        gamma_limit,
        a_star,
        h0,
        v,
        w,
        memory_sum,
        pi_col: model.pi_col.clone(),
        det_recurrence,
    })
}

/// Row-major nested arrays; plain reals when the matrix is real, `{re, im}`
/// objects otherwise.
pub fn matrix_json(m: &CMat) -> serde_json::Value {
    match real_view(m) {
        Some(r) => real_matrix_json(&r),
        None => serde_json::Value::Array(
            m.row_iter()
                .map(|row| {
                    serde_json::Value::Array(
                        row.iter().map(|z| serde_json::json!({"re": z.re, "im": z.im})).collect(),
                    )
                })
                .collect(),
        ),
    }
}

pub fn real_matrix_json(m: &RMat) -> serde_json::Value {
    serde_json::Value::Array(
        m.row_iter()
            .map(|row| serde_json::Value::Array(row.iter().map(|&x| serde_json::json!(x)).collect()))
            .collect(),
    )
}

pub fn complex_vec_json(v: &[Complex64]) -> serde_json::Value {
    if v.iter().all(|z| z.im.abs() <= 1e-12 * z.re.abs().max(1.0)) {
        serde_json::json!(v.iter().map(|z| z.re).collect::<Vec<_>>())
    } else {
        serde_json::Value::Array(v.iter().map(|z| serde_json::json!({"re": z.re, "im": z.im})).collect())
    }
}

impl Serialize for TheoryBundle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TheoryBundle", 10)?;
        st.serialize_field("B_inv", &real_matrix_json(&self.b_inv))?;
        st.serialize_field("Gamma_n", &real_matrix_json(&self.gamma_n))?;
        st.serialize_field("Gamma_limit", &real_matrix_json(&self.gamma_limit))?;
        st.serialize_field("A_star", &matrix_json(&self.a_star))?;
        st.serialize_field("H0", &matrix_json(&self.h0))?;
        st.serialize_field("V", &real_matrix_json(&self.v))?;
        st.serialize_field("W", &matrix_json(&self.w))?;
        st.serialize_field("memory_sum", &real_matrix_json(&self.memory_sum))?;
        st.serialize_field("pi_col", &complex_vec_json(&self.pi_col))?;
        st.serialize_field("det_recurrence", &complex_vec_json(&self.det_recurrence))?;
        st.end()
    }
}
