//! Eigenvalue schedules and the companion models they generate.
//!
//! A model row `n` is described by its spectrum: one (or two) near-unit
//! eigenvalues driven by a [`RateSchedule`] plus a fixed bulk strictly inside
//! the unit disc. From that spectrum we recover the AR coefficients, the
//! companion matrix and its Vandermonde eigenbasis.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{CMat, Complex64, Error, RMat, Result};

/// Largest supported AR order.
pub const MAX_ORDER: usize = 12;
/// Condition-number cap (Frobenius) for the eigenbasis `P_n`.
pub const DEFAULT_COND_CAP: f64 = 1e12;
/// Imaginary residue below which a value is considered real.
pub const REAL_TOL: f64 = 1e-12;

const MIN_SAMPLE_GAP: f64 = 1e-3;
const MAX_SAMPLE_ATTEMPTS: usize = 1000;

/// `v_n = n^alpha`, `rho_n = 1 - c / v_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSchedule {
    pub c: f64,
    pub alpha: f64,
}

impl RateSchedule {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Parameter(format!("drift constant c must be > 0, got {c}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!("rate exponent alpha must lie in (0,1), got {alpha}")));
        }
        Ok(Self { c, alpha })
    }

    pub fn v(&self, n: u64) -> f64 {
        (n as f64).powf(self.alpha)
    }

    /// `1 - rho_n = c / v_n`.
    pub fn gap(&self, n: u64) -> f64 {
        self.c / self.v(n)
    }

    pub fn rho(&self, n: u64) -> f64 {
        1.0 - self.gap(n)
    }

    /// Checks `1 < v_n < n` and `rho_n in (0, 1)`.
    pub fn check(&self, n: u64) -> Result<()> {
        let v = self.v(n);
        if n < 2 || v <= 1.0 || v >= n as f64 {
            return Err(Error::Spectrum(format!(
                "rate v_n = {v} must satisfy 1 < v_n < n = {n}"
            )));
        }
        let rho = self.rho(n);
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Spectrum(format!(
                "rho_n = {rho} outside (0,1) at n = {n}; n too small for c = {}",
                self.c
            )));
        }
        Ok(())
    }
}

/// Which unit root(s) the limit matrix carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnitRootMode {
    #[serde(rename = "+1")]
    PlusOne,
    #[serde(rename = "-1")]
    MinusOne,
    #[serde(rename = "both")]
    Both,
}

impl UnitRootMode {
    pub fn unit_roots(self) -> usize {
        match self {
            UnitRootMode::Both => 2,
            _ => 1,
        }
    }

    pub fn limit_roots(self) -> &'static [f64] {
        match self {
            UnitRootMode::PlusOne => &[1.0],
            UnitRootMode::MinusOne => &[-1.0],
            UnitRootMode::Both => &[1.0, -1.0],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            UnitRootMode::PlusOne => "+1",
            UnitRootMode::MinusOne => "-1",
            UnitRootMode::Both => "both",
        }
    }
}

impl fmt::Display for UnitRootMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for UnitRootMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "+1" | "1" | "plus" | "plusone" | "plus_one" => Ok(UnitRootMode::PlusOne),
            "-1" | "minus" | "minusone" | "minus_one" => Ok(UnitRootMode::MinusOne),
            "both" | "+-1" | "pm1" => Ok(UnitRootMode::Both),
            other => Err(Error::Parse(format!("unknown unit root mode '{other}'"))),
        }
    }
}

/// Declarative description of the time-varying spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EigenSpecDoc", into = "EigenSpecDoc")]
pub struct EigenSpec {
    p: usize,
    mode: UnitRootMode,
    schedule: RateSchedule,
    second: Option<RateSchedule>,
    bulk: Vec<Complex64>,
    eps: f64,
}

impl EigenSpec {
    /// `second` drives `lambda_{n,2} = -1 + d / w_n` and is required exactly
    /// when `mode` is [`UnitRootMode::Both`]. `bulk` holds the `p - 1` (or
    /// `p - 2`) fixed limit eigenvalues; it is stored in spectral order.
    pub fn new(
        p: usize,
        mode: UnitRootMode,
        schedule: RateSchedule,
        second: Option<RateSchedule>,
        bulk: Vec<Complex64>,
        eps: f64,
    ) -> Result<Self> {
        if p == 0 || p > MAX_ORDER {
            return Err(Error::Parameter(format!("order p must lie in 1..={MAX_ORDER}, got {p}")));
        }
        RateSchedule::new(schedule.c, schedule.alpha)?;
        match (mode, second) {
            (UnitRootMode::Both, Some(s)) => {
                RateSchedule::new(s.c, s.alpha)?;
            }
            (UnitRootMode::Both, None) => {
                return Err(Error::Parameter("mode 'both' needs a second rate schedule".into()))
            }
            (_, Some(_)) => {
                return Err(Error::Parameter(
                    "a second rate schedule is only meaningful in mode 'both'".into(),
                ))
            }
            _ => {}
        }
        if p < mode.unit_roots() {
            return Err(Error::Parameter(format!("mode '{mode}' needs p >= 2")));
        }
        if bulk.len() != p - mode.unit_roots() {
            return Err(Error::Spectrum(format!(
                "expected {} bulk eigenvalues for p = {p} in mode '{mode}', got {}",
                p - mode.unit_roots(),
                bulk.len()
            )));
        }
        if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
            return Err(Error::Parameter(format!("eps must lie in (0,1), got {eps}")));
        }
        for z in &bulk {
            let m = z.norm();
            if !m.is_finite() || m >= 1.0 {
                return Err(Error::Spectrum(format!("bulk eigenvalue {z} must have modulus < 1")));
            }
            if m < REAL_TOL {
                return Err(Error::Spectrum("bulk eigenvalues must be non-zero".into()));
            }
        }
        check_conjugate_closed(&bulk)?;
        let mut bulk = bulk;
        sort_spectrum(&mut bulk);
        let mut limit: Vec<Complex64> =
            mode.limit_roots().iter().map(|&r| Complex64::new(r, 0.0)).collect();
        limit.extend_from_slice(&bulk);
        check_distinct(&limit)?;
        Ok(Self { p, mode, schedule, second, bulk, eps })
    }

    /// Convenience constructor for a single unit root with real bulk values.
    pub fn single(p: usize, mode: UnitRootMode, c: f64, alpha: f64, bulk: &[f64]) -> Result<Self> {
        let bulk = bulk.iter().map(|&b| Complex64::new(b, 0.0)).collect();
        Self::new(p, mode, RateSchedule::new(c, alpha)?, None, bulk, 0.1)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn mode(&self) -> UnitRootMode {
        self.mode
    }

    pub fn schedule(&self) -> RateSchedule {
        self.schedule
    }

    pub fn second_schedule(&self) -> Option<RateSchedule> {
        self.second
    }

    pub fn bulk(&self) -> &[Complex64] {
        &self.bulk
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Replaces the bulk, re-validating the whole spec.
    pub fn with_bulk(&self, bulk: Vec<Complex64>) -> Result<Self> {
        Self::new(self.p, self.mode, self.schedule, self.second, bulk, self.eps)
    }

    /// Limit spectrum: unit root(s) first, then the bulk.
    pub fn limit_eigenvalues(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> =
            self.mode.limit_roots().iter().map(|&r| Complex64::new(r, 0.0)).collect();
        out.extend_from_slice(&self.bulk);
        out
    }

    pub fn is_real(&self) -> bool {
        self.bulk.iter().all(|z| z.im.abs() < REAL_TOL)
    }
}

/// `{re, im}` wire form of a complex value; `im` defaults to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexDoc> for Complex64 {
    fn from(z: ComplexDoc) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for ComplexDoc {
    fn from(z: Complex64) -> Self {
        ComplexDoc { re: z.re, im: z.im }
    }
}

fn default_eps() -> f64 {
    0.1
}

/// Wire form of [`EigenSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EigenSpecDoc {
    p: usize,
    unit_root_mode: UnitRootMode,
    c: f64,
    alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default)]
    bulk: Vec<ComplexDoc>,
    #[serde(default = "default_eps")]
    eps: f64,
}

impl TryFrom<EigenSpecDoc> for EigenSpec {
    type Error = Error;

    fn try_from(doc: EigenSpecDoc) -> Result<Self> {
        let second = match (doc.d, doc.beta) {
            (Some(d), Some(beta)) => Some(RateSchedule::new(d, beta)?),
            (None, None) => None,
            _ => return Err(Error::Parameter("'d' and 'beta' must be given together".into())),
        };
        let bulk = doc.bulk.iter().map(|z| Complex64::new(z.re, z.im)).collect();
        EigenSpec::new(
            doc.p,
            doc.unit_root_mode,
            RateSchedule::new(doc.c, doc.alpha)?,
            second,
            bulk,
            doc.eps,
        )
    }
}

impl From<EigenSpec> for EigenSpecDoc {
    fn from(s: EigenSpec) -> Self {
        EigenSpecDoc {
            p: s.p,
            unit_root_mode: s.mode,
            c: s.schedule.c,
            alpha: s.schedule.alpha,
            d: s.second.map(|r| r.c),
            beta: s.second.map(|r| r.alpha),
            bulk: s.bulk.iter().map(|z| ComplexDoc { re: z.re, im: z.im }).collect(),
            eps: s.eps,
        }
    }
}

/// Modulus-descending order; equal moduli fall back to descending `(re, im)`.
pub fn spectral_order(a: &Complex64, b: &Complex64) -> Ordering {
    let (ma, mb) = (a.norm(), b.norm());
    let tol = 1e-13 * ma.max(mb).max(1.0);
    if (ma - mb).abs() > tol {
        return mb.partial_cmp(&ma).unwrap_or(Ordering::Equal);
    }
    b.re
        .partial_cmp(&a.re)
        .unwrap_or(Ordering::Equal)
        .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
}

pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(spectral_order);
}

fn check_distinct(values: &[Complex64]) -> Result<()> {
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let scale = values[i].norm().max(values[j].norm()).max(1.0);
            if (values[i] - values[j]).norm() <= 1e-12 * scale {
                return Err(Error::Spectrum(format!(
                    "eigenvalues must be distinct; {} repeats",
                    values[i]
                )));
            }
        }
    }
    Ok(())
}

fn check_conjugate_closed(values: &[Complex64]) -> Result<()> {
    for z in values.iter().filter(|z| z.im.abs() >= REAL_TOL) {
        let conj = z.conj();
        if !values.iter().any(|w| (w - conj).norm() < 1e-10) {
            return Err(Error::Spectrum(format!("complex eigenvalue {z} lacks its conjugate")));
        }
    }
    Ok(())
}

/// Spectrum of `A_n`: near-unit root(s) followed by the bulk, in spectral order.
pub fn eigenvalues_at(spec: &EigenSpec, n: u64) -> Result<Vec<Complex64>> {
    let sched = spec.schedule;
    sched.check(n)?;
    let rho = sched.rho(n);
    let mut out = Vec::with_capacity(spec.p);
    let inner_bound = match spec.mode {
        UnitRootMode::PlusOne => {
            out.push(Complex64::new(rho, 0.0));
            rho
        }
        UnitRootMode::MinusOne => {
            out.push(Complex64::new(-rho, 0.0));
            rho
        }
        UnitRootMode::Both => {
            let second = spec.second.expect("validated at construction");
            second.check(n)?;
            if sched.gap(n) > second.gap(n) {
                return Err(Error::Spectrum(format!(
                    "at n = {n} the positive root gap c/v_n = {} exceeds the negative root gap d/w_n = {}",
                    sched.gap(n),
                    second.gap(n)
                )));
            }
            out.push(Complex64::new(rho, 0.0));
            out.push(Complex64::new(-second.rho(n), 0.0));
            second.rho(n)
        }
    };
    for z in &spec.bulk {
        if z.norm() >= inner_bound {
            return Err(Error::Spectrum(format!(
                "bulk eigenvalue {z} (modulus {}) is not below the near-unit modulus {inner_bound} at n = {n}",
                z.norm()
            )));
        }
    }
    out.extend_from_slice(&spec.bulk);
    sort_spectrum(&mut out);
    check_distinct(&out)?;
    Ok(out)
}

/// Reads `theta` off `prod_i (z - lambda_i) = z^p - theta_1 z^{p-1} - ... - theta_p`.
pub fn coefficients_from_eigenvalues(lambdas: &[Complex64]) -> Result<Vec<f64>> {
    if lambdas.iter().any(|z| z.norm() == 0.0 || !z.norm().is_finite()) {
        return Err(Error::Spectrum("eigenvalues must be finite and non-zero".into()));
    }
    // poly[k] is the coefficient of z^{p-k}
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for &lam in lambdas {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, &c) in poly.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * lam;
        }
        poly = next;
    }
    poly[1..]
        .iter()
        .map(|c| {
            if c.im.abs() > REAL_TOL * c.re.abs().max(1.0) {
                Err(Error::Spectrum(format!(
                    "spectrum is not closed under conjugation (coefficient {c})"
                )))
            } else {
                Ok(-c.re)
            }
        })
        .collect()
}

/// Companion matrix with `theta` as first row and identity on the subdiagonal.
pub fn companion_matrix(theta: &[f64]) -> RMat {
    let p = theta.len();
    let mut a = DMatrix::zeros(p, p);
    for (j, &t) in theta.iter().enumerate() {
        a[(0, j)] = t;
    }
    for i in 1..p {
        a[(i, i - 1)] = 1.0;
    }
    a
}

/// Eigenbasis with entry `(i, j) = lambda_j^{-i}`.
pub fn vandermonde_basis(lambdas: &[Complex64]) -> CMat {
    let p = lambdas.len();
    CMat::from_fn(p, p, |i, j| lambdas[j].powi(-(i as i32)))
}

/// First column of the inverse eigenbasis, in closed form:
/// `pi_k1 = (-lambda_k)^{p-1} / prod_{l != k} (lambda_l - lambda_k)`.
pub fn pi_column(lambdas: &[Complex64]) -> Result<Vec<Complex64>> {
    check_distinct(lambdas)?;
    let p = lambdas.len();
    Ok((0..p)
        .map(|k| {
            let num = (-lambdas[k]).powi(p as i32 - 1);
            let den: Complex64 = (0..p)
                .filter(|&l| l != k)
                .map(|l| lambdas[l] - lambdas[k])
                .product();
            num / den
        })
        .collect())
}

/// Frobenius condition estimate `||M||_F ||M^{-1}||_F`.
fn frobenius_condition(m: &CMat, inv: &CMat) -> f64 {
    m.norm() * inv.norm()
}

/// Everything needed about row `n` of the array.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompanionModel {
    pub n: u64,
    pub theta: Vec<f64>,
    pub a: RMat,
    pub eigenvalues: Vec<Complex64>,
    pub p_mat: CMat,
    pub p_inv: CMat,
    /// First column of the limit `P^{-1}`.
    pub pi_col: Vec<Complex64>,
    pub limit_eigenvalues: Vec<Complex64>,
    pub mode: UnitRootMode,
    pub schedule: RateSchedule,
    pub second: Option<RateSchedule>,
}

impl CompanionModel {
    pub fn p(&self) -> usize {
        self.theta.len()
    }

    /// Spectral radius `rho_n`.
    pub fn rho(&self) -> f64 {
        self.eigenvalues[0].norm()
    }

    /// `v_n` of the driving schedule.
    pub fn v(&self) -> f64 {
        self.schedule.v(self.n)
    }

    pub fn c(&self) -> f64 {
        self.schedule.c
    }

    /// `pi_11` of the limit eigenbasis (real by construction).
    pub fn pi11(&self) -> f64 {
        self.pi_col[0].re
    }

    pub fn has_real_spectrum(&self) -> bool {
        self.eigenvalues.iter().all(|z| z.im.abs() < REAL_TOL)
    }
}

pub fn companion_model(spec: &EigenSpec, n: u64) -> Result<CompanionModel> {
    companion_model_with_cap(spec, n, DEFAULT_COND_CAP)
}

pub fn companion_model_with_cap(spec: &EigenSpec, n: u64, cond_cap: f64) -> Result<CompanionModel> {
    let eigenvalues = eigenvalues_at(spec, n)?;
    let theta = coefficients_from_eigenvalues(&eigenvalues)?;
    let a = companion_matrix(&theta);
    let p = spec.p;
    let p_mat = vandermonde_basis(&eigenvalues);
    let p_inv = p_mat
        .clone()
        .lu()
        .solve(&CMat::identity(p, p))
        .ok_or_else(|| Error::Numerical("eigenbasis P_n is singular".into()))?;
    let cond = frobenius_condition(&p_mat, &p_inv);
    if !cond.is_finite() || cond > cond_cap {
        return Err(Error::Numerical(format!(
            "eigenbasis condition number {cond:.3e} exceeds cap {cond_cap:.1e}"
        )));
    }
    let limit_eigenvalues = spec.limit_eigenvalues();
    let pi_col = pi_column(&limit_eigenvalues)?;
    Ok(CompanionModel {
        n,
        theta,
        a,
        eigenvalues,
        p_mat,
        p_inv,
        pi_col,
        limit_eigenvalues,
        mode: spec.mode,
        schedule: spec.schedule,
        second: spec.second,
    })
}

/// Draws `p - 1` distinct non-zero values uniformly on `[-rho + eps, rho - eps]`.
pub fn sample_bulk_eigenvalues<R: Rng + ?Sized>(
    rng: &mut R,
    p: usize,
    rho: f64,
    eps: f64,
) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::Parameter("order p must be >= 1".into()));
    }
    if !(eps > 0.0 && eps < rho) {
        return Err(Error::Parameter(format!("need 0 < eps < rho, got eps = {eps}, rho = {rho}")));
    }
    let count = p - 1;
    let bound = rho - eps;
    'attempt: for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let draw: Vec<f64> = (0..count).map(|_| rng.random_range(-bound..=bound)).collect();
        for (i, &x) in draw.iter().enumerate() {
            if x.abs() < MIN_SAMPLE_GAP {
                continue 'attempt;
            }
            if draw[..i].iter().any(|&y| (x - y).abs() < MIN_SAMPLE_GAP) {
                continue 'attempt;
            }
        }
        return Ok(draw);
    }
    Err(Error::Sampling(format!(
        "no admissible bulk after {MAX_SAMPLE_ATTEMPTS} draws (p = {p}, bound = {bound})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eigenvalues_plus_one_scalar() {
        let spec = EigenSpec::single(1, UnitRootMode::PlusOne, 1.0, 0.5, &[]).unwrap();
        let ev = eigenvalues_at(&spec, 5000).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0].re - (1.0 - 1.0 / 5000f64.sqrt())).abs() < 1e-15);
        assert!((ev[0].re - 0.985_857_864_376_269).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_minus_one_with_bulk() {
        let spec = EigenSpec::single(2, UnitRootMode::MinusOne, 1.0, 0.5, &[0.5]).unwrap();
        let ev = eigenvalues_at(&spec, 5000).unwrap();
        assert!((ev[0].re + 0.985_857_864_376_269).abs() < 1e-12);
        assert_eq!(ev[1], c(0.5));
    }

    #[test]
    fn eigenvalues_both_symmetric() {
        let s = RateSchedule::new(1.0, 0.5).unwrap();
        let spec = EigenSpec::new(2, UnitRootMode::Both, s, Some(s), vec![], 0.1).unwrap();
        let ev = eigenvalues_at(&spec, 10_000).unwrap();
        assert!((ev[0].re - 0.99).abs() < 1e-15);
        assert!((ev[1].re + 0.99).abs() < 1e-15);
    }

    #[test]
    fn both_mode_rejects_misordered_gaps() {
        let s1 = RateSchedule::new(2.0, 0.5).unwrap();
        let s2 = RateSchedule::new(1.0, 0.5).unwrap();
        let spec = EigenSpec::new(2, UnitRootMode::Both, s1, Some(s2), vec![], 0.1).unwrap();
        assert!(matches!(eigenvalues_at(&spec, 10_000), Err(Error::Spectrum(_))));
    }

    #[test]
    fn bulk_above_rho_is_rejected() {
        let spec = EigenSpec::single(2, UnitRootMode::PlusOne, 1.0, 0.5, &[0.95]).unwrap();
        // rho_100 = 0.9
        assert!(matches!(eigenvalues_at(&spec, 100), Err(Error::Spectrum(_))));
        assert!(eigenvalues_at(&spec, 10_000).is_ok());
    }

    #[test]
    fn schedule_rejects_small_n() {
        let s = RateSchedule::new(5.0, 0.5).unwrap();
        assert!(s.check(16).is_err());
        assert!(s.check(1).is_err());
        assert!(RateSchedule::new(0.0, 0.5).is_err());
        assert!(RateSchedule::new(1.0, 1.0).is_err());
    }

    #[test]
    fn coefficients_examples() {
        assert_eq!(coefficients_from_eigenvalues(&[c(0.9)]).unwrap(), vec![0.9]);
        let t = coefficients_from_eigenvalues(&[c(1.0), c(0.5)]).unwrap();
        assert!((t[0] - 1.5).abs() < 1e-15 && (t[1] + 0.5).abs() < 1e-15);
        let z = Complex64::from_polar(0.9, std::f64::consts::FRAC_PI_3);
        let t = coefficients_from_eigenvalues(&[z, z.conj()]).unwrap();
        assert!((t[0] - 0.9).abs() < 1e-14 && (t[1] + 0.81).abs() < 1e-14);
    }

    #[test]
    fn coefficients_reject_unpaired_complex() {
        let z = Complex64::new(0.3, 0.4);
        assert!(matches!(
            coefficients_from_eigenvalues(&[c(0.9), z]),
            Err(Error::Spectrum(_))
        ));
        assert!(coefficients_from_eigenvalues(&[c(0.0)]).is_err());
    }

    #[test]
    fn scalar_model() {
        let spec = EigenSpec::single(1, UnitRootMode::PlusOne, 1.0, 0.5, &[]).unwrap();
        let m = companion_model(&spec, 5000).unwrap();
        assert!((m.a[(0, 0)] - 0.985_857_864_376_269).abs() < 1e-12);
        assert_eq!(m.p_mat[(0, 0)], c(1.0));
        assert_eq!(m.pi_col, vec![c(1.0)]);
    }

    #[test]
    fn p2_model_basis_and_pi() {
        let spec = EigenSpec::single(2, UnitRootMode::PlusOne, 1.0, 0.5, &[0.5]).unwrap();
        let m = companion_model(&spec, 5000).unwrap();
        let l1 = m.eigenvalues[0].re;
        assert!((m.p_mat[(1, 0)].re - 1.0 / l1).abs() < 1e-14);
        assert!((m.p_mat[(1, 1)].re - 2.0).abs() < 1e-14);
        assert!((m.pi_col[0].re - 2.0).abs() < 1e-14);
        assert!((m.pi_col[1].re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn p3_pi_column() {
        let pi = pi_column(&[c(1.0), c(0.5), c(-0.5)]).unwrap();
        let expect = [4.0 / 3.0, -0.5, 1.0 / 6.0];
        for (a, b) in pi.iter().zip(expect) {
            assert!((a.re - b).abs() < 1e-14 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn pi_column_matches_inverse_of_basis() {
        let lam = [c(-1.0), c(0.7), c(-0.3), c(0.2)];
        let pi = pi_column(&lam).unwrap();
        let inv = vandermonde_basis(&lam).try_inverse().unwrap();
        for k in 0..4 {
            assert!((inv[(k, 0)] - pi[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn model_invariants_with_complex_bulk() {
        let z = Complex64::from_polar(0.6, std::f64::consts::FRAC_PI_4);
        let spec = EigenSpec::new(
            3,
            UnitRootMode::PlusOne,
            RateSchedule::new(1.0, 0.5).unwrap(),
            None,
            vec![z.conj(), z],
            0.1,
        )
        .unwrap();
        let m = companion_model(&spec, 20_000).unwrap();
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(m.eigenvalues.clone()));
        let a = m.a.map(|x| Complex64::new(x, 0.0));
        let lhs = &a * &m.p_mat;
        let rhs = &m.p_mat * &d;
        assert!((lhs - &rhs).norm() < 1e-10 * rhs.norm());
        assert!((&m.p_mat * &m.p_inv - CMat::identity(3, 3)).norm() < 1e-10);
        for j in 0..3 {
            assert!(m.p_inv[(0, j)].im.abs() < 1e-10, "first row of P_inv must be real");
        }
        assert!(m.pi_col.iter().all(|z| z.norm() > 0.0));
        assert!((m.rho() - spec.schedule().rho(20_000)).abs() < 1e-12);
        // conjugate pair ordered with positive imaginary part first
        assert!(m.eigenvalues[1].im > 0.0 && m.eigenvalues[2].im < 0.0);
    }

    #[test]
    fn cond_cap_rejects() {
        let spec = EigenSpec::single(3, UnitRootMode::PlusOne, 1.0, 0.5, &[0.5, -0.5]).unwrap();
        assert!(matches!(
            companion_model_with_cap(&spec, 5000, 1.0),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(EigenSpec::single(2, UnitRootMode::PlusOne, 1.0, 0.5, &[]).is_err());
        assert!(EigenSpec::single(3, UnitRootMode::PlusOne, 1.0, 0.5, &[0.5, 0.5]).is_err());
        assert!(EigenSpec::single(2, UnitRootMode::PlusOne, 1.0, 0.5, &[1.0]).is_err());
        assert!(EigenSpec::single(2, UnitRootMode::PlusOne, 1.0, 0.5, &[0.0]).is_err());
        assert!(EigenSpec::single(0, UnitRootMode::PlusOne, 1.0, 0.5, &[]).is_err());
        let s = RateSchedule::new(1.0, 0.5).unwrap();
        assert!(EigenSpec::new(1, UnitRootMode::Both, s, Some(s), vec![], 0.1).is_err());
        assert!(EigenSpec::new(2, UnitRootMode::PlusOne, s, Some(s), vec![c(0.3)], 0.1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"p":3,"unit_root_mode":"-1","c":1.0,"alpha":0.5,
                       "bulk":[{"re":0.2,"im":0.3},{"re":0.2,"im":-0.3}],"eps":0.1}"#;
        let spec: EigenSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.mode(), UnitRootMode::MinusOne);
        let back: EigenSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
        let bad = r#"{"p":2,"unit_root_mode":"+1","c":1.0,"alpha":0.5,"bulk":[]}"#;
        assert!(serde_json::from_str::<EigenSpec>(bad).is_err());
    }

    #[test]
    fn sampling_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = sample_bulk_eigenvalues(&mut rng, 2, 0.9859, 0.1).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v[0].abs() <= 0.8859 + 1e-12);
        assert!(sample_bulk_eigenvalues(&mut rng, 1, 0.9859, 0.1).unwrap().is_empty());
        let a = sample_bulk_eigenvalues(&mut ChaCha8Rng::seed_from_u64(5), 4, 0.98, 0.1).unwrap();
        let b = sample_bulk_eigenvalues(&mut ChaCha8Rng::seed_from_u64(5), 4, 0.98, 0.1).unwrap();
        assert_eq!(a, b);
        for (i, x) in a.iter().enumerate() {
            assert!(x.abs() >= 1e-3);
            assert!(a[..i].iter().all(|y| (x - y).abs() >= 1e-3));
        }
    }

    #[test]
    fn sampling_gives_up_when_infeasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // interval of width 2e-3 cannot host 5 values 1e-3 apart while avoiding 0
        let err = sample_bulk_eigenvalues(&mut rng, 6, 0.101, 0.1).unwrap_err();
        assert!(matches!(err, Error::Sampling(_)));
    }

    #[test]
    fn theta_converges_to_limit_coefficients() {
        let spec = EigenSpec::single(3, UnitRootMode::MinusOne, 1.0, 0.5, &[0.6, -0.2]).unwrap();
        let limit = coefficients_from_eigenvalues(&spec.limit_eigenvalues()).unwrap();
        let dist = |n| {
            let m = companion_model(&spec, n).unwrap();
            m.theta.iter().zip(&limit).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        };
        let d = [dist(1_000), dist(10_000), dist(100_000)];
        assert!(d[0] > d[1] && d[1] > d[2]);
    }
}
