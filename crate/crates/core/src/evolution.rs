//! Evolution operators of `ẋ = A(t)x` on `ℝ^d`, the cotranslations
//! `Z(r, t) = Ψ(t+r, r)` over `(ℝ, +)` they define, and finite-difference
//! checks of the derivative identities such cotranslations satisfy.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::report::{Check, Report};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Requests with `|u − v|` up to this length share one step count.
pub const DEFAULT_SPAN: f64 = 4.0;
const MAX_STEPS: f64 = 1e7;
const CACHE_LIMIT: usize = 1 << 16;

pub type MatrixRule = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// A continuous matrix-valued function `t ↦ A(t)`.
#[derive(Clone)]
pub struct GeneratorFunction {
    dim: usize,
    rule: MatrixRule,
    fd_step: f64,
}

impl GeneratorFunction {
    pub fn new(dim: usize, rule: impl Fn(f64) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        GeneratorFunction { dim, rule: Arc::new(rule), fd_step: DEFAULT_FD_STEP }
    }

    /// Finite-difference step suggested for this generator.
    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, move |_| DMatrix::zeros(dim, dim))
    }

    pub fn constant(a: DMatrix<f64>) -> Self {
        Self::new(a.nrows(), move |_| a.clone())
    }

    /// `[[0, 1], [−1, 0]]`.
    pub fn rotation() -> Self {
        Self::constant(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]))
    }

    /// `[[0, t], [−t, 0]]`.
    pub fn time_rotation() -> Self {
        Self::new(2, |t| DMatrix::from_row_slice(2, 2, &[0.0, t, -t, 0.0]))
    }

    /// `[[sin t, 1], [0, cos t]]`.
    pub fn sin_cos() -> Self {
        Self::new(2, |t| DMatrix::from_row_slice(2, 2, &[t.sin(), 1.0, 0.0, t.cos()]))
    }

    /// `diag(t, …, t)`.
    pub fn diagonal_t(dim: usize) -> Self {
        Self::new(dim, move |t| DMatrix::from_diagonal_element(dim, dim, t))
    }

    /// Entries are polynomials in `t`: `coeffs[i][j][k]` multiplies `t^k`.
    pub fn polynomial(coeffs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let dim = coeffs.len();
        if dim == 0 || coeffs.iter().any(|row| row.len() != dim) {
            return Err(Error::Config("polynomial generator must be a nonempty square array".into()));
        }
        Ok(Self::new(dim, move |t| {
            DMatrix::from_fn(dim, dim, |i, j| coeffs[i][j].iter().rev().fold(0.0, |acc, c| acc * t + c))
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn at(&self, t: f64) -> DMatrix<f64> {
        (self.rule)(t)
    }

    /// `A(t) − λ·Id`.
    pub fn shifted(&self, lambda: f64) -> Self {
        let inner = self.clone();
        let dim = self.dim;
        GeneratorFunction {
            dim,
            rule: Arc::new(move |t| inner.at(t) - DMatrix::from_diagonal_element(dim, dim, lambda)),
            fd_step: self.fd_step,
        }
    }
}

fn rk4(a: &GeneratorFunction, u: f64, v: f64, steps: usize) -> Result<DMatrix<f64>> {
    let d = a.dim;
    let mut y = DMatrix::identity(d, d);
    if u == v {
        return Ok(y);
    }
    let h = (u - v) / steps as f64;
    for k in 0..steps {
        let t = v + k as f64 * h;
        let mid = a.at(t + 0.5 * h);
        let k1 = a.at(t) * &y;
        let k2 = &mid * (&y + &k1 * (0.5 * h));
        let k3 = &mid * (&y + &k2 * (0.5 * h));
        let k4 = a.at(t + h) * (&y + &k3 * h);
        y += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    }
    if y.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericOverflow(format!("Ψ({u}, {v}) is not finite")));
    }
    Ok(y)
}

fn step_count(u: f64, v: f64, step: f64) -> Result<usize> {
    if step.is_nan() || step <= 0.0 || !u.is_finite() || !v.is_finite() {
        return Err(Error::Config(format!("invalid integration request u={u}, v={v}, step={step}")));
    }
    let n = ((u - v).abs() / step).ceil();
    if n > MAX_STEPS {
        return Err(Error::Config(format!("|u − v| / step = {n:e} exceeds {MAX_STEPS:e}")));
    }
    Ok((n as usize).max(1))
}

/// `Ψ(u, v)` for `ẋ = A(t)x` by classical fourth-order Runge–Kutta with
/// identity initial condition at `v`.
pub fn integrate_transition(a: &GeneratorFunction, u: f64, v: f64, step: f64) -> Result<DMatrix<f64>> {
    let n = step_count(u, v, step)?;
    rk4(a, u, v, n)
}

/// A two-parameter family `(u, v) ↦ Ψ(u, v)`.
pub trait Evolution: Sync {
    fn dim(&self) -> usize;
    fn psi(&self, u: f64, v: f64) -> Result<DMatrix<f64>>;
}

/// A cotranslation over `(ℝ, +)` into `GL(d, ℝ)`.
pub trait MatrixCocycle: Sync {
    fn dim(&self) -> usize;
    fn z(&self, r: f64, t: f64) -> Result<DMatrix<f64>>;
}

/// The evolution operator of a generator.
///
/// Every request with `|u − v| ≤ span` uses the same number of steps, so
/// `Ψ` is a smooth function of `(u, v)` up to roundoff. Results are memoised
/// on the exact `(u, v)` pair.
pub struct EvolutionOperator {
    generator: GeneratorFunction,
    step: f64,
    span: f64,
    cache: Mutex<HashMap<(u64, u64), DMatrix<f64>>>,
}

impl EvolutionOperator {
    pub fn new(generator: GeneratorFunction, step: f64) -> Result<Self> {
        Self::with_span(generator, step, DEFAULT_SPAN)
    }

    pub fn with_span(generator: GeneratorFunction, step: f64, span: f64) -> Result<Self> {
        if !(step > 0.0 && span > 0.0) {
            return Err(Error::Config("step and span must be positive".into()));
        }
        step_count(span, 0.0, step)?;
        Ok(EvolutionOperator { generator, step, span, cache: Mutex::new(HashMap::new()) })
    }

    pub fn generator(&self) -> &GeneratorFunction {
        &self.generator
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl Evolution for EvolutionOperator {
    fn dim(&self) -> usize {
        self.generator.dim
    }

    fn psi(&self, u: f64, v: f64) -> Result<DMatrix<f64>> {
        let d = self.generator.dim;
        if u == v {
            return Ok(DMatrix::identity(d, d));
        }
        let key = (u.to_bits(), v.to_bits());
        if let Some(m) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(m.clone());
        }
        let n = if (u - v).abs() <= self.span {
            step_count(self.span, 0.0, self.step)?
        } else {
            step_count(u, v, self.step)?
        };
        let m = rk4(&self.generator, u, v, n)?;
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, m.clone());
        Ok(m)
    }
}

impl MatrixCocycle for EvolutionOperator {
    fn dim(&self) -> usize {
        self.generator.dim
    }

    fn z(&self, r: f64, t: f64) -> Result<DMatrix<f64>> {
        self.psi(t + r, r)
    }
}

/// `Z(r, t) = Ψ(t+r, r)` for any evolution.
pub struct CotranslationOfEvolution<E>(pub E);

impl<E: Evolution> MatrixCocycle for CotranslationOfEvolution<E> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn z(&self, r: f64, t: f64) -> Result<DMatrix<f64>> {
        self.0.psi(t + r, r)
    }
}

/// `Ψ(u, v) = Z(v, u − v)` for any cotranslation.
pub struct EvolutionOfCotranslation<Z>(pub Z);

impl<Z: MatrixCocycle> Evolution for EvolutionOfCotranslation<Z> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn psi(&self, u: f64, v: f64) -> Result<DMatrix<f64>> {
        self.0.z(v, u - v)
    }
}

/// `Z(r, t) = exp(tA)`, the cotranslation of a constant generator.
pub struct ExpCocycle {
    a: DMatrix<f64>,
}

impl ExpCocycle {
    pub fn new(a: DMatrix<f64>) -> Self {
        ExpCocycle { a }
    }

    pub fn identity(dim: usize) -> Self {
        ExpCocycle { a: DMatrix::zeros(dim, dim) }
    }
}

impl MatrixCocycle for ExpCocycle {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn z(&self, _r: f64, t: f64) -> Result<DMatrix<f64>> {
        Ok(expm(&(&self.a * t)))
    }
}

/// `W(r, t) = Z(r, t)·e^{−λt}`, the twist of `Z` by `γ(t) = e^{−λt}·Id`.
pub struct ScalarTwist<Z> {
    pub inner: Z,
    pub lambda: f64,
}

impl<Z: MatrixCocycle> MatrixCocycle for ScalarTwist<Z> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn z(&self, r: f64, t: f64) -> Result<DMatrix<f64>> {
        Ok(self.inner.z(r, t)? * (-self.lambda * t).exp())
    }
}

impl<Z: MatrixCocycle> MatrixCocycle for &Z {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn z(&self, r: f64, t: f64) -> Result<DMatrix<f64>> {
        (**self).z(r, t)
    }
}

/// Central difference in the first slot.
pub fn fd_partial1(z: &impl MatrixCocycle, r: f64, t: f64, h: f64) -> Result<DMatrix<f64>> {
    Ok((z.z(r + h, t)? - z.z(r - h, t)?) / (2.0 * h))
}

/// Central difference in the second slot.
pub fn fd_partial2(z: &impl MatrixCocycle, r: f64, t: f64, h: f64) -> Result<DMatrix<f64>> {
    Ok((z.z(r, t + h)? - z.z(r, t - h)?) / (2.0 * h))
}

/// `A(t) = ∂₂Z(t, 0)`.
pub fn infinitesimal_generator(z: &impl MatrixCocycle, t: f64, h: f64) -> Result<DMatrix<f64>> {
    fd_partial2(z, t, 0.0, h)
}

fn inverse(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.try_inverse().ok_or_else(|| Error::Singular("cotranslation value is not invertible".into()))
}

pub const IDENTITY_NAMES: [&str; 5] = [
    "inverse derivative in r",
    "inverse derivative in t",
    "first partial through r = 0",
    "second partial through the generator",
    "first partial from second partials",
];

fn identity_residuals(z: &impl MatrixCocycle, r: f64, t: f64, h: f64) -> Result<[f64; 5]> {
    let zrt = z.z(r, t)?;
    let zinv = inverse(zrt.clone())?;
    let d1 = fd_partial1(z, r, t, h)?;
    let d2 = fd_partial2(z, r, t, h)?;

    let d1_inv = (inverse(z.z(r + h, t)?)? - inverse(z.z(r - h, t)?)?) / (2.0 * h);
    let e1 = d1_inv + &zinv * &d1 * &zinv;

    let d2_inv = (inverse(z.z(r, t + h)?)? - inverse(z.z(r, t - h)?)?) / (2.0 * h);
    let e2 = d2_inv + &zinv * &d2 * &zinv;

    let back = z.z(r, -r)?;
    let e3 = &d1 - (fd_partial1(z, 0.0, t + r, h)? * &back - &zrt * fd_partial1(z, 0.0, r, h)? * &back);

    let e4 = &d2 - fd_partial2(z, r + t, 0.0, h)? * &zrt;

    let e5 = &d1 - (&d2 - &zrt * fd_partial2(z, r, 0.0, h)?);

    Ok([e1.norm(), e2.norm(), e3.norm(), e4.norm(), e5.norm()])
}

/// Check the five derivative identities at each `(r, t)` with central
/// differences of step `h`. Residuals are Frobenius norms.
pub fn verify_derivative_identities(z: &impl MatrixCocycle, samples: &[(f64, f64)], h: f64, tol: f64) -> Report {
    let results: Vec<_> = samples.par_iter().map(|&(r, t)| identity_residuals(z, r, t, h)).collect();
    let mut checks: Vec<Check> = IDENTITY_NAMES.iter().map(|n| Check::new(*n)).collect();
    for (&(r, t), res) in samples.iter().zip(results) {
        match res {
            Ok(values) => {
                for (check, v) in checks.iter_mut().zip(values) {
                    check.record(v, tol, || format!("r={r}, t={t}"));
                }
            }
            Err(e) => {
                for check in &mut checks {
                    check.record_error(format!("r={r}, t={t}: {e}"));
                }
            }
        }
    }
    let mut report = Report::new();
    for c in checks {
        report.push(c);
    }
    report
}

/// `n × n` grid on `[lo, hi]²`.
pub fn square_grid(n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let at = |i: usize| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    (0..n).flat_map(|i| (0..n).map(move |j| (at(i), at(j)))).collect()
}

/// Check the chain law `Ψ(u,v)Ψ(v,w) = Ψ(u,w)`, `dΨ/du = A(u)Ψ(u,v)`,
/// `dΨ/dv = −Ψ(u,v)A(v)` and that `x(t) = Ψ(t,v)ξ` starts at `ξ` and
/// solves the equation, over triples `(u, v, w)`. The trajectory check
/// uses `ξ = e₁` and `t = u`.
pub fn verify_evolution_properties(
    psi: &impl Evolution,
    a: &GeneratorFunction,
    samples: &[(f64, f64, f64)],
    h: f64,
    tol: f64,
) -> Report {
    let d = psi.dim();
    let one = |(u, v, w): (f64, f64, f64)| -> Result<[f64; 4]> {
        let puv = psi.psi(u, v)?;
        let chain = (&puv * psi.psi(v, w)? - psi.psi(u, w)?).norm();
        let du = (psi.psi(u + h, v)? - psi.psi(u - h, v)?) / (2.0 * h);
        let du_res = (du - a.at(u) * &puv).norm();
        let dv = (psi.psi(u, v + h)? - psi.psi(u, v - h)?) / (2.0 * h);
        let dv_res = (dv + &puv * a.at(v)).norm();
        let xi = DVector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let start = (psi.psi(v, v)? * &xi - &xi).norm();
        let x = |s: f64| psi.psi(s, v).map(|m| m * &xi);
        let dx = (x(u + h)? - x(u - h)?) / (2.0 * h);
        let traj = start + (dx - a.at(u) * x(u)?).norm();
        Ok([chain, du_res, dv_res, traj])
    };
    let results: Vec<_> = samples.par_iter().map(|&s| one(s)).collect();
    let names = ["chain law", "derivative in u", "derivative in v", "trajectory"];
    let mut checks: Vec<Check> = names.iter().map(|n| Check::new(*n)).collect();
    for (&(u, v, w), res) in samples.iter().zip(results) {
        match res {
            Ok(values) => {
                for (check, x) in checks.iter_mut().zip(values) {
                    check.record(x, tol, || format!("u={u}, v={v}, w={w}"));
                }
            }
            Err(e) => {
                for check in &mut checks {
                    check.record_error(format!("u={u}, v={v}, w={w}: {e}"));
                }
            }
        }
    }
    let mut report = Report::new();
    for c in checks {
        report.push(c);
    }
    report
}

/// Largest `|‖Ψ(t, v)ξ‖ − ‖ξ‖|` over `times`.
pub fn norm_drift(psi: &impl Evolution, v: f64, xi: &DVector<f64>, times: &[f64]) -> Result<f64> {
    let base = xi.norm();
    let mut worst: f64 = 0.0;
    for &t in times {
        worst = worst.max(((psi.psi(t, v)? * xi).norm() - base).abs());
    }
    Ok(worst)
}

/// Check `Z(r, t+s) = Z(s+r, t)·Z(r, s)` over triples `(r, s, t)`.
pub fn verify_real_cocycle(z: &impl MatrixCocycle, samples: &[(f64, f64, f64)], tol: f64) -> Report {
    let results: Vec<_> = samples
        .par_iter()
        .map(|&(r, s, t)| -> Result<f64> { Ok((z.z(r, t + s)? - z.z(s + r, t)? * z.z(r, s)?).norm()) })
        .collect();
    let mut check = Check::new("cocycle");
    for (&(r, s, t), res) in samples.iter().zip(results) {
        match res {
            Ok(v) => check.record(v, tol, || format!("r={r}, s={s}, t={t}")),
            Err(e) => check.record_error(format!("r={r}, s={s}, t={t}: {e}")),
        }
    }
    let mut report = Report::new();
    report.push(check);
    report
}
