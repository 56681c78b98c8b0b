//! Nonautonomous linear difference equations `x(n+1) = A(n)x(n)` and the
//! cotranslations over `ℤ` they correspond to.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{ComplexField, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cotranslation::{Cotranslation, GeneratorMap};
use crate::error::{Error, Result};
use crate::group::{Family, Presentation};
use crate::report::{Check, Report};
use crate::transform::{Affine, Space, Transform};

/// Determinants at or below this modulus count as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

pub const DEFAULT_HORIZON: u64 = 10_000;

pub type SequenceRule<T> = Arc<dyn Fn(i64) -> Result<DMatrix<T>> + Send + Sync>;

#[derive(Clone)]
pub struct MatrixSequence<T: ComplexField> {
    dim: usize,
    horizon: u64,
    rule: SequenceRule<T>,
}

impl<T: ComplexField> MatrixSequence<T> {
    pub fn new(dim: usize, horizon: u64, rule: impl Fn(i64) -> Result<DMatrix<T>> + Send + Sync + 'static) -> Self {
        MatrixSequence { dim, horizon, rule: Arc::new(rule) }
    }

    pub fn constant(a: DMatrix<T>, horizon: u64) -> Result<Self> {
        Self::periodic(vec![a], horizon)
    }

    /// `A(n) = mats[n mod len]`.
    pub fn periodic(mats: Vec<DMatrix<T>>, horizon: u64) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::Config("periodic sequence needs at least one matrix".into()));
        };
        let dim = first.nrows();
        for m in &mats {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Dimension { expected: dim, found: m.ncols().max(m.nrows()) });
            }
        }
        let len = mats.len() as i64;
        Ok(Self::new(dim, horizon, move |n| Ok(mats[n.rem_euclid(len) as usize].clone())))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    /// `A(n)`, checked for shape.
    pub fn at(&self, n: i64) -> Result<DMatrix<T>> {
        let a = (self.rule)(n)?;
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: a.ncols().max(a.nrows()) });
        }
        Ok(a)
    }

    fn inverse_at(&self, k: i64) -> Result<DMatrix<T>> {
        let a = self.at(k)?;
        let det = a.clone().determinant().modulus();
        if det <= nalgebra::convert(SINGULAR_TOL) {
            return Err(Error::SingularAt(k));
        }
        a.try_inverse().ok_or(Error::SingularAt(k))
    }

    /// `Z(n, m)`: `A(n+m−1)⋯A(n)` for `m > 0`, the identity for `m = 0`
    /// and `A(n+m)⁻¹⋯A(n−1)⁻¹` for `m < 0`.
    pub fn transition_matrix(&self, n: i64, m: i64) -> Result<DMatrix<T>> {
        if m.unsigned_abs() > self.horizon {
            return Err(Error::Horizon { requested: m.unsigned_abs(), horizon: self.horizon });
        }
        let mut acc = DMatrix::identity(self.dim, self.dim);
        if m > 0 {
            for k in n..n + m {
                let a = self.at(k)?;
                if a.clone().determinant().modulus() <= nalgebra::convert(SINGULAR_TOL) {
                    return Err(Error::SingularAt(k));
                }
                acc = a * acc;
            }
        } else {
            for k in n + m..n {
                acc *= self.inverse_at(k)?;
            }
        }
        if acc.iter().any(|x| !x.clone().is_finite()) {
            return Err(Error::NumericOverflow(format!("Z({n}, {m}) is not finite")));
        }
        Ok(acc)
    }
}

impl MatrixSequence<f64> {
    /// Deterministic random sequence: `A(n)` has entries in `[−1, 1]` and
    /// condition number at most `max_cond`, drawn from a generator seeded
    /// by `(seed, n)`.
    pub fn random(dim: usize, seed: u64, max_cond: f64, horizon: u64) -> Self {
        Self::new(dim, horizon, move |n| {
            let key = crate::linalg::stable_hash(&[&seed.to_le_bytes(), &n.to_le_bytes()]);
            let mut rng = ChaCha8Rng::seed_from_u64(key);
            Ok(crate::linalg::random_well_conditioned(&mut rng, dim, max_cond))
        })
    }
}

fn to_f64<T: ComplexField>(x: T::RealField) -> f64 {
    nalgebra::try_convert::<T::RealField, f64>(x).unwrap_or(f64::NAN)
}

/// Relative Frobenius residual `‖a − b‖ / max(1, ‖a‖)`.
pub fn relative_residual<T: ComplexField>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let num = to_f64::<T>((a - b).norm());
    let den = to_f64::<T>(a.norm()).max(1.0);
    num / den
}

/// `‖lhs − a·b‖` relative to `max(1, ‖lhs‖, ‖a‖·‖b‖)`, the scale of the
/// rounding error in the product.
pub fn cocycle_residual<T: ComplexField>(lhs: &DMatrix<T>, a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    let rhs = a * b;
    if lhs.shape() != rhs.shape() {
        return f64::INFINITY;
    }
    let scale = to_f64::<T>(lhs.norm()).max(to_f64::<T>(a.norm()) * to_f64::<T>(b.norm())).max(1.0);
    to_f64::<T>((lhs - rhs).norm()) / scale
}

/// Check `Z(n, m+p) = Z(m+n, p)·Z(n, m)` over the sampled `(n, m, p)`.
pub fn verify_cocycle<T: ComplexField>(s: &MatrixSequence<T>, samples: &[(i64, i64, i64)], tol: f64) -> Report {
    verify_cocycle_with(s, samples, tol, |s, n, m| s.transition_matrix(n, m))
}

/// As [`verify_cocycle`], with the transition matrix supplied by `z`.
pub fn verify_cocycle_with<T: ComplexField>(
    s: &MatrixSequence<T>,
    samples: &[(i64, i64, i64)],
    tol: f64,
    z: impl Fn(&MatrixSequence<T>, i64, i64) -> Result<DMatrix<T>>,
) -> Report {
    let mut check = Check::new("cocycle");
    for &(n, m, p) in samples {
        let witness = || format!("n={n}, m={m}, p={p}");
        let lhs = z(s, n, m + p);
        let factors = z(s, m + n, p).and_then(|a| Ok((a, z(s, n, m)?)));
        match (lhs, factors) {
            (Ok(l), Ok((a, b))) => check.record(cocycle_residual(&l, &a, &b), tol, witness),
            (Err(e), _) | (_, Err(e)) => check.record_error(format!("{}: {e}", witness())),
        }
    }
    let mut report = Report::new();
    report.push(check);
    report
}

/// Seeded `(n, m, p)` samples with `|n| ≤ span` and `|m|, |p| ≤ step`.
pub fn random_samples(count: usize, span: i64, step: i64, seed: u64) -> Vec<(i64, i64, i64)> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.random_range(-span..=span), rng.random_range(-step..=step), rng.random_range(-step..=step)))
        .collect()
}

/// The cotranslation over `ℤ` with `A_t(n) = A(n)` acting linearly on `ℝ^d`.
pub fn cotranslation_of_sequence(s: &MatrixSequence<f64>) -> Result<Cotranslation> {
    let p = Presentation::integers();
    let ints = p.clone();
    let seq = s.clone();
    let map = GeneratorMap::rule(move |eta| {
        let n = ints.word_to_integer(eta)?;
        seq.inverse_at(n)?;
        Ok(Transform::affine(Affine::linear(seq.at(n)?)?))
    });
    Cotranslation::new(p, Space::Euclidean { dim: s.dim() }, vec![map])
}

/// Recover `A(n) = Z(n, 1)` for `n` in `range`; the result errors outside it.
pub fn generator_from_cotranslation(
    z: &Cotranslation,
    range: std::ops::RangeInclusive<i64>,
    horizon: u64,
) -> Result<MatrixSequence<f64>> {
    let p = z.presentation();
    if !matches!(p.family(), Family::Integers) {
        return Err(Error::Unsupported("generator recovery needs a cotranslation over the integers".into()));
    }
    let Some(dim) = z.space().vector_dim() else {
        return Err(Error::Unsupported("generator recovery needs a Euclidean space".into()));
    };
    let one = p.integer_word(1);
    let mut table = BTreeMap::new();
    for n in range.clone() {
        let t = z.evaluate(&p.integer_word(n), &one)?;
        let a = t
            .as_affine(dim)
            .ok_or_else(|| Error::Unsupported(format!("Z({n}, 1) is not affine")))?;
        if a.offset().iter().any(|b| *b != 0.0) {
            return Err(Error::Unsupported(format!("Z({n}, 1) is not linear")));
        }
        table.insert(n, a.matrix().clone());
    }
    let (lo, hi) = (*range.start(), *range.end());
    Ok(MatrixSequence::new(dim, horizon, move |n| {
        table.get(&n).cloned().ok_or_else(|| {
            Error::OutOfWindow(format!("A({n}) was recovered only on {lo}..={hi}"))
        })
    }))
}
