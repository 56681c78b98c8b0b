//! Partial cotranslations `W: G × G → 𝔹(ℝ^d)`: maps satisfying the
//! cotranslation law `W(g, kh) = W(hg, k)·W(g, h)` without being
//! invertible, with their projectors, rank, conjugation, bounded
//! diagonalization, completion and factorization.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{Presentation, Word};
use crate::linalg::{self, image_basis, kernel_basis, numerical_rank, op_norm, relative_residual, subspace_distance};
use crate::report::{Check, Report};

/// Idempotency tolerance for units projectors.
pub const IDEMPOTENT_TOL: f64 = 1e-9;
/// Largest principal-angle sine tolerated between kernels.
pub const KERNEL_TOL: f64 = 1e-7;
/// Conjugating matrices with larger condition numbers are rejected.
pub const MAX_CONDITION: f64 = 1e12;

pub type MatrixMap = Arc<dyn Fn(&Word) -> Result<DMatrix<f64>> + Send + Sync>;
pub type PairRule = Arc<dyn Fn(&Word, &Word) -> Result<DMatrix<f64>> + Send + Sync>;

/// A map `g ↦ P(g)` into `d × d` matrices, meant to be idempotent.
#[derive(Clone)]
pub struct Projector {
    dim: usize,
    rule: MatrixMap,
}

impl Projector {
    pub fn new(dim: usize, rule: impl Fn(&Word) -> Result<DMatrix<f64>> + Send + Sync + 'static) -> Self {
        Projector { dim, rule: Arc::new(rule) }
    }

    pub fn constant(m: DMatrix<f64>) -> Self {
        Projector::new(m.nrows(), move |_| Ok(m.clone()))
    }

    pub fn identity(dim: usize) -> Self {
        Projector::constant(DMatrix::identity(dim, dim))
    }

    /// The coordinate projector onto `start..start+len`.
    pub fn block(dim: usize, start: usize, len: usize) -> Self {
        Projector::constant(block_matrix(dim, start, len))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, g: &Word) -> Result<DMatrix<f64>> {
        let m = (self.rule)(g)?;
        check_shape(&m, self.dim)?;
        Ok(m)
    }

    /// `Id − P`.
    pub fn complement(&self) -> Projector {
        let inner = self.clone();
        let d = self.dim;
        Projector::new(d, move |g| Ok(DMatrix::identity(d, d) - inner.at(g)?))
    }
}

fn block_matrix(dim: usize, start: usize, len: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| if i == j && i >= start && i < start + len { 1.0 } else { 0.0 })
}

fn check_shape(m: &DMatrix<f64>, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Dimension { expected: dim, found: if m.nrows() != dim { m.nrows() } else { m.ncols() } });
    }
    Ok(())
}

#[derive(Clone)]
pub enum Form {
    /// `W(g, h) = V(g, h)·P(g)`.
    Product { v: Box<PartialCotranslation>, p: Projector },
    /// The constant coordinate projector onto `start..start+len`.
    Block { start: usize, len: usize },
    /// `W_T(g, h) = T(hg)⁻¹·W(g, h)·T(g)`.
    Conjugated { inner: Box<PartialCotranslation>, t: MatrixMap },
    Sum(Box<PartialCotranslation>, Box<PartialCotranslation>),
    Explicit(PairRule),
}

#[derive(Clone)]
pub struct PartialCotranslation {
    presentation: Presentation,
    dim: usize,
    form: Form,
}

impl PartialCotranslation {
    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    /// The constant projector onto the first `rank` coordinates.
    pub fn constant_block(presentation: Presentation, dim: usize, rank: usize) -> Result<Self> {
        Self::block(presentation, dim, 0, rank)
    }

    pub fn block(presentation: Presentation, dim: usize, start: usize, len: usize) -> Result<Self> {
        if start + len > dim {
            return Err(Error::Config(format!("block {start}..{} exceeds dimension {dim}", start + len)));
        }
        Ok(PartialCotranslation { presentation, dim, form: Form::Block { start, len } })
    }

    /// The zero partial cotranslation.
    pub fn zero(presentation: Presentation, dim: usize) -> Self {
        PartialCotranslation { presentation, dim, form: Form::Block { start: 0, len: 0 } }
    }

    /// A rule known to satisfy the cotranslation law with invertible values,
    /// such as the matrix form of a linear cotranslation.
    pub fn cotranslation(
        presentation: Presentation,
        dim: usize,
        rule: impl Fn(&Word, &Word) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        PartialCotranslation { presentation, dim, form: Form::Explicit(Arc::new(rule)) }
    }

    /// The matrix form of a cotranslation whose values are linear maps.
    pub fn from_cotranslation(z: &crate::cotranslation::Cotranslation) -> Result<Self> {
        let Some(dim) = z.space().vector_dim() else {
            return Err(Error::Unsupported("partial cotranslations act on Euclidean spaces".into()));
        };
        let z = Arc::new(z.clone());
        Ok(Self::cotranslation(z.presentation().clone(), dim, move |g, h| {
            let a = z
                .evaluate(g, h)?
                .as_affine(dim)
                .ok_or_else(|| Error::Unsupported("cotranslation value is not affine".into()))?;
            if a.offset().iter().any(|b| *b != 0.0) {
                return Err(Error::Unsupported("cotranslation value is not linear".into()));
            }
            Ok(a.matrix().clone())
        }))
    }

    /// An arbitrary rule, accepted only if it passes the partial law on
    /// all triples drawn from `elems`.
    pub fn explicit(
        presentation: Presentation,
        dim: usize,
        rule: impl Fn(&Word, &Word) -> Result<DMatrix<f64>> + Send + Sync + 'static,
        elems: &[Word],
        tol: f64,
    ) -> Result<Self> {
        let w = Self::cotranslation(presentation, dim, rule);
        let report = verify_partial_law(&w, elems, tol);
        if !report.passed() {
            return Err(rejection("rule is not a partial cotranslation", &report));
        }
        Ok(w)
    }

    pub fn evaluate(&self, g: &Word, h: &Word) -> Result<DMatrix<f64>> {
        let m = match &self.form {
            Form::Product { v, p } => v.evaluate(g, h)? * p.at(g)?,
            Form::Block { start, len } => block_matrix(self.dim, *start, *len),
            Form::Conjugated { inner, t } => {
                let hg = self.presentation.multiply(h, g);
                let t_hg = t(&hg)?;
                let t_hg_inv = t_hg.try_inverse().ok_or_else(|| {
                    Error::Singular(format!("T({}) is not invertible", self.presentation.format_word(&hg)))
                })?;
                t_hg_inv * inner.evaluate(g, h)? * t(g)?
            }
            Form::Sum(a, b) => a.evaluate(g, h)? + b.evaluate(g, h)?,
            Form::Explicit(rule) => rule(g, h)?,
        };
        check_shape(&m, self.dim)?;
        Ok(m)
    }

    /// `W(g, e)`.
    pub fn unit_value(&self, g: &Word) -> Result<DMatrix<f64>> {
        self.evaluate(g, &Word::identity())
    }
}

fn rejection(reason: &str, report: &Report) -> Error {
    let witness = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .flat_map(|c| c.witnesses.first().map(|w| format!("{}: {}", c.name, w.description)))
        .next()
        .unwrap_or_else(|| "no witness recorded".into());
    Error::Rejected { reason: reason.into(), witness }
}

fn triples(elems: &[Word]) -> Vec<(&Word, &Word, &Word)> {
    let mut out = Vec::with_capacity(elems.len().pow(3));
    for g in elems {
        for h in elems {
            for k in elems {
                out.push((g, h, k));
            }
        }
    }
    out
}

fn pairs(elems: &[Word]) -> Vec<(&Word, &Word)> {
    elems.iter().flat_map(|g| elems.iter().map(move |h| (g, h))).collect()
}

fn record_all<T: Sync>(
    check: &mut Check,
    items: &[T],
    tol: f64,
    eval: impl Fn(&T) -> Result<f64> + Sync,
    witness: impl Fn(&T) -> String,
) {
    let results: Vec<_> = items.par_iter().map(&eval).collect();
    for (item, res) in items.iter().zip(results) {
        match res {
            Ok(r) => check.record(r, tol, || witness(item)),
            Err(e) => check.record_error(format!("{}: {e}", witness(item))),
        }
    }
}

/// Check `W(g, kh) = W(hg, k)·W(g, h)` on all triples from `elems` and
/// idempotency of `W(g, e)`.
pub fn verify_partial_law(w: &PartialCotranslation, elems: &[Word], tol: f64) -> Report {
    let p = &w.presentation;
    let mut law = Check::new("partial law");
    record_all(
        &mut law,
        &triples(elems),
        tol,
        |(g, h, k)| {
            let lhs = w.evaluate(g, &p.multiply(k, h))?;
            let rhs = w.evaluate(&p.multiply(h, g), k)? * w.evaluate(g, h)?;
            Ok(relative_residual(&lhs, &rhs))
        },
        |(g, h, k)| format!("g={}, h={}, k={}", p.format_word(g), p.format_word(h), p.format_word(k)),
    );
    let mut unit = Check::new("idempotent units");
    record_all(
        &mut unit,
        elems,
        tol.max(IDEMPOTENT_TOL),
        |g| {
            let u = w.unit_value(g)?;
            Ok((&u * &u - &u).norm())
        },
        |g| format!("W({}, e)", p.format_word(g)),
    );
    let mut report = Report::new();
    report.push(law);
    report.push(unit);
    report
}

/// `P(g) = W(g, e)`, after checking idempotency on `elems`.
pub fn units_projector(w: &PartialCotranslation, elems: &[Word]) -> Result<Projector> {
    let p = &w.presentation;
    for g in elems {
        let u = w.unit_value(g)?;
        let r = (&u * &u - &u).norm();
        if r.is_nan() || r > IDEMPOTENT_TOL {
            return Err(Error::Inconsistent(format!(
                "W({}, e) is not idempotent (residual {r:e})",
                p.format_word(g)
            )));
        }
    }
    let w = w.clone();
    Ok(Projector::new(w.dim, move |g| w.unit_value(g)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub ranks: BTreeSet<usize>,
    /// Largest principal-angle sine between `ker W(g, h)` and `ker W(g, e)`.
    pub kernel_angle: f64,
}

impl RankReport {
    pub fn rank(&self) -> Option<usize> {
        if self.ranks.len() == 1 {
            self.ranks.first().copied()
        } else {
            None
        }
    }
}

/// Numerical ranks of `W(g, h)` and kernel agreement across second
/// arguments, over all pairs from `elems`.
pub fn rank_report(w: &PartialCotranslation, elems: &[Word]) -> Result<RankReport> {
    let results: Vec<Result<(usize, f64)>> = pairs(elems)
        .par_iter()
        .map(|(g, h)| {
            let m = w.evaluate(g, h)?;
            let base = kernel_basis(&w.unit_value(g)?);
            Ok((numerical_rank(&m), subspace_distance(&kernel_basis(&m), &base)))
        })
        .collect();
    let mut ranks = BTreeSet::new();
    let mut kernel_angle: f64 = 0.0;
    for r in results {
        let (rank, angle) = r?;
        ranks.insert(rank);
        kernel_angle = kernel_angle.max(angle);
    }
    Ok(RankReport { ranks, kernel_angle })
}

/// The constant rank of `W`, or an inconsistency error when ranks vary or
/// kernels depend on the second argument.
pub fn rank_of(w: &PartialCotranslation, elems: &[Word]) -> Result<usize> {
    let report = rank_report(w, elems)?;
    let Some(rank) = report.rank() else {
        return Err(Error::Inconsistent(format!("rank varies over the samples: {:?}", report.ranks)));
    };
    if report.kernel_angle > KERNEL_TOL {
        return Err(Error::Inconsistent(format!(
            "kernels depend on the second argument (angle sine {:e})",
            report.kernel_angle
        )));
    }
    Ok(rank)
}

/// Check `P(hg)·V(g, h) = V(g, h)·P(g)` and the same for `Id − P`, with
/// idempotency of `P`.
pub fn verify_invariant_projector(p: &Projector, v: &PartialCotranslation, elems: &[Word], tol: f64) -> Report {
    let pres = &v.presentation;
    let mut report = Report::new();
    let mut idem = Check::new("projector idempotent");
    record_all(
        &mut idem,
        elems,
        tol,
        |g| {
            let m = p.at(g)?;
            Ok((&m * &m - &m).norm())
        },
        |g| format!("P({})", pres.format_word(g)),
    );
    report.push(idem);
    for (name, proj) in [("invariance", p.clone()), ("complement invariance", p.complement())] {
        let mut check = Check::new(name);
        record_all(
            &mut check,
            &pairs(elems),
            tol,
            |(g, h)| {
                let vgh = v.evaluate(g, h)?;
                Ok(relative_residual(&(proj.at(&pres.multiply(h, g))? * &vgh), &(&vgh * proj.at(g)?)))
            },
            |(g, h)| format!("g={}, h={}", pres.format_word(g), pres.format_word(h)),
        );
        report.push(check);
    }
    report
}

/// Check `P(g)Q(g) = Q(g)P(g) = 0`.
pub fn verify_orthogonal_projectors(p: &Projector, q: &Projector, pres: &Presentation, elems: &[Word], tol: f64) -> Report {
    let mut check = Check::new("orthogonal projectors");
    record_all(
        &mut check,
        elems,
        tol,
        |g| {
            let (a, b) = (p.at(g)?, q.at(g)?);
            Ok((&a * &b).norm().max((&b * &a).norm()))
        },
        |g| format!("g={}", pres.format_word(g)),
    );
    let mut report = Report::new();
    report.push(check);
    report
}

/// Check `W(hg, k)·V(g, h) = V(hg, k)·W(g, h) = 0` on all triples.
pub fn verify_mutual_orthogonality(
    w: &PartialCotranslation,
    v: &PartialCotranslation,
    elems: &[Word],
    tol: f64,
) -> Report {
    let p = &w.presentation;
    let mut check = Check::new("mutual orthogonality");
    record_all(
        &mut check,
        &triples(elems),
        tol,
        |(g, h, k)| {
            let hg = p.multiply(h, g);
            let a = w.evaluate(&hg, k)? * v.evaluate(g, h)?;
            let b = v.evaluate(&hg, k)? * w.evaluate(g, h)?;
            Ok(a.norm().max(b.norm()))
        },
        |(g, h, k)| format!("g={}, h={}, k={}", p.format_word(g), p.format_word(h), p.format_word(k)),
    );
    let mut report = Report::new();
    report.push(check);
    report
}

/// `W(g, h) = V(g, h)·P(g)` for a projector `P` invariant for `V`.
pub fn restrict(v: &PartialCotranslation, p: &Projector, elems: &[Word], tol: f64) -> Result<PartialCotranslation> {
    if p.dim != v.dim {
        return Err(Error::Dimension { expected: v.dim, found: p.dim });
    }
    let report = verify_invariant_projector(p, v, elems, tol);
    if !report.check("invariance").is_some_and(|c| c.passed) || !report.check("projector idempotent").is_some_and(|c| c.passed) {
        return Err(rejection("projector is not invariant", &report));
    }
    Ok(PartialCotranslation {
        presentation: v.presentation.clone(),
        dim: v.dim,
        form: Form::Product { v: Box::new(v.clone()), p: p.clone() },
    })
}

/// `W + V` for mutually orthogonal partial cotranslations.
pub fn orthogonal_sum(
    w: &PartialCotranslation,
    v: &PartialCotranslation,
    elems: &[Word],
    tol: f64,
) -> Result<PartialCotranslation> {
    if w.dim != v.dim {
        return Err(Error::Dimension { expected: w.dim, found: v.dim });
    }
    let report = verify_mutual_orthogonality(w, v, elems, tol);
    if !report.passed() {
        return Err(rejection("summands are not mutually orthogonal", &report));
    }
    Ok(sum_unchecked(w, v))
}

/// `W + V` without the orthogonality check.
pub fn sum_unchecked(w: &PartialCotranslation, v: &PartialCotranslation) -> PartialCotranslation {
    PartialCotranslation {
        presentation: w.presentation.clone(),
        dim: w.dim,
        form: Form::Sum(Box::new(w.clone()), Box::new(v.clone())),
    }
}

/// `W_T(g, h) = T(hg)⁻¹·W(g, h)·T(g)`. `T(g)` must have condition number
/// at most `MAX_CONDITION` for every `g` in `elems`.
pub fn conjugate(
    w: &PartialCotranslation,
    t: impl Fn(&Word) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    elems: &[Word],
) -> Result<PartialCotranslation> {
    for g in elems {
        let m = t(g)?;
        check_shape(&m, w.dim)?;
        let c = linalg::condition(&m);
        if c.is_nan() || c > MAX_CONDITION {
            return Err(Error::Rejected {
                reason: "conjugating matrix is near-singular".into(),
                witness: format!("T({}) has condition number {c:e}", w.presentation.format_word(g)),
            });
        }
    }
    Ok(PartialCotranslation {
        presentation: w.presentation.clone(),
        dim: w.dim,
        form: Form::Conjugated { inner: Box::new(w.clone()), t: Arc::new(t) },
    })
}

/// A pointwise diagonalizer of a projector: `T(g)` has an orthonormal basis
/// of `im P(g)` in its first `rank` columns and one of `ker P(g)` after.
#[derive(Clone)]
pub struct Diagonalizer {
    projector: Projector,
    rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalizerSample {
    pub element: String,
    pub norm: f64,
    pub inverse_norm: f64,
    pub block_residual: f64,
}

#[derive(Debug, Clone)]
pub struct DiagonalizerReport {
    pub rank: usize,
    /// `sup max(‖P(g)‖, ‖Id − P(g)‖)` over the samples.
    pub bound: f64,
    pub samples: Vec<DiagonalizerSample>,
    /// `‖T(gᵢ₊₁) − T(gᵢ)‖` between consecutive samples. No continuity is
    /// claimed; these are diagnostics.
    pub jump_norms: Vec<f64>,
    pub report: Report,
}

impl Diagonalizer {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn t(&self, g: &Word) -> Result<DMatrix<f64>> {
        let p = self.projector.at(g)?;
        let d = self.projector.dim;
        let rank = numerical_rank(&p);
        if rank != self.rank {
            return Err(Error::Inconsistent(format!("projector rank {rank} differs from {}", self.rank)));
        }
        let im = image_basis(&p, rank);
        let ker = image_basis(&(DMatrix::identity(d, d) - &p), d - rank);
        let mut t = DMatrix::zeros(d, d);
        t.columns_mut(0, rank).copy_from(&im);
        t.columns_mut(rank, d - rank).copy_from(&ker);
        Ok(t)
    }

    pub fn t_inverse(&self, g: &Word) -> Result<DMatrix<f64>> {
        self.t(g)?
            .try_inverse()
            .ok_or_else(|| Error::Singular("diagonalizing matrix is not invertible".into()))
    }
}

/// Build `T` for a projector of constant rank and check, on every sample,
/// `T(g)⁻¹P(g)T(g) = diag(Id_n, 0)` within `tol`, `‖T(g)‖ ≤ d` and
/// `‖T(g)⁻¹‖ ≤ d·M + tol`.
pub fn bounded_diagonalizer(p: &Projector, pres: &Presentation, elems: &[Word], tol: f64) -> Result<(Diagonalizer, DiagonalizerReport)> {
    let d = p.dim;
    let Some(first) = elems.first() else {
        return Err(Error::Config("the diagonalizer needs at least one sample".into()));
    };
    let rank = numerical_rank(&p.at(first)?);
    let diag = Diagonalizer { projector: p.clone(), rank };
    let block = block_matrix(d, 0, rank);
    let mut bound: f64 = 0.0;
    let mut ts = Vec::with_capacity(elems.len());
    for g in elems {
        let pg = p.at(g)?;
        bound = bound.max(op_norm(&pg)).max(op_norm(&(DMatrix::identity(d, d) - &pg)));
        ts.push((g, pg, diag.t(g)?));
    }
    let df = d as f64;
    let mut block_check = Check::new("block form");
    let mut norm_check = Check::new("norm bound");
    let mut inv_check = Check::new("inverse norm bound");
    let mut samples = Vec::with_capacity(ts.len());
    for (g, pg, t) in &ts {
        let name = pres.format_word(g);
        let t_inv = t.clone().try_inverse().ok_or_else(|| Error::Singular(format!("T({name}) is singular")))?;
        let block_residual = (&t_inv * pg * t - &block).norm();
        let norm = op_norm(t);
        let inverse_norm = op_norm(&t_inv);
        block_check.record(block_residual, tol, || format!("g={name}"));
        norm_check.record((norm - df).max(0.0), 0.0, || format!("‖T({name})‖ = {norm}"));
        inv_check.record((inverse_norm - df * bound).max(0.0), tol, || format!("‖T({name})⁻¹‖ = {inverse_norm}"));
        samples.push(DiagonalizerSample { element: name, norm, inverse_norm, block_residual });
    }
    let jump_norms = ts.windows(2).map(|w| (&w[1].2 - &w[0].2).norm()).collect();
    let mut report = Report::new();
    report.push(block_check);
    report.push(norm_check);
    report.push(inv_check);
    Ok((diag.clone(), DiagonalizerReport { rank, bound, samples, jump_norms, report }))
}

pub struct Completion {
    /// `V(g, h) = T(hg)·diag(0, Id)·T(g)⁻¹`, orthogonal to `W`.
    pub complement: PartialCotranslation,
    /// `W + V`, a cotranslation with invertible values.
    pub total: PartialCotranslation,
    pub diagonalizer: DiagonalizerReport,
    pub report: Report,
}

/// Complete `W` to an invertible-valued cotranslation `W + V`.
pub fn complete(w: &PartialCotranslation, elems: &[Word], tol: f64) -> Result<Completion> {
    let law = verify_partial_law(w, elems, tol);
    if !law.passed() {
        return Err(rejection("input is not a partial cotranslation", &law));
    }
    let units = units_projector(w, elems)?;
    let (diag, diag_report) = bounded_diagonalizer(&units, &w.presentation, elems, tol)?;
    let d = w.dim;
    let rank = diag.rank();
    let hat = DMatrix::identity(d, d) - block_matrix(d, 0, rank);
    let pres = w.presentation.clone();
    let complement = PartialCotranslation::cotranslation(w.presentation.clone(), d, move |g, h| {
        Ok(diag.t(&pres.multiply(h, g))? * &hat * diag.t_inverse(g)?)
    });
    let total = sum_unchecked(w, &complement);

    let mut report = Report::new();
    report.extend(diag_report.report.clone());
    report.extend(verify_mutual_orthogonality(w, &complement, elems, tol));
    let mut total_law = verify_partial_law(&total, elems, tol);
    for c in &mut total_law.checks {
        c.name = format!("total {}", c.name);
    }
    report.extend(total_law);
    let mut invertible = Check::new("total invertible");
    record_all(
        &mut invertible,
        &pairs(elems),
        0.0,
        |(g, h)| {
            let m = total.evaluate(g, h)?;
            Ok(if numerical_rank(&m) == d && linalg::condition(&m) <= MAX_CONDITION { 0.0 } else { 1.0 })
        },
        |(g, h)| format!("g={}, h={}", w.presentation.format_word(g), w.presentation.format_word(h)),
    );
    report.push(invertible);
    Ok(Completion { complement, total, diagonalizer: diag_report, report })
}

pub struct Factorization {
    pub cotranslation: PartialCotranslation,
    pub projector: Projector,
    pub report: Report,
}

/// `W(g, h) = Z(g, h)·P(g)` with `Z` the completion of `W` and `P` its
/// units projector.
pub fn factorize(w: &PartialCotranslation, elems: &[Word], tol: f64) -> Result<Factorization> {
    let completion = complete(w, elems, tol)?;
    let projector = units_projector(w, elems)?;
    let z = completion.total;
    let p = &w.presentation;
    let mut check = Check::new("factorization");
    record_all(
        &mut check,
        &pairs(elems),
        tol,
        |(g, h)| Ok((w.evaluate(g, h)? - z.evaluate(g, h)? * projector.at(g)?).norm()),
        |(g, h)| format!("g={}, h={}", p.format_word(g), p.format_word(h)),
    );
    let mut report = completion.report;
    report.push(check);
    Ok(Factorization { cotranslation: z, projector, report })
}

fn element_rng(pres: &Presentation, g: &Word, seed: u64, tag: &str) -> ChaCha8Rng {
    let name = pres.format_word(g);
    ChaCha8Rng::seed_from_u64(linalg::stable_hash(&[name.as_bytes(), tag.as_bytes(), &seed.to_le_bytes()]))
}

/// A random product-form partial cotranslation of rank `rank` on `ℝ^dim`.
///
/// `V(g, h) = S(hg)F(hg)F(g)⁻¹S(g)⁻¹` with block-diagonal `F` and
/// `P(g) = S(g)·diag(Id_rank, 0)·S(g)⁻¹`, where `S(g)` and `F(g)` are drawn
/// per element from `seed` with condition numbers at most `max_cond`.
pub fn random_product_partial(
    pres: &Presentation,
    dim: usize,
    rank: usize,
    seed: u64,
    max_cond: f64,
) -> Result<(PartialCotranslation, Projector)> {
    if rank > dim {
        return Err(Error::Config(format!("rank {rank} exceeds dimension {dim}")));
    }
    let s_of = {
        let pres = pres.clone();
        Arc::new(move |g: &Word| -> DMatrix<f64> {
            let mut rng = element_rng(&pres, g, seed, "S");
            linalg::random_well_conditioned(&mut rng, dim, max_cond)
        })
    };
    let f_of = {
        let pres = pres.clone();
        Arc::new(move |g: &Word| -> DMatrix<f64> {
            let mut rng = element_rng(&pres, g, seed, "F");
            let mut f = DMatrix::zeros(dim, dim);
            if rank > 0 {
                f.view_mut((0, 0), (rank, rank))
                    .copy_from(&linalg::random_well_conditioned(&mut rng, rank, max_cond));
            }
            if rank < dim {
                f.view_mut((rank, rank), (dim - rank, dim - rank))
                    .copy_from(&linalg::random_well_conditioned(&mut rng, dim - rank, max_cond));
            }
            f
        })
    };
    let inv = |m: DMatrix<f64>| m.try_inverse().ok_or_else(|| Error::Singular("random factor".into()));
    let v = {
        let (s_of, f_of, pres) = (s_of.clone(), f_of.clone(), pres.clone());
        PartialCotranslation::cotranslation(pres.clone(), dim, move |g, h| {
            let hg = pres.multiply(h, g);
            Ok(s_of(&hg) * f_of(&hg) * inv(f_of(g))? * inv(s_of(g))?)
        })
    };
    let block = block_matrix(dim, 0, rank);
    let p = Projector::new(dim, move |g| Ok(s_of(g) * &block * inv(s_of(g))?));
    let w = PartialCotranslation {
        presentation: pres.clone(),
        dim,
        form: Form::Product { v: Box::new(v), p: p.clone() },
    };
    Ok((w, p))
}
