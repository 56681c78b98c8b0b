//! Invertible transforms of the example spaces, kept as symbolic
//! expression trees and evaluated on demand.
//!
//! Unbounded spaces are truncated: copy labels of a labeled Euclidean space
//! live in `[-window, window]`, trees stop at a fixed depth and sequences
//! at a fixed length. Leaving the truncation is an error, never a silent
//! clamp.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest tree the toolkit will materialize.
pub const MAX_TREE_DEPTH: usize = 16;
/// Largest condition number accepted for an affine matrix.
pub const MAX_AFFINE_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Space {
    Euclidean { dim: usize },
    /// Countably many copies of `R^dim`, labels truncated to `[-window, window]`.
    LabeledEuclidean { dim: usize, window: i64 },
    /// Rooted tree of words over `{0, .., alphabet-1}` of length `<= depth`.
    Tree { alphabet: usize, depth: usize },
    /// Sequences of `length` symbols from `{0, .., alphabet-1}`.
    Sequence { alphabet: usize, length: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Vector(Vec<f64>),
    Labeled { label: i64, v: Vec<f64> },
    Vertex(Vec<usize>),
    Sequence(Vec<usize>),
}

impl Space {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Space::Euclidean { dim } => dim > 0,
            Space::LabeledEuclidean { dim, window } => dim > 0 && window > 0,
            Space::Tree { alphabet, depth } => alphabet >= 1 && (1..=MAX_TREE_DEPTH).contains(&depth),
            Space::Sequence { alphabet, length } => alphabet >= 1 && length >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid space {self:?}")))
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Space::Tree { .. } | Space::Sequence { .. })
    }

    /// Dimension of the vector part, for Euclidean-type spaces.
    pub fn vector_dim(&self) -> Option<usize> {
        match *self {
            Space::Euclidean { dim } | Space::LabeledEuclidean { dim, .. } => Some(dim),
            _ => None,
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        let ok = match (self, p) {
            (Space::Euclidean { dim }, Point::Vector(v)) => v.len() == *dim,
            (Space::LabeledEuclidean { dim, window }, Point::Labeled { label, v }) => {
                if label.abs() > *window {
                    return Err(Error::OutOfWindow(format!("label {label} beyond ±{window}")));
                }
                v.len() == *dim
            }
            (Space::Tree { alphabet, depth }, Point::Vertex(w)) => {
                w.len() <= *depth && w.iter().all(|x| x < alphabet)
            }
            (Space::Sequence { alphabet, length }, Point::Sequence(s)) => {
                s.len() == *length && s.iter().all(|x| x < alphabet)
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!("point {p:?} is not in {self:?}")))
        }
    }

    /// Deterministic pseudo-random test points.
    pub fn test_points(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vec = |rng: &mut ChaCha8Rng, d: usize| -> Vec<f64> {
            (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()
        };
        (0..count)
            .map(|i| match *self {
                Space::Euclidean { dim } => Point::Vector(vec(&mut rng, dim)),
                Space::LabeledEuclidean { dim, window } => {
                    let half = (window / 2).max(0);
                    let label = rng.random_range(-half..=half);
                    Point::Labeled { label, v: vec(&mut rng, dim) }
                }
                Space::Tree { alphabet, depth } => {
                    // first point is the root, then vertices of every length
                    let len = if i == 0 { 0 } else { 1 + (i - 1) % depth };
                    Point::Vertex((0..len).map(|_| rng.random_range(0..alphabet)).collect())
                }
                Space::Sequence { alphabet, length } => {
                    Point::Sequence((0..length).map(|_| rng.random_range(0..alphabet)).collect())
                }
            })
            .collect()
    }

    /// Every vertex of a tree space, shortest first.
    pub fn tree_vertices(&self) -> Result<Vec<Vec<usize>>> {
        let Space::Tree { alphabet, depth } = *self else {
            return Err(Error::SpaceMismatch("not a tree space".into()));
        };
        let mut out = vec![Vec::new()];
        let mut level = vec![Vec::new()];
        for _ in 0..depth {
            level = level
                .iter()
                .flat_map(|v: &Vec<usize>| {
                    (0..alphabet).map(move |a| {
                        let mut c = v.clone();
                        c.push(a);
                        c
                    })
                })
                .collect();
            out.extend(level.iter().cloned());
        }
        Ok(out)
    }
}

/// Distance between two points of the same space. Discrete spaces and
/// mismatched copy labels give integer distances, so any disagreement is
/// at least `1`.
pub fn point_distance(a: &Point, b: &Point) -> f64 {
    fn norm(x: &[f64], y: &[f64]) -> f64 {
        if x.len() != y.len() {
            return f64::INFINITY;
        }
        x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
    }
    match (a, b) {
        (Point::Vector(x), Point::Vector(y)) => norm(x, y),
        (Point::Labeled { label: k, v: x }, Point::Labeled { label: l, v: y }) => {
            (k - l).unsigned_abs() as f64 + norm(x, y)
        }
        (Point::Vertex(x), Point::Vertex(y)) | (Point::Sequence(x), Point::Sequence(y)) => {
            if x == y {
                0.0
            } else {
                1.0
            }
        }
        _ => f64::INFINITY,
    }
}

/// `x ↦ A x + b` with `A` invertible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineRepr", into = "AffineRepr")]
pub struct Affine {
    a: DMatrix<f64>,
    b: DVector<f64>,
    a_inv: DMatrix<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineRepr {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(default)]
    b: Option<Vec<f64>>,
}

impl TryFrom<AffineRepr> for Affine {
    type Error = Error;

    fn try_from(r: AffineRepr) -> Result<Self> {
        let n = r.a.len();
        if n == 0 || r.a.iter().any(|row| row.len() != n) {
            return Err(Error::Config("affine matrix must be square and non-empty".into()));
        }
        let a = DMatrix::from_fn(n, n, |i, j| r.a[i][j]);
        let b = match r.b {
            Some(b) if b.len() == n => DVector::from_vec(b),
            Some(b) => return Err(Error::Dimension { expected: n, found: b.len() }),
            None => DVector::zeros(n),
        };
        Affine::new(a, b)
    }
}

impl From<Affine> for AffineRepr {
    fn from(t: Affine) -> Self {
        AffineRepr {
            a: t.a.row_iter().map(|r| r.iter().copied().collect()).collect(),
            b: Some(t.b.iter().copied().collect()),
        }
    }
}

impl Affine {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || n == 0 {
            return Err(Error::Config("affine matrix must be square and non-empty".into()));
        }
        if b.len() != n {
            return Err(Error::Dimension { expected: n, found: b.len() });
        }
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Singular("non-finite affine coefficients".into()));
        }
        let cond = condition_number(&a);
        if cond.is_nan() || cond > MAX_AFFINE_CONDITION {
            return Err(Error::Singular(format!("affine matrix has condition number {cond:e}")));
        }
        let a_inv = if n == 1 {
            DMatrix::from_element(1, 1, 1.0 / a[(0, 0)])
        } else {
            a.clone().try_inverse().ok_or_else(|| Error::Singular("affine matrix".into()))?
        };
        Ok(Affine { a, b, a_inv })
    }

    pub fn linear(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        Affine::new(a, DVector::zeros(n))
    }

    /// The one-dimensional map `x ↦ slope·x + offset`.
    pub fn scalar(slope: f64, offset: f64) -> Result<Self> {
        Affine::new(DMatrix::from_element(1, 1, slope), DVector::from_element(1, offset))
    }

    pub fn translation(b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        Affine::new(DMatrix::identity(n, n), DVector::from_vec(b))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `self ∘ other`.
    pub fn then_after(&self, other: &Affine) -> Affine {
        Affine {
            a: &self.a * &other.a,
            b: &self.a * &other.b + &self.b,
            a_inv: &other.a_inv * &self.a_inv,
        }
    }

    pub fn inverse(&self) -> Affine {
        Affine { a: self.a_inv.clone(), b: -(&self.a_inv * &self.b), a_inv: self.a.clone() }
    }

    fn apply_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: v.len() });
        }
        let x = DVector::from_column_slice(v);
        Ok((&self.a * x + &self.b).iter().copied().collect())
    }

    fn apply_inv_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: v.len() });
        }
        let x = DVector::from_column_slice(v) - &self.b;
        Ok((&self.a_inv * x).iter().copied().collect())
    }
}

/// Ratio of extreme singular values; infinite for singular matrices.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Which copies a gated transform acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelGate {
    Even,
    Odd,
    Label(i64),
}

impl LabelGate {
    pub fn admits(self, label: i64) -> bool {
        match self {
            LabelGate::Even => label.rem_euclid(2) == 0,
            LabelGate::Odd => label.rem_euclid(2) == 1,
            LabelGate::Label(k) => label == k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Affine(Affine),
    /// Counterclockwise rotation in the coordinate plane `(i, j)`.
    #[serde(rename = "rot")]
    Rotation { i: usize, j: usize, angle: f64 },
    /// Permute the symbols of a sequence, at one position or at all of them.
    SymbolPermutation {
        perm: Vec<usize>,
        #[serde(default)]
        position: Option<usize>,
    },
    /// `(v, k) ↦ (v, k + offset)` on copy labels.
    CopyShift(i64),
    /// Apply `inner` to the vector part of points whose label passes the gate.
    Gated { gate: LabelGate, inner: Box<Transform> },
    /// Acts on the subtree below `anchor` by permuting the first letter
    /// after the anchor; the identity elsewhere.
    TreePortrait { anchor: Vec<usize>, perm: Vec<usize> },
    /// Swap sequence positions `0` and `n`.
    PositionSwap(usize),
    /// `t[0] ∘ t[1] ∘ ...`: the last entry acts first.
    Compose(Vec<Transform>),
    Inverse(Box<Transform>),
}

impl Transform {
    pub fn rotation(i: usize, j: usize, angle: f64) -> Transform {
        Transform::Rotation { i, j, angle }
    }

    pub fn affine(a: Affine) -> Transform {
        Transform::Affine(a)
    }

    /// Reflection of the plane across the line through the origin at `angle`.
    pub fn reflection(angle: f64) -> Transform {
        let (s, c) = (2.0 * angle).sin_cos();
        let a = DMatrix::from_row_slice(2, 2, &[c, s, s, -c]);
        Transform::Affine(Affine::linear(a).expect("reflections are orthogonal"))
    }

    pub fn gated(gate: LabelGate, inner: Transform) -> Transform {
        Transform::Gated { gate, inner: Box::new(inner) }
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &Transform) -> Transform {
        let mut parts = Vec::new();
        flatten_into(self, &mut parts);
        flatten_into(other, &mut parts);
        match parts.len() {
            0 => Transform::Identity,
            1 => parts.pop().unwrap(),
            _ => Transform::Compose(parts),
        }
    }

    /// `t[0] ∘ t[1] ∘ ... ∘ t[n-1]`.
    pub fn compose_all(parts: impl IntoIterator<Item = Transform>) -> Transform {
        parts.into_iter().fold(Transform::Identity, |acc, t| acc.compose(&t))
    }

    /// Symbolic inverse. Exact for the closed-form constructors.
    pub fn invert(&self) -> Transform {
        match self {
            Transform::Identity => Transform::Identity,
            Transform::Affine(a) => Transform::Affine(a.inverse()),
            Transform::Rotation { i, j, angle } => Transform::Rotation { i: *i, j: *j, angle: -angle },
            Transform::CopyShift(k) => Transform::CopyShift(-k),
            Transform::PositionSwap(n) => Transform::PositionSwap(*n),
            Transform::SymbolPermutation { perm, position } => Transform::SymbolPermutation {
                perm: inverse_permutation(perm),
                position: *position,
            },
            Transform::TreePortrait { anchor, perm } => Transform::TreePortrait {
                anchor: anchor.clone(),
                perm: inverse_permutation(perm),
            },
            Transform::Gated { gate, inner } => Transform::gated(*gate, inner.invert()),
            Transform::Compose(parts) => Transform::Compose(parts.iter().rev().map(|t| t.invert()).collect()),
            Transform::Inverse(inner) => (**inner).clone(),
        }
    }

    /// Flatten compositions, drop identities and fuse neighbouring
    /// affine maps, same-plane rotations and copy shifts.
    pub fn simplify(&self) -> Transform {
        let mut flat = Vec::new();
        flatten_into(self, &mut flat);
        let mut out: Vec<Transform> = Vec::with_capacity(flat.len());
        for t in flat {
            let t = match t {
                Transform::Inverse(inner) => inner.invert().simplify(),
                Transform::Gated { gate, inner } => Transform::gated(gate, inner.simplify()),
                other => other,
            };
            if t == Transform::Identity {
                continue;
            }
            let fused = match (out.last(), &t) {
                (Some(Transform::Affine(a)), Transform::Affine(b)) if a.dim() == b.dim() => {
                    Some(Transform::Affine(a.then_after(b)))
                }
                (
                    Some(Transform::Rotation { i, j, angle }),
                    Transform::Rotation { i: i2, j: j2, angle: a2 },
                ) if (i, j) == (i2, j2) => Some(Transform::Rotation { i: *i, j: *j, angle: angle + a2 }),
                (Some(Transform::CopyShift(k)), Transform::CopyShift(l)) => Some(Transform::CopyShift(k + l)),
                _ => None,
            };
            match fused {
                Some(f) => {
                    out.pop();
                    if !matches!(f, Transform::CopyShift(0)) {
                        out.push(f);
                    }
                }
                None => out.push(t),
            }
        }
        match out.len() {
            0 => Transform::Identity,
            1 => out.pop().unwrap(),
            _ => Transform::Compose(out),
        }
    }

    /// Collapse to a single `x ↦ A x + b` on `R^dim` when the expression only
    /// uses identities, affine maps and rotations.
    pub fn as_affine(&self, dim: usize) -> Option<Affine> {
        match self {
            Transform::Identity => Affine::linear(DMatrix::identity(dim, dim)).ok(),
            Transform::Affine(a) => (a.dim() == dim).then(|| a.clone()),
            Transform::Rotation { i, j, angle } => {
                if *i >= dim || *j >= dim || i == j {
                    return None;
                }
                let mut m = DMatrix::identity(dim, dim);
                let (s, c) = angle.sin_cos();
                m[(*i, *i)] = c;
                m[(*i, *j)] = -s;
                m[(*j, *i)] = s;
                m[(*j, *j)] = c;
                Affine::linear(m).ok()
            }
            Transform::Compose(parts) => {
                let mut acc = Affine::linear(DMatrix::identity(dim, dim)).ok()?;
                for p in parts {
                    acc = acc.then_after(&p.as_affine(dim)?);
                }
                Some(acc)
            }
            Transform::Inverse(inner) => inner.as_affine(dim).map(|a| a.inverse()),
            _ => None,
        }
    }

    /// Check that the transform is a well-formed invertible map of `space`.
    pub fn validate(&self, space: &Space) -> Result<()> {
        let bad = |msg: String| Err(Error::SpaceMismatch(msg));
        match (self, space) {
            (Transform::Identity, _) => Ok(()),
            (Transform::Affine(a), s) => match s.vector_dim() {
                Some(d) if d == a.dim() => Ok(()),
                _ => bad(format!("affine map of dimension {} on {s:?}", a.dim())),
            },
            (Transform::Rotation { i, j, angle }, s) => match s.vector_dim() {
                Some(d) if i < j && *j < d && angle.is_finite() => Ok(()),
                _ => bad(format!("rotation in plane ({i}, {j}) on {s:?}")),
            },
            (Transform::SymbolPermutation { perm, position }, Space::Sequence { alphabet, length }) => {
                check_permutation(perm, *alphabet)?;
                match position {
                    Some(p) if p >= length => bad(format!("position {p} beyond length {length}")),
                    _ => Ok(()),
                }
            }
            (Transform::CopyShift(_), Space::LabeledEuclidean { .. }) => Ok(()),
            (Transform::Gated { inner, .. }, Space::LabeledEuclidean { dim, .. }) => {
                inner.validate(&Space::Euclidean { dim: *dim })
            }
            (Transform::TreePortrait { anchor, perm }, Space::Tree { alphabet, .. }) => {
                check_permutation(perm, *alphabet)?;
                if anchor.iter().any(|x| x >= alphabet) {
                    return bad(format!("anchor {anchor:?} uses letters beyond {alphabet}"));
                }
                Ok(())
            }
            (Transform::PositionSwap(n), Space::Sequence { length, .. }) => {
                if n < length {
                    Ok(())
                } else {
                    bad(format!("position swap (0 {n}) beyond length {length}"))
                }
            }
            (Transform::Compose(parts), s) => parts.iter().try_for_each(|p| p.validate(s)),
            (Transform::Inverse(inner), s) => inner.validate(s),
            (t, s) => bad(format!("{} does not act on {s:?}", t.kind())),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Affine(_) => "affine",
            Transform::Rotation { .. } => "rotation",
            Transform::SymbolPermutation { .. } => "symbol permutation",
            Transform::CopyShift(_) => "copy shift",
            Transform::Gated { .. } => "gated transform",
            Transform::TreePortrait { .. } => "tree portrait",
            Transform::PositionSwap(_) => "position swap",
            Transform::Compose(_) => "composition",
            Transform::Inverse(_) => "inverse",
        }
    }

    /// Image of `p`. The point must belong to `space`.
    pub fn apply(&self, space: &Space, p: &Point) -> Result<Point> {
        space.check_point(p)?;
        self.apply_unchecked(space, p, false)
    }

    fn apply_unchecked(&self, space: &Space, p: &Point, inverse: bool) -> Result<Point> {
        match self {
            Transform::Identity => Ok(p.clone()),
            Transform::Compose(parts) => {
                let mut x = p.clone();
                if inverse {
                    for t in parts {
                        x = t.apply_unchecked(space, &x, true)?;
                    }
                } else {
                    for t in parts.iter().rev() {
                        x = t.apply_unchecked(space, &x, false)?;
                    }
                }
                Ok(x)
            }
            Transform::Inverse(inner) => inner.apply_unchecked(space, p, !inverse),
            Transform::Affine(a) => map_vector(p, |v| if inverse { a.apply_inv_vec(v) } else { a.apply_vec(v) }),
            Transform::Rotation { i, j, angle } => {
                let angle = if inverse { -angle } else { *angle };
                map_vector(p, |v| rotate(v, *i, *j, angle))
            }
            Transform::Gated { gate, inner } => match p {
                Point::Labeled { label, v } if gate.admits(*label) => {
                    let sub = Space::Euclidean { dim: v.len() };
                    match inner.apply_unchecked(&sub, &Point::Vector(v.clone()), inverse)? {
                        Point::Vector(w) => Ok(Point::Labeled { label: *label, v: w }),
                        other => Err(Error::SpaceMismatch(format!("gated inner produced {other:?}"))),
                    }
                }
                Point::Labeled { .. } => Ok(p.clone()),
                _ => Err(Error::SpaceMismatch("gated transforms act on labeled points".into())),
            },
            Transform::CopyShift(k) => match (p, space) {
                (Point::Labeled { label, v }, Space::LabeledEuclidean { window, .. }) => {
                    let target = if inverse { label - k } else { label + k };
                    if target.abs() > *window {
                        return Err(Error::OutOfWindow(format!("label {target} beyond ±{window}")));
                    }
                    Ok(Point::Labeled { label: target, v: v.clone() })
                }
                _ => Err(Error::SpaceMismatch("copy shifts act on labeled points".into())),
            },
            Transform::SymbolPermutation { perm, position } => match p {
                Point::Sequence(s) => {
                    let table = if inverse { inverse_permutation(perm) } else { perm.clone() };
                    let mut out = s.clone();
                    let lookup = |x: usize| {
                        table.get(x).copied().ok_or_else(|| {
                            Error::SpaceMismatch(format!("symbol {x} outside permutation"))
                        })
                    };
                    match position {
                        Some(i) => {
                            let slot = out
                                .get_mut(*i)
                                .ok_or_else(|| Error::OutOfWindow(format!("position {i}")))?;
                            *slot = lookup(*slot)?;
                        }
                        None => {
                            for slot in out.iter_mut() {
                                *slot = lookup(*slot)?;
                            }
                        }
                    }
                    Ok(Point::Sequence(out))
                }
                _ => Err(Error::SpaceMismatch("symbol permutations act on sequences".into())),
            },
            Transform::PositionSwap(n) => match p {
                Point::Sequence(s) => {
                    if *n >= s.len() {
                        return Err(Error::OutOfWindow(format!("swap (0 {n}) on length {}", s.len())));
                    }
                    let mut out = s.clone();
                    out.swap(0, *n);
                    Ok(Point::Sequence(out))
                }
                _ => Err(Error::SpaceMismatch("position swaps act on sequences".into())),
            },
            Transform::TreePortrait { anchor, perm } => match p {
                Point::Vertex(v) => {
                    if v.len() > anchor.len() && v.starts_with(anchor) {
                        let slot = anchor.len();
                        let table = if inverse { inverse_permutation(perm) } else { perm.clone() };
                        let mut out = v.clone();
                        out[slot] = *table.get(v[slot]).ok_or_else(|| {
                            Error::SpaceMismatch(format!("letter {} outside permutation", v[slot]))
                        })?;
                        Ok(Point::Vertex(out))
                    } else {
                        Ok(p.clone())
                    }
                }
                _ => Err(Error::SpaceMismatch("tree portraits act on vertices".into())),
            },
        }
    }

    /// Largest distance between the images of the test points.
    pub fn distance(&self, other: &Transform, space: &Space, points: &[Point]) -> Result<f64> {
        if points.is_empty() {
            return Err(Error::Config("no test points".into()));
        }
        let mut worst: f64 = 0.0;
        for p in points {
            let d = point_distance(&self.apply(space, p)?, &other.apply(space, p)?);
            if d.is_nan() {
                return Ok(f64::NAN);
            }
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// Extensional equality on the test points; exact on discrete spaces.
    pub fn approx_equal(&self, other: &Transform, space: &Space, points: &[Point], tol: f64) -> Result<bool> {
        let d = self.distance(other, space, points)?;
        Ok(if space.is_discrete() { d == 0.0 } else { d <= tol })
    }
}

fn flatten_into(t: &Transform, out: &mut Vec<Transform>) {
    match t {
        Transform::Compose(parts) => parts.iter().for_each(|p| flatten_into(p, out)),
        Transform::Identity => {}
        other => out.push(other.clone()),
    }
}

fn map_vector(p: &Point, f: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<Point> {
    match p {
        Point::Vector(v) => Ok(Point::Vector(f(v)?)),
        Point::Labeled { label, v } => Ok(Point::Labeled { label: *label, v: f(v)? }),
        _ => Err(Error::SpaceMismatch("Euclidean transform applied to a discrete point".into())),
    }
}

fn rotate(v: &[f64], i: usize, j: usize, angle: f64) -> Result<Vec<f64>> {
    if i >= v.len() || j >= v.len() || i == j {
        return Err(Error::Dimension { expected: i.max(j) + 1, found: v.len() });
    }
    let (s, c) = angle.sin_cos();
    let mut out = v.to_vec();
    out[i] = c * v[i] - s * v[j];
    out[j] = s * v[i] + c * v[j];
    Ok(out)
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &x) in perm.iter().enumerate() {
        if x < inv.len() {
            inv[x] = i;
        }
    }
    inv
}

fn check_permutation(perm: &[usize], size: usize) -> Result<()> {
    let mut seen = vec![false; size];
    if perm.len() != size {
        return Err(Error::Config(format!("permutation of length {} on {size} symbols", perm.len())));
    }
    for &x in perm {
        if x >= size || std::mem::replace(&mut seen[x], true) {
            return Err(Error::Config(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn scalar(slope: f64, offset: f64) -> Transform {
        Transform::Affine(Affine::scalar(slope, offset).unwrap())
    }

    #[test]
    fn rotation_quarter_turn() {
        let space = Space::Euclidean { dim: 2 };
        let out = Transform::rotation(0, 1, PI / 2.0).apply(&space, &Point::Vector(vec![1.0, 0.0])).unwrap();
        assert!(point_distance(&out, &Point::Vector(vec![0.0, 1.0])) < 1e-12);
    }

    #[test]
    fn copy_shift_moves_label() {
        let space = Space::LabeledEuclidean { dim: 2, window: 8 };
        let p = Point::Labeled { label: 3, v: vec![0.5, 0.5] };
        let out = Transform::CopyShift(-1).apply(&space, &p).unwrap();
        assert_eq!(out, Point::Labeled { label: 2, v: vec![0.5, 0.5] });
        let edge = Point::Labeled { label: -8, v: vec![0.0, 0.0] };
        assert!(matches!(Transform::CopyShift(-1).apply(&space, &edge), Err(Error::OutOfWindow(_))));
    }

    #[test]
    fn tree_portrait_acts_below_anchor() {
        let space = Space::Tree { alphabet: 2, depth: 4 };
        let t = Transform::TreePortrait { anchor: vec![1], perm: vec![1, 0] };
        assert_eq!(t.apply(&space, &Point::Vertex(vec![1, 0])).unwrap(), Point::Vertex(vec![1, 1]));
        assert_eq!(t.apply(&space, &Point::Vertex(vec![0, 0])).unwrap(), Point::Vertex(vec![0, 0]));
        assert_eq!(t.apply(&space, &Point::Vertex(vec![1])).unwrap(), Point::Vertex(vec![1]));
    }

    #[test]
    fn tree_portraits_preserve_adjacency_and_length() {
        let space = Space::Tree { alphabet: 3, depth: 4 };
        let t = Transform::TreePortrait { anchor: vec![2, 0], perm: vec![2, 0, 1] }
            .compose(&Transform::TreePortrait { anchor: vec![], perm: vec![1, 2, 0] });
        for v in space.tree_vertices().unwrap() {
            let Point::Vertex(image) = t.apply(&space, &Point::Vertex(v.clone())).unwrap() else {
                unreachable!()
            };
            assert_eq!(image.len(), v.len());
            if let Some((_, parent)) = v.split_last() {
                let Point::Vertex(pimg) = t.apply(&space, &Point::Vertex(parent.to_vec())).unwrap() else {
                    unreachable!()
                };
                assert!(image.starts_with(&pimg));
            }
        }
    }

    #[test]
    fn affine_composition_and_inverse() {
        let space = Space::Euclidean { dim: 1 };
        let pts = space.test_points(16, 1);
        let f = scalar(1.0, 1.0);
        let g = scalar(2.0, 0.0);
        assert!(f.compose(&g).approx_equal(&scalar(2.0, 1.0), &space, &pts, 1e-12).unwrap());
        let fused = f.compose(&g).simplify();
        assert_eq!(fused, scalar(2.0, 1.0));
        // x ↦ 2x+2 inverts to x ↦ x/2 − 1 exactly
        assert_eq!(scalar(2.0, 2.0).invert(), scalar(0.5, -1.0));
        assert!(!f.approx_equal(&Transform::Identity, &space, &pts, 1e-9).unwrap());
    }

    #[test]
    fn rotations_compose_by_angle() {
        let space = Space::Euclidean { dim: 3 };
        let pts = space.test_points(20, 2);
        let t = Transform::rotation(0, 2, 0.4).compose(&Transform::rotation(0, 2, 1.1));
        assert!(t.approx_equal(&Transform::rotation(0, 2, 1.5), &space, &pts, 1e-10).unwrap());
        let full = Transform::rotation(0, 1, 2.0 * PI);
        assert!(full.approx_equal(&Transform::Identity, &space, &pts, 1e-9).unwrap());
    }

    #[test]
    fn swaps_and_permutations_invert() {
        let space = Space::Sequence { alphabet: 3, length: 6 };
        let pts = space.test_points(32, 3);
        let swap = Transform::PositionSwap(4);
        assert_eq!(swap.invert(), swap);
        let perm = Transform::SymbolPermutation { perm: vec![1, 2, 0], position: Some(0) };
        let round = perm.compose(&perm.invert());
        assert!(round.approx_equal(&Transform::Identity, &space, &pts, 0.0).unwrap());
        let lazy = Transform::Inverse(Box::new(perm.clone())).compose(&perm);
        assert!(lazy.approx_equal(&Transform::Identity, &space, &pts, 0.0).unwrap());
    }

    #[test]
    fn empty_test_points_is_an_error() {
        let space = Space::Euclidean { dim: 1 };
        assert!(matches!(
            Transform::Identity.approx_equal(&Transform::Identity, &space, &[], 1e-9),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn singular_affine_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(Affine::linear(a).is_err());
        assert!(Affine::scalar(0.0, 1.0).is_err());
    }

    #[test]
    fn json_shapes() {
        let t: Transform = serde_json::from_str(r#"{"rot":{"i":0,"j":1,"angle":1.5707963267948966}}"#).unwrap();
        assert_eq!(t, Transform::rotation(0, 1, std::f64::consts::FRAC_PI_2));
        let a: Transform = serde_json::from_str(r#"{"affine":{"A":[[2]],"b":[0]}}"#).unwrap();
        assert_eq!(a, scalar(2.0, 0.0));
        assert!(serde_json::from_str::<Transform>(r#"{"affine":{"A":[[0]],"b":[0]}}"#).is_err());
        let id: Transform = serde_json::from_str(r#""identity""#).unwrap();
        assert_eq!(id, Transform::Identity);
    }

    #[test]
    fn gated_rotation_and_shift_commute_on_disjoint_support() {
        let space = Space::LabeledEuclidean { dim: 2, window: 16 };
        let pts = space.test_points(32, 5);
        let shift = Transform::CopyShift(2);
        let gate = Transform::gated(LabelGate::Even, Transform::rotation(0, 1, 0.7));
        let ab = shift.compose(&gate);
        let ba = gate.compose(&shift);
        assert!(ab.approx_equal(&ba, &space, &pts, 1e-12).unwrap());
    }
}
