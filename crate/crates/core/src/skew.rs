//! Skew-products: hulls of maps `ψ_g: G × X → X` permuted by an action
//! `σ`, and the correspondence with cotranslations.
//!
//! Hull members are indexed by group elements. The hull of a
//! cotranslation has `ψ_g(h, ·) = Z(g, h)` and `σ(h, ψ_g) = ψ_{hg}`.

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;

use crate::cotranslation::{Cotranslation, GeneratorMap};
use crate::error::{Error, Result};
use crate::group::{Presentation, Word};
use crate::report::{Check, Report};
use crate::transform::{Point, Space, Transform};

pub type Member = Arc<dyn Fn(&Word, &Word) -> Result<Transform> + Send + Sync>;
pub type Action = Arc<dyn Fn(&Word, &Word) -> Word + Send + Sync>;

#[derive(Clone)]
pub struct Hull {
    presentation: Presentation,
    space: Space,
    points: Vec<Point>,
    member: Member,
    action: Action,
    base: Word,
}

impl Hull {
    /// `member(g, h)` is `ψ_g(h, ·)` and `action(h, g)` is the index of
    /// `σ(h, ψ_g)`. `base` is the index the correspondence starts from.
    pub fn new(
        presentation: Presentation,
        space: Space,
        points: Vec<Point>,
        base: Word,
        member: impl Fn(&Word, &Word) -> Result<Transform> + Send + Sync + 'static,
        action: impl Fn(&Word, &Word) -> Word + Send + Sync + 'static,
    ) -> Self {
        Hull { presentation, space, points, member: Arc::new(member), action: Arc::new(action), base }
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn test_points(&self) -> &[Point] {
        &self.points
    }

    /// `ψ_g(h, ·)`.
    pub fn psi(&self, g: &Word, h: &Word) -> Result<Transform> {
        (self.member)(g, h)
    }

    /// Index of `σ(h, ψ_g)`.
    pub fn act(&self, h: &Word, g: &Word) -> Word {
        (self.action)(h, g)
    }

    pub fn apply(&self, g: &Word, h: &Word, x: &Point) -> Result<Point> {
        self.psi(g, h)?.apply(&self.space, x)
    }
}

/// The hull of a cotranslation with its translation action.
pub fn hull_from_cotranslation(z: &Cotranslation) -> Hull {
    let p = z.presentation().clone();
    let shared = Arc::new(z.clone());
    let act = p.clone();
    Hull::new(
        p,
        z.space().clone(),
        z.test_points().to_vec(),
        Word::identity(),
        move |g, h| shared.evaluate(g, h),
        move |h, g| act.multiply(h, g),
    )
}

/// A hull with one member, `ψ(h, ·) = γ(h)`, and the trivial action.
pub fn single_function_hull(
    presentation: Presentation,
    space: Space,
    gamma: impl Fn(&Word) -> Result<Transform> + Send + Sync + 'static,
) -> Hull {
    let points = space.test_points(crate::cotranslation::DEFAULT_POINTS, crate::cotranslation::DEFAULT_POINT_SEED);
    Hull::new(presentation, space, points, Word::identity(), move |_, h| gamma(h), |_, _| Word::identity())
}

fn distance(hull: &Hull, a: &Transform, b: &Transform) -> std::result::Result<f64, String> {
    let d = a.distance(b, &hull.space, &hull.points).map_err(|e| e.to_string())?;
    Ok(if hull.space.is_discrete() && d > 0.0 { 1.0 } else { d })
}

fn record(check: &mut Check, outcome: std::result::Result<f64, String>, tol: f64, witness: impl FnOnce() -> String) {
    match outcome {
        Ok(r) => check.record(r, tol, witness),
        Err(e) => check.record_error(format!("{}: {e}", witness())),
    }
}

/// Check admissibility (`ψ_j(e, ·) = id`, invertible slices), the left
/// action law for `σ`, and axiom `[σ(h, ψ_j)](g, ψ_j(h, x)) = ψ_j(gh, x)`
/// over triples `(j, g, h)`.
pub fn verify_skew_axiom(hull: &Hull, triples: &[(Word, Word, Word)], tol: f64) -> Report {
    let p = &hull.presentation;
    let e = Word::identity();
    let show = |w: &Word| p.format_word(w);
    let mut report = Report::new();

    let mut indices: Vec<&Word> = triples.iter().map(|(j, _, _)| j).collect();
    indices.sort();
    indices.dedup();
    let mut admissible = Check::new("admissibility");
    for j in &indices {
        let outcome = hull.psi(j, &e).map_err(|e| e.to_string()).and_then(|t| distance(hull, &t, &Transform::Identity));
        record(&mut admissible, outcome, tol, || format!("ψ_{}(e, ·)", show(j)));
    }
    report.push(admissible);

    let slices: Vec<_> = triples
        .par_iter()
        .map(|(j, _, h)| {
            hull.psi(j, h)
                .map_err(|e| e.to_string())
                .and_then(|t| distance(hull, &t.invert().compose(&t), &Transform::Identity))
        })
        .collect();
    let mut invertible = Check::new("invertibility");
    for ((j, _, h), outcome) in triples.iter().zip(slices) {
        record(&mut invertible, outcome, tol, || format!("ψ_{}({}, ·)", show(j), show(h)));
    }
    report.push(invertible);

    let mut action = Check::new("left action");
    for (j, g, h) in triples {
        let unit_ok = hull.act(&e, j) == *j;
        let nested = hull.act(g, &hull.act(h, j));
        let direct = hull.act(&p.multiply(g, h), j);
        let residual = if unit_ok && nested == direct { 0.0 } else { 1.0 };
        action.record(residual, 0.0, || format!("σ at j={}, g={}, h={}", show(j), show(g), show(h)));
    }
    report.push(action);

    let axiom: Vec<_> = triples
        .par_iter()
        .map(|(j, g, h)| {
            let lhs = hull.psi(&hull.act(h, j), g).and_then(|a| Ok(a.compose(&hull.psi(j, h)?)));
            let rhs = hull.psi(j, &p.multiply(g, h));
            match (lhs, rhs) {
                (Ok(a), Ok(b)) => distance(hull, &a, &b),
                (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
            }
        })
        .collect();
    let mut check = Check::new("skew axiom");
    for ((j, g, h), outcome) in triples.iter().zip(axiom) {
        record(&mut check, outcome, tol, || format!("j={}, g={}, h={}", show(j), show(g), show(h)));
    }
    report.push(check);
    report
}

/// The cotranslation `Z(g, h) = ψ_{σ(g, base)}(h, ·)` of a hull. The base
/// member must be admissible on the test points.
pub fn cotranslation_from_hull(hull: &Hull, tol: f64) -> Result<Cotranslation> {
    let p = hull.presentation.clone();
    let unit = hull.psi(&hull.base, &Word::identity())?;
    let d = unit.distance(&Transform::Identity, &hull.space, &hull.points)?;
    if d > tol {
        return Err(Error::Rejected {
            reason: "hull member is not admissible: ψ(e, ·) ≠ id".into(),
            witness: format!("ψ_{}(e, ·), residual {d:e}", p.format_word(&hull.base)),
        });
    }
    let maps = (0..p.num_generators())
        .map(|i| {
            let hull = hull.clone();
            let xi = Word::generator(i);
            GeneratorMap::rule(move |eta| hull.psi(&hull.act(eta, &hull.base), &xi))
        })
        .collect();
    Cotranslation::new(p, hull.space.clone(), maps)?.with_test_points(hull.points.clone())
}

/// Extensional comparison of two cotranslations on the given pairs.
pub fn compare_cotranslations(a: &Cotranslation, b: &Cotranslation, pairs: &[(Word, Word)], tol: f64) -> Report {
    let p = a.presentation();
    let results: Vec<_> = pairs
        .par_iter()
        .map(|(g, h)| match (a.evaluate(g, h), b.evaluate(g, h)) {
            (Ok(x), Ok(y)) => a
                .distance(&x, &y)
                .map(|d| if a.space().is_discrete() && d > 0.0 { 1.0 } else { d })
                .map_err(|e| e.to_string()),
            (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
        })
        .collect();
    let mut check = Check::new("round trip");
    for ((g, h), outcome) in pairs.iter().zip(results) {
        record(&mut check, outcome, tol, || format!("Z({}, {})", p.format_word(g), p.format_word(h)));
    }
    let mut report = Report::new();
    report.push(check);
    report
}

/// Pairs of distinct indices whose members agree on every `h` in `probe`.
/// These are stabilizer coincidences; they are reported, not quotiented.
pub fn stabilizer_coincidences(hull: &Hull, indices: &[Word], probe: &[Word], tol: f64) -> Result<Vec<(Word, Word)>> {
    let mut out = Vec::new();
    for (a, i) in indices.iter().enumerate() {
        for j in &indices[a + 1..] {
            let mut same = true;
            for h in probe {
                let d = hull.psi(i, h)?.distance(&hull.psi(j, h)?, &hull.space, &hull.points)?;
                if d > tol {
                    same = false;
                    break;
                }
            }
            if same {
                out.push((i.clone(), j.clone()));
            }
        }
    }
    Ok(out)
}

/// The group morphism `W(g)(h, x) = (gh, Z(h, g)(x))` on `G × X`,
/// restricted to a finite window of first coordinates.
pub struct Suspension<'a> {
    z: &'a Cotranslation,
    window: HashSet<Word>,
}

impl<'a> Suspension<'a> {
    pub fn new(z: &'a Cotranslation, window: &[Word]) -> Result<Self> {
        let window = window
            .iter()
            .map(|w| z.presentation().normal_form(w))
            .collect::<Result<HashSet<_>>>()?;
        Ok(Suspension { z, window })
    }

    pub fn apply(&self, g: &Word, point: &(Word, Point)) -> Result<(Word, Point)> {
        let p = self.z.presentation();
        let (h, x) = point;
        if !self.window.contains(h) {
            return Err(Error::OutOfWindow(format!("{} is outside the window", p.format_word(h))));
        }
        let gh = p.multiply(g, h);
        if !self.window.contains(&gh) {
            return Err(Error::OutOfWindow(format!("{} is outside the window", p.format_word(&gh))));
        }
        Ok((gh, self.z.apply(h, g, x)?))
    }
}

/// Check the projection condition `π_G(W(g)(h, x)) = gh`, `W(e) = id` and
/// the morphism law `W(g₂g₁) = W(g₂)∘W(g₁)` for all `g₁, g₂` in `elems`
/// and `h` in the window.
pub fn verify_suspension(z: &Cotranslation, window: &[Word], elems: &[Word], tol: f64) -> Result<Report> {
    let s = Suspension::new(z, window)?;
    let p = z.presentation();
    let e = Word::identity();
    let mut projection = Check::new("projection");
    let mut unit = Check::new("unit");
    let mut morphism = Check::new("morphism");
    for h in window {
        for x in z.test_points() {
            let start = (h.clone(), x.clone());
            match s.apply(&e, &start) {
                Ok((k, y)) => {
                    let r = if k == *h { crate::transform::point_distance(&y, x) } else { f64::INFINITY };
                    unit.record(r, tol, || format!("W(e) at h={}", p.format_word(h)));
                }
                Err(err) => unit.record_error(format!("W(e) at h={}: {err}", p.format_word(h))),
            }
            for g1 in elems {
                for g2 in elems {
                    let witness = || format!("g₂={}, g₁={}, h={}", p.format_word(g2), p.format_word(g1), p.format_word(h));
                    let direct = s.apply(&p.multiply(g2, g1), &start);
                    let stepped = s.apply(g1, &start).and_then(|mid| {
                        let exact = mid.0 == p.multiply(g1, h);
                        projection.record(if exact { 0.0 } else { 1.0 }, 0.0, witness);
                        s.apply(g2, &mid)
                    });
                    match (direct, stepped) {
                        (Ok(a), Ok(b)) => {
                            let r = if a.0 == b.0 { crate::transform::point_distance(&a.1, &b.1) } else { f64::INFINITY };
                            morphism.record(r, tol, witness);
                        }
                        (Err(err), _) | (_, Err(err)) => morphism.record_error(format!("{}: {err}", witness())),
                    }
                }
            }
        }
    }
    let mut report = Report::new();
    report.push(projection);
    report.push(unit);
    report.push(morphism);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn c3_hull_entry_and_suspension_value() {
        let z = gallery::c3_affine().unwrap();
        let p = z.presentation().clone();
        let hull = hull_from_cotranslation(&z);
        let a2 = p.parse_word("a^2").unwrap();
        let y = hull.apply(&Word::identity(), &p.normal_form(&a2).unwrap(), &Point::Vector(vec![3.0])).unwrap();
        assert_eq!(y, Point::Vector(vec![8.0]));
        let s = Suspension::new(&z, &p.elements().unwrap()).unwrap();
        let a = Word::generator(0);
        let (k, y) = s.apply(&a, &(Word::identity(), Point::Vector(vec![3.0]))).unwrap();
        assert_eq!(k, a);
        assert_eq!(y, Point::Vector(vec![4.0]));
    }

    #[test]
    fn trivial_hull_gives_trivial_cotranslation() {
        let c3 = Presentation::cyclic(3).unwrap();
        let hull = single_function_hull(c3.clone(), Space::Euclidean { dim: 2 }, |_| Ok(Transform::Identity));
        let z = cotranslation_from_hull(&hull, 1e-12).unwrap();
        for g in c3.elements().unwrap() {
            for h in c3.elements().unwrap() {
                assert_eq!(z.evaluate(&g, &h).unwrap(), Transform::Identity);
            }
        }
    }
}
