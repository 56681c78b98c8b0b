//! Cotranslations `Z: G × G → A_X` given by one generator map per
//! generator, `A_i(η) = Z(η, ξ_i)`.
//!
//! `Z(g, h)` is evaluated by spelling the normal form of `h` from its
//! rightmost letter, starting at base `g`. A positive letter `ξ_i` seen at
//! base `η` contributes `A_i(η)` and moves the base to `ξ_i·η`; an inverse
//! letter contributes `A_i(ξ_i⁻¹·η)⁻¹` and moves the base to `ξ_i⁻¹·η`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{Letter, Presentation, Side, Word};
use crate::report::{Check, Report};
use crate::transform::{Point, Space, Transform};

/// Seed of the default test points.
pub const DEFAULT_POINT_SEED: u64 = 0x5eed;
/// Default number of test points.
pub const DEFAULT_POINTS: usize = 64;
/// Default cap on sampled triples for infinite groups.
pub const DEFAULT_TRIPLE_CAP: usize = 200_000;

const CACHE_LIMIT: usize = 1 << 17;

pub type Rule = Arc<dyn Fn(&Word) -> Result<Transform> + Send + Sync>;

/// One generator map `A_i: G → A_X`.
#[derive(Clone)]
pub enum GeneratorMap {
    /// Values keyed by normal form.
    Table(HashMap<Word, Transform>),
    /// Values computed from the normal form of the argument.
    Rule(Rule),
}

impl GeneratorMap {
    pub fn rule(f: impl Fn(&Word) -> Result<Transform> + Send + Sync + 'static) -> Self {
        GeneratorMap::Rule(Arc::new(f))
    }

    pub fn constant(t: Transform) -> Self {
        GeneratorMap::rule(move |_| Ok(t.clone()))
    }

    /// A table from `(word, value)` pairs written in the presentation's syntax.
    pub fn table(p: &Presentation, entries: &[(&str, Transform)]) -> Result<Self> {
        let mut map = HashMap::new();
        for (w, t) in entries {
            map.insert(p.normal_form(&p.parse_word(w)?)?, t.clone());
        }
        Ok(GeneratorMap::Table(map))
    }

    fn value(&self, p: &Presentation, eta: &Word) -> Result<Transform> {
        match self {
            GeneratorMap::Table(map) => map
                .get(eta)
                .cloned()
                .ok_or_else(|| Error::IncompleteDefinition(p.format_word(eta))),
            GeneratorMap::Rule(f) => f(eta),
        }
    }
}

impl std::fmt::Debug for GeneratorMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeneratorMap::Table(map) => write!(f, "Table({} entries)", map.len()),
            GeneratorMap::Rule(_) => write!(f, "Rule"),
        }
    }
}

pub struct Cotranslation {
    presentation: Presentation,
    space: Space,
    maps: Vec<GeneratorMap>,
    points: Vec<Point>,
    letter_forms: Vec<[Word; 2]>,
    cache: Mutex<HashMap<(Word, Word), Transform>>,
}

impl Clone for Cotranslation {
    fn clone(&self) -> Self {
        Cotranslation {
            presentation: self.presentation.clone(),
            space: self.space.clone(),
            maps: self.maps.clone(),
            points: self.points.clone(),
            letter_forms: self.letter_forms.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for Cotranslation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Cotranslation")
            .field("presentation", &self.presentation.to_string())
            .field("space", &self.space)
            .field("maps", &self.maps)
            .finish()
    }
}

impl Cotranslation {
    pub fn new(presentation: Presentation, space: Space, maps: Vec<GeneratorMap>) -> Result<Self> {
        space.validate()?;
        if maps.len() != presentation.num_generators() {
            return Err(Error::Dimension { expected: presentation.num_generators(), found: maps.len() });
        }
        let letter_forms = (0..presentation.num_generators())
            .map(|g| {
                Ok([
                    presentation.normal_form(&Word::from_letters(vec![Letter::new(g)]))?,
                    presentation.normal_form(&Word::from_letters(vec![Letter::inv(g)]))?,
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        let points = space.test_points(DEFAULT_POINTS, DEFAULT_POINT_SEED);
        Ok(Cotranslation { presentation, space, maps, points, letter_forms, cache: Mutex::new(HashMap::new()) })
    }

    /// The cotranslation with every value the identity.
    pub fn identity(presentation: Presentation, space: Space) -> Result<Self> {
        let maps = vec![GeneratorMap::constant(Transform::Identity); presentation.num_generators()];
        Cotranslation::new(presentation, space, maps)
    }

    /// Replace the test points used for extensional comparisons.
    pub fn with_test_points(mut self, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("no test points".into()));
        }
        for p in &points {
            self.space.check_point(p)?;
        }
        self.points = points;
        Ok(self)
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

    pub fn maps(&self) -> &[GeneratorMap] {
        &self.maps
    }

    /// `A_i(η)`.
    pub fn generator_value(&self, gen: usize, eta: &Word) -> Result<Transform> {
        let map = self.maps.get(gen).ok_or_else(|| {
            Error::MalformedWord(format!("generator index {gen} out of range"))
        })?;
        map.value(&self.presentation, eta)
    }

    /// `Z(g, h)`, simplified.
    pub fn evaluate(&self, g: &Word, h: &Word) -> Result<Transform> {
        let g = self.presentation.normal_form(g)?;
        let h = self.presentation.normal_form(h)?;
        let key = (g, h);
        if let Some(t) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(t.clone());
        }
        let t = self.evaluate_along(&key.0, key.1.letters())?;
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, t.clone());
        Ok(t)
    }

    /// Evaluate along an arbitrary spelling of the second argument, read
    /// from its rightmost letter.
    pub fn evaluate_along(&self, g: &Word, letters: &[Letter]) -> Result<Transform> {
        let p = &self.presentation;
        p.check_word(&Word::from_letters(letters.to_vec()))?;
        let mut eta = p.normal_form(g)?;
        let mut parts = Vec::with_capacity(letters.len());
        for &l in letters.iter().rev() {
            let next = p.multiply(&self.letter_forms[l.gen][usize::from(l.inverse)], &eta);
            let t = if l.inverse {
                self.generator_value(l.gen, &next)?.invert()
            } else {
                self.generator_value(l.gen, &eta)?
            };
            parts.push(t);
            eta = next;
        }
        parts.reverse();
        Ok(Transform::compose_all(parts).simplify())
    }

    pub fn apply(&self, g: &Word, h: &Word, x: &Point) -> Result<Point> {
        self.evaluate(g, h)?.apply(&self.space, x)
    }

    /// Largest image distance over the test points.
    pub fn distance(&self, a: &Transform, b: &Transform) -> Result<f64> {
        a.distance(b, &self.space, &self.points)
    }

    fn show(&self, w: &Word) -> String {
        self.presentation.format_word(w)
    }
}

/// Triples for law checks: all of `G³` for finite groups of order at most
/// 64, otherwise `ball(radius)³`, subsampled with the given seed when it
/// exceeds `cap`.
pub fn default_triples(p: &Presentation, radius: usize, cap: usize, seed: u64) -> Vec<(Word, Word, Word)> {
    let elems = match p.order() {
        Some(n) if n <= 64 => p.elements().unwrap_or_default(),
        _ => p.ball(radius),
    };
    let n = elems.len();
    let total = n.saturating_mul(n).saturating_mul(n);
    if total <= cap {
        let mut out = Vec::with_capacity(total);
        for g in &elems {
            for h in &elems {
                for k in &elems {
                    out.push((g.clone(), h.clone(), k.clone()));
                }
            }
        }
        out
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..cap)
            .map(|_| {
                let pick = |rng: &mut ChaCha8Rng| elems[rng.random_range(0..n)].clone();
                (pick(&mut rng), pick(&mut rng), pick(&mut rng))
            })
            .collect()
    }
}

fn residual_of(z: &Cotranslation, a: Result<Transform>, b: Result<Transform>) -> std::result::Result<f64, String> {
    let a = a.map_err(|e| e.to_string())?;
    let b = b.map_err(|e| e.to_string())?;
    let d = z.distance(&a, &b).map_err(|e| e.to_string())?;
    Ok(if z.space.is_discrete() && d > 0.0 { 1.0 } else { d })
}

fn record(check: &mut Check, outcome: std::result::Result<f64, String>, tol: f64, witness: impl FnOnce() -> String) {
    match outcome {
        Ok(r) => check.record(r, tol, witness),
        Err(e) => check.record_error(format!("{}: {e}", witness())),
    }
}

/// Check the cocycle law `Z(g,kh) = Z(hg,k)∘Z(g,h)`, the unit law
/// `Z(g,e) = Id` and the involution law `Z(hg,h⁻¹)∘Z(g,h) = Id` over the
/// triples `(g, h, k)`.
pub fn verify_cotranslation(z: &Cotranslation, triples: &[(Word, Word, Word)], tol: f64) -> Report {
    let p = &z.presentation;
    let e = Word::identity();
    let cocycle: Vec<_> = triples
        .par_iter()
        .map(|(g, h, k)| {
            let kh = p.multiply(k, h);
            let hg = p.multiply(h, g);
            let rhs = z.evaluate(&hg, k).and_then(|a| Ok(a.compose(&z.evaluate(g, h)?)));
            residual_of(z, z.evaluate(g, &kh), rhs)
        })
        .collect();
    let mut check = Check::new("cocycle");
    for ((g, h, k), outcome) in triples.iter().zip(cocycle) {
        record(&mut check, outcome, tol, || {
            format!("g={}, h={}, k={}", z.show(g), z.show(h), z.show(k))
        });
    }
    let mut report = Report::new();
    report.push(check);

    let mut pairs: Vec<(Word, Word)> = triples.iter().map(|(g, h, _)| (g.clone(), h.clone())).collect();
    pairs.sort();
    pairs.dedup();

    let mut unit = Check::new("unit");
    let mut bases: Vec<&Word> = pairs.iter().map(|(g, _)| g).collect();
    bases.dedup();
    for g in bases {
        let outcome = residual_of(z, z.evaluate(g, &e), Ok(Transform::Identity));
        record(&mut unit, outcome, tol, || format!("g={}", z.show(g)));
    }
    report.push(unit);

    let involution: Vec<_> = pairs
        .par_iter()
        .map(|(g, h)| {
            let hg = p.multiply(h, g);
            let back = z.evaluate(&hg, &p.invert(h)).and_then(|a| Ok(a.compose(&z.evaluate(g, h)?)));
            residual_of(z, back, Ok(Transform::Identity))
        })
        .collect();
    let mut check = Check::new("involution");
    for ((g, h), outcome) in pairs.iter().zip(involution) {
        record(&mut check, outcome, tol, || format!("g={}, h={}", z.show(g), z.show(h)));
    }
    report.push(check);
    report
}

/// For every relator `p` and base `η`, the ordered product of generator
/// values along `p` starting at `η` must be the identity.
pub fn check_relation_preservation(z: &Cotranslation, basepoints: &[Word], tol: f64) -> Report {
    let p = &z.presentation;
    let mut report = Report::new();
    for rel in p.relators() {
        let name = format!("relator {}", p.format_word(rel));
        let results: Vec<_> = basepoints
            .par_iter()
            .map(|eta| residual_of(z, z.evaluate_along(eta, rel.letters()), Ok(Transform::Identity)))
            .collect();
        let mut check = Check::new(name);
        for (eta, outcome) in basepoints.iter().zip(results) {
            record(&mut check, outcome, tol, || {
                format!("relator {} at base {}", p.format_word(rel), z.show(eta))
            });
        }
        report.push(check);
    }
    report
}

fn reject(reason: &str, witness: String) -> Error {
    Error::Rejected { reason: reason.into(), witness }
}

fn check_morphism(
    p: &Presentation,
    space: &Space,
    points: &[Point],
    gamma: &(dyn Fn(&Word) -> Result<Transform> + Send + Sync),
    sample: &[Word],
    tol: f64,
) -> Result<()> {
    let close = |a: &Transform, b: &Transform| -> Result<bool> { a.approx_equal(b, space, points, tol) };
    if !close(&gamma(&Word::identity())?, &Transform::Identity)? {
        return Err(reject("γ(e) is not the identity", "e".into()));
    }
    for u in sample {
        for v in sample {
            let uv = p.multiply(u, v);
            if !close(&gamma(&uv)?, &gamma(u)?.compose(&gamma(v)?))? {
                return Err(reject(
                    "γ is not a group morphism",
                    format!("γ({}) ≠ γ({})∘γ({})", p.format_word(&uv), p.format_word(u), p.format_word(v)),
                ));
            }
        }
    }
    Ok(())
}

/// `Z(g, h) = γ(h)` for a group morphism `γ`, checked on `ball(radius)²`.
pub fn from_group_morphism(
    p: Presentation,
    space: Space,
    gamma: impl Fn(&Word) -> Result<Transform> + Send + Sync + 'static,
    radius: usize,
    tol: f64,
) -> Result<Cotranslation> {
    let points = space.test_points(DEFAULT_POINTS, DEFAULT_POINT_SEED);
    check_morphism(&p, &space, &points, &gamma, &p.sample_elements(radius), tol)?;
    let maps = (0..p.num_generators())
        .map(|i| Ok(GeneratorMap::constant(gamma(&Word::generator(i))?)))
        .collect::<Result<Vec<_>>>()?;
    Cotranslation::new(p, space, maps)
}

/// `W(g, h) = Z(g, h)∘γ(h)` for a morphism `γ` whose values commute with
/// every value of `Z`, checked on `ball(radius)`.
pub fn scalar_twist(
    z: &Cotranslation,
    gamma: impl Fn(&Word) -> Result<Transform> + Send + Sync + 'static,
    radius: usize,
    tol: f64,
) -> Result<Cotranslation> {
    let p = &z.presentation;
    let sample = p.sample_elements(radius);
    check_morphism(p, &z.space, &z.points, &gamma, &sample, tol)?;
    for k in &sample {
        let gk = gamma(k)?;
        for g in &sample {
            for h in &sample {
                let zgh = z.evaluate(g, h)?;
                if z.distance(&gk.compose(&zgh), &zgh.compose(&gk))? > tol {
                    return Err(reject(
                        "γ does not commute with Z",
                        format!("γ({}) vs Z({}, {})", z.show(k), z.show(g), z.show(h)),
                    ));
                }
            }
        }
    }
    let maps = (0..p.num_generators())
        .map(|i| {
            let twist = gamma(&Word::generator(i))?;
            let inner = z.maps[i].clone();
            let pres = p.clone();
            Ok(GeneratorMap::rule(move |eta| Ok(inner.value(&pres, eta)?.compose(&twist))))
        })
        .collect::<Result<Vec<_>>>()?;
    Cotranslation::new(p.clone(), z.space.clone(), maps)?.with_test_points(z.points.clone())
}

/// Cotranslation of `G ∗ H` with `Ã_s(w) = A_s(π_G(w))` and
/// `Ã_t(w) = A_t(π_H(w))`. Generator names must be disjoint.
pub fn free_product_lift(zg: &Cotranslation, zh: &Cotranslation) -> Result<Cotranslation> {
    if zg.space != zh.space {
        return Err(Error::SpaceMismatch(format!("{:?} vs {:?}", zg.space, zh.space)));
    }
    let product = Presentation::free_product(zg.presentation.clone(), zh.presentation.clone())?;
    let mut maps = Vec::new();
    for (side, z) in [(Side::Left, zg), (Side::Right, zh)] {
        for map in &z.maps {
            let map = map.clone();
            let factor = z.presentation.clone();
            let whole = product.clone();
            maps.push(GeneratorMap::rule(move |w| {
                map.value(&factor, &whole.project_free_factor(w, side)?)
            }));
        }
    }
    Cotranslation::new(product, zg.space.clone(), maps)?.with_test_points(zg.points.clone())
}

/// Pull a cotranslation of `G = ⟨S | R⟩` back to `H = ⟨S | R₀⟩` along the
/// canonical map `H → G`. `H` must use the same generator names in the
/// same order, and each relator of `H` must be trivial in `G`.
pub fn presentation_descent(z: &Cotranslation, target: Presentation) -> Result<Cotranslation> {
    let source = &z.presentation;
    if target == *source {
        return Ok(z.clone());
    }
    if target.generators() != source.generators() {
        return Err(Error::Unsupported(format!(
            "descent from {source} to {target}: generator names differ"
        )));
    }
    for rel in target.relators() {
        if !source.normal_form(rel)?.is_identity() {
            return Err(Error::Unsupported(format!(
                "descent from {source} to {target}: relator {} is not trivial in the source",
                target.format_word(rel)
            )));
        }
    }
    let maps = z
        .maps
        .iter()
        .map(|map| {
            let map = map.clone();
            let src = source.clone();
            GeneratorMap::rule(move |w| map.value(&src, &src.normal_form(w)?))
        })
        .collect();
    Cotranslation::new(target, z.space.clone(), maps)?.with_test_points(z.points.clone())
}
