//! Ready-made cotranslations: cyclic, dihedral, infinite dihedral,
//! `C₂ ∗ C₃` and free-group examples on Euclidean spaces, labeled copies,
//! symbol sequences and rooted trees.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cotranslation::{Cotranslation, GeneratorMap, DEFAULT_POINTS, DEFAULT_POINT_SEED};
use crate::error::{Error, Result};
use crate::group::{Presentation, Word};
use crate::transform::{Affine, LabelGate, Point, Space, Transform};

/// Tolerance for angle-sum constraints such as `α + β + γ ∈ 2πℤ`.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example {
    C3Affine,
    CyclicMultirotational,
    CyclicDisjoint,
    D6LabeledCopies,
    DinfTranslationRotation,
    DinfSymmetryRotation,
    C2c3Prodiscrete,
    F2BinaryTree,
    FnTree,
}

impl Example {
    pub const ALL: [Example; 9] = [
        Example::C3Affine,
        Example::CyclicMultirotational,
        Example::CyclicDisjoint,
        Example::D6LabeledCopies,
        Example::DinfTranslationRotation,
        Example::DinfSymmetryRotation,
        Example::C2c3Prodiscrete,
        Example::F2BinaryTree,
        Example::FnTree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Example::C3Affine => "c3_affine",
            Example::CyclicMultirotational => "cyclic_multirotational",
            Example::CyclicDisjoint => "cyclic_disjoint",
            Example::D6LabeledCopies => "d6_labeled_copies",
            Example::DinfTranslationRotation => "dinf_translation_rotation",
            Example::DinfSymmetryRotation => "dinf_symmetry_rotation",
            Example::C2c3Prodiscrete => "c2c3_prodiscrete",
            Example::F2BinaryTree => "f2_binary_tree",
            Example::FnTree => "fn_tree",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Example::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown example {s:?}")))
    }
}

/// A set of rotation angles acting in one coordinate plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleSet {
    pub plane: [usize; 2],
    pub angles: Vec<f64>,
}

/// Optional parameters; each example reads the ones it needs and uses
/// defaults for the rest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleParams {
    /// Ambient dimension (`cyclic_multirotational`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Rotation sets (`cyclic_multirotational`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_sets: Option<Vec<AngleSet>>,
    /// One angle triple per copy (`cyclic_disjoint`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copies: Option<Vec<[f64; 3]>>,
    /// `α, β, γ` (`d6_labeled_copies`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<[f64; 3]>,
    /// Label window of labeled spaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    /// Line directions in radians, used cyclically (`dinf_symmetry_rotation`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lines: Option<Vec<f64>>,
    /// Rotation angles in `(0, π]`, used cyclically (`dinf_symmetry_rotation`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zetas: Option<Vec<f64>>,
    /// Sequence length (`c2c3_prodiscrete`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Tree depth (tree examples).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Free rank (`fn_tree`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// One permutation of the `2·rank` letters per generator (`fn_tree`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perms: Option<Vec<Vec<usize>>>,
}

fn rejected(reason: impl Into<String>, witness: impl Into<String>) -> Error {
    Error::Rejected { reason: reason.into(), witness: witness.into() }
}

fn in_2pi_z(sum: f64) -> bool {
    let k = (sum / TAU).round();
    (sum - k * TAU).abs() <= ANGLE_TOL
}

fn scalar(slope: f64, offset: f64) -> Transform {
    Transform::Affine(Affine::scalar(slope, offset).expect("nonzero slope"))
}

pub fn build_example(example: Example, params: &ExampleParams) -> Result<Cotranslation> {
    match example {
        Example::C3Affine => c3_affine(),
        Example::CyclicMultirotational => cyclic_multirotational(params),
        Example::CyclicDisjoint => cyclic_disjoint(params),
        Example::D6LabeledCopies => d6_labeled_copies(params),
        Example::DinfTranslationRotation => dinf_translation_rotation(),
        Example::DinfSymmetryRotation => dinf_symmetry_rotation(params),
        Example::C2c3Prodiscrete => c2c3_prodiscrete(params),
        Example::F2BinaryTree => f2_binary_tree(params),
        Example::FnTree => fn_tree(params),
    }
}

/// `C₃` on `ℝ` with `A(e) = x+1`, `A(a) = 2x`, `A(a²) = x/2 − 1`.
pub fn c3_affine() -> Result<Cotranslation> {
    let c3 = Presentation::cyclic(3)?;
    let f = scalar(1.0, 1.0);
    let g = scalar(2.0, 0.0);
    let third = f.invert().compose(&g.invert()).simplify();
    let map = GeneratorMap::table(&c3, &[("e", f), ("a", g), ("a^2", third)])?;
    Cotranslation::new(c3, Space::Euclidean { dim: 1 }, vec![map])
}

/// `C_n` on `ℝ^d` with `A` a bijection onto commuting rotations whose
/// angles in each plane sum to a multiple of `2π`.
pub fn cyclic_multirotational(params: &ExampleParams) -> Result<Cotranslation> {
    let dim = params.dim.unwrap_or(4);
    let sets = params.angle_sets.clone().unwrap_or_else(|| {
        vec![
            AngleSet { plane: [0, 1], angles: vec![1.0, 2.0, TAU - 3.0] },
            AngleSet { plane: [2, 3], angles: vec![0.5, TAU - 0.5] },
        ]
    });
    if sets.is_empty() {
        return Err(rejected("no angle sets", "[]"));
    }
    for (idx, set) in sets.iter().enumerate() {
        let [i, j] = set.plane;
        if !(i < j && j < dim) {
            return Err(rejected("plane axes must satisfy i < j < dim", format!("set {idx}: {:?}", set.plane)));
        }
        if set.angles.is_empty() {
            return Err(rejected("empty angle set", format!("set {idx}")));
        }
        let mut sorted = set.angles.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(rejected("angles within a set must be distinct", format!("set {idx}")));
        }
        let sum: f64 = set.angles.iter().sum();
        if !in_2pi_z(sum) {
            return Err(rejected("angle sum not in 2πℤ", format!("set {idx}: sum {sum}")));
        }
        for (jdx, other) in sets.iter().enumerate().take(idx) {
            let [k, l] = other.plane;
            let same = set.plane == other.plane;
            let disjoint = i != k && i != l && j != k && j != l;
            if !same && !disjoint {
                return Err(rejected("rotation planes must coincide or be disjoint", format!("sets {jdx} and {idx}")));
            }
        }
    }
    let rotations: Vec<Transform> = sets
        .iter()
        .flat_map(|s| s.angles.iter().map(move |&a| Transform::rotation(s.plane[0], s.plane[1], a)))
        .collect();
    let n = rotations.len();
    let cn = Presentation::cyclic(n)?;
    let entries: Vec<(String, Transform)> =
        rotations.into_iter().enumerate().map(|(k, t)| (format!("a^{k}"), t)).collect();
    let refs: Vec<(&str, Transform)> = entries.iter().map(|(w, t)| (w.as_str(), t.clone())).collect();
    let map = GeneratorMap::table(&cn, &refs)?;
    Cotranslation::new(cn, Space::Euclidean { dim }, vec![map])
}

/// `C_{3n}` on `n` labeled planes: `A(a^{3i+j})` rotates copy `i+1` by
/// the `j`-th angle of its triple and fixes the other copies.
pub fn cyclic_disjoint(params: &ExampleParams) -> Result<Cotranslation> {
    let copies = params.copies.clone().unwrap_or_else(|| vec![[1.0, 2.0, TAU - 3.0], [0.3, 0.4, -0.7]]);
    if copies.is_empty() {
        return Err(rejected("no copies", "[]"));
    }
    for (i, c) in copies.iter().enumerate() {
        if !in_2pi_z(c.iter().sum()) {
            return Err(rejected("angle sum not in 2πℤ", format!("copy {}", i + 1)));
        }
    }
    let window = params.window.unwrap_or(32).max(copies.len() as i64 + 1);
    let n = copies.len();
    let cn = Presentation::cyclic(3 * n)?;
    let mut entries = Vec::new();
    for (i, c) in copies.iter().enumerate() {
        for (j, &angle) in c.iter().enumerate() {
            let t = Transform::gated(LabelGate::Label(i as i64 + 1), Transform::rotation(0, 1, angle));
            entries.push((format!("a^{}", 3 * i + j), t));
        }
    }
    let refs: Vec<(&str, Transform)> = entries.iter().map(|(w, t)| (w.as_str(), t.clone())).collect();
    let map = GeneratorMap::table(&cn, &refs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_POINT_SEED);
    let points = (0..DEFAULT_POINTS)
        .map(|k| Point::Labeled {
            label: (k % (n + 2)) as i64,
            v: vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
        })
        .collect();
    Cotranslation::new(cn, Space::LabeledEuclidean { dim: 2, window }, vec![map])?.with_test_points(points)
}

/// `D₆ = ⟨r, s | r³, s², (sr)²⟩` on labeled planes. `A_r` rotates even
/// copies by `α, β, γ` on `e, r, r²` and odd copies by `−γ, −α, −β` on
/// `s, sr, sr²`; `A_s` shifts labels down on rotations and up on
/// reflections.
pub fn d6_labeled_copies(params: &ExampleParams) -> Result<Cotranslation> {
    let [alpha, beta, gamma] = params.angles.unwrap_or([0.7, 1.9, TAU - 2.6]);
    if !in_2pi_z(alpha + beta + gamma) {
        return Err(rejected("α + β + γ must lie in 2πℤ", format!("{}", alpha + beta + gamma)));
    }
    let window = params.window.unwrap_or(32);
    let d6 = Presentation::dihedral(3)?;
    let even = |z: f64| Transform::gated(LabelGate::Even, Transform::rotation(0, 1, z));
    let odd = |z: f64| Transform::gated(LabelGate::Odd, Transform::rotation(0, 1, z));
    let a_r = GeneratorMap::table(
        &d6,
        &[
            ("e", even(alpha)),
            ("r", even(beta)),
            ("r^2", even(gamma)),
            ("s", odd(-gamma)),
            ("sr", odd(-alpha)),
            ("sr^2", odd(-beta)),
        ],
    )?;
    let down = Transform::CopyShift(-1);
    let up = Transform::CopyShift(1);
    let a_s = GeneratorMap::table(
        &d6,
        &[
            ("e", down.clone()),
            ("r", down.clone()),
            ("r^2", down),
            ("s", up.clone()),
            ("sr", up.clone()),
            ("sr^2", up),
        ],
    )?;
    Cotranslation::new(d6, Space::LabeledEuclidean { dim: 2, window }, vec![a_r, a_s])
}

/// Generator maps of the infinite dihedral group `⟨a, b | a², b²⟩` built
/// from two sequences: `A_a(au) = g_{|u|}`, `A_a(u) = g_{|u|}⁻¹` when `u`
/// does not begin with `a`, and likewise for `b` with `h`.
pub fn dinf_from_sequences(
    g: impl Fn(usize) -> Transform + Send + Sync + 'static,
    h: impl Fn(usize) -> Transform + Send + Sync + 'static,
    space: Space,
) -> Result<Cotranslation> {
    let dinf = Presentation::infinite_dihedral();
    fn rule(gen: usize, seq: impl Fn(usize) -> Transform + Send + Sync + 'static) -> GeneratorMap {
        GeneratorMap::rule(move |w: &Word| {
            let letters = w.letters();
            Ok(match letters.first() {
                Some(l) if l.gen == gen => seq(letters.len() - 1),
                _ => seq(letters.len()).invert(),
            })
        })
    }
    Cotranslation::new(dinf, space, vec![rule(0, g), rule(1, h)])
}

/// `ζ_n = π / 2^{n+1}`.
pub fn dinf_zeta(n: usize) -> f64 {
    PI / 2f64.powi(n as i32 + 1)
}

/// The translation `f(x, y) = (x + 1, y)` raised to the power `n`.
pub fn dinf_f_power(n: i64) -> Transform {
    Transform::Affine(Affine::translation(vec![n as f64, 0.0]).expect("translations are invertible"))
}

/// `D∞` on `ℝ²` with `g_n = fⁿ` and `h_n = θ_{ζ_n}`.
pub fn dinf_translation_rotation() -> Result<Cotranslation> {
    dinf_from_sequences(
        |n| dinf_f_power(n as i64),
        |n| Transform::rotation(0, 1, dinf_zeta(n)),
        Space::Euclidean { dim: 2 },
    )
}

/// `D∞` on `ℝ²` with `g_n` the reflection across the line `L_n` and
/// `h_n = θ_{ζ_n}`, `0 < ζ_n ≤ π`. Both parameter lists repeat cyclically.
pub fn dinf_symmetry_rotation(params: &ExampleParams) -> Result<Cotranslation> {
    let lines = params.lines.clone().unwrap_or_else(|| vec![0.0, PI / 3.0, PI / 5.0, 1.0]);
    let zetas = params.zetas.clone().unwrap_or_else(|| vec![PI, PI / 2.0, 2.0, 0.3]);
    if lines.is_empty() || zetas.is_empty() {
        return Err(rejected("line and angle lists must be nonempty", ""));
    }
    if let Some((i, z)) = zetas.iter().enumerate().find(|(_, z)| !(**z > 0.0 && **z <= PI)) {
        return Err(rejected("need 0 < ζ_n ≤ π", format!("ζ_{i} = {z}")));
    }
    if let Some(l) = lines.iter().find(|l| !l.is_finite()) {
        return Err(rejected("line directions must be finite", format!("{l}")));
    }
    dinf_from_sequences(
        move |n| Transform::reflection(lines[n % lines.len()]),
        move |n| Transform::rotation(0, 1, zetas[n % zetas.len()]),
        Space::Euclidean { dim: 2 },
    )
}

/// `C₂ ∗ C₃ = ⟨a, b | a², b³⟩` on `3^ℕ₀` truncated to `length`
/// positions. `A_a(au) = τ_{|u|}`, `A_a(u) = τ_{|u|}⁻¹`, and
/// `A_b(b^j v) = Σ_j` permutes the symbol at position 0 by
/// `(0 1)`, `(1 2)` or `(0 1 2)`.
pub fn c2c3_prodiscrete(params: &ExampleParams) -> Result<Cotranslation> {
    let length = params.length.unwrap_or(16);
    let c2 = Presentation::cyclic(2)?;
    let c3 = Presentation::cyclic(3)?.with_generator_names(&["b"])?;
    let p = Presentation::free_product(c2, c3)?;
    let a_map = GeneratorMap::rule(|w: &Word| {
        let letters = w.letters();
        let n = match letters.first() {
            Some(l) if l.gen == 0 => letters.len() - 1,
            _ => letters.len(),
        };
        Ok(Transform::PositionSwap(n))
    });
    let sigma = [vec![1, 0, 2], vec![0, 2, 1], vec![1, 2, 0]];
    let b_map = GeneratorMap::rule(move |w: &Word| {
        let j = w.letters().iter().take_while(|l| l.gen == 1).count();
        Ok(Transform::SymbolPermutation { perm: sigma[j].clone(), position: Some(0) })
    });
    Cotranslation::new(p, Space::Sequence { alphabet: 3, length }, vec![a_map, b_map])
}

/// Test vertices below the given anchors, plus random vertices.
fn tree_points(anchors: &[Vec<usize>], alphabet: usize, depth: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_POINT_SEED);
    let mut points = vec![Point::Vertex(Vec::new())];
    for anchor in anchors.iter().filter(|a| a.len() < depth) {
        let extra = rng.random_range(1..=depth - anchor.len());
        let mut v = anchor.clone();
        v.extend((0..extra).map(|_| rng.random_range(0..alphabet)));
        points.push(Point::Vertex(v));
    }
    let space = Space::Tree { alphabet, depth };
    points.extend(space.test_points(DEFAULT_POINTS / 2, DEFAULT_POINT_SEED + 1));
    points
}

/// `F₂` on the binary tree: `A_a(w) = A_b(w) = σ̃_{(φ(w))}`, where `φ`
/// sends `a^±` to `1` and `b^±` to `0` and `σ` swaps the first letter.
pub fn f2_binary_tree(params: &ExampleParams) -> Result<Cotranslation> {
    let depth = params.depth.unwrap_or(6);
    let f2 = Presentation::free(2)?;
    let phi = |w: &Word| -> Vec<usize> { w.letters().iter().map(|l| usize::from(l.gen == 0)).collect() };
    let map = GeneratorMap::rule(move |w: &Word| Ok(Transform::TreePortrait { anchor: phi(w), perm: vec![1, 0] }));
    let anchors: Vec<Vec<usize>> = f2.ball(2).iter().map(phi).collect();
    let points = tree_points(&anchors, 2, depth);
    Cotranslation::new(f2, Space::Tree { alphabet: 2, depth }, vec![map.clone(), map])?.with_test_points(points)
}

/// Vertex of the `2n`-ary tree naming a reduced word: `a_i ↦ 2i`,
/// `a_i⁻¹ ↦ 2i + 1`.
pub fn free_word_vertex(w: &Word) -> Vec<usize> {
    w.letters().iter().map(|l| 2 * l.gen + usize::from(l.inverse)).collect()
}

/// `F_n` on the `2n`-ary tree: `A_i(w) = σ̃_i(w)` for permutations `σ_i`
/// of the letters.
pub fn fn_tree(params: &ExampleParams) -> Result<Cotranslation> {
    let rank = params.rank.unwrap_or(2);
    let depth = params.depth.unwrap_or(6);
    let fnp = Presentation::free(rank)?;
    let alphabet = 2 * rank;
    let perms = params
        .perms
        .clone()
        .unwrap_or_else(|| (0..rank).map(|i| (0..alphabet).map(|x| (x + i + 1) % alphabet).collect()).collect());
    if perms.len() != rank {
        return Err(rejected("need one permutation per generator", format!("{} for rank {rank}", perms.len())));
    }
    let space = Space::Tree { alphabet, depth };
    let maps = perms
        .iter()
        .enumerate()
        .map(|(i, perm)| {
            let probe = Transform::TreePortrait { anchor: Vec::new(), perm: perm.clone() };
            probe
                .validate(&space)
                .map_err(|e| rejected("not a permutation of the letters", format!("σ_{}: {e}", i + 1)))?;
            let perm = perm.clone();
            Ok(GeneratorMap::rule(move |w: &Word| {
                Ok(Transform::TreePortrait { anchor: free_word_vertex(w), perm: perm.clone() })
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let anchors: Vec<Vec<usize>> = fnp.ball(2).iter().map(free_word_vertex).collect();
    let points = tree_points(&anchors, alphabet, depth);
    Cotranslation::new(fnp, space, maps)?.with_test_points(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Example::ALL {
            assert_eq!(e.name().parse::<Example>().unwrap(), e);
        }
        assert!("nope".parse::<Example>().is_err());
    }

    #[test]
    fn constraint_violations_rejected() {
        let bad = ExampleParams { angles: Some([1.0, 1.0, 1.0]), ..Default::default() };
        assert!(matches!(d6_labeled_copies(&bad), Err(Error::Rejected { .. })));
        let bad = ExampleParams { zetas: Some(vec![0.0]), ..Default::default() };
        assert!(matches!(dinf_symmetry_rotation(&bad), Err(Error::Rejected { .. })));
        let bad = ExampleParams {
            angle_sets: Some(vec![AngleSet { plane: [0, 1], angles: vec![1.0, 2.0] }]),
            ..Default::default()
        };
        assert!(matches!(cyclic_multirotational(&bad), Err(Error::Rejected { .. })));
        let overlapping = ExampleParams {
            angle_sets: Some(vec![
                AngleSet { plane: [0, 1], angles: vec![1.0, TAU - 1.0] },
                AngleSet { plane: [1, 2], angles: vec![TAU] },
            ]),
            ..Default::default()
        };
        assert!(cyclic_multirotational(&overlapping).is_err());
        let bad = ExampleParams { perms: Some(vec![vec![0, 0, 1, 2], vec![0, 1, 2, 3]]), ..Default::default() };
        assert!(fn_tree(&bad).is_err());
    }

    #[test]
    fn every_example_builds() {
        for e in Example::ALL {
            build_example(e, &ExampleParams::default()).unwrap();
        }
    }
}
