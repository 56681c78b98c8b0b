use std::f64::consts::TAU;

use cotrans::cotranslation::{check_relation_preservation, default_triples, verify_cotranslation, GeneratorMap};
use cotrans::gallery::{self, dinf_f_power, dinf_zeta, Example, ExampleParams};
use cotrans::transform::LabelGate;
use cotrans::{Cotranslation, Point, Presentation, Space, Transform, Word};

fn nf(p: &Presentation, s: &str) -> Word {
    p.normal_form(&p.parse_word(s).unwrap()).unwrap()
}

/// Slope and offset of `x ↦ A(η)x` for the C₃ table, composed by hand.
fn c3_oracle(g: usize, h: usize) -> (f64, f64) {
    let table = [(1.0, 1.0), (2.0, 0.0), (0.5, -1.0)];
    let (mut slope, mut offset) = (1.0, 0.0);
    for step in 0..h {
        let (s, o) = table[(g + step) % 3];
        slope *= s;
        offset = s * offset + o;
    }
    (slope, offset)
}

#[test]
fn c3_table_is_exact() {
    let z = gallery::c3_affine().unwrap();
    let p = z.presentation().clone();
    let names = ["e", "a", "a^2"];
    for (gi, g) in names.iter().enumerate() {
        for (hi, h) in names.iter().enumerate() {
            let t = z.evaluate(&nf(&p, g), &nf(&p, h)).unwrap().simplify();
            let a = t.as_affine(1).unwrap();
            let (slope, offset) = c3_oracle(gi, hi);
            assert_eq!((a.matrix()[(0, 0)], a.offset()[0]), (slope, offset), "Z({g}, {h})");
        }
    }
    let a2 = nf(&p, "a^2");
    let x = Point::Vector(vec![3.0]);
    assert_eq!(z.apply(&Word::identity(), &a2, &x).unwrap(), Point::Vector(vec![8.0]));
    assert_eq!(z.apply(&nf(&p, "a"), &a2, &x).unwrap(), Point::Vector(vec![2.0]));
    assert_eq!(z.apply(&a2, &a2, &x).unwrap(), Point::Vector(vec![1.5]));
}

#[test]
fn dinf_worked_compositions() {
    let z = gallery::dinf_translation_rotation().unwrap();
    let p = z.presentation().clone();
    let rot = |a: f64| Transform::rotation(0, 1, a);
    let cases = [
        ("bab", "ab", Transform::compose_all([dinf_f_power(1), rot(dinf_zeta(2))])),
        ("abab", "ab", Transform::compose_all([dinf_f_power(-5), rot(-dinf_zeta(4))])),
        (
            "ab",
            "ababa",
            Transform::compose_all([dinf_f_power(-2), rot(dinf_zeta(0) - dinf_zeta(1)), dinf_f_power(1)]),
        ),
    ];
    for (g, h, expected) in cases {
        let got = z.evaluate(&nf(&p, g), &nf(&p, h)).unwrap();
        let d = z.distance(&got, &expected).unwrap();
        assert!(d <= 1e-10, "Z({g}, {h}) off by {d}");
    }
}

#[test]
fn every_example_passes_the_suites() {
    for example in Example::ALL {
        let z = gallery::build_example(example, &ExampleParams::default()).unwrap();
        let p = z.presentation();
        let triples = default_triples(p, 3, 200_000, 7);
        let report = verify_cotranslation(&z, &triples, 1e-9);
        assert!(report.passed(), "{example}:\n{}", report.render());
        let bases = p.sample_elements(3);
        let rel = check_relation_preservation(&z, &bases, 1e-9);
        assert!(rel.passed(), "{example}:\n{}", rel.render());
    }
}

fn d6_with(table_r: [(&str, Transform); 6]) -> Cotranslation {
    let d6 = Presentation::dihedral(3).unwrap();
    let a_r = GeneratorMap::table(&d6, &table_r).unwrap();
    let a_s = GeneratorMap::table(
        &d6,
        &[
            ("e", Transform::CopyShift(-1)),
            ("r", Transform::CopyShift(-1)),
            ("r^2", Transform::CopyShift(-1)),
            ("s", Transform::CopyShift(1)),
            ("sr", Transform::CopyShift(1)),
            ("sr^2", Transform::CopyShift(1)),
        ],
    )
    .unwrap();
    Cotranslation::new(d6, Space::LabeledEuclidean { dim: 2, window: 32 }, vec![a_r, a_s]).unwrap()
}

#[test]
fn d6_table_with_shifted_indexing_breaks_a_relation() {
    let (al, be, ga) = (0.7, 1.9, TAU - 2.6);
    let even = |z: f64| Transform::gated(LabelGate::Even, Transform::rotation(0, 1, z));
    let odd = |z: f64| Transform::gated(LabelGate::Odd, Transform::rotation(0, 1, z));
    let literal = d6_with([
        ("e", even(al)),
        ("r", even(be)),
        ("r^2", even(ga)),
        ("s", odd(-ga)),
        ("sr", odd(-be)),
        ("sr^2", odd(-al)),
    ]);
    let bases = literal.presentation().elements().unwrap();
    let report = check_relation_preservation(&literal, &bases, 1e-9);
    assert!(!report.passed());
    let failing: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    assert!(failing.iter().all(|n| n.contains('s')), "{failing:?}");

    let fixed = gallery::d6_labeled_copies(&ExampleParams::default()).unwrap();
    assert!(check_relation_preservation(&fixed, &bases, 1e-9).passed());
}

#[test]
fn c2c3_cycle_of_permutations_is_trivial() {
    let z = gallery::c2c3_prodiscrete(&ExampleParams::default()).unwrap();
    let p = z.presentation().clone();
    let b = nf(&p, "b");
    for eta in p.ball(3) {
        let t = z.evaluate(&eta, &nf(&p, "b^3")).unwrap();
        let d = z.distance(&t, &Transform::Identity).unwrap();
        assert_eq!(d, 0.0, "η = {}", p.format_word(&eta));
    }
    let x = Point::Sequence((0..16).map(|i| i % 3).collect());
    let moved = z.apply(&Word::identity(), &b, &x).unwrap();
    let Point::Sequence(s) = moved else { panic!() };
    assert_eq!(s[0], 1);
}

fn adjacent(u: &[usize], v: &[usize]) -> bool {
    (u.len() + 1 == v.len() && v.starts_with(u)) || (v.len() + 1 == u.len() && u.starts_with(v))
}

#[test]
fn tree_examples_preserve_adjacency_and_root() {
    for example in [Example::F2BinaryTree, Example::FnTree] {
        let params = ExampleParams { depth: Some(4), ..Default::default() };
        let z = gallery::build_example(example, &params).unwrap();
        let vertices = z.space().tree_vertices().unwrap();
        let p = z.presentation().clone();
        let ball = p.ball(2);
        for g in &ball {
            for h in &ball {
                let t = z.evaluate(g, h).unwrap();
                let image = |v: &Vec<usize>| match t.apply(z.space(), &Point::Vertex(v.clone())).unwrap() {
                    Point::Vertex(w) => w,
                    other => panic!("{other:?}"),
                };
                assert!(image(&Vec::new()).is_empty());
                for v in vertices.iter().filter(|v| !v.is_empty()) {
                    let parent = v[..v.len() - 1].to_vec();
                    assert!(adjacent(&image(v), &image(&parent)), "{example} at {v:?}");
                }
            }
        }
    }
}

#[test]
fn dinf_symmetry_is_an_action_only_for_constant_data() {
    let params = ExampleParams { lines: Some(vec![0.4]), zetas: Some(vec![std::f64::consts::PI]), ..Default::default() };
    let z = gallery::dinf_symmetry_rotation(&params).unwrap();
    let p = z.presentation().clone();
    for g in p.ball(2) {
        for h in p.ball(2) {
            let a = z.evaluate(&g, &h).unwrap();
            let b = z.evaluate(&Word::identity(), &h).unwrap();
            assert!(z.distance(&a, &b).unwrap() < 1e-12);
        }
    }
    let z = gallery::dinf_symmetry_rotation(&ExampleParams::default()).unwrap();
    let (a, b) = (nf(&p, "a"), nf(&p, "b"));
    let d = z.distance(&z.evaluate(&b, &a).unwrap(), &z.evaluate(&Word::identity(), &a).unwrap()).unwrap();
    assert!(d > 1e-3);
}
