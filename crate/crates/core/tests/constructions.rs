use cotrans::cotranslation::{
    check_relation_preservation, default_triples, free_product_lift, presentation_descent, scalar_twist,
    verify_cotranslation,
};
use cotrans::difference::{cotranslation_of_sequence, MatrixSequence};
use cotrans::gallery;
use cotrans::{Affine, Cotranslation, Error, GeneratorMap, Presentation, Space, Transform, Word};
use nalgebra::DMatrix;

fn scalar(slope: f64, offset: f64) -> Transform {
    Transform::Affine(Affine::scalar(slope, offset).unwrap())
}

#[test]
fn scalar_twist_rescales_a_difference_equation() {
    let s = MatrixSequence::random(2, 4, 50.0, 100);
    let z = cotranslation_of_sequence(&s).unwrap();
    let lambda = 0.3f64;
    let ints = z.presentation().clone();
    let twisted = scalar_twist(
        &z,
        move |h: &Word| {
            let n = h.exponent_sum(0) as f64;
            Ok(Transform::Affine(Affine::linear(DMatrix::identity(2, 2) * (-lambda * n).exp())?))
        },
        3,
        1e-9,
    )
    .unwrap();
    let scaled = MatrixSequence::new(2, 100, move |n| Ok(s.at(n)? * (-lambda).exp()));
    let expected = cotranslation_of_sequence(&scaled).unwrap();
    for n in -4..=4 {
        for m in -4..=4 {
            let (g, h) = (ints.integer_word(n), ints.integer_word(m));
            let d = twisted.distance(&twisted.evaluate(&g, &h).unwrap(), &expected.evaluate(&g, &h).unwrap()).unwrap();
            assert!(d < 1e-9, "n={n}, m={m}: {d}");
        }
    }
    assert!(verify_cotranslation(&twisted, &default_triples(&ints, 3, usize::MAX, 0), 1e-9).passed());
}

#[test]
fn non_commuting_twist_is_rejected() {
    let z = gallery::dinf_translation_rotation().unwrap();
    let flip = Transform::Affine(Affine::linear(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap());
    let err = scalar_twist(
        &z,
        move |h: &Word| Ok(if h.len() % 2 == 1 { flip.clone() } else { Transform::Identity }),
        2,
        1e-9,
    );
    assert!(matches!(err, Err(Error::Rejected { .. })));
}

#[test]
fn free_product_lift_of_c2_and_c3() {
    let c2 = Presentation::cyclic(2).unwrap();
    let zg = Cotranslation::new(
        c2.clone(),
        Space::Euclidean { dim: 1 },
        vec![GeneratorMap::table(&c2, &[("e", scalar(1.0, 1.0)), ("a", scalar(1.0, -1.0))]).unwrap()],
    )
    .unwrap();
    let c3 = Presentation::cyclic(3).unwrap().with_generator_names(&["b"]).unwrap();
    let zh = Cotranslation::new(
        c3.clone(),
        Space::Euclidean { dim: 1 },
        vec![GeneratorMap::table(&c3, &[("e", scalar(3.0, 0.0)), ("b", scalar(1.0, 2.0)), ("b^2", scalar(1.0 / 3.0, -2.0 / 3.0))]).unwrap()],
    )
    .unwrap();
    let lifted = free_product_lift(&zg, &zh).unwrap();
    let p = lifted.presentation().clone();
    assert!(verify_cotranslation(&lifted, &default_triples(&p, 3, usize::MAX, 0), 1e-9).passed());
    assert!(check_relation_preservation(&lifted, &p.ball(3), 1e-9).passed());
    let bab = p.normal_form(&p.parse_word("bab").unwrap()).unwrap();
    let lifted_b = lifted.evaluate(&bab, &p.parse_word("b").unwrap()).unwrap();
    let expected = zh.evaluate(&c3.normal_form(&c3.parse_word("b^2").unwrap()).unwrap(), &c3.parse_word("b").unwrap()).unwrap();
    assert!(lifted.distance(&lifted_b, &expected).unwrap() < 1e-12);
    let other = Cotranslation::identity(c3, Space::Euclidean { dim: 2 }).unwrap();
    assert!(matches!(free_product_lift(&zg, &other), Err(Error::SpaceMismatch(_))));
}

#[test]
fn descent_to_presentations_with_fewer_relations() {
    let z = gallery::c3_affine().unwrap();
    let c6 = Presentation::cyclic(6).unwrap();
    let down = presentation_descent(&z, c6.clone()).unwrap();
    assert!(verify_cotranslation(&down, &default_triples(&c6, 0, usize::MAX, 0), 1e-12).passed());
    let f1 = Presentation::free(1).unwrap();
    let free = presentation_descent(&z, f1.clone()).unwrap();
    assert!(verify_cotranslation(&free, &default_triples(&f1, 3, usize::MAX, 0), 1e-12).passed());
    let a3 = f1.parse_word("a^3").unwrap();
    let t = free.evaluate(&Word::identity(), &a3).unwrap();
    assert!(free.distance(&t, &Transform::Identity).unwrap() < 1e-12);

    let c6z = presentation_descent(&down, c6).unwrap();
    let c3 = Presentation::cyclic(3).unwrap();
    assert!(matches!(presentation_descent(&c6z, c3), Err(Error::Unsupported(_))));
}
