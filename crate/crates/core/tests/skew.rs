use cotrans::cotranslation::{default_triples, from_group_morphism, verify_cotranslation};
use cotrans::gallery::{self, ExampleParams};
use cotrans::skew::{
    compare_cotranslations, cotranslation_from_hull, hull_from_cotranslation, single_function_hull,
    stabilizer_coincidences, verify_skew_axiom, verify_suspension, Hull, Suspension,
};
use cotrans::{Cotranslation, Error, Point, Presentation, Space, Transform, Word};

fn all_triples(p: &Presentation) -> Vec<(Word, Word, Word)> {
    default_triples(p, 0, usize::MAX, 0)
}

fn all_pairs(p: &Presentation) -> Vec<(Word, Word)> {
    let e = p.elements().unwrap();
    e.iter().flat_map(|g| e.iter().map(move |h| (g.clone(), h.clone()))).collect()
}

fn finite_examples() -> Vec<Cotranslation> {
    vec![gallery::c3_affine().unwrap(), gallery::d6_labeled_copies(&ExampleParams::default()).unwrap()]
}

#[test]
fn round_trip_through_the_hull() {
    for z in finite_examples() {
        let p = z.presentation().clone();
        let hull = hull_from_cotranslation(&z);
        let back = cotranslation_from_hull(&hull, 1e-12).unwrap();
        let report = compare_cotranslations(&z, &back, &all_pairs(&p), 0.0);
        assert!(report.passed(), "{p}:\n{}", report.render());
    }
}

#[test]
fn skew_axiom_holds_exactly() {
    for z in finite_examples() {
        let p = z.presentation().clone();
        let report = verify_skew_axiom(&hull_from_cotranslation(&z), &all_triples(&p), 1e-10);
        assert!(report.passed(), "{p}:\n{}", report.render());
        assert!(report.check("skew axiom").unwrap().max_residual <= 1e-10);
    }
}

#[test]
fn wrong_sided_action_breaks_the_axiom() {
    let z = gallery::d6_labeled_copies(&ExampleParams::default()).unwrap();
    let p = z.presentation().clone();
    let shared = z.clone();
    let act = p.clone();
    let hull = Hull::new(
        p.clone(),
        z.space().clone(),
        z.test_points().to_vec(),
        Word::identity(),
        move |g, h| shared.evaluate(g, h),
        move |h, g| act.multiply(g, h),
    );
    let report = verify_skew_axiom(&hull, &all_triples(&p), 1e-10);
    assert!(!report.passed());
    assert!(!report.check("skew axiom").unwrap().passed || !report.check("left action").unwrap().passed);
}

#[test]
fn suspension_is_a_morphism_on_c3() {
    let z = gallery::c3_affine().unwrap();
    let elems = z.presentation().elements().unwrap();
    let report = verify_suspension(&z, &elems, &elems, 1e-12).unwrap();
    assert!(report.passed(), "{}", report.render());
}

#[test]
fn suspension_window_is_enforced() {
    let z = gallery::dinf_translation_rotation().unwrap();
    let p = z.presentation().clone();
    let window = p.ball(1);
    let s = Suspension::new(&z, &window).unwrap();
    let ab = p.normal_form(&p.parse_word("ab").unwrap()).unwrap();
    let start = (Word::identity(), Point::Vector(vec![0.0, 0.0]));
    assert!(matches!(s.apply(&ab, &start), Err(Error::OutOfWindow(_))));
    assert!(s.apply(&Word::generator(0), &start).is_ok());
}

#[test]
fn single_function_hull_of_a_morphism() {
    let c4 = Presentation::cyclic(4).unwrap();
    let pres = c4.clone();
    let gamma = move |h: &Word| -> cotrans::Result<Transform> {
        Ok(Transform::rotation(0, 1, std::f64::consts::FRAC_PI_2 * h.exponent_sum(0) as f64))
    };
    let hull = single_function_hull(c4.clone(), Space::Euclidean { dim: 2 }, gamma);
    let triples: Vec<_> = all_triples(&pres).into_iter().filter(|(j, _, _)| j.is_identity()).collect();
    assert!(verify_skew_axiom(&hull, &triples, 1e-12).passed());
    let z = cotranslation_from_hull(&hull, 1e-12).unwrap();
    let direct = from_group_morphism(c4.clone(), Space::Euclidean { dim: 2 }, gamma, 4, 1e-12).unwrap();
    let cmp = compare_cotranslations(&z, &direct, &all_pairs(&c4), 1e-12);
    assert!(cmp.passed(), "{}", cmp.render());
    assert!(verify_cotranslation(&z, &all_triples(&c4), 1e-12).passed());
}

#[test]
fn stabilizer_coincidences_are_reported() {
    let c4 = Presentation::cyclic(4).unwrap();
    let z = from_group_morphism(
        c4.clone(),
        Space::Euclidean { dim: 2 },
        |h| Ok(Transform::rotation(0, 1, std::f64::consts::FRAC_PI_2 * h.exponent_sum(0) as f64)),
        4,
        1e-12,
    )
    .unwrap();
    let elems = c4.elements().unwrap();
    let hull = hull_from_cotranslation(&z);
    assert_eq!(stabilizer_coincidences(&hull, &elems, &elems, 1e-12).unwrap().len(), 6);

    let c3 = gallery::c3_affine().unwrap();
    let elems = c3.presentation().elements().unwrap();
    let hull = hull_from_cotranslation(&c3);
    assert!(stabilizer_coincidences(&hull, &elems, &elems, 1e-12).unwrap().is_empty());
}

#[test]
fn inadmissible_hull_is_rejected() {
    let c2 = Presentation::cyclic(2).unwrap();
    let hull = single_function_hull(c2, Space::Euclidean { dim: 1 }, |_| {
        Ok(Transform::Affine(cotrans::Affine::scalar(1.0, 1.0)?))
    });
    assert!(matches!(cotranslation_from_hull(&hull, 1e-12), Err(Error::Rejected { .. })));
}
