use std::sync::Arc;

use cotrans::difference::{cotranslation_of_sequence, MatrixSequence};
use cotrans::linalg::{numerical_rank, random_well_conditioned};
use cotrans::partial::*;
use cotrans::{Error, Presentation, Word};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c6() -> (Presentation, Vec<Word>) {
    let p = Presentation::cyclic(6).unwrap();
    let e = p.elements().unwrap();
    (p, e)
}

fn ints() -> (Presentation, Vec<Word>) {
    let p = Presentation::integers();
    let e = p.ball(3);
    (p, e)
}

/// Block-diagonal ℤ-cocycle on ℝ³ with a 2 + 1 split.
fn block_sequence(seed: u64) -> MatrixSequence<f64> {
    MatrixSequence::new(3, 100, move |n| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9));
        let mut a = DMatrix::zeros(3, 3);
        a.view_mut((0, 0), (2, 2)).copy_from(&random_well_conditioned(&mut rng, 2, 20.0));
        a[(2, 2)] = rng.random_range(0.5..2.0);
        Ok(a)
    })
}

fn as_partial(s: &MatrixSequence<f64>) -> PartialCotranslation {
    PartialCotranslation::from_cotranslation(&cotranslation_of_sequence(s).unwrap()).unwrap()
}

#[test]
fn product_form_over_the_integers() {
    let s = MatrixSequence::constant(DMatrix::from_element(2, 2, 0.0) + DMatrix::identity(2, 2) * 2.0, 100).unwrap();
    let v = as_partial(&s);
    let (p, elems) = ints();
    let proj = Projector::block(2, 0, 1);
    let w = restrict(&v, &proj, &elems, 1e-12).unwrap();
    let value = w.evaluate(&Word::identity(), &p.integer_word(3)).unwrap();
    assert_eq!(value, DMatrix::from_row_slice(2, 2, &[8.0, 0.0, 0.0, 0.0]));
    assert!(verify_partial_law(&w, &elems, 1e-12).passed());
    assert_eq!(rank_of(&w, &elems).unwrap(), 1);
    assert_eq!(rank_of(&v, &elems).unwrap(), 2);
}

#[test]
fn random_product_partials_have_idempotent_units_and_constant_rank() {
    let (p, elems) = c6();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..100 {
        let d = rng.random_range(1..=6);
        let n = rng.random_range(0..=d);
        let (w, proj) = random_product_partial(&p, d, n, trial, 50.0).unwrap();
        let units = units_projector(&w, &elems).unwrap();
        for g in &elems {
            let u = units.at(g).unwrap();
            assert!((&u * &u - &u).norm() <= 1e-9);
            assert!((u - proj.at(g).unwrap()).norm() <= 1e-8);
        }
        assert_eq!(rank_of(&w, &elems).unwrap(), n, "trial {trial}");
    }
}

#[test]
fn diagonalizer_bounds_on_random_idempotents() {
    let (p, elems) = ints();
    let elems: Vec<Word> = elems.into_iter().chain(p.ball(50)).collect();
    for seed in 0..4 {
        let (_, proj) = random_product_partial(&p, 5, 2, seed, 50.0).unwrap();
        let (_, rep) = bounded_diagonalizer(&proj, &p, &elems[..100.min(elems.len())], 1e-8).unwrap();
        assert!(rep.report.passed(), "{}", rep.report.render());
        for s in &rep.samples {
            assert!(s.norm <= 5.0 && s.inverse_norm <= 5.0 * rep.bound + 1e-8);
        }
        assert_eq!(rep.jump_norms.len(), rep.samples.len() - 1);
    }
}

#[test]
fn orthogonal_block_has_orthogonal_diagonalizer() {
    let (p, elems) = c6();
    let (_, rep) = bounded_diagonalizer(&Projector::block(3, 0, 2), &p, &elems, 1e-12).unwrap();
    for s in &rep.samples {
        assert!((s.norm - 1.0).abs() < 1e-12 && (s.inverse_norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn completion_and_factorization_over_c6_and_the_integers() {
    for (p, elems) in [c6(), ints()] {
        for seed in 0..5 {
            let (w, _) = random_product_partial(&p, 4, 2, seed, 50.0).unwrap();
            let c = complete(&w, &elems, 1e-8).unwrap();
            assert!(c.report.passed(), "{p}:\n{}", c.report.render());
            assert_eq!(rank_of(&c.total, &elems).unwrap(), 4);
            let f = factorize(&w, &elems, 1e-8).unwrap();
            assert!(f.report.check("factorization").unwrap().max_residual <= 1e-8);
        }
    }
}

#[test]
fn completion_of_a_constant_block_is_the_identity() {
    let (p, elems) = c6();
    let w = PartialCotranslation::constant_block(p.clone(), 3, 1).unwrap();
    let c = complete(&w, &elems, 1e-12).unwrap();
    for g in &elems {
        for h in &elems {
            assert!((c.complement.evaluate(g, h).unwrap() - Projector::block(3, 1, 2).at(g).unwrap()).norm() < 1e-12);
            assert!((c.total.evaluate(g, h).unwrap() - DMatrix::identity(3, 3)).norm() < 1e-12);
        }
    }
    let f = factorize(&w, &elems, 1e-12).unwrap();
    assert_eq!(f.projector.at(&Word::identity()).unwrap(), Projector::block(3, 0, 1).at(&Word::identity()).unwrap());
}

#[test]
fn full_rank_partials_complete_to_themselves() {
    let s = block_sequence(3);
    let v = as_partial(&s);
    let (_, elems) = ints();
    let c = complete(&v, &elems, 1e-8).unwrap();
    for g in &elems {
        for h in &elems {
            assert!(c.complement.evaluate(g, h).unwrap().norm() < 1e-12);
        }
    }
}

#[test]
fn complementary_restrictions_sum_back() {
    let s = block_sequence(5);
    let v = as_partial(&s);
    let (_, elems) = ints();
    let (pp, qq) = (Projector::block(3, 0, 2), Projector::block(3, 2, 1));
    assert!(verify_orthogonal_projectors(&pp, &qq, v.presentation(), &elems, 1e-15).passed());
    let w1 = restrict(&v, &pp, &elems, 1e-10).unwrap();
    let w2 = restrict(&v, &qq, &elems, 1e-10).unwrap();
    let sum = orthogonal_sum(&w1, &w2, &elems, 1e-10).unwrap();
    for g in &elems {
        for h in &elems {
            assert!((sum.evaluate(g, h).unwrap() - v.evaluate(g, h).unwrap()).norm() < 1e-10);
        }
    }
    let units = units_projector(&w1, &elems).unwrap();
    let recovered = restrict(&sum, &units, &elems, 1e-10).unwrap();
    for g in &elems {
        for h in &elems {
            assert!((recovered.evaluate(g, h).unwrap() - w1.evaluate(g, h).unwrap()).norm() < 1e-10);
        }
    }
}

#[test]
fn overlapping_summands_are_rejected() {
    let (p, elems) = c6();
    let a = PartialCotranslation::constant_block(p.clone(), 2, 1).unwrap();
    let oblique = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
    let b = PartialCotranslation::explicit(p.clone(), 2, move |_, _| Ok(oblique.clone()), &elems, 1e-12).unwrap();
    assert!(matches!(orthogonal_sum(&a, &b, &elems, 1e-9), Err(Error::Rejected { .. })));
    let sum = sum_unchecked(&a, &b);
    let report = verify_partial_law(&sum, &elems, 1e-9);
    assert!(!report.passed());
    assert!(!report.checks.iter().find(|c| !c.passed).unwrap().witnesses.is_empty());
}

#[test]
fn mixing_rotation_breaks_projector_invariance() {
    let theta = 0.4f64;
    let rot = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
    let v = as_partial(&MatrixSequence::constant(rot, 100).unwrap());
    let (_, elems) = ints();
    let report = verify_invariant_projector(&Projector::block(2, 0, 1), &v, &elems, 1e-9);
    assert!(!report.check("invariance").unwrap().passed);
    assert!(matches!(restrict(&v, &Projector::block(2, 0, 1), &elems, 1e-9), Err(Error::Rejected { .. })));
    assert!(verify_invariant_projector(&Projector::identity(2), &v, &elems, 1e-12).passed());
}

#[test]
fn conjugation_preserves_law_rank_and_orthogonality() {
    let (p, elems) = c6();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let t_const = random_well_conditioned(&mut rng, 3, 20.0);
    let w = PartialCotranslation::block(p.clone(), 3, 0, 2).unwrap();
    let v = PartialCotranslation::block(p.clone(), 3, 2, 1).unwrap();
    let pres = p.clone();
    let t_of = Arc::new(move |g: &Word| -> cotrans::Result<DMatrix<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(g.exponent_sum(0) as u64 + 99);
        let _ = &pres;
        Ok(random_well_conditioned(&mut rng, 3, 20.0))
    });
    let (t1, t2) = (t_of.clone(), t_of.clone());
    let wt = conjugate(&w, move |g| t1(g), &elems).unwrap();
    let vt = conjugate(&v, move |g| t2(g), &elems).unwrap();
    assert!(verify_partial_law(&wt, &elems, 1e-9).passed());
    assert_eq!(rank_of(&wt, &elems).unwrap(), 2);
    assert!(verify_mutual_orthogonality(&wt, &vt, &elems, 1e-9).passed());
    let units = units_projector(&wt, &elems).unwrap();
    for g in &elems {
        let t = t_of(g).unwrap();
        let expected = t.clone().try_inverse().unwrap() * Projector::block(3, 0, 2).at(g).unwrap() * t;
        assert!((units.at(g).unwrap() - expected).norm() < 1e-9);
    }
    let tc = conjugate(&w, move |_| Ok(t_const.clone()), &elems).unwrap();
    assert_eq!(numerical_rank(&tc.evaluate(&elems[1], &elems[2]).unwrap()), 2);
    let singular = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1e-14]);
    assert!(matches!(conjugate(&w, move |_| Ok(singular.clone()), &elems), Err(Error::Rejected { .. })));
}

#[test]
fn explicit_rules_must_satisfy_the_law() {
    let (p, elems) = c6();
    let bad = PartialCotranslation::explicit(p, 1, |_, h| Ok(DMatrix::from_element(1, 1, 1.0 + h.len() as f64)), &elems, 1e-9);
    assert!(matches!(bad, Err(Error::Rejected { .. })));
}
