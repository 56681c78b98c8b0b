use cotrans::groupoid::{default_sample, verify_groupoid_axioms, GroupoidElement, GroupoidLaw, TranslationGroupoid};
use cotrans::{Presentation, Result};

/// Composes arrows in the wrong order: `(x, g)•(y, h) = (y, hg)`.
struct Swapped<'a>(TranslationGroupoid<'a>);

impl GroupoidLaw for Swapped<'_> {
    fn target(&self, q: &GroupoidElement) -> cotrans::Word {
        self.0.target(q)
    }

    fn compose(&self, p: &GroupoidElement, q: &GroupoidElement) -> Result<GroupoidElement> {
        self.0.compose(p, q)?;
        Ok(GroupoidElement::new(q.base.clone(), self.0.group.multiply(&q.arrow, &p.arrow)))
    }

    fn inv(&self, p: &GroupoidElement) -> GroupoidElement {
        self.0.inv(p)
    }
}

#[test]
fn finite_groupoids_pass_exhaustively() {
    for p in [Presentation::cyclic(3).unwrap(), Presentation::cyclic(6).unwrap(), Presentation::dihedral(3).unwrap()] {
        let sample = default_sample(&p, 0);
        assert_eq!(sample.len(), p.order().unwrap().pow(2));
        let report = verify_groupoid_axioms(&TranslationGroupoid::new(&p), &p, &sample, usize::MAX);
        assert!(report.passed(), "{p}:\n{}", report.render());
    }
}

#[test]
fn infinite_groupoids_pass_on_balls() {
    for p in [Presentation::free(2).unwrap(), Presentation::infinite_dihedral()] {
        let sample = default_sample(&p, 3);
        let report = verify_groupoid_axioms(&TranslationGroupoid::new(&p), &p, &sample, 500_000);
        assert!(report.passed(), "{p}:\n{}", report.render());
    }
}

#[test]
fn wrong_order_multiplication_is_caught() {
    let d6 = Presentation::dihedral(3).unwrap();
    let law = Swapped(TranslationGroupoid::new(&d6));
    let report = verify_groupoid_axioms(&law, &d6, &default_sample(&d6, 0), usize::MAX);
    assert!(!report.passed());
    let failing = report.checks.iter().find(|c| !c.passed).unwrap();
    assert!(!failing.witnesses.is_empty());
}

#[test]
fn abelian_groups_do_not_notice_the_swap() {
    let c6 = Presentation::cyclic(6).unwrap();
    let law = Swapped(TranslationGroupoid::new(&c6));
    assert!(verify_groupoid_axioms(&law, &c6, &default_sample(&c6, 0), usize::MAX).passed());
}
