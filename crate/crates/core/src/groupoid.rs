//! The left-translations groupoid on `G × G` and an axiom checker.
//!
//! An element `(x, g)` has base `x` and arrow `g`. A pair `((x, g), (y, h))`
//! is composable when `x = h·y`, and composes to `(y, gh)`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Presentation, Word};
use crate::report::{Check, Report};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GroupoidElement {
    pub base: Word,
    pub arrow: Word,
}

impl GroupoidElement {
    pub fn new(base: Word, arrow: Word) -> Self {
        GroupoidElement { base, arrow }
    }

    pub fn unit(base: Word) -> Self {
        GroupoidElement { base, arrow: Word::identity() }
    }
}

/// The structure maps of the groupoid. Implemented by the genuine
/// left-translations groupoid and by test mutants.
pub trait GroupoidLaw: Sync {
    /// The base `p` must have for `(p, q)` to be composable.
    fn target(&self, q: &GroupoidElement) -> Word;
    fn composable(&self, p: &GroupoidElement, q: &GroupoidElement) -> bool {
        p.base == self.target(q)
    }
    fn compose(&self, p: &GroupoidElement, q: &GroupoidElement) -> Result<GroupoidElement>;
    fn inv(&self, p: &GroupoidElement) -> GroupoidElement;
}

pub struct TranslationGroupoid<'a> {
    pub group: &'a Presentation,
}

impl<'a> TranslationGroupoid<'a> {
    pub fn new(group: &'a Presentation) -> Self {
        TranslationGroupoid { group }
    }

    /// `G × G` over the given element list.
    pub fn elements_over(&self, elems: &[Word]) -> Vec<GroupoidElement> {
        elems
            .iter()
            .flat_map(|x| elems.iter().map(move |g| GroupoidElement::new(x.clone(), g.clone())))
            .collect()
    }

    pub fn is_unit(&self, p: &GroupoidElement) -> bool {
        let inv = self.inv(p);
        inv == *p && self.compose(p, p).ok().as_ref() == Some(p)
    }
}

impl GroupoidLaw for TranslationGroupoid<'_> {
    fn target(&self, q: &GroupoidElement) -> Word {
        self.group.multiply(&q.arrow, &q.base)
    }

    fn compose(&self, p: &GroupoidElement, q: &GroupoidElement) -> Result<GroupoidElement> {
        if !self.composable(p, q) {
            return Err(Error::Rejected {
                reason: "pair is not composable".into(),
                witness: format!(
                    "({}, {}) after ({}, {})",
                    self.group.format_word(&p.base),
                    self.group.format_word(&p.arrow),
                    self.group.format_word(&q.base),
                    self.group.format_word(&q.arrow)
                ),
            });
        }
        Ok(GroupoidElement::new(q.base.clone(), self.group.multiply(&p.arrow, &q.arrow)))
    }

    fn inv(&self, p: &GroupoidElement) -> GroupoidElement {
        GroupoidElement::new(self.group.multiply(&p.arrow, &p.base), self.group.invert(&p.arrow))
    }
}

fn show(group: &Presentation, p: &GroupoidElement) -> String {
    format!("({}, {})", group.format_word(&p.base), group.format_word(&p.arrow))
}

/// Check associativity, involution and identity axioms over every
/// composable pair and triple drawn from `sample`.
///
/// Triples are enumerated by following composability, so the work is
/// proportional to the number of composable triples, not `|sample|^3`.
/// `max_triples` caps that enumeration (in sample order).
pub fn verify_groupoid_axioms<L: GroupoidLaw>(
    law: &L,
    group: &Presentation,
    sample: &[GroupoidElement],
    max_triples: usize,
) -> Report {
    let mut report = Report::new();

    // involution
    let mut check = Check::new("involution");
    for p in sample {
        let back = law.inv(&law.inv(p));
        check.record(if back == *p { 0.0 } else { 1.0 }, 0.0, || {
            format!("inv(inv{}) = {}", show(group, p), show(group, &back))
        });
    }
    report.push(check);

    // identity
    let mut check = Check::new("identity");
    for p in sample {
        let ip = law.inv(p);
        if !law.composable(p, &ip) {
            check.record(1.0, 0.0, || format!("{} not composable with its inverse", show(group, p)));
            continue;
        }
        check.record(0.0, 0.0, String::new);
    }
    let pairs = composable_pairs(law, sample);
    for (p, q) in &pairs {
        let ok = (|| -> Result<bool> {
            let pq = law.compose(p, q)?;
            let left = law.compose(&law.inv(p), &pq)?;
            let right = law.compose(&pq, &law.inv(q))?;
            Ok(left == **q && right == **p)
        })();
        let residual = if ok == Ok(true) { 0.0 } else { 1.0 };
        check.record(residual, 0.0, || format!("pair {} • {}", show(group, p), show(group, q)));
    }
    report.push(check);

    // associativity
    let mut by_target: HashMap<Word, Vec<&GroupoidElement>> = HashMap::new();
    for r in sample {
        by_target.entry(law.target(r)).or_default().push(r);
    }
    let mut triples = Vec::new();
    'outer: for (p, q) in &pairs {
        for r in by_target.get(&q.base).into_iter().flatten() {
            triples.push((p, q, *r));
            if triples.len() >= max_triples {
                break 'outer;
            }
        }
    }
    let results: Vec<Option<String>> = triples
        .par_iter()
        .map(|(p, q, r)| {
            let ok = (|| -> Result<bool> {
                let pq = law.compose(p, q)?;
                let qr = law.compose(q, r)?;
                Ok(law.compose(&pq, r)? == law.compose(p, &qr)?)
            })();
            (ok != Ok(true))
                .then(|| format!("{} • {} • {}", show(group, p), show(group, q), show(group, r)))
        })
        .collect();
    let mut check = Check::new("associativity");
    for res in results {
        match res {
            None => check.record(0.0, 0.0, String::new),
            Some(w) => check.record(1.0, 0.0, || w),
        }
    }
    report.push(check);
    report
}

fn composable_pairs<'s, L: GroupoidLaw>(
    law: &L,
    sample: &'s [GroupoidElement],
) -> Vec<(&'s GroupoidElement, &'s GroupoidElement)> {
    let mut by_target: HashMap<Word, Vec<&'s GroupoidElement>> = HashMap::new();
    for q in sample {
        by_target.entry(law.target(q)).or_default().push(q);
    }
    sample
        .iter()
        .flat_map(|p| by_target.get(&p.base).into_iter().flatten().map(move |q| (p, *q)))
        .collect()
}

/// Default sample: exhaustive `G × G` for finite groups of order ≤ 64,
/// otherwise `ball(radius)²`.
pub fn default_sample(group: &Presentation, radius: usize) -> Vec<GroupoidElement> {
    let elems = match group.order() {
        Some(n) if n <= 64 => group.elements().unwrap_or_default(),
        _ => group.ball(radius),
    };
    TranslationGroupoid::new(group).elements_over(&elems)
}
