//! Finitely presented groups and their canonical normal forms.
//!
//! Only the families that admit a well-known normal form are supported:
//! cyclic, dihedral, infinite dihedral, free groups, the integers and free
//! products of supported families. Each family rewrites words letter by
//! letter with explicit rules, so a word is in normal form exactly when it
//! is the output of [`Presentation::normal_form`].
//!
//! Products follow the left-multiplication convention: `multiply(u, v)` is
//! the element `uv`, and in every action context `v` acts first.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of letters a parsed word may expand to.
pub const MAX_PARSED_LETTERS: usize = 1 << 16;
/// Largest `n` accepted for `C_n` and `D_{2n}`.
pub const MAX_CYCLIC_ORDER: usize = 1 << 16;
pub const MAX_FREE_RANK: usize = 1 << 10;

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(gen: usize) -> Self {
        Letter { gen, inverse: false }
    }

    pub const fn inv(gen: usize) -> Self {
        Letter { gen, inverse: true }
    }

    pub const fn flipped(self) -> Self {
        Letter { gen: self.gen, inverse: !self.inverse }
    }
}

/// A word over the generators of some presentation, read left to right.
///
/// The rightmost letter acts first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    /// The single-letter word for generator `gen`.
    pub fn generator(gen: usize) -> Self {
        Word(vec![Letter::new(gen)])
    }

    /// `gen^k` spelled letter by letter (inverse letters for negative `k`).
    pub fn power(gen: usize, k: i64) -> Self {
        let letter = if k < 0 { Letter::inv(gen) } else { Letter::new(gen) };
        Word(vec![letter; k.unsigned_abs() as usize])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Raw concatenation `self · other`, without reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Formal inverse: reversed letters with flipped signs, without reduction.
    pub fn formal_inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.flipped()).collect())
    }

    /// Sum of the exponents of `gen`.
    pub fn exponent_sum(&self, gen: usize) -> i64 {
        self.0
            .iter()
            .filter(|l| l.gen == gen)
            .map(|l| if l.inverse { -1 } else { 1 })
            .sum()
    }
}

type KeepLetter = Box<dyn Fn(usize) -> Option<usize>>;

/// Which factor of a free product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `C_n = <a | a^n>`.
    Cyclic { n: usize },
    /// `D_{2n} = <r, s | r^n, s^2, (sr)^2>`, of order `2n`.
    Dihedral { n: usize },
    /// `D_inf = <a, b | a^2, b^2>`.
    InfiniteDihedral,
    FreeGroup { rank: usize },
    Integers,
    FreeProduct(Box<Presentation>, Box<Presentation>),
}

/// A finitely presented group from one of the supported families.
#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    family: Family,
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_CYCLIC_ORDER {
            return Err(Error::InvalidPresentation(format!("cyclic order must be in 1..={MAX_CYCLIC_ORDER}")));
        }
        Ok(Presentation {
            family: Family::Cyclic { n },
            generators: vec!["a".into()],
            relators: vec![Word::power(0, n as i64)],
        })
    }

    /// The dihedral group of order `2n` with generators `r`, `s`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_CYCLIC_ORDER {
            return Err(Error::InvalidPresentation(format!("dihedral parameter must be in 1..={MAX_CYCLIC_ORDER}")));
        }
        let sr = Word::from_letters(vec![Letter::new(1), Letter::new(0)]);
        Ok(Presentation {
            family: Family::Dihedral { n },
            generators: vec!["r".into(), "s".into()],
            relators: vec![Word::power(0, n as i64), Word::power(1, 2), sr.concat(&sr)],
        })
    }

    pub fn infinite_dihedral() -> Self {
        Presentation {
            family: Family::InfiniteDihedral,
            generators: vec!["a".into(), "b".into()],
            relators: vec![Word::power(0, 2), Word::power(1, 2)],
        }
    }

    /// Free group with generators `a, b, c, ...` (or `x1, x2, ...` past 26).
    pub fn free(rank: usize) -> Result<Self> {
        if rank == 0 || rank > MAX_FREE_RANK {
            return Err(Error::InvalidPresentation(format!("free group rank must be in 1..={MAX_FREE_RANK}")));
        }
        let generators = if rank <= 26 {
            (0..rank).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
        } else {
            (1..=rank).map(|i| format!("x{i}")).collect()
        };
        Ok(Presentation { family: Family::FreeGroup { rank }, generators, relators: vec![] })
    }

    /// The integers with generator `t`.
    pub fn integers() -> Self {
        Presentation { family: Family::Integers, generators: vec!["t".into()], relators: vec![] }
    }

    /// Free product; generator symbol sets must be disjoint.
    pub fn free_product(left: Presentation, right: Presentation) -> Result<Self> {
        let left_names: HashSet<&String> = left.generators.iter().collect();
        if let Some(clash) = right.generators.iter().find(|g| left_names.contains(g)) {
            return Err(Error::InvalidPresentation(format!(
                "free product factors share generator symbol {clash:?}"
            )));
        }
        let offset = left.generators.len();
        let mut generators = left.generators.clone();
        generators.extend(right.generators.iter().cloned());
        let mut relators = left.relators.clone();
        relators.extend(right.relators.iter().map(|w| shift_word(w, offset)));
        Ok(Presentation {
            family: Family::FreeProduct(Box::new(left), Box::new(right)),
            generators,
            relators,
        })
    }

    /// Rename the generators. Names must be distinct, non-empty, and
    /// must not collide with the identity symbol `e`.
    pub fn with_generator_names<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self> {
        if names.len() != self.generators.len() {
            return Err(Error::InvalidPresentation(format!(
                "expected {} generator names, got {}",
                self.generators.len(),
                names.len()
            )));
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        validate_names(&names)?;
        // Free product factors keep their own copies of the names.
        if let Family::FreeProduct(left, right) = &mut self.family {
            let k = left.generators.len();
            left.generators = names[..k].to_vec();
            right.generators = names[k..].to_vec();
        }
        self.generators = names;
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    /// Group order for finite families.
    pub fn order(&self) -> Option<usize> {
        match &self.family {
            Family::Cyclic { n } => Some(*n),
            Family::Dihedral { n } => Some(2 * n),
            Family::FreeProduct(l, r) => match (l.order(), r.order()) {
                (Some(1), o) | (o, Some(1)) => o,
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.order().is_some()
    }

    pub fn is_abelian(&self) -> bool {
        match &self.family {
            Family::Cyclic { .. } | Family::Integers => true,
            Family::Dihedral { n } => *n <= 2,
            Family::FreeGroup { rank } => *rank == 1,
            Family::InfiniteDihedral => false,
            Family::FreeProduct(l, r) => match (l.order(), r.order()) {
                (Some(1), _) => r.is_abelian(),
                (_, Some(1)) => l.is_abelian(),
                _ => false,
            },
        }
    }

    /// Fails if `w` mentions a generator this presentation does not have.
    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.letters().iter().find(|l| l.gen >= self.generators.len()) {
            Some(l) => Err(Error::MalformedWord(format!(
                "generator index {} out of range for {} generators",
                l.gen,
                self.generators.len()
            ))),
            None => Ok(()),
        }
    }

    /// Canonical representative of `w`.
    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        self.check_word(w)?;
        let mut nf = Vec::with_capacity(w.len());
        for &l in w.letters() {
            self.push_letter(&mut nf, l);
        }
        Ok(Word(nf))
    }

    /// `uv` in normal form. Both words must be over this presentation and
    /// `u` must already be in normal form.
    pub fn multiply(&self, u: &Word, v: &Word) -> Word {
        let mut nf = u.0.clone();
        for &l in v.letters() {
            self.push_letter(&mut nf, l);
        }
        Word(nf)
    }

    /// `u^{-1}` in normal form.
    pub fn invert(&self, w: &Word) -> Word {
        let mut nf = Vec::with_capacity(w.len());
        for l in w.letters().iter().rev() {
            self.push_letter(&mut nf, l.flipped());
        }
        Word(nf)
    }

    /// Right-multiply a normal form by one letter, keeping it normal.
    fn push_letter(&self, nf: &mut Vec<Letter>, l: Letter) {
        assert!(l.gen < self.generators.len(), "letter outside presentation");
        match &self.family {
            Family::Cyclic { n } => {
                let k = nf.len();
                let next = if l.inverse { (k + n - 1) % n } else { (k + 1) % n };
                nf.clear();
                nf.resize(next, Letter::new(0));
            }
            Family::Dihedral { n } => {
                let n = *n;
                let flipped = usize::from(nf.first() == Some(&Letter::new(1)));
                let k = nf.len() - flipped;
                let (flipped, k) = match (l.gen, l.inverse) {
                    (0, false) => (flipped, (k + 1) % n),
                    (0, true) => (flipped, (k + n - 1) % n),
                    // s^f r^k s = s^{f+1} r^{-k}
                    _ => (1 - flipped, (n - k) % n),
                };
                nf.clear();
                if flipped == 1 {
                    nf.push(Letter::new(1));
                }
                nf.extend(std::iter::repeat_n(Letter::new(0), k));
            }
            Family::InfiniteDihedral => {
                let l = Letter::new(l.gen);
                if nf.last() == Some(&l) {
                    nf.pop();
                } else {
                    nf.push(l);
                }
            }
            Family::FreeGroup { .. } | Family::Integers => {
                if nf.last() == Some(&l.flipped()) {
                    nf.pop();
                } else {
                    nf.push(l);
                }
            }
            Family::FreeProduct(left, right) => {
                let split = left.generators.len();
                let (factor, offset, side) = if l.gen < split {
                    (left.as_ref(), 0, Side::Left)
                } else {
                    (right.as_ref(), split, Side::Right)
                };
                let in_factor = |x: &Letter| match side {
                    Side::Left => x.gen < split,
                    Side::Right => x.gen >= split,
                };
                let start = nf.iter().rposition(|x| !in_factor(x)).map_or(0, |p| p + 1);
                let mut syllable: Vec<Letter> = nf[start..]
                    .iter()
                    .map(|x| Letter { gen: x.gen - offset, inverse: x.inverse })
                    .collect();
                factor.push_letter(&mut syllable, Letter { gen: l.gen - offset, inverse: l.inverse });
                nf.truncate(start);
                nf.extend(syllable.into_iter().map(|x| Letter { gen: x.gen + offset, inverse: x.inverse }));
            }
        }
    }

    /// All distinct elements of word length at most `radius`, in
    /// breadth-first order starting from `e`.
    pub fn ball(&self, radius: usize) -> Vec<Word> {
        let steps: Vec<Letter> = (0..self.generators.len())
            .flat_map(|g| [Letter::new(g), Letter::inv(g)])
            .collect();
        let mut seen: HashSet<Word> = HashSet::new();
        let mut out = vec![Word::identity()];
        seen.insert(Word::identity());
        let mut frontier = vec![Word::identity()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &frontier {
                for &l in &steps {
                    let mut nf = w.0.clone();
                    self.push_letter(&mut nf, l);
                    let nw = Word(nf);
                    if seen.insert(nw.clone()) {
                        next.push(nw.clone());
                        out.push(nw);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out
    }

    /// Every element of a finite group.
    pub fn elements(&self) -> Option<Vec<Word>> {
        self.order().map(|n| self.ball(n))
    }

    /// The whole group when finite, otherwise the ball of the given radius.
    pub fn sample_elements(&self, radius: usize) -> Vec<Word> {
        self.elements().unwrap_or_else(|| self.ball(radius))
    }

    /// Image of `w` under the canonical projection onto one free factor.
    /// The result is a word over the factor's own presentation.
    pub fn project_free_factor(&self, w: &Word, which: Side) -> Result<Word> {
        let Family::FreeProduct(left, right) = &self.family else {
            return Err(Error::Unsupported("projection requires a free product".into()));
        };
        self.check_word(w)?;
        let split = left.generators.len();
        let (factor, keep): (&Presentation, KeepLetter) = match which {
            Side::Left => (left, Box::new(move |g| (g < split).then_some(g))),
            Side::Right => (right, Box::new(move |g| (g >= split).then(|| g - split))),
        };
        let local: Vec<Letter> = w
            .letters()
            .iter()
            .filter_map(|l| keep(l.gen).map(|gen| Letter { gen, inverse: l.inverse }))
            .collect();
        factor.normal_form(&Word(local))
    }

    /// Canonical injection of a factor word into the free product.
    pub fn inject_free_factor(&self, w: &Word, which: Side) -> Result<Word> {
        let Family::FreeProduct(left, right) = &self.family else {
            return Err(Error::Unsupported("injection requires a free product".into()));
        };
        let (factor, offset) = match which {
            Side::Left => (left.as_ref(), 0),
            Side::Right => (right.as_ref(), left.generators.len()),
        };
        factor.check_word(w)?;
        self.normal_form(&shift_word(w, offset))
    }

    pub fn factor(&self, which: Side) -> Result<&Presentation> {
        match (&self.family, which) {
            (Family::FreeProduct(l, _), Side::Left) => Ok(l),
            (Family::FreeProduct(_, r), Side::Right) => Ok(r),
            _ => Err(Error::Unsupported("not a free product".into())),
        }
    }

    /// `t^k` for the integers (or any one-generator presentation).
    pub fn integer_word(&self, k: i64) -> Word {
        self.normal_form(&Word::power(0, k)).expect("one-generator word")
    }

    /// The integer represented by a word of the integers presentation.
    pub fn word_to_integer(&self, w: &Word) -> Result<i64> {
        match self.family {
            Family::Integers | Family::FreeGroup { rank: 1 } => Ok(w.exponent_sum(0)),
            _ => Err(Error::Unsupported("word_to_integer requires the integers".into())),
        }
    }

    /// Parse a word such as `s r^2`, `ab^-1a`, `(sr)^2` or `e`.
    ///
    /// Generator names are matched longest-first. Whitespace, `*`, `.` and
    /// `·` separate factors. The result is not reduced.
    pub fn parse_word(&self, input: &str) -> Result<Word> {
        let mut parser = WordParser { src: input, pos: 0, names: &self.generators };
        let letters = parser.sequence(0)?;
        parser.skip_separators();
        if parser.pos != input.len() {
            return Err(parser.error("unexpected character"));
        }
        Ok(Word(letters))
    }

    /// Render a word with run-length exponents, e.g. `sr^2` or `a b^-1`.
    pub fn format_word(&self, w: &Word) -> String {
        if w.is_identity() {
            return "e".into();
        }
        let compact = self.generators.iter().all(|g| g.chars().count() == 1);
        let mut parts: Vec<String> = Vec::new();
        let letters = w.letters();
        let mut i = 0;
        while i < letters.len() {
            let l = letters[i];
            let mut j = i;
            while j < letters.len() && letters[j] == l {
                j += 1;
            }
            let run = (j - i) as i64;
            let exp = if l.inverse { -run } else { run };
            let name = self.generators.get(l.gen).map_or("?", |s| s.as_str());
            parts.push(if exp == 1 { name.to_string() } else { format!("{name}^{exp}") });
            i = j;
        }
        parts.join(if compact { "" } else { " " })
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> = self.relators.iter().map(|r| self.format_word(r)).collect();
        write!(f, "<{} | {}>", self.generators.join(", "), rels.join(", "))
    }
}

fn shift_word(w: &Word, offset: usize) -> Word {
    Word(w.letters().iter().map(|l| Letter { gen: l.gen + offset, inverse: l.inverse }).collect())
}

fn validate_names(names: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        let valid = !n.is_empty()
            && n != "e"
            && n.chars().all(|c| c.is_alphanumeric() || c == '_')
            && !n.starts_with(|c: char| c.is_ascii_digit());
        if !valid {
            return Err(Error::InvalidPresentation(format!("invalid generator name {n:?}")));
        }
        if !seen.insert(n) {
            return Err(Error::InvalidPresentation(format!("duplicate generator name {n:?}")));
        }
    }
    Ok(())
}

struct WordParser<'a> {
    src: &'a str,
    pos: usize,
    names: &'a [String],
}

impl WordParser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_separators(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() || c == '*' || c == '.' || c == '·' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn sequence(&mut self, depth: usize) -> Result<Vec<Letter>> {
        if depth > 32 {
            return Err(self.error("parentheses nested too deeply"));
        }
        let mut out = Vec::new();
        loop {
            self.skip_separators();
            let rest = self.rest();
            if rest.is_empty() || rest.starts_with(')') {
                return Ok(out);
            }
            let factor = if rest.starts_with('(') {
                self.pos += 1;
                let inner = self.sequence(depth + 1)?;
                if !self.rest().starts_with(')') {
                    return Err(self.error("missing ')'"));
                }
                self.pos += 1;
                inner
            } else if let Some(gen) = self.generator() {
                vec![Letter::new(gen)]
            } else if self.identity_symbol() {
                Vec::new()
            } else {
                return Err(self.error("unknown generator"));
            };
            let exp = self.exponent()?;
            let base = if exp < 0 { Word(factor).formal_inverse().0 } else { factor };
            let reps = exp.unsigned_abs() as usize;
            if out.len() + base.len().saturating_mul(reps) > MAX_PARSED_LETTERS {
                return Err(self.error("word too long"));
            }
            for _ in 0..reps {
                out.extend_from_slice(&base);
            }
        }
    }

    fn generator(&mut self) -> Option<usize> {
        let rest = self.rest();
        let best = self
            .names
            .iter()
            .enumerate()
            .filter(|(_, n)| rest.starts_with(n.as_str()))
            .max_by_key(|(_, n)| n.len())?;
        self.pos += best.1.len();
        Some(best.0)
    }

    fn identity_symbol(&mut self) -> bool {
        let rest = self.rest();
        for sym in ["e", "1"] {
            if let Some(after) = rest.strip_prefix(sym) {
                if !after.starts_with(|c: char| c.is_alphanumeric() || c == '_') {
                    self.pos += sym.len();
                    return true;
                }
            }
        }
        false
    }

    fn exponent(&mut self) -> Result<i64> {
        if !self.rest().starts_with('^') {
            return Ok(1);
        }
        self.pos += 1;
        let mut negative = false;
        if self.rest().starts_with('-') {
            negative = true;
            self.pos += 1;
        }
        let digits: String = self.rest().chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return Err(self.error("exponent needs digits"));
        }
        let value: i64 = digits
            .parse()
            .ok()
            .filter(|v| *v <= MAX_PARSED_LETTERS as i64)
            .ok_or_else(|| self.error("exponent too large"))?;
        self.pos += digits.len();
        Ok(if negative { -value } else { value })
    }
}

/// Groups whose elements index partial cotranslations.
pub trait Group: Send + Sync {
    type Element: Clone + fmt::Debug + Send + Sync;

    fn identity(&self) -> Self::Element;
    fn op(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn inverse(&self, a: &Self::Element) -> Self::Element;
    fn describe(&self, a: &Self::Element) -> String;
}

impl Group for Presentation {
    type Element = Word;

    fn identity(&self) -> Word {
        Word::identity()
    }

    fn op(&self, a: &Word, b: &Word) -> Word {
        self.multiply(a, b)
    }

    fn inverse(&self, a: &Word) -> Word {
        self.invert(a)
    }

    fn describe(&self, a: &Word) -> String {
        self.format_word(a)
    }
}

/// The additive group of real numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RealLine;

impl Group for RealLine {
    type Element = f64;

    fn identity(&self) -> f64 {
        0.0
    }

    fn op(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }

    fn inverse(&self, a: &f64) -> f64 {
        -a
    }

    fn describe(&self, a: &f64) -> String {
        format!("{a}")
    }
}
