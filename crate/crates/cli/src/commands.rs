//! One function per command. Spec problems surface as schema errors; library
//! errors raised while a suite runs become a failing report.

use cotrans::cotranslation::{check_relation_preservation, default_triples, verify_cotranslation};
use cotrans::difference::{random_samples, verify_cocycle};
use cotrans::evolution::{
    square_grid, verify_derivative_identities, verify_evolution_properties, Evolution, EvolutionOperator, DEFAULT_FD_STEP,
    DEFAULT_SPAN, DEFAULT_STEP,
};
use cotrans::gallery::Example;
use cotrans::groupoid::{default_sample, verify_groupoid_axioms, GroupoidElement, GroupoidLaw, TranslationGroupoid};
use cotrans::partial::{complete, factorize, rank_report, verify_partial_law, PartialCotranslation};
use cotrans::report::Check;
use cotrans::skew::{compare_cotranslations, cotranslation_from_hull, hull_from_cotranslation, verify_skew_axiom, verify_suspension};
use cotrans::{Presentation, Report, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::spec::{rows, ExperimentSpec, Mutation};
use crate::{CliError, Command, Output};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DIFFERENCE_TOL: f64 = 1e-8;
pub const PARTIAL_TOL: f64 = 1e-8;
pub const EVOLUTION_TOL: f64 = 1e-4;
/// Triple cap for the skew-product suite, whose hull evaluations are slower.
pub const SKEW_TRIPLE_CAP: usize = 20_000;
/// At most this many elements appear in emitted matrix listings.
pub const LISTING_LIMIT: usize = 16;

enum Failure {
    Schema(CliError),
    Runtime(cotrans::Error),
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        Failure::Schema(e)
    }
}

impl From<cotrans::Error> for Failure {
    fn from(e: cotrans::Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome = Result<(Report, Value), Failure>;

/// Run `command` on `spec`. `Err` means the spec was unusable.
pub fn run(command: Command, spec: &ExperimentSpec) -> Result<Output, CliError> {
    let outcome = match command {
        Command::VerifyGroupoid => verify_groupoid(spec),
        Command::VerifyCotranslation => verify_cotranslation_cmd(spec),
        Command::CheckRelations => check_relations(spec),
        Command::SkewVerify => skew_verify(spec),
        Command::Evaluate => evaluate(spec),
        Command::Difference => difference(spec),
        Command::Evolve => evolve(spec),
        Command::DerivativeIdentities => derivative_identities(spec),
        Command::PartialVerify => partial_verify(spec),
        Command::Complete => complete_cmd(spec),
        Command::Factorize => factorize_cmd(spec),
        Command::Gallery => Ok(gallery_listing()),
    };
    let output = |checks: Vec<Check>, results, error: Option<String>| Output {
        command: command.name().into(),
        seed: spec.seed,
        passed: error.is_none() && checks.iter().all(|c| c.passed),
        checks,
        results,
        error,
        elapsed_ms: None,
    };
    match outcome {
        Ok((report, results)) => Ok(output(report.checks, results, None)),
        Err(Failure::Runtime(e)) => Ok(output(Vec::new(), Value::Null, Some(e.to_string()))),
        Err(Failure::Schema(e)) => Err(e),
    }
}

/// The spec that `gallery <name>` emits.
pub fn gallery_spec(name: &str, seed: u64) -> Result<ExperimentSpec, CliError> {
    let example: Example = name.parse().map_err(CliError::schema)?;
    Ok(ExperimentSpec::for_example(example, seed))
}

fn gallery_listing() -> (Report, Value) {
    let names: Vec<&str> = Example::ALL.iter().map(|e| e.name()).collect();
    (Report::new(), json!({ "examples": names }))
}

fn tol(spec: &ExperimentSpec, default: f64) -> Result<f64, CliError> {
    let t = spec.sampling.tol.unwrap_or(default);
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(CliError::Schema(format!("tolerance must be finite and non-negative, got {t}")))
    }
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Schema(format!("{name} must be positive, got {x}")))
    }
}

fn word(p: &Presentation, text: &str) -> Result<Word, CliError> {
    p.parse_word(text).and_then(|w| p.normal_form(&w)).map_err(CliError::schema)
}

/// `(x, g)•(y, h) = (y, hg)`: arrows multiplied in the wrong order.
struct ReversedArrows<'a>(TranslationGroupoid<'a>);

impl GroupoidLaw for ReversedArrows<'_> {
    fn target(&self, q: &GroupoidElement) -> Word {
        self.0.target(q)
    }

    fn compose(&self, p: &GroupoidElement, q: &GroupoidElement) -> cotrans::Result<GroupoidElement> {
        self.0.compose(p, q)?;
        Ok(GroupoidElement::new(q.base.clone(), self.0.group.multiply(&q.arrow, &p.arrow)))
    }

    fn inv(&self, p: &GroupoidElement) -> GroupoidElement {
        self.0.inv(p)
    }
}

fn verify_groupoid(spec: &ExperimentSpec) -> Outcome {
    let p = spec.presentation()?;
    let sample = default_sample(&p, spec.radius());
    let cap = spec.sampling.cap.unwrap_or(usize::MAX);
    let law = TranslationGroupoid::new(&p);
    let report = match spec.options.mutation {
        None => verify_groupoid_axioms(&law, &p, &sample, cap),
        Some(Mutation::ReversedArrows) => verify_groupoid_axioms(&ReversedArrows(law), &p, &sample, cap),
    };
    Ok((report, json!({ "group": p.to_string(), "elements": sample.len() })))
}

fn verify_cotranslation_cmd(spec: &ExperimentSpec) -> Outcome {
    let z = spec.cotranslation()?;
    let tol = tol(spec, DEFAULT_TOL)?;
    let cap = spec.sampling.cap.unwrap_or(cotrans::cotranslation::DEFAULT_TRIPLE_CAP);
    let triples = default_triples(z.presentation(), spec.radius(), cap, spec.seed);
    let report = verify_cotranslation(&z, &triples, tol);
    Ok((report, json!({ "group": z.presentation().to_string(), "triples": triples.len() })))
}

fn check_relations(spec: &ExperimentSpec) -> Outcome {
    let z = spec.cotranslation()?;
    let tol = tol(spec, DEFAULT_TOL)?;
    let bases = z.presentation().sample_elements(spec.radius());
    let report = check_relation_preservation(&z, &bases, tol);
    Ok((report, json!({ "group": z.presentation().to_string(), "basepoints": bases.len() })))
}

fn skew_verify(spec: &ExperimentSpec) -> Outcome {
    let z = spec.cotranslation()?;
    let tol = tol(spec, DEFAULT_TOL)?;
    let p = z.presentation().clone();
    let cap = spec.sampling.cap.unwrap_or(SKEW_TRIPLE_CAP);
    let triples = default_triples(&p, spec.radius(), cap, spec.seed);
    let hull = hull_from_cotranslation(&z);
    let mut report = verify_skew_axiom(&hull, &triples, tol);
    let back = cotranslation_from_hull(&hull, tol)?;
    let elems = p.sample_elements(spec.radius());
    let pairs: Vec<(Word, Word)> = elems.iter().flat_map(|g| elems.iter().map(move |h| (g.clone(), h.clone()))).collect();
    report.extend(compare_cotranslations(&z, &back, &pairs, tol));
    let suspension = p.is_finite();
    if suspension {
        report.extend(verify_suspension(&z, &elems, &elems, tol)?);
    }
    Ok((report, json!({ "group": p.to_string(), "triples": triples.len(), "pairs": pairs.len(), "suspension": suspension })))
}

fn evaluate(spec: &ExperimentSpec) -> Outcome {
    let z = spec.cotranslation()?;
    let p = z.presentation().clone();
    let g_text = spec.options.g.clone().unwrap_or_else(|| "e".into());
    let h_text = spec.options.h.clone().ok_or_else(|| CliError::Schema("evaluate needs `options.h`".into()))?;
    let (g, h) = (word(&p, &g_text)?, word(&p, &h_text)?);
    let t = z.evaluate(&g, &h)?.simplify();
    let mut results = json!({
        "g": p.format_word(&g),
        "h": p.format_word(&h),
        "transform": serde_json::to_value(&t).map_err(|e| CliError::Schema(e.to_string()))?,
    });
    if let Some(a) = z.space().vector_dim().and_then(|d| t.as_affine(d)) {
        results["affine"] = json!({ "A": rows(a.matrix()), "b": a.offset().iter().copied().collect::<Vec<f64>>() });
    }
    if let Some(x) = &spec.options.x {
        let y = t.apply(z.space(), x)?;
        results["image"] = serde_json::to_value(y).map_err(|e| CliError::Schema(e.to_string()))?;
    }
    Ok((Report::new(), results))
}

fn difference(spec: &ExperimentSpec) -> Outcome {
    let s = spec.sequence()?;
    let tol = tol(spec, DIFFERENCE_TOL)?;
    let samples = random_samples(spec.sampling.count.unwrap_or(200), 20, 10, spec.seed);
    let report = verify_cocycle(&s, &samples, tol);
    let mut transitions = Vec::new();
    for &(n, m) in spec.options.pairs.iter().flatten() {
        transitions.push(json!({ "n": n, "m": m, "Z": rows(&s.transition_matrix(n, m)?) }));
    }
    Ok((report, json!({ "dim": s.dim(), "samples": samples.len(), "transitions": transitions })))
}

fn evolution_operator(spec: &ExperimentSpec) -> Result<EvolutionOperator, Failure> {
    let g = spec.generator()?;
    let step = positive("step", spec.options.step.unwrap_or(DEFAULT_STEP))?;
    let span = positive("span", spec.options.span.unwrap_or(DEFAULT_SPAN))?;
    Ok(EvolutionOperator::with_span(g, step, span).map_err(CliError::schema)?)
}

fn evolve(spec: &ExperimentSpec) -> Outcome {
    let op = evolution_operator(spec)?;
    let tol = tol(spec, EVOLUTION_TOL)?;
    let h = positive("fd_step", spec.options.fd_step.unwrap_or(DEFAULT_FD_STEP))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut unit = || rng.random_range(-1.0..=1.0);
    let samples: Vec<(f64, f64, f64)> = (0..spec.sampling.count.unwrap_or(10)).map(|_| (unit(), unit(), unit())).collect();
    let report = verify_evolution_properties(&op, op.generator(), &samples, h, tol);
    let times = spec.options.times.clone().unwrap_or_else(|| vec![(1.0, 0.0)]);
    let mut psi = Vec::new();
    for (u, v) in times {
        psi.push(json!({ "u": u, "v": v, "psi": rows(&op.psi(u, v)?) }));
    }
    Ok((report, json!({ "dim": op.dim(), "step": op.step(), "samples": samples.len(), "psi": psi })))
}

fn derivative_identities(spec: &ExperimentSpec) -> Outcome {
    let op = evolution_operator(spec)?;
    let tol = tol(spec, EVOLUTION_TOL)?;
    let h = positive("fd_step", spec.options.fd_step.unwrap_or(DEFAULT_FD_STEP))?;
    let n = spec.options.grid.unwrap_or(5);
    if n == 0 {
        return Err(CliError::Schema("grid must be at least 1".into()).into());
    }
    let samples = square_grid(n, -1.0, 1.0);
    let report = verify_derivative_identities(&op, &samples, h, tol);
    Ok((report, json!({ "samples": samples.len(), "fd_step": h, "step": op.step() })))
}

fn partial_setup(spec: &ExperimentSpec) -> Result<(PartialCotranslation, Vec<Word>, f64), Failure> {
    let w = spec.partial()?;
    let tol = tol(spec, PARTIAL_TOL)?;
    let elems = w.presentation().sample_elements(spec.radius());
    Ok((w, elems, tol))
}

fn listing(elems: &[Word]) -> &[Word] {
    &elems[..elems.len().min(LISTING_LIMIT)]
}

fn partial_verify(spec: &ExperimentSpec) -> Outcome {
    let (w, elems, tol) = partial_setup(spec)?;
    let mut report = verify_partial_law(&w, &elems, tol);
    let ranks = rank_report(&w, &elems)?;
    let mut constant = Check::new("constant rank");
    constant.record(if ranks.rank().is_some() { 0.0 } else { 1.0 }, 0.0, || format!("ranks {:?}", ranks.ranks));
    report.push(constant);
    Ok((
        report,
        json!({
            "elements": elems.len(),
            "ranks": ranks.ranks.iter().copied().collect::<Vec<_>>(),
            "kernel_angle": ranks.kernel_angle,
        }),
    ))
}

fn complete_cmd(spec: &ExperimentSpec) -> Outcome {
    let (w, elems, tol) = partial_setup(spec)?;
    let c = complete(&w, &elems, tol)?;
    let p = w.presentation();
    let shown = listing(&elems);
    let mut complement = Vec::new();
    for g in shown {
        for h in shown {
            complement.push(json!({ "g": p.format_word(g), "h": p.format_word(h), "V": rows(&c.complement.evaluate(g, h)?) }));
        }
    }
    let t_norms: Vec<Value> = c
        .diagonalizer
        .samples
        .iter()
        .map(|s| json!({ "g": s.element, "norm": s.norm, "inverse_norm": s.inverse_norm, "block_residual": s.block_residual }))
        .collect();
    Ok((
        c.report,
        json!({
            "elements": elems.len(),
            "rank": c.diagonalizer.rank,
            "bound": c.diagonalizer.bound,
            "t_norms": t_norms,
            "jump_norms": c.diagonalizer.jump_norms,
            "complement": complement,
        }),
    ))
}

fn factorize_cmd(spec: &ExperimentSpec) -> Outcome {
    let (w, elems, tol) = partial_setup(spec)?;
    let f = factorize(&w, &elems, tol)?;
    let p = w.presentation();
    let shown = listing(&elems);
    let mut projector = Vec::new();
    let mut cotranslation = Vec::new();
    for g in shown {
        projector.push(json!({ "g": p.format_word(g), "P": rows(&f.projector.at(g)?) }));
        for h in shown {
            cotranslation.push(json!({ "g": p.format_word(g), "h": p.format_word(h), "Z": rows(&f.cotranslation.evaluate(g, h)?) }));
        }
    }
    Ok((f.report, json!({ "elements": elems.len(), "projector": projector, "cotranslation": cotranslation })))
}
