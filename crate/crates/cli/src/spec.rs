//! The JSON experiment spec and the builders that turn it into library objects.

use std::collections::BTreeMap;

use cotrans::difference::MatrixSequence;
use cotrans::evolution::GeneratorFunction;
use cotrans::gallery::{self, Example, ExampleParams};
use cotrans::partial::{random_product_partial, PartialCotranslation};
use cotrans::{Cotranslation, GeneratorMap, Point, Presentation, Space, Transform};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_RADIUS: usize = 3;
pub const DEFAULT_MAX_COND: f64 = 50.0;

/// One experiment. Which sections are read depends on the command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presentation: Option<PresentationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<Space>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<MapSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<ExampleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial: Option<PartialSpec>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub options: Options,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PresentationSpec {
    Cyclic {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
    },
    Dihedral {
        n: usize,
    },
    InfiniteDihedral,
    Free {
        rank: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
    },
    Integers,
    FreeProduct {
        left: Box<PresentationSpec>,
        right: Box<PresentationSpec>,
    },
}

impl PresentationSpec {
    pub fn build(&self) -> Result<Presentation, CliError> {
        let rename = |p: Presentation, names: &Option<Vec<String>>| match names {
            Some(names) => p.with_generator_names(names),
            None => Ok(p),
        };
        let p = match self {
            PresentationSpec::Cyclic { n, names } => Presentation::cyclic(*n).and_then(|p| rename(p, names)),
            PresentationSpec::Dihedral { n } => Presentation::dihedral(*n),
            PresentationSpec::InfiniteDihedral => Ok(Presentation::infinite_dihedral()),
            PresentationSpec::Free { rank, names } => Presentation::free(*rank).and_then(|p| rename(p, names)),
            PresentationSpec::Integers => Ok(Presentation::integers()),
            PresentationSpec::FreeProduct { left, right } => Presentation::free_product(left.build()?, right.build()?),
        };
        p.map_err(CliError::schema)
    }
}

/// A generator map: a table keyed by words, or a constant transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Table(BTreeMap<String, Transform>),
    Constant(Transform),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleSpec {
    pub name: Example,
    #[serde(default)]
    pub params: ExampleParams,
}

/// Matrices are row-major arrays of rows.
pub type MatrixRows = Vec<Vec<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    Constant(MatrixRows),
    Periodic(Vec<MatrixRows>),
    Random {
        dim: usize,
        #[serde(default = "default_max_cond")]
        max_cond: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Constant(MatrixRows),
    /// `coeffs[i][j][k]` multiplies `t^k` in entry `(i, j)`.
    Polynomial(Vec<Vec<Vec<f64>>>),
    Builtin(Builtin),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Builtin {
    Rotation,
    TimeRotation,
    SinCos,
    DiagonalT { dim: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PartialSpec {
    /// `V(g, h)P(g)` with random well-conditioned `V` and `P` drawn from the seed.
    RandomProduct {
        dim: usize,
        rank: usize,
        #[serde(default = "default_max_cond")]
        max_cond: f64,
    },
    /// The constant projector onto coordinates `start..start + len`.
    Block { dim: usize, start: usize, len: usize },
    /// The matrix form of the cotranslation given by `maps` or `example`.
    Cotranslation,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    /// Ball radius for infinite groups.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    /// Cap on sampled triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    /// Number of random samples for the real-parameter commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Replaces the default test points of a cotranslation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Point>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// Multiply groupoid arrows in the wrong order.
    ReversedArrows,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    /// A point to push through the evaluated transform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<Mutation>,
    /// Integration step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Finite-difference step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    /// Points per axis of the square sample grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// `(n, m)` pairs whose transition matrices are reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(i64, i64)>>,
    /// `(u, v)` pairs whose evolution operators are reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<(f64, f64)>>,
}

fn default_max_cond() -> f64 {
    DEFAULT_MAX_COND
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    /// The spec `gallery <name>` emits.
    pub fn for_example(example: Example, seed: u64) -> Self {
        ExperimentSpec {
            seed,
            presentation: None,
            space: None,
            maps: None,
            example: Some(ExampleSpec { name: example, params: ExampleParams::default() }),
            sequence: None,
            generator: None,
            partial: None,
            sampling: Sampling::default(),
            options: Options::default(),
        }
    }

    pub fn radius(&self) -> usize {
        self.sampling.radius.unwrap_or(DEFAULT_RADIUS)
    }

    pub fn presentation(&self) -> Result<Presentation, CliError> {
        if let Some(p) = &self.presentation {
            return p.build();
        }
        if self.example.is_some() {
            return Ok(self.cotranslation()?.presentation().clone());
        }
        Err(CliError::Schema("missing field `presentation`".into()))
    }

    pub fn cotranslation(&self) -> Result<Cotranslation, CliError> {
        let z = match (&self.example, &self.maps) {
            (Some(_), Some(_)) => return Err(CliError::Schema("give either `example` or `maps`, not both".into())),
            (Some(ex), None) => gallery::build_example(ex.name, &ex.params).map_err(CliError::schema)?,
            (None, Some(maps)) => {
                let p = self
                    .presentation
                    .as_ref()
                    .ok_or_else(|| CliError::Schema("`maps` needs a `presentation`".into()))?
                    .build()?;
                let space = self.space.clone().ok_or_else(|| CliError::Schema("`maps` needs a `space`".into()))?;
                let maps = maps
                    .iter()
                    .map(|m| match m {
                        MapSpec::Constant(t) => Ok(GeneratorMap::constant(t.clone())),
                        MapSpec::Table(entries) => {
                            let entries: Vec<(&str, Transform)> =
                                entries.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
                            GeneratorMap::table(&p, &entries)
                        }
                    })
                    .collect::<cotrans::Result<Vec<_>>>()
                    .map_err(CliError::schema)?;
                Cotranslation::new(p, space, maps).map_err(CliError::schema)?
            }
            (None, None) => return Err(CliError::Schema("missing field `example` or `maps`".into())),
        };
        match &self.sampling.points {
            Some(points) => z.with_test_points(points.clone()).map_err(CliError::schema),
            None => Ok(z),
        }
    }

    pub fn sequence(&self) -> Result<MatrixSequence<f64>, CliError> {
        let horizon = self.options.horizon.unwrap_or(cotrans::difference::DEFAULT_HORIZON);
        let spec = self.sequence.as_ref().ok_or_else(|| CliError::Schema("missing field `sequence`".into()))?;
        let s = match spec {
            SequenceSpec::Constant(rows) => MatrixSequence::constant(matrix(rows)?, horizon),
            SequenceSpec::Periodic(list) => {
                MatrixSequence::periodic(list.iter().map(matrix).collect::<Result<_, _>>()?, horizon)
            }
            SequenceSpec::Random { dim, max_cond } => {
                if *dim == 0 || max_cond.is_nan() || *max_cond < 1.0 {
                    return Err(CliError::Schema("random sequences need dim ≥ 1 and max_cond ≥ 1".into()));
                }
                Ok(MatrixSequence::random(*dim, self.seed, *max_cond, horizon))
            }
        };
        s.map_err(CliError::schema)
    }

    pub fn generator(&self) -> Result<GeneratorFunction, CliError> {
        let spec = self.generator.as_ref().ok_or_else(|| CliError::Schema("missing field `generator`".into()))?;
        let g = match spec {
            GeneratorSpec::Constant(rows) => GeneratorFunction::constant(matrix(rows)?),
            GeneratorSpec::Polynomial(coeffs) => GeneratorFunction::polynomial(coeffs.clone()).map_err(CliError::schema)?,
            GeneratorSpec::Builtin(Builtin::Rotation) => GeneratorFunction::rotation(),
            GeneratorSpec::Builtin(Builtin::TimeRotation) => GeneratorFunction::time_rotation(),
            GeneratorSpec::Builtin(Builtin::SinCos) => GeneratorFunction::sin_cos(),
            GeneratorSpec::Builtin(Builtin::DiagonalT { dim }) => {
                if *dim == 0 {
                    return Err(CliError::Schema("diagonal_t needs dim ≥ 1".into()));
                }
                GeneratorFunction::diagonal_t(*dim)
            }
        };
        Ok(match self.options.fd_step {
            Some(h) => g.with_fd_step(h),
            None => g,
        })
    }

    pub fn partial(&self) -> Result<PartialCotranslation, CliError> {
        let spec = self.partial.as_ref().ok_or_else(|| CliError::Schema("missing field `partial`".into()))?;
        match spec {
            PartialSpec::RandomProduct { dim, rank, max_cond } => {
                if *dim == 0 || max_cond.is_nan() || *max_cond < 1.0 {
                    return Err(CliError::Schema("random partials need dim ≥ 1 and max_cond ≥ 1".into()));
                }
                let p = self.presentation()?;
                Ok(random_product_partial(&p, *dim, *rank, self.seed, *max_cond).map_err(CliError::schema)?.0)
            }
            PartialSpec::Block { dim, start, len } => {
                PartialCotranslation::block(self.presentation()?, *dim, *start, *len).map_err(CliError::schema)
            }
            PartialSpec::Cotranslation => {
                PartialCotranslation::from_cotranslation(&self.cotranslation()?).map_err(CliError::schema)
            }
        }
    }
}

/// A square matrix from row-major rows.
pub fn matrix(rows: &MatrixRows) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Schema("matrices must be square and non-empty".into()));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::Schema("matrix entries must be finite".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn rows(m: &DMatrix<f64>) -> MatrixRows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_mandatory() {
        assert!(ExperimentSpec::from_json(r#"{"example":{"name":"c3_affine"}}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"seed":1,"example":{"name":"c3_affine"}}"#).is_ok());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentSpec::from_json(r#"{"seed":1,"colour":"red"}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"seed":1,"presentation":{"family":"cyclic","n":3,"m":2}}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"seed":1,"sampling":{"radius":2,"radias":3}}"#).is_err());
    }

    #[test]
    fn presentations_round_trip() {
        let text = r#"{"family":"free_product","left":{"family":"cyclic","n":2},"right":{"family":"cyclic","n":3,"names":["b"]}}"#;
        let spec: PresentationSpec = serde_json::from_str(text).unwrap();
        let p = spec.build().unwrap();
        assert_eq!(p.generators(), ["a", "b"]);
        assert_eq!(serde_json::to_string(&spec).unwrap(), text);
    }

    #[test]
    fn table_maps_build_a_cotranslation() {
        let spec = ExperimentSpec::from_json(
            r#"{"seed":0,"presentation":{"family":"cyclic","n":2},"space":{"kind":"euclidean","dim":1},
                "maps":[{"table":{"e":{"affine":{"A":[[1]],"b":[1]}},"a":{"affine":{"A":[[1]],"b":[-1]}}}}]}"#,
        )
        .unwrap();
        let z = spec.cotranslation().unwrap();
        let p = z.presentation().clone();
        let t = z.evaluate(&cotrans::Word::identity(), &p.parse_word("a^2").unwrap()).unwrap();
        assert!(z.distance(&t, &Transform::Identity).unwrap() < 1e-15);
    }

    #[test]
    fn gallery_specs_parse_back() {
        let spec = ExperimentSpec::for_example(Example::C3Affine, 4);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(ExperimentSpec::from_json(&text).unwrap(), spec);
    }

    #[test]
    fn bad_matrices_are_schema_errors() {
        assert!(matrix(&vec![vec![1.0, 2.0]]).is_err());
        assert!(matrix(&vec![]).is_err());
        assert!(matrix(&vec![vec![f64::NAN]]).is_err());
    }
}
