//! Cotranslations: groupoid morphisms from the left-translations groupoid
//! `G × G` into the automorphisms of a space, with the examples,
//! constructions and verification suites built on them.

pub mod cotranslation;
pub mod difference;
pub mod error;
pub mod evolution;
pub mod gallery;
pub mod group;
pub mod groupoid;
pub mod linalg;
pub mod partial;
pub mod report;
pub mod skew;
pub mod transform;

pub use cotranslation::{Cotranslation, GeneratorMap};
pub use error::{Error, Result};
pub use group::{Group, Letter, Presentation, Side, Word};
pub use report::{Check, Report};
pub use transform::{Affine, Point, Space, Transform};
