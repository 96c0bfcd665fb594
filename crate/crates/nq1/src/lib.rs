//! Exact symbolic kernel for degree-1 NQ-manifolds.
//!
//! Functions on `E[1]` with polynomial rational coefficients, graded vector
//! fields, the two-way dictionary with Lie algebroid data, distributions and
//! their classical `(B, F, nabla)` triples, IM-foliations, quotients, and
//! non-strict actions of strict Lie 2-algebras. Everything is exact; every
//! check is an identity over the rationals.
//!
//! The narrative guide lives in `book/`; its code fences compile and run
//! against this crate as doctests.

pub mod algebroid;
pub mod catalog;
pub mod cli;
pub mod distribution;
pub mod dsl;
pub mod error;
pub mod graded;
pub mod imfoliation;
pub mod lie2;
pub mod linalg;
pub mod poly;
pub mod reduction;
pub mod report;
pub mod sample;
pub mod scalar;
pub mod vector_field;

pub use error::{Error, Result};
pub use graded::{GradedFunction, OddMonomial, Signature};
pub use poly::Poly;
pub use scalar::Rat;
pub use vector_field::{HomologicalCheck, TangentFiberVector, VectorField};

// Run the book's code fences as doctests so the guide stays in sync with
// the crate.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }
    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(GradedFunctions, "../../../book/src/graded-functions.md");
    chapter!(VectorFields, "../../../book/src/vector-fields.md");
    chapter!(AlgebroidDictionary, "../../../book/src/algebroid-dictionary.md");
    chapter!(Distributions, "../../../book/src/distributions.md");
    chapter!(ImFoliations, "../../../book/src/im-foliations.md");
    chapter!(Reduction, "../../../book/src/reduction.md");
    chapter!(Lie2Actions, "../../../book/src/lie2-actions.md");
    chapter!(DslReference, "../../../book/src/dsl-reference.md");
}
