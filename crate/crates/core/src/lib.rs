//! Contracting self-similar groups from wreath recursions.
//!
//! A [`RecursionSystem`] fixes an alphabet `X` and, for every generator, a
//! root permutation and one section word per letter. Words act on `X*` as
//! functions, rightmost letter first: `(gh)(v) = g(h(v))`.

pub mod activity;
pub mod backend;
pub mod cli;
pub mod contraction;
pub mod corpus;
pub mod dimension;
pub mod dsl;
pub mod error;
pub mod graphs;
pub mod par;
pub mod recursion;

pub use backend::{BackendDescriptor, BackendKind, Element, FactorSpec, Group, Order, OrderOptions};
pub use error::{Error, ParseError, Result, ValidationError};
pub use recursion::{Alphabet, GeneratorDef, GroupWord, Permutation, RecursionSystem, Sym};
