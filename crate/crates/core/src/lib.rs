//! Decision problems as partitioning problems.
//!
//! A problem is a formulation `(alternatives, attributes, statement)`; the
//! engine compiles client preference statements into relations, aggregates
//! them across dimensions and partitions the alternatives by ranking,
//! rating, clustering or assignment. The [`process`] module drives the
//! iterative construction of the alternative set itself.

pub mod aggregation;
pub mod cases;
pub mod error;
pub mod expr;
pub mod formulation;
pub mod model;
pub mod primitives;
pub mod process;
pub mod relation;
pub mod service;
pub mod solvers;

pub use error::{Error, Result};
