//! Numerical toolkit for 2x2 first-order operators on coordinate charts:
//! symbol calculus, metric and charge extraction, gauge transformations,
//! electromagnetic potentials, orthonormal framings, and spin-structure
//! classification via double-cover path lifting.

pub mod cli;
pub mod csub;
pub mod error;
pub mod expr;
pub mod fields;
pub mod frames;
pub mod gauge;
pub mod mat2;
pub mod problem;
pub mod report;
pub mod spincover;
pub mod symbols;

pub use error::{Error, NodeWitness, Result};
pub use expr::{ComplexExpr, Expr};
pub use fields::{Chart, Mat2Field, VectorField};
pub use mat2::CMat2;
