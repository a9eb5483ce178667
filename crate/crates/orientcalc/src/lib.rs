//! orientcalc: exact symbolic calculus of oriented cohomology theories on
//! truncated graded polynomial models of projective spaces and bundles.
//!
//! The crate is organised around a small exact kernel and a stack of
//! geometric modules on top of it:
//!
//! - [`ring`] — sparse rational polynomials with integer weight grading,
//!   triangular monic quotient relations and weight truncation;
//! - [`fgl`] — one-dimensional commutative formal group laws: presets,
//!   axiom checking, formal inverse, n-series, evaluation on nilpotents;
//! - [`chern`] — splitting-principle Chern calculus (symmetric reduction,
//!   Whitney products, duals, line twists, quotient bundles);
//! - [`projspace`] — cohomology models of projective spaces, products and
//!   projective completions; Thom classes by three routes; diagonal classes;
//! - [`duality`] — the duality matrix calculus: `M_n`, its inverse, Gysin
//!   projection vectors, projection/diagonal matrices, pairing Gram matrix;
//! - [`cobordism`] — classes of projective spaces by three routes,
//!   intersection multiplicities and blow-up matrices;
//! - [`verify`] — replay of the identity suite, used by the CLI.

pub mod chern;
pub mod cobordism;
pub mod duality;
pub mod error;
pub mod fgl;
pub mod projspace;
pub mod ring;
pub mod verify;

pub use error::{Error, Result};
pub use ring::{QuotientRing, Rational, RingElement, Variable};
