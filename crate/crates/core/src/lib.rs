//! Diagonalizing a basic sequence against computable reals.
//!
//! Given a registry of programs, each presenting an infinite bit sequence
//! (and so a real in `[0, 1]`), this crate builds a strictly increasing
//! `f : N -> N` as the limit of finite stage functions `f_s`, turns it into
//! the basic sequence `q_n = 2^(f(n+1) - f(n))`, and checks with exact
//! arithmetic that no registered real is `Q`-distribution-normal: the orbit
//! `x, q_0 x, q_0 q_1 x, ...` of each registered real spends at least two
//! thirds of its time on one side of `1/2` at infinitely many checkpoints.
//!
//! Modules:
//!
//! - [`programs`]: the registry and step-bounded evaluation
//! - [`construction`]: `f_s`, its limit, `Q`, and the growth bound
//! - [`cantor`]: binary words, Cantor series expansions and orbits
//! - [`normality`]: frequencies, star discrepancy, witnesses
//! - [`generators`]: stock bit sequences (Champernowne, rationals, ...)
//! - [`config`]: registry and oracle files
//!
//! ```
//! use qnormal::construction::{basic_sequence_from, limit_function};
//! use qnormal::generators::GeneratorSpec;
//! use qnormal::normality::witness_check;
//! use qnormal::programs::Registry;
//!
//! let registry = Registry::from_generators([
//!     GeneratorSpec::Periodic(vec![1, 0]),
//!     GeneratorSpec::Champernowne,
//! ])?;
//! let f = limit_function(&registry, 8)?;
//! assert_eq!(&f.values()[..3], &[0, 1, 3]);
//!
//! let q = basic_sequence_from(&f, 2)?;
//! assert_eq!(q.exponents(), Some(vec![1, 2]));
//!
//! for e in 0..2 {
//!     assert!(witness_check(&registry, e, &f)?.passed());
//! }
//! # Ok::<(), qnormal::Error>(())
//! ```

pub mod cantor;
pub mod config;
pub mod construction;
mod error;
pub mod generators;
pub mod normality;
pub mod programs;

pub use error::{Error, Result};
