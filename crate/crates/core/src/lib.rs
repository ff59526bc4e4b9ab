//! Diagonal-effect and common-diagonal-effect models for square contingency
//! tables.
//!
//! The crate covers both the toric (monomial) and the mixture form of each
//! model:
//!
//! * [`table`]: exact count/probability tables, moves and sufficient statistics.
//! * [`param`]: parametrizations, normalizing constants and the
//!   quasi-independence fit used by the exact tests.
//! * [`invariants`]: sparse polynomials in the cell variables, every invariant
//!   family, and exact vanishing checks.
//! * [`markov`]: Markov-basis move families, fiber enumeration, connectivity,
//!   the fiber walk and exact conditional tests.
//! * [`membership`]: deciding whether a toric point admits a mixture
//!   representation, and converting between the two forms.
//! * [`toricideal`]: design matrices, integer kernels, Buchberger's algorithm
//!   and saturation, recomputing toric invariants from scratch.
//!
//! All algebra is done over exact rationals; floating point only appears in
//! the fitted expectations and test statistics of [`markov::exact_test`].

pub mod error;
pub mod groebner;
pub mod invariants;
pub mod markov;
pub mod membership;
pub mod param;
pub mod rational;
pub mod table;
pub mod toricideal;

pub use error::{Error, Result};
pub use rational::Q;
pub use table::{CountTable, ModelFamily, ModelForm, ModelDef, Move, MoveFamily, ProbTable};
