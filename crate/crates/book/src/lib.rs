//! Guide chapters, compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/likelihood.md")]
pub mod likelihood {}
#[doc = include_str!("../../../book/src/multiscale.md")]
pub mod multiscale {}
#[doc = include_str!("../../../book/src/signatures.md")]
pub mod signatures {}
#[doc = include_str!("../../../book/src/conjecture.md")]
pub mod conjecture {}
#[doc = include_str!("../../../book/src/tfe.md")]
pub mod tfe {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
