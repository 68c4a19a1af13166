//! Exact verification of the Jacquet-Rallis fundamental lemma counting
//! identity over local function fields `F_q((ϖ))`.
//!
//! See the guide in `book/` for a walk through the pipeline.

pub mod algebra;
pub mod error;
pub mod group;
pub mod hermitian;
pub mod instance;
pub mod invariants;
pub mod kspace;
pub mod local_field;
pub mod order;
pub mod submodules;
pub mod verify;

pub use error::{Error, Result};

// The guide's listings run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/local-fields.md")]
    mod local_fields {}
    #[doc = include_str!("../../../book/src/invariants.md")]
    mod invariants {}
    #[doc = include_str!("../../../book/src/orders.md")]
    mod orders {}
    #[doc = include_str!("../../../book/src/hermitian.md")]
    mod hermitian {}
    #[doc = include_str!("../../../book/src/verdicts.md")]
    mod verdicts {}
    #[doc = include_str!("../../../book/src/group.md")]
    mod group {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
