//! Compiles the guide's chapters as doc-tests so every snippet in `book/`
//! stays in sync with the library. Each module below is one chapter; the
//! chapter text is its documentation, and `cargo test` runs the code
//! blocks.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/language.md")]
pub mod language {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/planning.md")]
pub mod planning {}

#[doc = include_str!("../../../book/src/cost-model.md")]
pub mod cost_model {}

#[doc = include_str!("../../../book/src/sip.md")]
pub mod sip {}

#[doc = include_str!("../../../book/src/sharing.md")]
pub mod sharing {}

#[doc = include_str!("../../../book/src/aggregates.md")]
pub mod aggregates {}

#[doc = include_str!("../../../book/src/diffs.md")]
pub mod diffs {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
