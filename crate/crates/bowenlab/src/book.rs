//! The user guide, compiled.
//!
//! Each module below holds one chapter of the mdbook under `book/` as its
//! documentation, so every code block in the guide runs as a doc-test and
//! the prose can never drift away from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/symbolic.md")]
pub mod symbolic {}

#[doc = include_str!("../../../book/src/potentials.md")]
pub mod potentials {}

#[doc = include_str!("../../../book/src/pressure.md")]
pub mod pressure {}

#[doc = include_str!("../../../book/src/dimension.md")]
pub mod dimension {}

#[doc = include_str!("../../../book/src/avoidance.md")]
pub mod avoidance {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
