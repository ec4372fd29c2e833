//! The rendered guide, mirrored into rustdoc.
//!
//! Each module below carries one chapter of `book/` as its documentation, so
//! every ```rust block in the book compiles and runs under
//! `cargo test --doc` — the book cannot drift away from the library. Build
//! the standalone HTML version with `mdbook build book` from the workspace
//! root.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/moments.md")]
pub mod moments {}

#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}

#[doc = include_str!("../../../book/src/closed-form.md")]
pub mod closed_form {}

#[doc = include_str!("../../../book/src/fock-oracle.md")]
pub mod fock_oracle {}

#[doc = include_str!("../../../book/src/trajectories.md")]
pub mod trajectories {}

#[doc = include_str!("../../../book/src/ground-state.md")]
pub mod ground_state {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/validation.md")]
pub mod validation {}
