// Copyright 2026 quditsynth contributors
// SPDX-License-Identifier: Apache-2.0

//! The guide chapters from `book/`, compiled as doc-tests.
//!
//! Each module below inlines one chapter of the mdbook guide, so every
//! Rust snippet in the book runs under `cargo test` and the prose can
//! never drift from the library. The rendered book is built separately
//! with `mdbook build book`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/registers.md")]
pub mod registers {}

#[doc = include_str!("../../../book/src/random-targets.md")]
pub mod random_targets {}

#[doc = include_str!("../../../book/src/lower-bounds.md")]
pub mod lower_bounds {}

#[doc = include_str!("../../../book/src/circuit-search.md")]
pub mod circuit_search {}

#[doc = include_str!("../../../book/src/pulse-control.md")]
pub mod pulse_control {}

#[doc = include_str!("../../../book/src/speed-estimates.md")]
pub mod speed_estimates {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
