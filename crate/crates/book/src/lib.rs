// SPDX-License-Identifier: Apache-2.0

//! mdbook cannot run listings that depend on a workspace crate, so every
//! chapter is pulled in here as module docs and `cargo test --doc` runs
//! them. One module per chapter, so a failing listing names its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/tuples.md")]
pub mod tuples {}

#[doc = include_str!("../../../book/src/subscriptions.md")]
pub mod subscriptions {}

#[doc = include_str!("../../../book/src/network.md")]
pub mod network {}

#[doc = include_str!("../../../book/src/roomdj.md")]
pub mod roomdj {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
