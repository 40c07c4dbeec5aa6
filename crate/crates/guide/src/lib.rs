//! The book under `book/src`, one module per chapter, so that `cargo test --doc`
//! runs every Rust snippet. mdbook itself cannot run snippets against workspace
//! crates.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/exact-otoc.md")]
pub mod exact_otoc {}
#[doc = include_str!("../../../book/src/spin-chains.md")]
pub mod spin_chains {}
#[doc = include_str!("../../../book/src/long-time-averages.md")]
pub mod long_time_averages {}
#[doc = include_str!("../../../book/src/channels.md")]
pub mod channels {}
#[doc = include_str!("../../../book/src/sampling.md")]
pub mod sampling {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
