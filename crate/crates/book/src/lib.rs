//! The guide under `book/` as doctests: each chapter is a module so a
//! failing snippet names the chapter it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/signals.md")]
pub mod signals {}
#[doc = include_str!("../../../book/src/descriptors.md")]
pub mod descriptors {}
#[doc = include_str!("../../../book/src/tau.md")]
pub mod tau {}
#[doc = include_str!("../../../book/src/spectral.md")]
pub mod spectral {}
#[doc = include_str!("../../../book/src/fusion.md")]
pub mod fusion {}
#[doc = include_str!("../../../book/src/classify.md")]
pub mod classify {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
