//! The chapters of the guide in `book/`, compiled as documentation so that
//! every Rust snippet in the book runs as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/programs.md")]
pub mod programs {}

#[doc = include_str!("../../../book/src/construction.md")]
pub mod construction {}

#[doc = include_str!("../../../book/src/cantor.md")]
pub mod cantor {}

#[doc = include_str!("../../../book/src/normality.md")]
pub mod normality {}

#[doc = include_str!("../../../book/src/generators.md")]
pub mod generators {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/file-formats.md")]
pub mod file_formats {}
