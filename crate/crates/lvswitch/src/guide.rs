//! The user guide, one module per chapter of `book/`.
//!
//! Each chapter is included verbatim, so the guide renders inside rustdoc
//! and — more importantly — every Rust snippet in the book runs as a
//! doc-test. `cargo test --doc` is what keeps the book honest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/averaging.md")]
pub mod averaging {}

#[doc = include_str!("../../../book/src/boundary.md")]
pub mod boundary_measures {}

#[doc = include_str!("../../../book/src/invasion.md")]
pub mod invasion_rates {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/numerics.md")]
pub mod numerics {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
