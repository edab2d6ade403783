// The guide's code snippets double as doc-tests: each chapter is included as
// module documentation here, so `cargo test --doc` compiles and runs every
// ```rust block in the book. Editing a chapter and breaking a snippet breaks
// the build, which is what keeps prose and API in sync.

#[doc = include_str!("../../../book/src/spectral.md")]
mod spectral_chapter {}

#[doc = include_str!("../../../book/src/projection.md")]
mod projection_chapter {}

#[doc = include_str!("../../../book/src/noise.md")]
mod noise_chapter {}

#[doc = include_str!("../../../book/src/paths.md")]
mod paths_chapter {}

#[doc = include_str!("../../../book/src/solver.md")]
mod solver_chapter {}

#[doc = include_str!("../../../book/src/diagnostics.md")]
mod diagnostics_chapter {}

#[doc = include_str!("../../../book/src/cli.md")]
mod cli_chapter {}
