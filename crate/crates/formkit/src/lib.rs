//! Exchange formats, seeded samplers and the subcommand layer on top of
//! `formkit-core`.

pub use formkit_core as core;

pub mod commands;
pub mod format;
pub mod random;
pub mod report;
