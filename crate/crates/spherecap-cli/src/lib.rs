//! Support library for the `spherecap` binary: output emission with a
//! reproducible config header, and the validation suites the `validate`
//! subcommand and the acceptance tests share.

pub mod emit;
pub mod suites;
