//! Library surface of the CLI: the exact matrix file format, shared with
//! the integration tests.

pub mod format;
