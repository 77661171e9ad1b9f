//! Files, generators, reports and the command-line front end for
//! [`tightspan_core`].

pub mod bench;
pub mod check;
pub mod driver;
pub mod format;
pub mod generate;
pub mod report;
