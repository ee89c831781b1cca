//! File formats, the line protocol and its transports, and run helpers for
//! the `wildfire` command-line tool.

pub mod catalog;
pub mod protocol;
pub mod run;
pub mod scenario;
pub mod table;
pub mod transport;
