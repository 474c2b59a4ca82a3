//! Library side of the `gree` command line: documents, scans and
//! verification suites.

pub mod app;
pub mod doc;
pub mod verify;
pub mod scan;
