//! Engine for the ftklipse forensics workbench.
//!
//! The crate is organised the way an investigation flows: a [`datastore`]
//! persists serialized cases behind a swappable adapter, [`casework`] owns
//! cases, evidence and the chain of custody, [`rendering`] turns evidence
//! bytes into hex/ASCII/Unicode views, [`toolkit`] registers and runs
//! external tools from manifest files, and [`reporting`] turns a case into
//! LaTeX or HTML. [`audit_log`] is the application-level operations log.

#![forbid(unsafe_code)]

pub mod audit_log;
pub mod casework;
pub mod datastore;
pub mod error;
pub mod rendering;
pub mod reporting;
pub mod time;
pub mod toolkit;

pub use casework::{
    Case, Casework, CustodyEvent, Evidence, FrontMatter, Note, Operation, Region,
    VerificationResult,
};
pub use datastore::{AdapterKind, CaseRecord, Store};
pub use error::{Error, ErrorClass, Result};
