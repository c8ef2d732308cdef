//! End-to-end implementation of an attribute-authorized semantic search
//! scheme over encrypted outsourced data.
//!
//! Document keys are encapsulated with ciphertext-policy attribute-based
//! encryption over threshold access trees ([`cpabe`], [`policy`]);
//! document content is vectorized from conceptual-graph triples
//! ([`semantic`]) and indexed under a secure inner-product encryption
//! ([`knn`]); six protocol roles (KGC, data owner, data user, AMS, CSP,
//! NLPS) run in-process against a file-backed workspace ([`entities`]).

pub mod codec;
pub mod cpabe;
pub mod entities;
pub mod envelope;
pub mod error;
pub mod group;
pub mod knn;
pub mod matrix;
pub mod policy;
pub mod semantic;
pub mod symmetric;

pub use error::{Error, Result};
