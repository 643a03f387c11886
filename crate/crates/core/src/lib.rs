//! Period-aware semantic search over entity-linked diachronic corpora.
//!
//! The pipeline runs from a category network ([`kg`]) through temporal
//! classification ([`temporal`]) to sentence-level retrieval ([`corpus`]),
//! with the researcher's choices kept as an auditable log ([`session`]).
//! [`engine`] ties these together and [`service`] exposes them over HTTP.

pub mod config;
pub mod corpus;
pub mod engine;
pub mod kg;
pub mod sample;
pub mod service;
pub mod session;
pub mod temporal;
