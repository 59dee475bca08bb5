//! Toolchain for the Chips component-description language.
//!
//! The pipeline is [`frontend`] (tokens, AST, pretty printer), [`sema`]
//! (names, types, wiring, hardware descriptors), [`automata`] (one
//! automaton per block plus plug connectors, joined by rendezvous
//! interactions) and [`runtime`] (a deterministic scheduler and builtins).
//! [`corpus`] ships the Adaptable TeaStore model and its experiment.

pub mod automata;
pub mod corpus;
pub mod diag;
pub mod frontend;
pub mod ir;
pub mod runtime;
pub mod sema;
pub mod value;

pub use diag::{Diagnostic, FileId, Severity, SourceMap, Span};
pub use value::Value;
