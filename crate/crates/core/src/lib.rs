//! Homological fillings of 1-cycles in balls of Cayley 2-complexes, surface
//! diagrams built from 2-chains, and the push-down of fillings in extensions
//! of a group by a free group.

pub mod backend;
pub mod cayley;
pub mod chain;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod extension;
pub mod filling;
pub mod format;
pub mod lp;
pub mod presentation;
pub mod rational;
pub mod surface;
pub mod word;

pub use error::{Error, Result};
