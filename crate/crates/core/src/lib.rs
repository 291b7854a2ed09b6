//! Carathéodory-type constructions of equilibrium and SRB measures on
//! suspension flows over subshifts of finite type, together with an
//! independent transfer-operator oracle.

pub mod config;
pub mod harness;
pub mod holonomy;
pub mod cover;
pub mod cylinder;
pub mod error;
pub mod oracle;
pub mod par;
pub mod points;
pub mod product;
pub mod pushforward;
pub mod report;
pub mod sampling;
pub mod suites;
pub mod symbolic;
pub mod two_sided;

pub use error::{Error, Result};
