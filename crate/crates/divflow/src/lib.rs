//! Regularized traces on parametric symbol algebras, relative Chern characters
//! and the divisor flow of elliptic families.
//!
//! The crate is organised bottom-up:
//!
//! * [`clifford`] builds complex Clifford representations used for suspensions.
//! * [`field`] and [`symbol`] carry matrix-valued symbols with explicit
//!   asymptotic expansions at infinity.
//! * [`regint`] computes regularized integrals over `R^p`.
//! * [`forms`] provides symbol-valued differential forms with the regularized
//!   trace and its boundary functional.
//! * [`cyclic`] implements chains, the Hochschild and Connes operators and the
//!   Chern character formulas.
//! * [`flows`] computes spectral flow, eta invariants and the divisor flow.
//! * [`harness`] and [`verify`] back the `divflow` command line tool.

pub mod clifford;
pub mod cyclic;
pub mod error;
pub mod field;
pub mod flows;
pub mod forms;
pub mod harness;
pub mod linalg;
pub mod poly;
pub mod quad;
pub mod regint;
pub mod symbol;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
