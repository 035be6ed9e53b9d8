//! Sensitivity analysis for clock synchronization with squeezed and
//! entangled light over lossy inter-satellite links.
//!
//! - [`sensing`]: closed-form minimum measurable offsets for two-mode
//!   squeezed vacuum, single-mode squeezed vacuum and the standard quantum
//!   limit, plus the advantage boundary.
//! - [`gaussian`]: a small covariance-matrix engine used as an independent
//!   oracle for the noise terms.
//! - [`temporal`]: the fundamental and timing temporal modes and the
//!   first-order offset expansion.
//! - [`link`]: effective transmissivity from simple loss models.
//! - [`sweep`], [`emit`], [`contour`], [`verify`], [`config`]: the experiment
//!   runner behind the `tmsv-sync` binary.

pub mod config;
pub mod contour;
pub mod emit;
pub mod error;
pub mod gaussian;
pub mod link;
pub mod sensing;
pub mod sweep;
pub mod temporal;
pub mod verify;

pub use error::{Error, Result};
