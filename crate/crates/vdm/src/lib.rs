//! File formats, experiment drivers and the `vdm` command line on top of
//! [`vdm_core`].

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod mixture;

pub use error::VdmError;
