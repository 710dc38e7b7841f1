//! File formats, sequence manifests, reports and the `seqvo` command line
//! built on [`seqvo_core`].
//!
//! - [`imageio`]: 8/16-bit PNG and binary PGM images, `.flo` files.
//! - [`traj`]: TUM, KITTI and GPS/INS trajectory text.
//! - [`manifest`]: versioned JSON sequence manifests.
//! - [`report`]: CSV/JSON reports with provenance.
//! - [`cli`]: the `seqvo` subcommands.

pub mod cli;
pub mod error;
pub mod imageio;
pub mod manifest;
pub mod report;
pub mod traj;

pub use error::{Error, Result};
