//! Toolkit for small-object appearance learning in thermal-infrared to
//! daytime-color translation: occlusion-aware mixing, loss evaluation,
//! feedback sample scheduling and edge/segmentation metrics.

pub mod categories;
pub mod cli;
pub mod config;
pub mod error;
pub mod imagecore;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod oamix;
pub mod scheduler;
pub mod trafficlight;

pub use error::{Error, Result};
