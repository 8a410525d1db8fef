//! Magnetic-induction link model and joint transmit/receive beamforming for
//! tri-directional coil transceivers.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: vectors, coil-triad poses and the receiver orientation sweep.
//! - [`magnetics`]: coil descriptions and the dipole mutual-inductance matrix.
//! - [`circuit`]: receive voltage, receive/transmit power and pathloss.
//! - [`eigen`]: a self-contained 3×3 symmetric eigensolver.
//! - [`optimizer`]: the closed-form current and weight updates and the
//!   alternating loop that combines them.
//! - [`oracle`]: brute-force checks of every closed-form step.
//! - [`experiments`]: strategy comparison, threshold and angle sweeps.
//! - [`config`], [`report`], [`plot`], [`cli`]: the command-line front end.

pub mod circuit;
pub mod cli;
pub mod config;
pub mod eigen;
mod error;
pub mod experiments;
pub mod geometry;
pub mod magnetics;
pub mod optimizer;
pub mod oracle;
pub mod plot;
pub mod report;

pub use circuit::{CombinerWeights, DriveVector, LinkParams};
pub use error::{Error, Result};
pub use experiments::{Scenario, Strategy, SweepResult};
pub use geometry::{FrameMode, SweepAngle, TriadPose, Vec3};
pub use magnetics::{CoilSpec, FormulaMode, MutualMatrix};
pub use optimizer::OptimizationTrace;
