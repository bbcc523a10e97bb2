//! Verification toolkit for three-dimensional Weyl structures.

pub mod cli;
pub mod dkp;
pub mod families;
pub mod fields;
pub mod forms;
pub mod holonomy;
pub mod report;
pub mod sample;
pub mod suite;
pub mod jets;
pub mod oracle;
pub mod weyl;

pub use fields::ScalarField;
pub use jets::{Axis, Jet};
pub use weyl::{FrameMetric, Signature, WeylStructure};
