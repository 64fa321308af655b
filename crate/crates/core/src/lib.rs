//! Exact multilinear algebra and harmonic-space gauge constructions over
//! flat Grassmann backgrounds.

pub mod canonical;
pub mod config;
pub mod derivation;
pub mod exterior;
pub mod gauge;
pub mod harmonic;
pub mod linalg;
pub mod parser;
pub mod poly;
pub mod raising;
pub mod report;
pub mod scalar;
pub mod spectra;
pub mod spin3;
pub mod verify;
pub mod ym;
