//! Polyharmonic Gaussian fields and their multiplicative chaos on discrete and
//! continuous tori.
//!
//! Fields are represented spectrally by [`SpectralFunction`] over the real
//! eigenbasis and on lattices by [`GridFunction`]. Every random object is keyed
//! by a seed, so results are reproducible across runs and thread counts.

pub mod error;
pub mod fields;
pub mod gmc;
pub mod kernels;
mod mc;
pub mod noise;
pub mod spectrum;
pub mod torus;
pub mod transform;

pub use error::{Error, Result};
pub use fields::{
    empirical_covariance, empirical_covariance_with, extend_field, pairing_error_variance, sample_field,
    sample_field_white_noise, CovarianceEstimate, ErrorVariance, Extension, FieldKind, FieldSample, WhiteNoise,
};
pub use gmc::{
    gmc_weights, hierarchical_convergence, integrate, mass_moment_report, ConvergenceTable, GmcKind, GmcSpec,
    HierarchyConfig, MassMomentReport, MeasureWeights,
};
pub use kernels::{kernel_diag, kernel_profile, BoundKind, BoundTable, GammaThresholds, KernelKind, KernelProfile};
pub use noise::NoiseKey;
pub use torus::{FreqVector, GridShape, LatticePoint, TorusSpec};
pub use transform::{GridFunction, SpectralFunction};
