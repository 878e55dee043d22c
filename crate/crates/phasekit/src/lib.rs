//! Phase retrieval and ptychography toolkit.
//!
//! Measurement operators (coded diffraction, ptychography), fixed-point
//! solvers (AP, AAR, HIO, RAAR, Gaussian/Poisson DRS, Wirtinger flow),
//! spectral/null/preprocessed initializers, blind ptychography (ePIE, DM,
//! extended RAAR/DRS, one- and two-loop alternating minimization),
//! desk-scale convex relaxations (PhaseLift, PhaseMax, PhaseLamp), and
//! holographic referenced deconvolution.

pub mod blind;
pub mod convex;
pub mod error;
pub mod fft;
pub mod grid;
pub mod holography;
pub mod init;
pub mod linalg;
pub mod loss_noise;
pub mod masks_scans;
pub mod metrics;
pub mod operators;
pub mod solvers;

pub use error::{PhaseError, Result};
pub use grid::{AmplitudeData, ComplexImage, MeasurementVector};
