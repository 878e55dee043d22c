//! Command-line experiment runner for the phasekit library.
//!
//! The binary drives config-described experiments: simulating coded
//! diffraction data, reconstructing from it, blind ptychography, referenced
//! holography, initializer comparisons, and spectral-gap diagnostics. Every
//! run is deterministic given its seed and writes a manifest with the
//! resolved configuration.

pub mod commands;
pub mod config;
pub mod imageio;
pub mod phantom;
