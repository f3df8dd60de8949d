//! Desk-scale physical-layer simulator for index-modulated dual-function
//! radar-communication systems.
//!
//! Information bits are modulated onto resource indices (active
//! subcarriers, antenna subarrays, tone assignments, hop codes, spatial
//! paths) on top of conventional phase modulation, transmitted through the
//! matching waveform model, and demodulated by the per-scheme receivers.
//! The crate provides:
//!
//! - [`codebook`]: exact combinatorics and the bit <-> index bijections
//!   every scheme shares, plus the per-scheme rate formulas;
//! - [`waveform`]: steering vectors, selection matrices, chirps, hop
//!   subpulses, orthogonal waveform banks;
//! - [`channel`]: reproducible RNG streams, AWGN, Rayleigh gains, radar
//!   echo synthesis;
//! - [`schemes`]: the five transceiver chains (subcarrier, antenna,
//!   frequency-agile, chirp hybrid, frequency hopping, spatial path);
//! - [`metrics`]: Monte-Carlo BER, spectral-efficiency and beampattern
//!   sweeps, round-trip harness;
//! - [`trace`]: the formula-to-code map rendered into `docs/paper-map.md`.

pub mod channel;
pub mod codebook;
pub mod metrics;
pub mod schemes;
pub mod trace;
pub mod waveform;

// Math dependencies re-exported so downstream crates stay on one version.
pub use nalgebra;
pub use num_complex;

pub use channel::RngStream;
pub use codebook::{CodebookError, SelectionPattern};
pub use schemes::{ImScheme, SchemeError};
pub use waveform::{SampledWaveform, WaveformError};
