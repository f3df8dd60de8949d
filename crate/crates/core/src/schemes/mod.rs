//! The five index-modulation transceiver chains.
//!
//! Every scheme follows the same shape: a validated config, a transmit
//! operation consuming a fixed-length bit payload, and a receive operation
//! that always produces a decision (decoding errors surface as bit errors,
//! never as panics). The [`ImScheme`] trait packages one full
//! encode -> channel -> decode pass per frame for the Monte-Carlo harness.

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::RngStream;
use crate::codebook::CodebookError;
use crate::waveform::WaveformError;

pub mod antenna;
pub mod fh;
pub mod frac;
pub mod freq_agile;
pub mod spim;
pub mod subcarrier;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("bit payload must be {expected} bits, got {got}")]
    BitLength { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
}

pub type Result<T> = std::result::Result<T, SchemeError>;

pub(crate) fn check_bit_len(bits: &[bool], expected: usize) -> Result<()> {
    if bits.len() != expected {
        return Err(SchemeError::BitLength { expected, got: bits.len() });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// M-PSK symbol mapping
// ---------------------------------------------------------------------------

/// Bits per M-PSK symbol; order 1 means "no phase modulation".
pub fn psk_bits(order: usize) -> usize {
    debug_assert!(order.is_power_of_two());
    order.trailing_zeros() as usize
}

/// Unit-modulus M-PSK point for a symbol index, binary-indexed counter
/// clockwise from 1+0j (order 2 gives {1, -1}).
pub fn psk_point(symbol: u64, order: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * symbol as f64 / order as f64)
}

/// Nearest M-PSK symbol index by angle quantization.
pub fn nearest_psk(z: Complex64, order: usize) -> u64 {
    if order == 1 {
        return 0;
    }
    let step = 2.0 * std::f64::consts::PI / order as f64;
    let m = (z.arg() / step).round() as i64;
    m.rem_euclid(order as i64) as u64
}

/// Validates an M-PSK order (power of two, 1 allowed for index-only modes).
pub fn validate_psk_order(order: usize) -> Result<()> {
    if order == 0 || !order.is_power_of_two() {
        return Err(SchemeError::InvalidParameter(format!(
            "psk order must be a power of two >= 1, got {order}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Monte-Carlo harness interface
// ---------------------------------------------------------------------------

/// Result of one frame pass: the decoded bits plus the measured signal
/// power at the decoder input, used for SNR bookkeeping.
#[derive(Debug, Clone)]
pub struct Transceived {
    pub decoded: Vec<bool>,
    pub signal_power: f64,
}

/// One full per-frame simulation chain, uniform across schemes.
///
/// `noise_variance` is defined at the decoder input; implementations must
/// scale waveform-domain noise so the decoder-input noise power equals it.
/// Implementations are pure given `(bits, noise_variance, rng)` so frames
/// parallelize freely.
pub trait ImScheme: Sync {
    fn name(&self) -> &'static str;

    /// Bits consumed per frame.
    fn frame_bits(&self) -> usize;

    /// Per-position split of the frame payload: `true` marks index bits,
    /// `false` marks constellation (symbol) bits.
    fn index_bit_mask(&self) -> Vec<bool>;

    /// Nominal signal power at the decoder input, used to map a requested
    /// SNR to a noise variance.
    fn decoder_input_power(&self) -> f64;

    /// encode -> channel -> decode for one frame.
    fn transceive(&self, bits: &[bool], noise_variance: f64, rng: &mut RngStream) -> Transceived;
}

/// Desk-scale instances of every scheme, used by the round-trip harness and
/// the acceptance suite. The seed fixes internal channel draws (the
/// spatial-path scheme holds a fixed random channel).
pub fn standard_suite(seed: u64) -> Vec<Box<dyn ImScheme>> {
    vec![
        Box::new(subcarrier::SubcarrierImSim::desk_default()),
        Box::new(antenna::AntennaImSim::desk_default()),
        Box::new(freq_agile::FreqAgileSim::desk_default_distinct()),
        Box::new(freq_agile::FreqAgileSim::desk_default_grouped()),
        Box::new(frac::FracSim::desk_default()),
        Box::new(fh::FhSim::desk_default()),
        Box::new(spim::SpimSim::desk_default(seed)),
    ]
}
