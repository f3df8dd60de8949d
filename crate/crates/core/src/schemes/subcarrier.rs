//! OFDM subcarrier index modulation: a per-symbol subset of subcarriers is
//! activated by the index bits, active tones carry M-PSK symbol bits, and
//! the receiver locates the null subcarriers from the frequency-domain
//! grid (smallest-power entries), then ranks the active set back to bits.

use num_complex::Complex64;

use crate::channel::{rayleigh_gains, RngStream};
use crate::codebook::{
    bits_for_selection, bits_to_value, rank_combination, unrank_combination, value_to_bits,
    SelectionPattern,
};
use crate::schemes::{check_bit_len, nearest_psk, psk_bits, psk_point, validate_psk_order};
use crate::schemes::{ImScheme, Result, SchemeError, Transceived};
use crate::waveform::SampledWaveform;

/// OFDM-IM configuration. `psk_order = 1` sends index bits only (active
/// tones carry a constant 1).
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmImConfig {
    /// Total subcarriers K.
    pub subcarriers: usize,
    /// Active subcarriers per symbol.
    pub active: usize,
    /// OFDM symbols per frame.
    pub symbols_per_frame: usize,
    /// Constellation order M (power of two; 1 disables phase modulation).
    pub psk_order: usize,
    /// Symbol duration in seconds.
    pub symbol_duration_s: f64,
    /// Subcarrier frequencies in Hz.
    pub subcarrier_freqs_hz: Vec<f64>,
    /// Sample rate for the time-domain signal.
    pub sample_rate_hz: f64,
    /// Model the channel as i.i.d. per-subcarrier complex gains (known at
    /// the receiver) instead of a pure AWGN grid.
    pub rayleigh_fading: bool,
}

impl OfdmImConfig {
    /// Orthogonal tone grid: f_k = k / T0, sample rate 8 K / T0.
    pub fn new(subcarriers: usize, active: usize, symbols_per_frame: usize, psk_order: usize) -> Result<Self> {
        if active == 0 || active > subcarriers {
            return Err(SchemeError::InvalidParameter(format!(
                "active subcarriers must satisfy 1 <= active <= subcarriers, got active={active}, subcarriers={subcarriers}"
            )));
        }
        if symbols_per_frame == 0 {
            return Err(SchemeError::InvalidParameter("symbols_per_frame must be >= 1".into()));
        }
        validate_psk_order(psk_order)?;
        let t0 = 1.0;
        Ok(Self {
            subcarriers,
            active,
            symbols_per_frame,
            psk_order,
            symbol_duration_s: t0,
            subcarrier_freqs_hz: (0..subcarriers).map(|k| k as f64 / t0).collect(),
            sample_rate_hz: 8.0 * subcarriers as f64 / t0,
            rayleigh_fading: false,
        })
    }

    pub fn index_bits_per_symbol(&self) -> usize {
        bits_for_selection(self.active, self.subcarriers).expect("validated") as usize
    }

    pub fn symbol_bits_per_symbol(&self) -> usize {
        self.active * psk_bits(self.psk_order)
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.index_bits_per_symbol() + self.symbol_bits_per_symbol()
    }

    pub fn bits_per_frame(&self) -> usize {
        self.symbols_per_frame * self.bits_per_symbol()
    }
}

/// Frequency-domain frame: a symbols-by-subcarriers matrix with the active
/// pattern of every symbol. Inactive entries are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmGrid {
    pub symbols: usize,
    pub subcarriers: usize,
    /// Row-major symbols x subcarriers.
    pub values: Vec<Complex64>,
    pub active: Vec<SelectionPattern>,
}

impl OfdmGrid {
    pub fn value(&self, symbol: usize, subcarrier: usize) -> Complex64 {
        self.values[symbol * self.subcarriers + subcarrier]
    }

    pub fn row(&self, symbol: usize) -> &[Complex64] {
        &self.values[symbol * self.subcarriers..(symbol + 1) * self.subcarriers]
    }
}

/// Encodes one frame: per symbol, index bits choose the active set via the
/// selection codebook and symbol bits drive M-PSK values on the active
/// tones. Also renders the baseband waveform (sum of active tones windowed
/// to their symbol interval).
pub fn tx_subcarrier_im(bits: &[bool], cfg: &OfdmImConfig) -> Result<(OfdmGrid, SampledWaveform)> {
    check_bit_len(bits, cfg.bits_per_frame())?;
    let k = cfg.subcarriers;
    let b_idx = cfg.index_bits_per_symbol();
    let bits_per_psk = psk_bits(cfg.psk_order);

    let mut values = vec![Complex64::new(0.0, 0.0); cfg.symbols_per_frame * k];
    let mut active = Vec::with_capacity(cfg.symbols_per_frame);
    let mut cursor = 0usize;
    for b in 0..cfg.symbols_per_frame {
        let rank = bits_to_value(&bits[cursor..cursor + b_idx]);
        cursor += b_idx;
        let pattern = unrank_combination(rank, cfg.active, k)?;
        for &sc in pattern.indices() {
            let symbol = if cfg.psk_order == 1 {
                0
            } else {
                let v = bits_to_value(&bits[cursor..cursor + bits_per_psk]);
                cursor += bits_per_psk;
                v
            };
            values[b * k + sc] = psk_point(symbol, cfg.psk_order);
        }
        active.push(pattern);
    }

    let grid = OfdmGrid { symbols: cfg.symbols_per_frame, subcarriers: k, values, active };
    let waveform = render_waveform(&grid, cfg);
    Ok((grid, waveform))
}

/// Sum of active tones, each windowed by the rectangular symbol interval.
fn render_waveform(grid: &OfdmGrid, cfg: &OfdmImConfig) -> SampledWaveform {
    let fs = cfg.sample_rate_hz;
    let per_symbol = (cfg.symbol_duration_s * fs).round() as usize;
    let mut w = SampledWaveform::zeros(per_symbol * grid.symbols, fs, 0.0);
    for b in 0..grid.symbols {
        for &sc in grid.active[b].indices() {
            let alpha = grid.value(b, sc);
            let omega = 2.0 * std::f64::consts::PI * cfg.subcarrier_freqs_hz[sc];
            for m in 0..per_symbol {
                let t = (b * per_symbol + m) as f64 / fs;
                w.samples[b * per_symbol + m] += alpha * Complex64::from_polar(1.0, omega * t);
            }
        }
    }
    w
}

/// Null-detection output: the declared inactive set per symbol plus the
/// recovered bit payload.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDetection {
    pub nulls: Vec<Vec<usize>>,
    pub bits: Vec<bool>,
}

/// Receiver: per symbol the K - K_s smallest-power entries are declared
/// null (ties broken toward the lower subcarrier index), the active set is
/// ranked back to index bits, and active values demap to the nearest
/// constellation point. Always decides; noise shows up as bit errors.
pub fn rx_null_detect(observed: &[Complex64], cfg: &OfdmImConfig) -> NullDetection {
    let k = cfg.subcarriers;
    assert_eq!(observed.len(), cfg.symbols_per_frame * k, "grid dimensions must match config");
    let b_idx = cfg.index_bits_per_symbol();
    let bits_per_psk = psk_bits(cfg.psk_order);
    let rank_limit = 1u64 << b_idx;

    let mut bits = Vec::with_capacity(cfg.bits_per_frame());
    let mut nulls = Vec::with_capacity(cfg.symbols_per_frame);
    for b in 0..cfg.symbols_per_frame {
        let row = &observed[b * k..(b + 1) * k];
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| {
            row[i]
                .norm_sqr()
                .partial_cmp(&row[j].norm_sqr())
                .unwrap()
                .then(i.cmp(&j))
        });
        let mut null_set: Vec<usize> = order[..k - cfg.active].to_vec();
        null_set.sort_unstable();
        let mut active: Vec<usize> = order[k - cfg.active..].to_vec();
        active.sort_unstable();

        let pattern = SelectionPattern::new(active, k).expect("sorted distinct indices");
        let rank = rank_combination(&pattern).expect("valid pattern").min(rank_limit - 1);
        bits.extend(value_to_bits(rank, b_idx));
        if cfg.psk_order > 1 {
            for &sc in pattern.indices() {
                bits.extend(value_to_bits(nearest_psk(row[sc], cfg.psk_order), bits_per_psk));
            }
        }
        nulls.push(null_set);
    }
    NullDetection { nulls, bits }
}

// ---------------------------------------------------------------------------
// Monte-Carlo chain
// ---------------------------------------------------------------------------

/// Frame simulator operating on the frequency-domain grid (the standard
/// OFDM abstraction: per-subcarrier flat gains plus additive noise).
#[derive(Debug, Clone)]
pub struct SubcarrierImSim {
    pub cfg: OfdmImConfig,
}

impl SubcarrierImSim {
    pub fn new(cfg: OfdmImConfig) -> Self {
        Self { cfg }
    }

    pub fn desk_default() -> Self {
        Self::new(OfdmImConfig::new(4, 2, 4, 2).expect("desk-scale config"))
    }
}

impl ImScheme for SubcarrierImSim {
    fn name(&self) -> &'static str {
        "subcarrier-im"
    }

    fn frame_bits(&self) -> usize {
        self.cfg.bits_per_frame()
    }

    fn index_bit_mask(&self) -> Vec<bool> {
        let mut mask = Vec::with_capacity(self.frame_bits());
        for _ in 0..self.cfg.symbols_per_frame {
            mask.extend(std::iter::repeat_n(true, self.cfg.index_bits_per_symbol()));
            mask.extend(std::iter::repeat_n(false, self.cfg.symbol_bits_per_symbol()));
        }
        mask
    }

    fn decoder_input_power(&self) -> f64 {
        // Unit-modulus constellation on every active tone; fading gains
        // have unit mean-square power.
        1.0
    }

    fn transceive(&self, bits: &[bool], noise_variance: f64, rng: &mut RngStream) -> Transceived {
        let (grid, _) = tx_subcarrier_im(bits, &self.cfg).expect("payload length enforced by harness");
        let k = self.cfg.subcarriers;
        let mut observed = grid.values.clone();

        let gains = if self.cfg.rayleigh_fading {
            Some(rayleigh_gains(k, rng))
        } else {
            None
        };
        if let Some(g) = &gains {
            for b in 0..grid.symbols {
                for sc in 0..k {
                    observed[b * k + sc] *= g[sc];
                }
            }
        }
        let mut signal_power = 0.0;
        let mut active_count = 0usize;
        for (b, pattern) in grid.active.iter().enumerate() {
            for &sc in pattern.indices() {
                signal_power += observed[b * k + sc].norm_sqr();
                active_count += 1;
            }
        }
        signal_power /= active_count as f64;

        if noise_variance > 0.0 {
            for v in &mut observed {
                *v += rng.complex_gaussian(noise_variance);
            }
        }
        // Perfect-CSI equalization before null detection in the fading case.
        if let Some(g) = &gains {
            for b in 0..grid.symbols {
                for sc in 0..k {
                    observed[b * k + sc] /= g[sc];
                }
            }
        }
        let detection = rx_null_detect(&observed, &self.cfg);
        Transceived { decoded: detection.bits, signal_power }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::build_lut;
    use crate::codebook::CodebookSpec;

    #[test]
    fn conventional_mode_has_no_index_bits() {
        let cfg = OfdmImConfig::new(4, 4, 2, 2).unwrap();
        assert_eq!(cfg.index_bits_per_symbol(), 0);
        assert_eq!(cfg.bits_per_symbol(), 4);
        let bits = vec![true, false, false, true, true, true, false, false];
        let (grid, _) = tx_subcarrier_im(&bits, &cfg).unwrap();
        // Every subcarrier active: plain OFDM with BPSK.
        for b in 0..2 {
            assert_eq!(grid.active[b].indices(), &[0, 1, 2, 3]);
        }
    }

    #[test]
    fn index_bits_zero_selects_colex_first_pattern() {
        let cfg = OfdmImConfig::new(4, 2, 1, 1).unwrap();
        let (grid, _) = tx_subcarrier_im(&[false, false], &cfg).unwrap();
        assert_eq!(grid.active[0].indices(), &[0, 1]);
        // Matches the codebook LUT entry 0.
        let lut = build_lut(&CodebookSpec::selection(2, 4).unwrap()).unwrap();
        assert_eq!(grid.active[0], lut[0].pattern);
    }

    #[test]
    fn inactive_entries_are_exactly_zero() {
        let cfg = OfdmImConfig::new(8, 3, 3, 4).unwrap();
        let mut rng = RngStream::new(11, 0);
        let bits = rng.bits(cfg.bits_per_frame());
        let (grid, _) = tx_subcarrier_im(&bits, &cfg).unwrap();
        for b in 0..grid.symbols {
            for sc in 0..8 {
                let v = grid.value(b, sc);
                if grid.active[b].contains(sc) {
                    assert!((v.norm() - 1.0).abs() < 1e-12);
                } else {
                    assert_eq!(v, Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn noiseless_roundtrip_many_random_frames() {
        let cfg = OfdmImConfig::new(4, 2, 4, 2).unwrap();
        let sim = SubcarrierImSim::new(cfg);
        let mut rng = RngStream::new(21, 0);
        for _ in 0..1000 {
            let bits = rng.bits(sim.frame_bits());
            let out = sim.transceive(&bits, 0.0, &mut rng);
            assert_eq!(out.decoded, bits);
        }
    }

    #[test]
    fn noiseless_roundtrip_with_fading() {
        let mut cfg = OfdmImConfig::new(8, 3, 2, 4).unwrap();
        cfg.rayleigh_fading = true;
        let sim = SubcarrierImSim::new(cfg);
        let mut rng = RngStream::new(22, 0);
        for _ in 0..500 {
            let bits = rng.bits(sim.frame_bits());
            let out = sim.transceive(&bits, 0.0, &mut rng);
            assert_eq!(out.decoded, bits);
        }
    }

    #[test]
    fn all_zero_grid_declares_lowest_indices_null() {
        let cfg = OfdmImConfig::new(4, 2, 1, 1).unwrap();
        let observed = vec![Complex64::new(0.0, 0.0); 4];
        let det = rx_null_detect(&observed, &cfg);
        assert_eq!(det.nulls[0], vec![0, 1]);
        // Active set {2,3} has colex rank 5, clamped into the 2-bit codebook.
        assert_eq!(det.bits, vec![true, true]);
    }

    #[test]
    fn transmit_energy_scales_with_active_count() {
        // Per-active-subcarrier power is constant: energy tracks K_s.
        let energies: Vec<f64> = [1usize, 2, 4]
            .iter()
            .map(|&ks| {
                let cfg = OfdmImConfig::new(4, ks, 2, 1).unwrap();
                let mut rng = RngStream::new(3, 0);
                let bits = rng.bits(cfg.bits_per_frame());
                let (_, w) = tx_subcarrier_im(&bits, &cfg).unwrap();
                w.energy()
            })
            .collect();
        let per_active = energies[0];
        assert!((energies[1] - 2.0 * per_active).abs() < 1e-9);
        assert!((energies[2] - 4.0 * per_active).abs() < 1e-9);
    }

    #[test]
    fn index_bit_consumption_matches_selection_bits() {
        let cfg = OfdmImConfig::new(8, 3, 1, 2).unwrap();
        assert_eq!(cfg.index_bits_per_symbol(), 5); // floor(log2 C(3,8)=56)
        assert_eq!(cfg.bits_per_symbol(), 8);
    }

    #[test]
    fn rejects_wrong_payload_length() {
        let cfg = OfdmImConfig::new(4, 2, 1, 2).unwrap();
        assert!(matches!(
            tx_subcarrier_im(&[true; 3], &cfg),
            Err(SchemeError::BitLength { .. })
        ));
    }

    #[test]
    fn ber_improves_with_snr() {
        let sim = SubcarrierImSim::desk_default();
        let count_errors = |snr_db: f64, stream: u64| -> usize {
            let sigma2 = 1.0 / 10f64.powf(snr_db / 10.0);
            let mut rng = RngStream::new(77, stream);
            let mut errors = 0;
            for _ in 0..2000 {
                let bits = rng.bits(sim.frame_bits());
                let out = sim.transceive(&bits, sigma2, &mut rng);
                errors += bits.iter().zip(&out.decoded).filter(|(a, b)| a != b).count();
            }
            errors
        };
        let low = count_errors(0.0, 0);
        let high = count_errors(10.0, 1);
        assert!(high < low, "errors at 10 dB ({high}) should be below 0 dB ({low})");
        assert!(low > 0, "0 dB run should produce some errors");
    }
}
