//! Frequency-hopping hybrid index modulation over (frequency code, initial
//! phase, antenna index) tuples.
//!
//! Each pulse splits into H hops. Per hop, every antenna carries one tone
//! code (codes distinct across antennas within the hop), a BPSK initial
//! phase on top, and a fixed antenna-dependent phase
//! zeta_n = n pi / N - arg(a(theta_r))_n that pre-compensates the steering
//! phase toward the radar look direction. Payload layout per hop:
//! [N initial-phase bits | code-assignment bits], hops in order.

use num_complex::Complex64;

use crate::channel::RngStream;
use crate::codebook::{
    bits_for_arrangement, bits_to_value, rank_arrangement, unrank_arrangement, value_to_bits,
    OrderedAssignment,
};
use crate::schemes::{check_bit_len, ImScheme, Result, SchemeError, Transceived};
use crate::waveform::{fh_subpulse, steering, ArrayGeometry, FhSpec, SampledWaveform};

#[derive(Debug, Clone)]
pub struct FhConfig {
    /// Transmit antennas N.
    pub antennas: usize,
    /// Available tone codes K.
    pub codes: usize,
    pub spec: FhSpec,
    pub sample_rate_hz: f64,
    /// Radar look direction used by the per-antenna phase pre-compensation.
    pub target_angle_rad: f64,
    pub geometry: ArrayGeometry,
}

impl FhConfig {
    pub fn new(antennas: usize, codes: usize, hops: usize) -> Result<Self> {
        if antennas == 0 || antennas > codes {
            return Err(SchemeError::InvalidParameter(format!(
                "hop codes must cover the antennas: 1 <= antennas <= codes, got antennas={antennas}, codes={codes}"
            )));
        }
        let pri = 1.0;
        let spec = FhSpec::canonical(hops, pri, codes)?;
        let max_freq = codes as f64 * spec.freq_step_hz;
        Ok(Self {
            antennas,
            codes,
            spec,
            sample_rate_hz: 8.0 * max_freq,
            target_angle_rad: 30f64.to_radians(),
            geometry: ArrayGeometry::half_wavelength(antennas, 3.0e9),
        })
    }

    pub fn assignment_bits_per_hop(&self) -> usize {
        bits_for_arrangement(self.antennas, self.codes).expect("validated") as usize
    }

    pub fn bits_per_hop(&self) -> usize {
        self.antennas + self.assignment_bits_per_hop()
    }

    pub fn bits_per_pulse(&self) -> usize {
        self.spec.hops * self.bits_per_hop()
    }

    /// Antenna-index phase zeta_n = n pi / N - arg(a(theta_r))_n.
    pub fn antenna_phase(&self, antenna: usize) -> f64 {
        let a = steering(&self.geometry, self.target_angle_rad);
        antenna as f64 * std::f64::consts::PI / self.antennas as f64 - a.entries[antenna].arg()
    }
}

/// Decisions of one hop: which code feeds which antenna plus the BPSK
/// initial-phase bits.
#[derive(Debug, Clone, PartialEq)]
pub struct FhHopSymbol {
    pub code_assignment: OrderedAssignment,
    pub phase_bits: Vec<bool>,
}

impl FhHopSymbol {
    /// Total transmit phase of an antenna in this hop.
    pub fn phase(&self, cfg: &FhConfig, antenna: usize) -> f64 {
        let initial = if self.phase_bits[antenna] { std::f64::consts::PI } else { 0.0 };
        initial + cfg.antenna_phase(antenna)
    }
}

/// Encodes one pulse: per hop, N initial-phase bits then the distinct-code
/// assignment bits. Returns the per-hop symbols and one full-interval
/// waveform per antenna (hops occupy disjoint supports).
pub fn tx_fh(bits: &[bool], cfg: &FhConfig) -> Result<(Vec<FhHopSymbol>, Vec<SampledWaveform>)> {
    check_bit_len(bits, cfg.bits_per_pulse())?;
    let len = (cfg.spec.pri_s() * cfg.sample_rate_hz).round() as usize;
    let mut waveforms = vec![SampledWaveform::zeros(len, cfg.sample_rate_hz, 0.0); cfg.antennas];
    let mut symbols = Vec::with_capacity(cfg.spec.hops);

    for hop in 0..cfg.spec.hops {
        let base = hop * cfg.bits_per_hop();
        let phase_bits: Vec<bool> = bits[base..base + cfg.antennas].to_vec();
        let rank = bits_to_value(&bits[base + cfg.antennas..base + cfg.bits_per_hop()]);
        let assignment = unrank_arrangement(rank, cfg.antennas, cfg.codes)?;
        let codes = assignment.slot_items();
        let symbol = FhHopSymbol { code_assignment: assignment, phase_bits };
        for n in 0..cfg.antennas {
            let sub = fh_subpulse(codes[n], &cfg.spec, hop, cfg.sample_rate_hz)?;
            let rot = Complex64::from_polar(1.0, symbol.phase(cfg, n));
            for (w, s) in waveforms[n].samples.iter_mut().zip(&sub.samples) {
                *w += rot * s;
            }
        }
        symbols.push(symbol);
    }
    Ok((symbols, waveforms))
}

/// Decodes one pulse from per-antenna streams (known unit flat channel per
/// stream, hop timing known). Per hop: a K-slot matched-filter bank per
/// stream, a greedy distinct-code assignment (antennas in index order, each
/// taking its strongest unused code, ties toward the lower code), then the
/// BPSK bit from the residual phase after removing zeta_n. Out-of-codebook
/// assignments clamp to the last codeword.
pub fn rx_fh(streams: &[SampledWaveform], cfg: &FhConfig) -> Result<Vec<bool>> {
    if streams.len() != cfg.antennas {
        return Err(SchemeError::DimensionMismatch(format!(
            "expected {} per-antenna streams, got {}",
            cfg.antennas,
            streams.len()
        )));
    }
    let limit = (1u64 << cfg.assignment_bits_per_hop()) - 1;
    let mut bits = Vec::with_capacity(cfg.bits_per_pulse());

    for hop in 0..cfg.spec.hops {
        // Matched-filter coefficients per (antenna stream, code).
        let mut coefficients = vec![vec![Complex64::new(0.0, 0.0); cfg.codes]; cfg.antennas];
        for (y, row) in streams.iter().zip(&mut coefficients) {
            for (c, slot) in row.iter_mut().enumerate() {
                let atom = fh_subpulse(c, &cfg.spec, hop, cfg.sample_rate_hz)?;
                *slot = y.inner_product(&atom)?;
            }
        }
        // Greedy distinct assignment.
        let mut used = vec![false; cfg.codes];
        let mut codes = Vec::with_capacity(cfg.antennas);
        for coeffs in coefficients.iter() {
            let best = (0..cfg.codes)
                .filter(|&c| !used[c])
                .max_by(|&a, &b| {
                    coeffs[a]
                        .norm_sqr()
                        .partial_cmp(&coeffs[b].norm_sqr())
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .expect("antennas <= codes leaves a free code");
            used[best] = true;
            codes.push(best);
        }
        // BPSK bits from the residual phase after removing zeta.
        for (n, &code) in codes.iter().enumerate() {
            let residual = coefficients[n][code]
                * Complex64::from_polar(1.0, -cfg.antenna_phase(n));
            bits.push(residual.re < 0.0);
        }
        let assignment = OrderedAssignment::from_slot_items(&codes, cfg.codes)?;
        let rank = rank_arrangement(&assignment)?.min(limit);
        bits.extend(value_to_bits(rank, cfg.assignment_bits_per_hop()));
    }

    // Reorder: bits were pushed phase-then-assignment per hop already in
    // payload order because each hop's phase bits precede its assignment
    // bits and hops were processed in order.
    Ok(reorder_hop_bits(bits, cfg))
}

/// rx_fh assembles each hop's phase bits before its assignment bits, which
/// already matches the payload layout; this is the identity and exists to
/// keep the contract explicit.
fn reorder_hop_bits(bits: Vec<bool>, cfg: &FhConfig) -> Vec<bool> {
    debug_assert_eq!(bits.len(), cfg.bits_per_pulse());
    bits
}

// ---------------------------------------------------------------------------
// Monte-Carlo chain
// ---------------------------------------------------------------------------

/// Waveform-level simulator: per-antenna streams through unit flat
/// channels plus AWGN. Initial-phase bits count as symbol bits, code
/// assignments as index bits.
#[derive(Debug, Clone)]
pub struct FhSim {
    pub cfg: FhConfig,
}

impl FhSim {
    pub fn new(cfg: FhConfig) -> Self {
        Self { cfg }
    }

    pub fn desk_default() -> Self {
        Self::new(FhConfig::new(2, 3, 2).expect("desk-scale config"))
    }
}

impl ImScheme for FhSim {
    fn name(&self) -> &'static str {
        "fh"
    }

    fn frame_bits(&self) -> usize {
        self.cfg.bits_per_pulse()
    }

    fn index_bit_mask(&self) -> Vec<bool> {
        let mut mask = Vec::with_capacity(self.frame_bits());
        for _ in 0..self.cfg.spec.hops {
            mask.extend(vec![false; self.cfg.antennas]);
            mask.extend(vec![true; self.cfg.assignment_bits_per_hop()]);
        }
        mask
    }

    fn decoder_input_power(&self) -> f64 {
        // Every antenna transmits a unit-modulus tone in every hop.
        1.0
    }

    fn transceive(&self, bits: &[bool], noise_variance: f64, rng: &mut RngStream) -> Transceived {
        let (_, mut streams) = tx_fh(bits, &self.cfg).expect("payload length enforced by harness");
        let samples: usize = streams.iter().map(|w| w.len()).sum();
        let signal_power = streams
            .iter()
            .flat_map(|w| &w.samples)
            .map(|s| s.norm_sqr())
            .sum::<f64>()
            / samples as f64;
        if noise_variance > 0.0 {
            for w in &mut streams {
                for s in &mut w.samples {
                    *s += rng.complex_gaussian(noise_variance);
                }
            }
        }
        let decoded = rx_fh(&streams, &self.cfg).expect("stream count matches config");
        Transceived { decoded, signal_power }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_rate_example() {
        let cfg = FhConfig::new(2, 3, 2).unwrap();
        assert_eq!(cfg.bits_per_pulse(), 8); // 2 * (2 + floor(log2 6))
    }

    #[test]
    fn zero_initial_phase_leaves_only_zeta() {
        let cfg = FhConfig::new(2, 3, 2).unwrap();
        let bits = vec![false; cfg.bits_per_pulse()];
        let (symbols, _) = tx_fh(&bits, &cfg).unwrap();
        for symbol in &symbols {
            for n in 0..2 {
                let expected = cfg.antenna_phase(n);
                assert!((symbol.phase(&cfg, n) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hops_occupy_disjoint_time_supports() {
        let cfg = FhConfig::new(2, 3, 2).unwrap();
        let fs = cfg.sample_rate_hz;
        for c1 in 0..3 {
            for c2 in 0..3 {
                let a = fh_subpulse(c1, &cfg.spec, 0, fs).unwrap();
                let b = fh_subpulse(c2, &cfg.spec, 1, fs).unwrap();
                assert!(a.inner_product(&b).unwrap().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn noiseless_roundtrip_exhaustive() {
        let cfg = FhConfig::new(2, 3, 2).unwrap();
        let sim = FhSim::new(cfg);
        let width = sim.frame_bits();
        let mut rng = RngStream::new(0, 0);
        for v in 0..(1u64 << width) {
            let bits = value_to_bits(v, width);
            let out = sim.transceive(&bits, 0.0, &mut rng);
            assert_eq!(out.decoded, bits, "codeword {v}");
        }
    }

    #[test]
    fn hops_decode_independently() {
        let cfg = FhConfig::new(2, 3, 2).unwrap();
        let mut rng = RngStream::new(4, 0);
        let bits = rng.bits(cfg.bits_per_pulse());
        let (_, streams) = tx_fh(&bits, &cfg).unwrap();
        let decoded = rx_fh(&streams, &cfg).unwrap();
        assert_eq!(decoded, bits);

        // Swapping the payload of hop 1 only changes hop-1 bits.
        let mut other = bits.clone();
        let per_hop = cfg.bits_per_hop();
        for b in other[per_hop..2 * per_hop].iter_mut() {
            *b = !*b;
        }
        let (_, streams2) = tx_fh(&other, &cfg).unwrap();
        let decoded2 = rx_fh(&streams2, &cfg).unwrap();
        assert_eq!(decoded2[..per_hop], bits[..per_hop]);
        assert_eq!(decoded2[per_hop..], other[per_hop..]);
    }

    #[test]
    fn flipping_one_phase_bit_flips_exactly_that_bit() {
        let cfg = FhConfig::new(2, 3, 2).unwrap();
        let mut rng = RngStream::new(6, 0);
        let bits = rng.bits(cfg.bits_per_pulse());
        let (_, streams) = tx_fh(&bits, &cfg).unwrap();
        let base = rx_fh(&streams, &cfg).unwrap();

        let mut flipped = bits.clone();
        flipped[0] = !flipped[0]; // hop 0, antenna 0 initial phase
        let (_, streams2) = tx_fh(&flipped, &cfg).unwrap();
        let got = rx_fh(&streams2, &cfg).unwrap();
        let diff: Vec<usize> = (0..bits.len()).filter(|&i| base[i] != got[i]).collect();
        assert_eq!(diff, vec![0]);
    }

    #[test]
    fn code_assignment_bits_roundtrip_through_ranking() {
        let cfg = FhConfig::new(2, 3, 2).unwrap();
        for rank in 0..(1u64 << cfg.assignment_bits_per_hop()) {
            let a = unrank_arrangement(rank, 2, 3).unwrap();
            assert_eq!(rank_arrangement(&a).unwrap(), rank);
        }
    }
}
