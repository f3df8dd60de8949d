//! Full-array frequency-index modulation: every antenna radiates one tone
//! per pulse and the bits live in which tone feeds which antenna.
//!
//! Two modes from the same machinery:
//! - distinct mode (the default): all antennas use different tones, so the
//!   codebook is the set of ordered k-of-n frequency arrangements (an
//!   optional reuse flag lifts the distinctness constraint and yields the
//!   nominal N log2 K rate);
//! - grouped mode: the array splits into equal subarrays, each on its own
//!   tone, so the codebook is a frequency subset times an equal partition.
//!
//! Tones are spaced 1/T and therefore exactly orthogonal over one pulse;
//! the receiver runs a matched tone-filter bank per transmit stream.

use num_complex::Complex64;

use crate::channel::RngStream;
use crate::codebook::{
    bits_for_arrangement, bits_to_value, floor_log2, grouped_assignment_count,
    rank_arrangement, rank_grouped_assignment, unrank_arrangement, unrank_grouped_assignment,
    value_to_bits, OrderedAssignment, SelectionPattern,
};
use crate::schemes::{check_bit_len, ImScheme, Result, SchemeError, Transceived};
use crate::waveform::{ArrayGeometry, SampledWaveform, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqAgileMode {
    /// Distinct tone per antenna (default).
    Distinct,
    /// Independent tone per antenna (frequency reuse allowed).
    Reuse,
    /// Equal subarrays, one tone per group.
    Grouped { groups: usize },
}

#[derive(Debug, Clone)]
pub struct FreqAgileConfig {
    /// Antennas N.
    pub antennas: usize,
    /// Frequency slots K.
    pub slots: usize,
    pub mode: FreqAgileMode,
    /// Pulse repetition interval in seconds.
    pub pri_s: f64,
    pub sample_rate_hz: f64,
    /// Radar look direction used by the per-antenna array weights.
    pub target_angle_rad: f64,
    pub geometry: ArrayGeometry,
}

impl FreqAgileConfig {
    pub fn new(antennas: usize, slots: usize, mode: FreqAgileMode) -> Result<Self> {
        if antennas == 0 || slots == 0 {
            return Err(SchemeError::InvalidParameter(
                "antennas and slots must be >= 1".into(),
            ));
        }
        match mode {
            FreqAgileMode::Distinct if antennas > slots => {
                return Err(SchemeError::InvalidParameter(format!(
                    "distinct mode requires antennas <= slots, got antennas={antennas}, slots={slots}"
                )));
            }
            FreqAgileMode::Grouped { groups } => {
                if groups == 0 || !antennas.is_multiple_of(groups) {
                    return Err(SchemeError::InvalidParameter(format!(
                        "groups must divide antennas, got groups={groups}, antennas={antennas}"
                    )));
                }
                if groups > slots {
                    return Err(SchemeError::InvalidParameter(format!(
                        "grouped mode requires groups <= slots, got groups={groups}, slots={slots}"
                    )));
                }
            }
            _ => {}
        }
        let pri = 1.0;
        Ok(Self {
            antennas,
            slots,
            mode,
            pri_s: pri,
            sample_rate_hz: 8.0 * slots as f64 / pri,
            target_angle_rad: 15f64.to_radians(),
            geometry: ArrayGeometry::half_wavelength(antennas, 3.0e9),
        })
    }

    /// Tone frequency of a slot: k / T, orthogonal over one pulse.
    pub fn slot_freq_hz(&self, slot: usize) -> f64 {
        slot as f64 / self.pri_s
    }

    pub fn bits_per_pulse(&self) -> usize {
        (match self.mode {
            FreqAgileMode::Distinct => {
                bits_for_arrangement(self.antennas, self.slots).expect("validated")
            }
            FreqAgileMode::Reuse => {
                floor_log2((self.slots as u128).pow(self.antennas as u32))
            }
            FreqAgileMode::Grouped { groups } => floor_log2(
                grouped_assignment_count(self.antennas, groups, self.slots).expect("validated")
                    as u128,
            ),
        }) as usize
    }

    /// Array weight toward the target direction at the antenna's own tone.
    pub fn array_weight(&self, antenna: usize, freq_hz: f64) -> Complex64 {
        let phase = 2.0
            * std::f64::consts::PI
            * antenna as f64
            * freq_hz
            * (self.geometry.spacing_m / SPEED_OF_LIGHT)
            * self.target_angle_rad.sin();
        Complex64::from_polar(1.0, phase)
    }
}

/// Per-antenna tone choice for one pulse, with group labels in grouped
/// mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyAssignment {
    /// Tone slot of every antenna.
    pub slot_of_antenna: Vec<usize>,
    /// Group label of every antenna (grouped mode only).
    pub group_of_antenna: Option<Vec<usize>>,
}

/// Encodes one pulse: ranks the payload into a tone assignment and renders
/// the per-antenna waveforms w_n * rect(t/T) * exp(j 2 pi f_n t).
pub fn tx_freq_agile(
    bits: &[bool],
    cfg: &FreqAgileConfig,
) -> Result<(FrequencyAssignment, Vec<SampledWaveform>)> {
    check_bit_len(bits, cfg.bits_per_pulse())?;
    let rank = bits_to_value(bits);
    let assignment = match cfg.mode {
        FreqAgileMode::Distinct => {
            let arrangement = unrank_arrangement(rank, cfg.antennas, cfg.slots)?;
            FrequencyAssignment { slot_of_antenna: arrangement.slot_items(), group_of_antenna: None }
        }
        FreqAgileMode::Reuse => {
            let mut slots = vec![0usize; cfg.antennas];
            let mut v = rank;
            for n in (0..cfg.antennas).rev() {
                slots[n] = (v % cfg.slots as u64) as usize;
                v /= cfg.slots as u64;
            }
            FrequencyAssignment { slot_of_antenna: slots, group_of_antenna: None }
        }
        FreqAgileMode::Grouped { groups } => {
            let (freqs, labels) = unrank_grouped_assignment(rank, cfg.antennas, groups, cfg.slots)?;
            let slots = labels.iter().map(|&g| freqs.indices()[g]).collect();
            FrequencyAssignment { slot_of_antenna: slots, group_of_antenna: Some(labels) }
        }
    };
    let waveforms = render(&assignment, cfg);
    Ok((assignment, waveforms))
}

fn render(assignment: &FrequencyAssignment, cfg: &FreqAgileConfig) -> Vec<SampledWaveform> {
    let fs = cfg.sample_rate_hz;
    let len = (cfg.pri_s * fs).round() as usize;
    assignment
        .slot_of_antenna
        .iter()
        .enumerate()
        .map(|(n, &slot)| {
            let f = cfg.slot_freq_hz(slot);
            let w = cfg.array_weight(n, f);
            let samples = (0..len)
                .map(|m| {
                    let t = m as f64 / fs;
                    w * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * t)
                })
                .collect();
            SampledWaveform { samples, sample_rate_hz: fs, start_s: 0.0 }
        })
        .collect()
}

/// Matched tone-filter magnitudes for one stream: |<y, tone_k>| per slot.
fn tone_filter_magnitudes(y: &SampledWaveform, cfg: &FreqAgileConfig) -> Vec<f64> {
    (0..cfg.slots)
        .map(|slot| {
            let f = cfg.slot_freq_hz(slot);
            let acc: Complex64 = y
                .samples
                .iter()
                .enumerate()
                .map(|(m, &s)| {
                    let t = m as f64 / y.sample_rate_hz;
                    s * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * t)
                })
                .sum();
            acc.norm()
        })
        .collect()
}

/// Decodes one pulse from the per-transmit-stream observations (each stream
/// seen through a known flat channel). Distinct mode assigns each antenna
/// its strongest still-unused slot (antennas in index order, ties toward
/// the lower slot); grouped mode scores every codebook entry with the
/// matched-filter magnitudes. Out-of-codebook detections clamp to the last
/// codeword so a decision is always made.
pub fn rx_freq_agile(streams: &[SampledWaveform], cfg: &FreqAgileConfig) -> Result<Vec<bool>> {
    if streams.len() != cfg.antennas {
        return Err(SchemeError::DimensionMismatch(format!(
            "expected {} per-antenna streams, got {}",
            cfg.antennas,
            streams.len()
        )));
    }
    let width = cfg.bits_per_pulse();
    let limit = (1u64 << width) - 1;
    let magnitudes: Vec<Vec<f64>> = streams.iter().map(|y| tone_filter_magnitudes(y, cfg)).collect();

    let rank = match cfg.mode {
        FreqAgileMode::Distinct => {
            let mut used = vec![false; cfg.slots];
            let mut slots = Vec::with_capacity(cfg.antennas);
            for mags in &magnitudes {
                let best = (0..cfg.slots)
                    .filter(|&k| !used[k])
                    .max_by(|&a, &b| mags[a].partial_cmp(&mags[b]).unwrap().then(b.cmp(&a)))
                    .expect("antennas <= slots leaves a free slot");
                used[best] = true;
                slots.push(best);
            }
            let assignment = OrderedAssignment::from_slot_items(&slots, cfg.slots)?;
            rank_arrangement(&assignment)?.min(limit)
        }
        FreqAgileMode::Reuse => {
            let mut v: u64 = 0;
            for mags in &magnitudes {
                let best = (0..cfg.slots)
                    .max_by(|&a, &b| mags[a].partial_cmp(&mags[b]).unwrap().then(b.cmp(&a)))
                    .unwrap();
                v = v * cfg.slots as u64 + best as u64;
            }
            v.min(limit)
        }
        FreqAgileMode::Grouped { groups } => {
            let mut best_rank = 0u64;
            let mut best_score = f64::NEG_INFINITY;
            for r in 0..=limit {
                let (freqs, labels) = unrank_grouped_assignment(r, cfg.antennas, groups, cfg.slots)?;
                let score: f64 = labels
                    .iter()
                    .enumerate()
                    .map(|(n, &g)| magnitudes[n][freqs.indices()[g]])
                    .sum();
                if score > best_score {
                    best_score = score;
                    best_rank = r;
                }
            }
            best_rank
        }
    };
    Ok(value_to_bits(rank, width))
}

/// Reconstructs the codebook rank of a known assignment (test support and
/// the exact-count reporting path).
pub fn assignment_rank(assignment: &FrequencyAssignment, cfg: &FreqAgileConfig) -> Result<u64> {
    match cfg.mode {
        FreqAgileMode::Distinct => {
            let a = OrderedAssignment::from_slot_items(&assignment.slot_of_antenna, cfg.slots)?;
            Ok(rank_arrangement(&a)?)
        }
        FreqAgileMode::Reuse => Ok(assignment
            .slot_of_antenna
            .iter()
            .fold(0u64, |acc, &s| acc * cfg.slots as u64 + s as u64)),
        FreqAgileMode::Grouped { .. } => {
            let labels = assignment
                .group_of_antenna
                .as_ref()
                .ok_or_else(|| SchemeError::InvalidParameter("missing group labels".into()))?;
            let mut freqs: Vec<usize> = assignment.slot_of_antenna.clone();
            freqs.sort_unstable();
            freqs.dedup();
            let pattern = SelectionPattern::new(freqs, cfg.slots)?;
            Ok(rank_grouped_assignment(&pattern, labels)?)
        }
    }
}

// ---------------------------------------------------------------------------
// Monte-Carlo chain
// ---------------------------------------------------------------------------

/// Waveform-level simulator: per-antenna streams through unit flat
/// channels plus AWGN. All payload bits are index bits.
#[derive(Debug, Clone)]
pub struct FreqAgileSim {
    pub cfg: FreqAgileConfig,
    name: &'static str,
}

impl FreqAgileSim {
    pub fn new(cfg: FreqAgileConfig) -> Self {
        let name = match cfg.mode {
            FreqAgileMode::Grouped { .. } => "majorcom-grouped",
            _ => "majorcom",
        };
        Self { cfg, name }
    }

    pub fn desk_default_distinct() -> Self {
        Self::new(FreqAgileConfig::new(4, 8, FreqAgileMode::Distinct).expect("desk-scale config"))
    }

    pub fn desk_default_grouped() -> Self {
        Self::new(
            FreqAgileConfig::new(4, 4, FreqAgileMode::Grouped { groups: 2 }).expect("desk-scale config"),
        )
    }
}

impl ImScheme for FreqAgileSim {
    fn name(&self) -> &'static str {
        self.name
    }

    fn frame_bits(&self) -> usize {
        self.cfg.bits_per_pulse()
    }

    fn index_bit_mask(&self) -> Vec<bool> {
        vec![true; self.frame_bits()]
    }

    fn decoder_input_power(&self) -> f64 {
        // Unit-modulus tone times unit-modulus array weight per sample.
        1.0
    }

    fn transceive(&self, bits: &[bool], noise_variance: f64, rng: &mut RngStream) -> Transceived {
        let (_, mut streams) = tx_freq_agile(bits, &self.cfg).expect("payload length enforced by harness");
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
        let decoded = rx_freq_agile(&streams, &self.cfg).expect("stream count matches config");
        Transceived { decoded, signal_power }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_antenna_two_slots_is_one_bit() {
        let cfg = FreqAgileConfig::new(1, 2, FreqAgileMode::Distinct).unwrap();
        assert_eq!(cfg.bits_per_pulse(), 1);
        let (a0, _) = tx_freq_agile(&[false], &cfg).unwrap();
        let (a1, _) = tx_freq_agile(&[true], &cfg).unwrap();
        assert_eq!(a0.slot_of_antenna, vec![0]);
        assert_eq!(a1.slot_of_antenna, vec![1]);
    }

    #[test]
    fn two_antennas_three_slots_has_two_bits() {
        let cfg = FreqAgileConfig::new(2, 3, FreqAgileMode::Distinct).unwrap();
        assert_eq!(cfg.bits_per_pulse(), 2); // floor(log2 6)
    }

    #[test]
    fn broadside_weights_are_unity() {
        let mut cfg = FreqAgileConfig::new(2, 4, FreqAgileMode::Distinct).unwrap();
        cfg.target_angle_rad = 0.0;
        let mut rng = RngStream::new(1, 0);
        let bits = rng.bits(cfg.bits_per_pulse());
        let (assignment, waveforms) = tx_freq_agile(&bits, &cfg).unwrap();
        for (n, w) in waveforms.iter().enumerate() {
            let f = cfg.slot_freq_hz(assignment.slot_of_antenna[n]);
            assert!((cfg.array_weight(n, f) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            assert_eq!(w.samples[0], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn distinct_mode_never_reuses_a_slot() {
        let cfg = FreqAgileConfig::new(4, 8, FreqAgileMode::Distinct).unwrap();
        let mut rng = RngStream::new(9, 0);
        for _ in 0..200 {
            let bits = rng.bits(cfg.bits_per_pulse());
            let (assignment, _) = tx_freq_agile(&bits, &cfg).unwrap();
            let mut slots = assignment.slot_of_antenna.clone();
            slots.sort_unstable();
            slots.dedup();
            assert_eq!(slots.len(), 4);
        }
    }

    #[test]
    fn tone_filters_are_orthogonal_over_a_pulse() {
        let cfg = FreqAgileConfig::new(1, 4, FreqAgileMode::Distinct).unwrap();
        // A pure slot-j tone produces exactly one nonzero filter output.
        for j in 0..4 {
            let fs = cfg.sample_rate_hz;
            let len = (cfg.pri_s * fs).round() as usize;
            let f = cfg.slot_freq_hz(j);
            let samples = (0..len)
                .map(|m| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * m as f64 / fs))
                .collect();
            let y = SampledWaveform { samples, sample_rate_hz: fs, start_s: 0.0 };
            let mags = tone_filter_magnitudes(&y, &cfg);
            for (k, m) in mags.iter().enumerate() {
                if k == j {
                    assert!(*m > 1.0);
                } else {
                    assert!(*m < 1e-9, "slot {k} leakage {m}");
                }
            }
        }
    }

    #[test]
    fn noiseless_roundtrip_exhaustive_distinct() {
        for (n, k) in [(1, 2), (2, 3), (2, 4), (3, 4)] {
            let cfg = FreqAgileConfig::new(n, k, FreqAgileMode::Distinct).unwrap();
            let width = cfg.bits_per_pulse();
            for v in 0..(1u64 << width) {
                let bits = value_to_bits(v, width);
                let (_, streams) = tx_freq_agile(&bits, &cfg).unwrap();
                assert_eq!(rx_freq_agile(&streams, &cfg).unwrap(), bits, "N={n} K={k} v={v}");
            }
        }
    }

    #[test]
    fn noiseless_roundtrip_exhaustive_grouped() {
        let cfg = FreqAgileConfig::new(4, 4, FreqAgileMode::Grouped { groups: 2 }).unwrap();
        assert_eq!(cfg.bits_per_pulse(), 5); // floor(log2 36)
        let width = cfg.bits_per_pulse();
        for v in 0..(1u64 << width) {
            let bits = value_to_bits(v, width);
            let (assignment, streams) = tx_freq_agile(&bits, &cfg).unwrap();
            // Exactly 2 antennas per group, groups on distinct tones.
            let labels = assignment.group_of_antenna.as_ref().unwrap();
            for g in 0..2 {
                assert_eq!(labels.iter().filter(|&&l| l == g).count(), 2);
            }
            assert_eq!(rx_freq_agile(&streams, &cfg).unwrap(), bits, "v={v}");
        }
    }

    #[test]
    fn single_group_collapses_to_shared_tone() {
        let cfg = FreqAgileConfig::new(4, 4, FreqAgileMode::Grouped { groups: 1 }).unwrap();
        assert_eq!(cfg.bits_per_pulse(), 2); // floor(log2 K)
        let (assignment, _) = tx_freq_agile(&[true, false], &cfg).unwrap();
        let slots = &assignment.slot_of_antenna;
        assert!(slots.iter().all(|&s| s == slots[0]));
    }

    #[test]
    fn reuse_mode_roundtrip_and_rate() {
        let cfg = FreqAgileConfig::new(2, 4, FreqAgileMode::Reuse).unwrap();
        assert_eq!(cfg.bits_per_pulse(), 4); // floor(2 log2 4)
        for v in 0..16u64 {
            let bits = value_to_bits(v, 4);
            let (assignment, streams) = tx_freq_agile(&bits, &cfg).unwrap();
            assert_eq!(assignment_rank(&assignment, &cfg).unwrap(), v);
            assert_eq!(rx_freq_agile(&streams, &cfg).unwrap(), bits);
        }
    }

    #[test]
    fn single_tone_detection_survives_20db_noise() {
        let cfg = FreqAgileConfig::new(1, 4, FreqAgileMode::Distinct).unwrap();
        let sim = FreqAgileSim::new(cfg);
        let sigma2 = 10f64.powf(-2.0); // 20 dB below unit signal power
        let mut rng = RngStream::new(0x70AD, 0);
        let trials = 10_000;
        let mut correct = 0;
        for _ in 0..trials {
            let bits = rng.bits(sim.frame_bits());
            let out = sim.transceive(&bits, sigma2, &mut rng);
            if out.decoded == bits {
                correct += 1;
            }
        }
        assert!(correct as f64 >= 0.99 * trials as f64, "correct {correct}/{trials}");
    }
}
