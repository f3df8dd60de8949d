//! Sparse-array antenna index modulation: index bits pick which N_s of N
//! antennas transmit the orthogonal waveform bank (optionally scaled by
//! M-PSK symbols), the downlink user matched-filters the bank and decodes
//! the subarray by minimum Euclidean distance, and the radar receiver
//! stacks per-antenna matched-filter outputs into a Kronecker-structured
//! snapshot.

use num_complex::Complex64;

use crate::channel::RngStream;
use crate::codebook::{
    bits_to_value, floor_log2, unrank_combination_sequence, value_to_bits, SelectionPattern,
};
use crate::schemes::{check_bit_len, nearest_psk, psk_bits, psk_point, validate_psk_order};
use crate::schemes::{ImScheme, Result, SchemeError, Transceived};
use crate::waveform::{
    matched_filter_bank, orthogonal_waveform_bank, steering, ArrayGeometry, SampledWaveform,
    SelectionMatrix,
};

#[derive(Debug, Clone)]
pub struct AntennaImConfig {
    /// Transmit antennas N.
    pub antennas: usize,
    /// Selected antennas per pulse N_s.
    pub active: usize,
    /// Receive antennas of the radar array.
    pub rx_antennas: usize,
    /// Constellation order (1 = index modulation only).
    pub psk_order: usize,
    /// Pulses per coherent processing interval.
    pub pulses: usize,
    pub geometry: ArrayGeometry,
    pub pulse_duration_s: f64,
    pub sample_rate_hz: f64,
    /// Downlink user direction.
    pub user_angle_rad: f64,
    /// Scalar user channel (known at the receiver).
    pub user_gain: Complex64,
    /// Optional codebook pruning: keep only subarrays whose broadside
    /// beampattern peak sidelobe stays below this level in dB. Off by
    /// default.
    pub max_sidelobe_db: Option<f64>,
}

impl AntennaImConfig {
    pub fn new(antennas: usize, active: usize, rx_antennas: usize, psk_order: usize) -> Result<Self> {
        if active == 0 || active > antennas {
            return Err(SchemeError::InvalidParameter(format!(
                "selected antennas must satisfy 1 <= active <= antennas, got active={active}, antennas={antennas}"
            )));
        }
        validate_psk_order(psk_order)?;
        Ok(Self {
            antennas,
            active,
            rx_antennas,
            psk_order,
            pulses: 1,
            geometry: ArrayGeometry::half_wavelength(antennas, 3.0e9),
            pulse_duration_s: 1.0,
            sample_rate_hz: 8.0 * active.max(4) as f64,
            user_angle_rad: 25f64.to_radians(),
            user_gain: Complex64::new(0.8, 0.4),
            max_sidelobe_db: None,
        })
    }
}

/// Peak sidelobe of a subarray's broadside pattern relative to its mainlobe,
/// in dB. The mainlobe region |sin(theta)| < 2/N (the full-aperture
/// null-to-null width) is excluded; the rest of a 512-point sin-space grid
/// counts as sidelobes.
pub fn subarray_peak_sidelobe_db(pattern: &SelectionPattern, geometry: &ArrayGeometry) -> f64 {
    let n = geometry.elements as f64;
    let d = geometry.spacing_wavelengths();
    let mainlobe = 2.0 / n;
    let mut peak: f64 = f64::NEG_INFINITY;
    let grid = 512;
    for g in 0..=grid {
        let u = -1.0 + 2.0 * g as f64 / grid as f64;
        if u.abs() < mainlobe {
            continue;
        }
        let af: Complex64 = pattern
            .indices()
            .iter()
            .map(|&k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * d * k as f64 * u))
            .sum();
        peak = peak.max(af.norm() / pattern.len() as f64);
    }
    20.0 * peak.log10()
}

/// One pulse's transmit decision.
#[derive(Debug, Clone)]
pub struct AntennaImPulse {
    pub selection: SelectionMatrix,
    /// M-PSK symbol index per selected antenna (empty when psk_order = 1).
    pub symbols: Vec<u64>,
    /// Per-antenna waveforms (length N; unselected antennas are silent).
    pub waveforms: Vec<SampledWaveform>,
}

/// Precomputed scheme instance: subarray codebook, waveform bank, user
/// steering response.
#[derive(Debug, Clone)]
pub struct AntennaIm {
    pub cfg: AntennaImConfig,
    codebook: Vec<SelectionPattern>,
    index_bits: usize,
    bank: Vec<SampledWaveform>,
    user_steering: Vec<Complex64>,
}

impl AntennaIm {
    pub fn new(cfg: AntennaImConfig) -> Result<Self> {
        let all = unrank_combination_sequence(cfg.active, cfg.antennas)?;
        let kept: Vec<SelectionPattern> = match cfg.max_sidelobe_db {
            None => all,
            Some(limit) => all
                .into_iter()
                .filter(|p| subarray_peak_sidelobe_db(p, &cfg.geometry) <= limit)
                .collect(),
        };
        if kept.is_empty() {
            return Err(SchemeError::InvalidParameter(
                "sidelobe limit rejects every subarray configuration".into(),
            ));
        }
        let index_bits = floor_log2(kept.len() as u128) as usize;
        let codebook: Vec<SelectionPattern> = kept.into_iter().take(1 << index_bits).collect();
        let bank = orthogonal_waveform_bank(cfg.active, cfg.pulse_duration_s, cfg.sample_rate_hz)?;
        let user_steering = steering(&cfg.geometry, cfg.user_angle_rad).entries;
        Ok(Self { cfg, codebook, index_bits, bank, user_steering })
    }

    pub fn index_bits(&self) -> usize {
        self.index_bits
    }

    pub fn symbol_bits(&self) -> usize {
        self.cfg.active * psk_bits(self.cfg.psk_order)
    }

    pub fn bits_per_pulse(&self) -> usize {
        self.index_bits + self.symbol_bits()
    }

    pub fn codebook(&self) -> &[SelectionPattern] {
        &self.codebook
    }

    pub fn bank(&self) -> &[SampledWaveform] {
        &self.bank
    }

    /// Sparse user steering vector for codebook entry `rank`.
    pub fn candidate_response(&self, rank: usize) -> Vec<Complex64> {
        self.codebook[rank]
            .indices()
            .iter()
            .map(|&n| self.user_steering[n])
            .collect()
    }

    /// Encodes one pulse: index bits select the subarray, remaining bits
    /// phase-modulate each selected antenna's waveform.
    pub fn tx(&self, bits: &[bool]) -> Result<AntennaImPulse> {
        check_bit_len(bits, self.bits_per_pulse())?;
        let rank = bits_to_value(&bits[..self.index_bits]) as usize;
        let pattern = &self.codebook[rank];
        let selection = SelectionMatrix::from_pattern(pattern);

        let per = psk_bits(self.cfg.psk_order);
        let symbols: Vec<u64> = (0..self.cfg.active)
            .map(|i| {
                if per == 0 {
                    0
                } else {
                    bits_to_value(&bits[self.index_bits + i * per..self.index_bits + (i + 1) * per])
                }
            })
            .collect();

        let len = self.bank[0].len();
        let fs = self.cfg.sample_rate_hz;
        let mut waveforms = vec![SampledWaveform::zeros(len, fs, 0.0); self.cfg.antennas];
        for (slot, &antenna) in selection.chosen().iter().enumerate() {
            let scale = psk_point(symbols[slot], self.cfg.psk_order);
            let mut w = self.bank[slot].clone();
            w.scale(scale);
            waveforms[antenna] = w;
        }
        Ok(AntennaImPulse { selection, symbols, waveforms })
    }

    /// Joint minimum-distance decoding of the matched-filter snapshot
    /// y = alpha_C (s ⊙ abar) + n: exhaustive over the subarray codebook
    /// with per-entry nearest-symbol detection. Ties break toward the lower
    /// codebook rank. Scaling y by any positive constant cannot change the
    /// decision because every candidate has equal norm.
    pub fn decode(&self, snapshot: &[Complex64]) -> Vec<bool> {
        let normalized: Vec<Complex64> =
            snapshot.iter().map(|y| y / self.cfg.user_gain).collect();
        let per = psk_bits(self.cfg.psk_order);

        let mut best_rank = 0usize;
        let mut best_symbols: Vec<u64> = vec![0; self.cfg.active];
        let mut best_cost = f64::INFINITY;
        for rank in 0..self.codebook.len() {
            let response = self.candidate_response(rank);
            let mut cost = 0.0;
            let mut symbols = Vec::with_capacity(self.cfg.active);
            for (y, a) in normalized.iter().zip(&response) {
                let sym = if per == 0 { 0 } else { nearest_psk(y / a, self.cfg.psk_order) };
                cost += (y - a * psk_point(sym, self.cfg.psk_order)).norm_sqr();
                symbols.push(sym);
            }
            if cost < best_cost {
                best_cost = cost;
                best_rank = rank;
                best_symbols = symbols;
            }
        }

        let mut bits = value_to_bits(best_rank as u64, self.index_bits);
        for &s in &best_symbols {
            bits.extend(value_to_bits(s, per));
        }
        bits
    }
}

/// Matched-filter bank at the single-antenna user: projects the received
/// waveform onto each bank waveform, recovering the scaled sparse steering
/// vector plus filtered noise.
pub fn user_matched_filter(y: &SampledWaveform, bank: &[SampledWaveform]) -> Result<Vec<Complex64>> {
    Ok(matched_filter_bank(y, bank)?)
}

/// Radar receive processing: matched-filters each receive antenna against
/// the bank and stacks the outputs column-major into the
/// (rx_antennas * N_s)-vector sum_r alpha_r [Q a(theta_r)] ⊗ atilde(theta_r).
pub fn radar_receive(
    rx_waveforms: &[SampledWaveform],
    bank: &[SampledWaveform],
) -> Result<Vec<Complex64>> {
    let n_rx = rx_waveforms.len();
    let n_s = bank.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n_rx * n_s];
    for (j, y) in rx_waveforms.iter().enumerate() {
        let mf = matched_filter_bank(y, bank)?;
        for (n, v) in mf.into_iter().enumerate() {
            out[n * n_rx + j] = v;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Monte-Carlo chain
// ---------------------------------------------------------------------------

/// Per-pulse simulator operating on the matched-filter snapshot (the
/// decoder input): y = alpha_C (s ⊙ abar) + CN(0, sigma^2 I). The
/// waveform-level path is exercised by the matched-filter and radar tests.
#[derive(Debug, Clone)]
pub struct AntennaImSim {
    scheme: AntennaIm,
}

impl AntennaImSim {
    pub fn new(scheme: AntennaIm) -> Self {
        Self { scheme }
    }

    pub fn desk_default() -> Self {
        let cfg = AntennaImConfig::new(8, 2, 4, 2).expect("desk-scale config");
        Self::new(AntennaIm::new(cfg).expect("desk-scale scheme"))
    }

    pub fn scheme(&self) -> &AntennaIm {
        &self.scheme
    }

    /// Noiseless decoder-input snapshot for a payload.
    pub fn clean_snapshot(&self, bits: &[bool]) -> Result<Vec<Complex64>> {
        let cfg = &self.scheme.cfg;
        check_bit_len(bits, self.scheme.bits_per_pulse())?;
        let rank = bits_to_value(&bits[..self.scheme.index_bits]) as usize;
        let response = self.scheme.candidate_response(rank);
        let per = psk_bits(cfg.psk_order);
        Ok(response
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let sym = if per == 0 {
                    0
                } else {
                    bits_to_value(&bits[self.scheme.index_bits + i * per..self.scheme.index_bits + (i + 1) * per])
                };
                cfg.user_gain * a * psk_point(sym, cfg.psk_order)
            })
            .collect())
    }
}

impl ImScheme for AntennaImSim {
    fn name(&self) -> &'static str {
        "antenna-im"
    }

    fn frame_bits(&self) -> usize {
        self.scheme.bits_per_pulse()
    }

    fn index_bit_mask(&self) -> Vec<bool> {
        let mut mask = vec![true; self.scheme.index_bits];
        mask.extend(vec![false; self.scheme.symbol_bits()]);
        mask
    }

    fn decoder_input_power(&self) -> f64 {
        self.scheme.cfg.user_gain.norm_sqr()
    }

    fn transceive(&self, bits: &[bool], noise_variance: f64, rng: &mut RngStream) -> Transceived {
        let clean = self.clean_snapshot(bits).expect("payload length enforced by harness");
        let signal_power =
            clean.iter().map(|c| c.norm_sqr()).sum::<f64>() / clean.len() as f64;
        let noisy: Vec<Complex64> = if noise_variance > 0.0 {
            clean.iter().map(|&c| c + rng.complex_gaussian(noise_variance)).collect()
        } else {
            clean
        };
        Transceived { decoded: self.scheme.decode(&noisy), signal_power }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{synthesize_echo, Target, TargetScene};
    use crate::codebook::binomial;

    #[test]
    fn two_antennas_single_selection() {
        let cfg = AntennaImConfig::new(2, 1, 2, 1).unwrap();
        let scheme = AntennaIm::new(cfg).unwrap();
        assert_eq!(scheme.index_bits(), 1);
        let pulse = scheme.tx(&[false]).unwrap();
        assert_eq!(pulse.selection.chosen(), &[0]);
        let pulse = scheme.tx(&[true]).unwrap();
        assert_eq!(pulse.selection.chosen(), &[1]);
    }

    #[test]
    fn full_array_selection_is_pure_phase_modulation() {
        let cfg = AntennaImConfig::new(4, 4, 2, 4).unwrap();
        let scheme = AntennaIm::new(cfg).unwrap();
        assert_eq!(scheme.index_bits(), 0);
        assert_eq!(scheme.bits_per_pulse(), 8);
    }

    #[test]
    fn rate_example_eight_choose_four_qpsk() {
        let cfg = AntennaImConfig::new(8, 4, 2, 4).unwrap();
        let scheme = AntennaIm::new(cfg).unwrap();
        // 4 * log2(4) + floor(log2 C(4,8)=70) = 8 + 6.
        assert_eq!(scheme.bits_per_pulse(), 14);
    }

    #[test]
    fn matched_filter_recovers_sparse_steering() {
        let cfg = AntennaImConfig::new(6, 3, 2, 1).unwrap();
        let scheme = AntennaIm::new(cfg.clone()).unwrap();
        let mut rng = RngStream::new(5, 0);
        let bits = rng.bits(scheme.bits_per_pulse());
        let pulse = scheme.tx(&bits).unwrap();

        // Superpose the selected antennas at the user direction.
        let a = steering(&cfg.geometry, cfg.user_angle_rad).entries;
        let len = scheme.bank()[0].len();
        let mut rxw = SampledWaveform::zeros(len, cfg.sample_rate_hz, 0.0);
        for (n, w) in pulse.waveforms.iter().enumerate() {
            if w.len() == len {
                for (o, s) in rxw.samples.iter_mut().zip(&w.samples) {
                    *o += cfg.user_gain * a[n] * s;
                }
            }
        }
        let snapshot = user_matched_filter(&rxw, scheme.bank()).unwrap();
        let expected: Vec<Complex64> = pulse
            .selection
            .chosen()
            .iter()
            .map(|&n| cfg.user_gain * a[n])
            .collect();
        for (got, want) in snapshot.iter().zip(&expected) {
            assert!((got - want).norm() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn matched_filter_of_zero_input_is_zero() {
        let bank = orthogonal_waveform_bank(3, 1.0, 32.0).unwrap();
        let zero = SampledWaveform::zeros(32, 32.0, 0.0);
        let out = user_matched_filter(&zero, &bank).unwrap();
        assert!(out.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn matched_filter_noise_variance_is_preserved() {
        // White waveform noise of variance sigma^2/dt per sample produces
        // matched-filter outputs of variance sigma^2 per entry.
        let fs = 32.0;
        let bank = orthogonal_waveform_bank(2, 1.0, fs).unwrap();
        let sigma2 = 0.7;
        let mut rng = RngStream::new(0xBEEF, 0);
        let trials = 10_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let mut w = SampledWaveform::zeros(32, fs, 0.0);
            for s in &mut w.samples {
                *s = rng.complex_gaussian(sigma2 * fs);
            }
            let out = user_matched_filter(&w, &bank).unwrap();
            acc += out.iter().map(|v| v.norm_sqr()).sum::<f64>() / out.len() as f64;
        }
        let measured = acc / trials as f64;
        assert!(
            (measured - sigma2).abs() < 0.05 * sigma2,
            "measured {measured} vs sigma^2 {sigma2}"
        );
    }

    #[test]
    fn noiseless_roundtrip_exhaustive_all_codewords() {
        for (n, n_s, m) in [(4, 2, 1), (4, 2, 2), (6, 2, 2), (8, 3, 1)] {
            let cfg = AntennaImConfig::new(n, n_s, 2, m).unwrap();
            let sim = AntennaImSim::new(AntennaIm::new(cfg).unwrap());
            let width = sim.frame_bits();
            let mut rng = RngStream::new(1, 1);
            for v in 0..(1u64 << width) {
                let bits = value_to_bits(v, width);
                let out = sim.transceive(&bits, 0.0, &mut rng);
                assert_eq!(out.decoded, bits, "codeword {v} failed for N={n}, Ns={n_s}, M={m}");
            }
        }
    }

    #[test]
    fn decode_invariant_under_positive_scaling() {
        let sim = AntennaImSim::desk_default();
        let scheme = sim.scheme();
        let mut rng = RngStream::new(33, 0);
        for _ in 0..200 {
            let bits = rng.bits(sim.frame_bits());
            let mut y = sim.clean_snapshot(&bits).unwrap();
            for v in &mut y {
                *v += rng.complex_gaussian(0.05);
            }
            let base = scheme.decode(&y);
            for &c in &[0.1, 3.7, 42.0] {
                let scaled: Vec<Complex64> = y.iter().map(|&v| v * c).collect();
                assert_eq!(scheme.decode(&scaled), base, "scaling by {c} changed the decision");
            }
        }
    }

    #[test]
    fn radar_receive_matches_kronecker_closed_form() {
        let cfg = AntennaImConfig::new(4, 2, 3, 1).unwrap();
        let scheme = AntennaIm::new(cfg.clone()).unwrap();
        let rx_geom = ArrayGeometry::half_wavelength(3, 3.0e9);
        let q = SelectionMatrix::from_pattern(&scheme.codebook()[2]);
        let scene = TargetScene {
            targets: vec![
                Target { angle_rad: 0.6, reflectivity: vec![Complex64::new(0.9, -0.2)] },
                Target { angle_rad: -0.4, reflectivity: vec![Complex64::new(0.3, 0.5)] },
            ],
        };
        let tx = |a: f64| steering(&cfg.geometry, a);
        let rx = |a: f64| steering(&rx_geom, a);
        let mut rng = RngStream::new(0, 0);
        let echoes = synthesize_echo(&scene, &q, &tx, &rx, scheme.bank(), 0, 0.0, &mut rng);
        let got = radar_receive(&echoes, scheme.bank()).unwrap();

        // Closed form: sum_r alpha_r [Q a(theta_r)] ⊗ atilde(theta_r).
        let mut expected = vec![Complex64::new(0.0, 0.0); 3 * 2];
        for t in &scene.targets {
            let abar = q.apply(&steering(&cfg.geometry, t.angle_rad).entries).unwrap();
            let atilde = steering(&rx_geom, t.angle_rad).entries;
            for (n, &u) in abar.iter().enumerate() {
                for (j, &v) in atilde.iter().enumerate() {
                    expected[n * 3 + j] += t.reflectivity[0] * u * v;
                }
            }
        }
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).norm() < 1e-9, "{g} vs {e}");
        }
    }

    #[test]
    fn radar_receive_empty_scene_is_noise_only() {
        let cfg = AntennaImConfig::new(4, 2, 2, 1).unwrap();
        let scheme = AntennaIm::new(cfg.clone()).unwrap();
        let q = SelectionMatrix::from_pattern(&scheme.codebook()[0]);
        let rx_geom = ArrayGeometry::half_wavelength(2, 3.0e9);
        let tx = |a: f64| steering(&cfg.geometry, a);
        let rx = |a: f64| steering(&rx_geom, a);
        let mut rng = RngStream::new(2, 0);
        let echoes = synthesize_echo(&TargetScene::empty(), &q, &tx, &rx, scheme.bank(), 0, 0.0, &mut rng);
        let got = radar_receive(&echoes, scheme.bank()).unwrap();
        assert!(got.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn sidelobe_filter_prunes_codebook() {
        let mut cfg = AntennaImConfig::new(8, 2, 2, 1).unwrap();
        let unfiltered = AntennaIm::new(cfg.clone()).unwrap();
        // Adjacent pairs stay near -0.7 dB; spread pairs hit 0 dB grating
        // lobes, so -0.5 dB keeps only the adjacent ones.
        cfg.max_sidelobe_db = Some(-0.5);
        let filtered = AntennaIm::new(cfg.clone()).unwrap();
        assert!(filtered.codebook().len() < unfiltered.codebook().len());
        assert!(filtered.codebook().len().is_power_of_two());
        for p in filtered.codebook() {
            assert!(subarray_peak_sidelobe_db(p, &cfg.geometry) <= -0.5);
            let w = p.indices();
            assert_eq!(w[1], w[0] + 1, "only adjacent pairs survive: {:?}", w);
        }
    }

    #[test]
    fn binomial_codebook_size() {
        let cfg = AntennaImConfig::new(6, 2, 2, 1).unwrap();
        let scheme = AntennaIm::new(cfg).unwrap();
        let total = binomial(2, 6).unwrap();
        assert!(scheme.codebook().len() as u64 <= total);
        assert_eq!(scheme.codebook().len(), 8); // 2^floor(log2 15)
    }
}
