//! Chirp-based joint antenna/frequency/phase index modulation.
//!
//! Per pulse, N_s of N antennas are selected, N_s of K tone slots ride on a
//! shared linear-FM chirp, a permutation decides which selected tone feeds
//! which selected antenna, and each active antenna adds an M-PSK phase.
//! Payload layout per pulse, fixed for round-trip stability:
//! [phase bits | frequency-pattern bits | antenna-pattern bits |
//! permutation bits].
//!
//! The receiver is a block-sparse recovery over an (antenna, frequency)
//! atom dictionary. For a single-antenna user behind a flat channel, the
//! atoms of one frequency block are collinear (they differ by the scalar
//! per-antenna channel response), so the solver picks the N_s strongest
//! frequency blocks, least-squares fits the block coefficients, and then
//! resolves antenna pattern, permutation and phases jointly from the
//! coefficient alphabet.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::RngStream;
use crate::codebook::{
    bits_for_permutation, bits_for_selection, bits_to_value, rank_combination,
    unrank_combination, unrank_permutation, value_to_bits, SelectionPattern,
};
use crate::schemes::{check_bit_len, nearest_psk, psk_bits, psk_point, validate_psk_order};
use crate::schemes::{ImScheme, Result, SchemeError, Transceived};
use crate::waveform::{fmcw_chirp, steering, ArrayGeometry, FmcwSpec, SampledWaveform};

#[derive(Debug, Clone)]
pub struct FracConfig {
    /// Transmit antennas N.
    pub antennas: usize,
    /// Active antennas (and active tone slots) N_s.
    pub active: usize,
    /// Tone slots K on the chirp, spaced by the chirp's frequency step.
    pub slots: usize,
    /// Constellation order for the per-antenna phases.
    pub psk_order: usize,
    /// Pulses per coherent interval.
    pub pulses: usize,
    pub fmcw: FmcwSpec,
    pub sample_rate_hz: f64,
    /// Downlink user direction and scalar channel gain.
    pub user_angle_rad: f64,
    pub user_gain: Complex64,
    pub geometry: ArrayGeometry,
}

impl FracConfig {
    pub fn new(antennas: usize, active: usize, slots: usize, psk_order: usize) -> Result<Self> {
        if active == 0 || active > antennas || active > slots {
            return Err(SchemeError::InvalidParameter(format!(
                "active must satisfy 1 <= active <= min(antennas, slots), got active={active}, antennas={antennas}, slots={slots}"
            )));
        }
        validate_psk_order(psk_order)?;
        // Unit-rate unit-length chirp: the slot spacing 1/(rate * pri)
        // equals 1/pri, making the tone slots exactly orthogonal over the
        // pulse after dechirping.
        let fmcw = FmcwSpec::new(1.0, 1.0, 1.0, slots)?;
        let max_freq = fmcw.chirp_rate * fmcw.chirp_duration_s + slots as f64 * fmcw.freq_step_hz();
        Ok(Self {
            antennas,
            active,
            slots,
            psk_order,
            pulses: 1,
            fmcw,
            sample_rate_hz: 8.0 * max_freq,
            user_angle_rad: 20f64.to_radians(),
            user_gain: Complex64::new(0.9, -0.35),
            geometry: ArrayGeometry::half_wavelength(antennas, 3.0e9),
        })
    }

    pub fn phase_bits(&self) -> usize {
        self.active * psk_bits(self.psk_order)
    }

    pub fn freq_bits(&self) -> usize {
        bits_for_selection(self.active, self.slots).expect("validated") as usize
    }

    pub fn antenna_bits(&self) -> usize {
        bits_for_selection(self.active, self.antennas).expect("validated") as usize
    }

    pub fn permutation_bits(&self) -> usize {
        bits_for_permutation(self.active).expect("validated") as usize
    }

    pub fn bits_per_pulse(&self) -> usize {
        self.phase_bits() + self.freq_bits() + self.antenna_bits() + self.permutation_bits()
    }

    /// Samples per pulse.
    pub fn pulse_samples(&self) -> usize {
        (self.fmcw.pri_s * self.sample_rate_hz).round() as usize
    }
}

/// One pulse's index decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct FracSymbol {
    pub antenna_pattern: SelectionPattern,
    pub freq_pattern: SelectionPattern,
    /// Selected-antenna position i transmits the tone at
    /// `freq_pattern.indices()[permutation[i]]`.
    pub permutation: Vec<usize>,
    /// M-PSK symbol index per selected antenna position.
    pub phases: Vec<u64>,
}

/// Chirped tone atom for a slot: chirp(t) * exp(j 2 pi k step t) truncated
/// to the pulse interval.
fn slot_atom(cfg: &FracConfig, slot: usize) -> Vec<Complex64> {
    let chirp = fmcw_chirp(&cfg.fmcw, cfg.sample_rate_hz).expect("config keeps fs above Nyquist");
    let len = cfg.pulse_samples();
    let omega = 2.0 * std::f64::consts::PI * slot as f64 * cfg.fmcw.freq_step_hz();
    (0..len)
        .map(|m| {
            let t = m as f64 / cfg.sample_rate_hz;
            chirp.samples[m] * Complex64::from_polar(1.0, omega * t)
        })
        .collect()
}

/// Encodes one pulse. Returns the symbol plus one waveform per transmit
/// antenna (silent antennas carry all-zero samples); `start_s` records the
/// pulse offset.
pub fn tx_frac(bits: &[bool], cfg: &FracConfig, pulse: usize) -> Result<(FracSymbol, Vec<SampledWaveform>)> {
    check_bit_len(bits, cfg.bits_per_pulse())?;
    let per = psk_bits(cfg.psk_order);
    let mut cursor = 0usize;
    let phases: Vec<u64> = (0..cfg.active)
        .map(|_| {
            if per == 0 {
                0
            } else {
                let v = bits_to_value(&bits[cursor..cursor + per]);
                cursor += per;
                v
            }
        })
        .collect();
    let freq_rank = bits_to_value(&bits[cursor..cursor + cfg.freq_bits()]);
    cursor += cfg.freq_bits();
    let antenna_rank = bits_to_value(&bits[cursor..cursor + cfg.antenna_bits()]);
    cursor += cfg.antenna_bits();
    let perm_rank = bits_to_value(&bits[cursor..cursor + cfg.permutation_bits()]);

    let freq_pattern = unrank_combination(freq_rank, cfg.active, cfg.slots)?;
    let antenna_pattern = unrank_combination(antenna_rank, cfg.active, cfg.antennas)?;
    let permutation = unrank_permutation(perm_rank, cfg.active)?;

    let len = cfg.pulse_samples();
    let start = pulse as f64 * cfg.fmcw.pri_s;
    let mut waveforms = vec![SampledWaveform::zeros(len, cfg.sample_rate_hz, start); cfg.antennas];
    for (i, &antenna) in antenna_pattern.indices().iter().enumerate() {
        let slot = freq_pattern.indices()[permutation[i]];
        let atom = slot_atom(cfg, slot);
        let phase = psk_point(phases[i], cfg.psk_order);
        waveforms[antenna] = SampledWaveform {
            samples: atom.into_iter().map(|s| s * phase).collect(),
            sample_rate_hz: cfg.sample_rate_hz,
            start_s: start,
        };
    }
    Ok((
        FracSymbol { antenna_pattern, freq_pattern, permutation, phases },
        waveforms,
    ))
}

/// Receiver dictionary: the (antenna, frequency) atom of the block-sparse
/// model factors into a per-antenna channel response times a slot atom, so
/// the two factors are stored separately.
#[derive(Debug, Clone)]
pub struct FracDictionary {
    /// Slot atoms, one per frequency block.
    pub slot_atoms: Vec<Vec<Complex64>>,
    /// Channel response of each transmit antenna at the user.
    pub antenna_gains: Vec<Complex64>,
}

/// Builds the dictionary from the known user channel and array response.
pub fn build_dictionary(cfg: &FracConfig) -> FracDictionary {
    let a = steering(&cfg.geometry, cfg.user_angle_rad).entries;
    FracDictionary {
        slot_atoms: (0..cfg.slots).map(|k| slot_atom(cfg, k)).collect(),
        antenna_gains: a.into_iter().map(|an| cfg.user_gain * an).collect(),
    }
}

fn dot(y: &[Complex64], atom: &[Complex64]) -> Complex64 {
    y.iter().zip(atom).map(|(a, b)| a * b.conj()).sum()
}

/// Block-sparse decoding: select the N_s frequency blocks with the largest
/// matched-filter correlation, least-squares fit the block coefficients on
/// that support, then jointly match antenna pattern, permutation and M-PSK
/// phases against the coefficient alphabet. Always decides; out-of-codebook
/// supports clamp to the last codeword.
pub fn rx_frac(y: &SampledWaveform, cfg: &FracConfig, dict: &FracDictionary) -> Result<Vec<bool>> {
    let len = cfg.pulse_samples();
    if y.samples.len() != len || dict.slot_atoms.iter().any(|a| a.len() != len) {
        return Err(SchemeError::DimensionMismatch(format!(
            "dictionary atoms and observation must have {len} samples"
        )));
    }

    // Stage 1: block selection by correlation magnitude (ties toward the
    // lower slot index).
    let correlations: Vec<Complex64> = dict.slot_atoms.iter().map(|a| dot(&y.samples, a)).collect();
    let mut order: Vec<usize> = (0..cfg.slots).collect();
    order.sort_by(|&i, &j| {
        correlations[j]
            .norm_sqr()
            .partial_cmp(&correlations[i].norm_sqr())
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut support: Vec<usize> = order[..cfg.active].to_vec();
    support.sort_unstable();

    // Stage 2: least squares on the selected support.
    let coefficients = ls_on_support(&y.samples, &support, dict);

    // Stage 3: rank the frequency pattern back to bits.
    let freq_pattern = SelectionPattern::new(support.clone(), cfg.slots).expect("sorted support");
    let freq_limit = (1u64 << cfg.freq_bits()) - 1;
    let freq_rank = rank_combination(&freq_pattern).expect("valid pattern").min(freq_limit);

    // Stage 4: joint antenna/permutation/phase matching on the coefficient
    // alphabet gain(antenna) * psk(phase). Scan order (antenna rank outer,
    // permutation rank inner) fixes tie-breaking toward lower ranks.
    let mut best = (0u64, 0u64, vec![0u64; cfg.active]);
    let mut best_cost = f64::INFINITY;
    for antenna_rank in 0..(1u64 << cfg.antenna_bits()) {
        let antenna_pattern = unrank_combination(antenna_rank, cfg.active, cfg.antennas)?;
        for perm_rank in 0..(1u64 << cfg.permutation_bits()) {
            let perm = unrank_permutation(perm_rank, cfg.active)?;
            let mut inverse = vec![0usize; cfg.active];
            for (i, &j) in perm.iter().enumerate() {
                inverse[j] = i;
            }
            let mut cost = 0.0;
            let mut phases = vec![0u64; cfg.active];
            for (j, &c) in coefficients.iter().enumerate() {
                let i = inverse[j];
                let gain = dict.antenna_gains[antenna_pattern.indices()[i]];
                let sym = if cfg.psk_order == 1 { 0 } else { nearest_psk(c / gain, cfg.psk_order) };
                cost += (c - gain * psk_point(sym, cfg.psk_order)).norm_sqr();
                phases[i] = sym;
            }
            if cost < best_cost {
                best_cost = cost;
                best = (antenna_rank, perm_rank, phases);
            }
        }
    }
    let (antenna_rank, perm_rank, phases) = best;

    let per = psk_bits(cfg.psk_order);
    let mut bits = Vec::with_capacity(cfg.bits_per_pulse());
    for &p in &phases {
        bits.extend(value_to_bits(p, per));
    }
    bits.extend(value_to_bits(freq_rank, cfg.freq_bits()));
    bits.extend(value_to_bits(antenna_rank, cfg.antenna_bits()));
    bits.extend(value_to_bits(perm_rank, cfg.permutation_bits()));
    Ok(bits)
}

/// Least-squares block coefficients for a frequency support (slot order).
pub fn ls_on_support(y: &[Complex64], support: &[usize], dict: &FracDictionary) -> Vec<Complex64> {
    let k = support.len();
    let mut gram = DMatrix::<Complex64>::zeros(k, k);
    let mut rhs = DVector::<Complex64>::zeros(k);
    for (i, &si) in support.iter().enumerate() {
        rhs[i] = dot(y, &dict.slot_atoms[si]);
        for (j, &sj) in support.iter().enumerate() {
            gram[(i, j)] = dot(&dict.slot_atoms[sj], &dict.slot_atoms[si]);
        }
    }
    match gram.lu().solve(&rhs) {
        Some(c) => c.iter().copied().collect(),
        // Degenerate support: fall back to normalized correlations.
        None => support
            .iter()
            .enumerate()
            .map(|(i, &s)| rhs[i] / dot(&dict.slot_atoms[s], &dict.slot_atoms[s]).re)
            .collect(),
    }
}

/// Squared residual of the best least-squares fit on a support; the
/// exhaustive-support oracle minimizes this over all slot subsets.
pub fn support_residual(y: &[Complex64], support: &[usize], dict: &FracDictionary) -> f64 {
    let coefficients = ls_on_support(y, support, dict);
    let mut residual = 0.0;
    for (m, &ys) in y.iter().enumerate() {
        let mut fit = Complex64::new(0.0, 0.0);
        for (i, &s) in support.iter().enumerate() {
            fit += coefficients[i] * dict.slot_atoms[s][m];
        }
        residual += (ys - fit).norm_sqr();
    }
    residual
}

// ---------------------------------------------------------------------------
// Monte-Carlo chain
// ---------------------------------------------------------------------------

/// Waveform-level simulator: the single-antenna user observes the
/// superposition of the selected antennas through the known flat channel.
#[derive(Debug, Clone)]
pub struct FracSim {
    pub cfg: FracConfig,
    dict: FracDictionary,
}

impl FracSim {
    pub fn new(cfg: FracConfig) -> Self {
        let dict = build_dictionary(&cfg);
        Self { cfg, dict }
    }

    pub fn desk_default() -> Self {
        Self::new(FracConfig::new(4, 2, 4, 2).expect("desk-scale config"))
    }

    pub fn dictionary(&self) -> &FracDictionary {
        &self.dict
    }

    /// Noiseless user observation for a payload.
    pub fn clean_observation(&self, bits: &[bool]) -> Result<SampledWaveform> {
        let (_, waveforms) = tx_frac(bits, &self.cfg, 0)?;
        let len = self.cfg.pulse_samples();
        let mut y = SampledWaveform::zeros(len, self.cfg.sample_rate_hz, 0.0);
        for (n, w) in waveforms.iter().enumerate() {
            let gain = self.dict.antenna_gains[n];
            for (o, s) in y.samples.iter_mut().zip(&w.samples) {
                *o += gain * s;
            }
        }
        Ok(y)
    }
}

impl ImScheme for FracSim {
    fn name(&self) -> &'static str {
        "frac"
    }

    fn frame_bits(&self) -> usize {
        self.cfg.bits_per_pulse()
    }

    fn index_bit_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.cfg.phase_bits()];
        mask.extend(vec![
            true;
            self.cfg.freq_bits() + self.cfg.antenna_bits() + self.cfg.permutation_bits()
        ]);
        mask
    }

    fn decoder_input_power(&self) -> f64 {
        // Orthogonal unit-modulus tones through unit-modulus steering:
        // per-sample power N_s |alpha_C|^2.
        self.cfg.active as f64 * self.cfg.user_gain.norm_sqr()
    }

    fn transceive(&self, bits: &[bool], noise_variance: f64, rng: &mut RngStream) -> Transceived {
        let mut y = self.clean_observation(bits).expect("payload length enforced by harness");
        let signal_power = y.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / y.len() as f64;
        if noise_variance > 0.0 {
            for s in &mut y.samples {
                *s += rng.complex_gaussian(noise_variance);
            }
        }
        let decoded = rx_frac(&y, &self.cfg, &self.dict).expect("dictionary matches config");
        Transceived { decoded, signal_power }
    }
}
