//! Steering vectors, antenna selection matrices and the baseband waveform
//! generators shared by the scheme modules.
//!
//! All continuous-time expressions are discretized at a scenario-level
//! sample rate; constructors pick defaults giving at least 8 samples per
//! cycle of the highest instantaneous frequency. Angles follow the
//! broadside convention: a uniform linear array along one axis with the
//! phase term 2*pi*(d/lambda)*n*sin(theta), so theta = 0 looks broadside.

use num_complex::Complex64;
use thiserror::Error;

use crate::codebook::SelectionPattern;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, PartialEq)]
pub enum WaveformError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sample rate {fs} Hz undersampled for bandwidth {required} Hz")]
    Undersampled { fs: f64, required: f64 },
    #[error("cannot fit {requested} orthogonal waveforms into a time-bandwidth product of {available}")]
    BankTooLarge { requested: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, WaveformError>;

// ---------------------------------------------------------------------------
// Arrays
// ---------------------------------------------------------------------------

/// Uniform linear array description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    /// Antenna count.
    pub elements: usize,
    /// Element spacing in meters.
    pub spacing_m: f64,
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
}

impl ArrayGeometry {
    /// Half-wavelength-spaced array at the given carrier.
    pub fn half_wavelength(elements: usize, carrier_hz: f64) -> Self {
        let lambda = SPEED_OF_LIGHT / carrier_hz;
        Self { elements, spacing_m: lambda / 2.0, carrier_hz }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Element spacing in wavelengths (0.5 for the default geometry).
    pub fn spacing_wavelengths(&self) -> f64 {
        self.spacing_m / self.wavelength()
    }
}

/// Complex array response for a plane wave from a given angle. Entry 0 is
/// exactly 1 and every entry has unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
    pub angle_rad: f64,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Steering vector of `geom` toward `angle_rad`, entry n equal to
/// exp(j 2 pi (d/lambda) n sin(theta)).
pub fn steering(geom: &ArrayGeometry, angle_rad: f64) -> SteeringVector {
    let phase_step = 2.0 * std::f64::consts::PI * geom.spacing_wavelengths() * angle_rad.sin();
    let entries = (0..geom.elements)
        .map(|n| Complex64::from_polar(1.0, phase_step * n as f64))
        .collect();
    SteeringVector { entries, angle_rad }
}

/// Row-selection matrix extracting an `n_s`-element subarray from an
/// `n`-element array: one 1 per row, at most one per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionMatrix {
    /// Column index chosen by each row; entries are distinct.
    chosen: Vec<usize>,
    cols: usize,
}

impl SelectionMatrix {
    pub fn new(chosen: Vec<usize>, cols: usize) -> Result<Self> {
        let mut seen = vec![false; cols];
        for &c in &chosen {
            if c >= cols {
                return Err(WaveformError::InvalidParameter(format!(
                    "selected column {c} outside [0, {cols})"
                )));
            }
            if seen[c] {
                return Err(WaveformError::InvalidParameter(format!(
                    "column {c} selected twice"
                )));
            }
            seen[c] = true;
        }
        Ok(Self { chosen, cols })
    }

    /// Identity selection (every antenna kept, in order).
    pub fn identity(n: usize) -> Self {
        Self { chosen: (0..n).collect(), cols: n }
    }

    /// Builds the subarray selector from a sorted index pattern: row i picks
    /// the i-th smallest selected antenna.
    pub fn from_pattern(pattern: &SelectionPattern) -> Self {
        Self { chosen: pattern.indices().to_vec(), cols: pattern.universe() }
    }

    pub fn rows(&self) -> usize {
        self.chosen.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Column chosen by each row.
    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    /// Q * x: extracts the chosen entries of `x` in row order.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(WaveformError::DimensionMismatch(format!(
                "selection matrix has {} columns but the vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok(self.chosen.iter().map(|&c| x[c]).collect())
    }

    /// Q^T * y: scatters `y` back into a length-`cols` vector with zeros on
    /// unselected antennas.
    pub fn scatter(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.chosen.len() {
            return Err(WaveformError::DimensionMismatch(format!(
                "selection matrix has {} rows but the vector has {} entries",
                self.chosen.len(),
                y.len()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (row, &c) in self.chosen.iter().enumerate() {
            out[c] = y[row];
        }
        Ok(out)
    }
}

/// Steering vector of the sparse array: Q * a(theta).
pub fn sparse_steering(q: &SelectionMatrix, a: &SteeringVector) -> Result<Vec<Complex64>> {
    q.apply(&a.entries)
}

// ---------------------------------------------------------------------------
// Sampled waveforms
// ---------------------------------------------------------------------------

/// Uniformly sampled complex baseband signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub samples: Vec<Complex64>,
    /// Sample rate in Hz.
    pub sample_rate_hz: f64,
    /// Time of the first sample in seconds.
    pub start_s: f64,
}

impl SampledWaveform {
    pub fn zeros(len: usize, sample_rate_hz: f64, start_s: f64) -> Self {
        Self { samples: vec![Complex64::new(0.0, 0.0); len], sample_rate_hz, start_s }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    /// Continuous-time energy approximation: sum |x|^2 dt.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dt()
    }

    /// Continuous-time inner product <self, other> = sum x y^* dt.
    pub fn inner_product(&self, other: &SampledWaveform) -> Result<Complex64> {
        if self.samples.len() != other.samples.len() {
            return Err(WaveformError::DimensionMismatch(format!(
                "inner product of waveforms with {} and {} samples",
                self.samples.len(),
                other.samples.len()
            )));
        }
        let acc: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(acc * self.dt())
    }

    /// In-place sum with `other` (matching grids assumed).
    pub fn add_assign(&mut self, other: &SampledWaveform) {
        debug_assert_eq!(self.samples.len(), other.samples.len());
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += b;
        }
    }

    pub fn scale(&mut self, c: Complex64) {
        for s in &mut self.samples {
            *s *= c;
        }
    }
}

/// Unit rectangle: 1 on [t0, t0 + duration), 0 at and beyond t0 + duration.
/// Returned waveform covers exactly the support.
pub fn rect_window(t0: f64, duration_s: f64, fs: f64) -> Result<SampledWaveform> {
    if duration_s <= 0.0 {
        return Err(WaveformError::InvalidParameter(format!(
            "rectangle duration must be positive, got {duration_s}"
        )));
    }
    let len = (duration_s * fs).round() as usize;
    Ok(SampledWaveform {
        samples: vec![Complex64::new(1.0, 0.0); len],
        sample_rate_hz: fs,
        start_s: t0,
    })
}

// ---------------------------------------------------------------------------
// Chirps
// ---------------------------------------------------------------------------

/// Linear-FM chirp description used by the hybrid chirp-based scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmcwSpec {
    /// Frequency modulation rate in Hz/s.
    pub chirp_rate: f64,
    /// Chirp duration in seconds.
    pub chirp_duration_s: f64,
    /// Pulse repetition interval in seconds; at most the chirp duration,
    /// with the unused tail truncated.
    pub pri_s: f64,
    /// Frequency-slot count.
    pub slots: usize,
}

impl FmcwSpec {
    pub fn new(chirp_rate: f64, chirp_duration_s: f64, pri_s: f64, slots: usize) -> Result<Self> {
        if chirp_rate <= 0.0 {
            return Err(WaveformError::InvalidParameter(format!(
                "chirp rate must be positive, got {chirp_rate}"
            )));
        }
        if pri_s > chirp_duration_s {
            return Err(WaveformError::InvalidParameter(format!(
                "pulse interval {pri_s} s exceeds chirp duration {chirp_duration_s} s"
            )));
        }
        Ok(Self { chirp_rate, chirp_duration_s, pri_s, slots })
    }

    /// Slot spacing 1/(rate * PRI).
    pub fn freq_step_hz(&self) -> f64 {
        1.0 / (self.chirp_rate * self.pri_s)
    }
}

/// Baseband up-chirp exp(j pi rate t^2) sampled over [0, chirp_duration).
pub fn fmcw_chirp(spec: &FmcwSpec, fs: f64) -> Result<SampledWaveform> {
    let required = 2.0 * spec.chirp_rate * spec.chirp_duration_s;
    if fs < required {
        return Err(WaveformError::Undersampled { fs, required });
    }
    let len = (spec.chirp_duration_s * fs).round() as usize;
    let samples = (0..len)
        .map(|m| {
            let t = m as f64 / fs;
            Complex64::from_polar(1.0, std::f64::consts::PI * spec.chirp_rate * t * t)
        })
        .collect();
    Ok(SampledWaveform { samples, sample_rate_hz: fs, start_s: 0.0 })
}

// ---------------------------------------------------------------------------
// Frequency hopping
// ---------------------------------------------------------------------------

/// Hop structure of one pulse interval: H subpulses of length T/H, each
/// carrying one tone code from the available set.
#[derive(Debug, Clone, PartialEq)]
pub struct FhSpec {
    /// Subpulses (hops) per pulse interval.
    pub hops: usize,
    /// Unit frequency step in Hz; code c transmits at c * step.
    pub freq_step_hz: f64,
    /// Subpulse duration in seconds.
    pub hop_duration_s: f64,
    /// Available code set.
    pub codes: Vec<usize>,
}

impl FhSpec {
    /// Canonical spec: codes {0..code_count-1}, hop length pri/hops, tone
    /// spacing hops/pri so tones are exactly orthogonal over one hop.
    pub fn canonical(hops: usize, pri_s: f64, code_count: usize) -> Result<Self> {
        if hops == 0 {
            return Err(WaveformError::InvalidParameter("hop count must be >= 1".into()));
        }
        let hop_duration_s = pri_s / hops as f64;
        Ok(Self {
            hops,
            freq_step_hz: 1.0 / hop_duration_s,
            hop_duration_s,
            codes: (0..code_count).collect(),
        })
    }

    pub fn pri_s(&self) -> f64 {
        self.hop_duration_s * self.hops as f64
    }
}

/// Tone subpulse exp(j 2 pi c step t) windowed to hop `h`, sampled over the
/// whole pulse interval so hops occupy disjoint supports.
pub fn fh_subpulse(code: usize, spec: &FhSpec, hop: usize, fs: f64) -> Result<SampledWaveform> {
    if !spec.codes.contains(&code) {
        return Err(WaveformError::InvalidParameter(format!(
            "code {code} not in the available set"
        )));
    }
    if hop >= spec.hops {
        return Err(WaveformError::InvalidParameter(format!(
            "hop index {hop} outside [0, {})",
            spec.hops
        )));
    }
    let total = (spec.pri_s() * fs).round() as usize;
    let per_hop = (spec.hop_duration_s * fs).round() as usize;
    let mut samples = vec![Complex64::new(0.0, 0.0); total];
    let omega = 2.0 * std::f64::consts::PI * code as f64 * spec.freq_step_hz;
    let support = hop * per_hop..((hop + 1) * per_hop).min(total);
    for (m, s) in samples[support.clone()].iter_mut().enumerate() {
        let t = (support.start + m) as f64 / fs;
        *s = Complex64::from_polar(1.0, omega * t);
    }
    Ok(SampledWaveform { samples, sample_rate_hz: fs, start_s: 0.0 })
}

// ---------------------------------------------------------------------------
// Orthogonal waveform banks
// ---------------------------------------------------------------------------

/// Bank of `count` unit-energy waveforms over [0, duration): complex
/// exponentials at spacing 1/duration, exactly orthogonal over the pulse.
pub fn orthogonal_waveform_bank(count: usize, duration_s: f64, fs: f64) -> Result<Vec<SampledWaveform>> {
    let len = (duration_s * fs).round() as usize;
    if count > len {
        return Err(WaveformError::BankTooLarge { requested: count, available: len });
    }
    let norm = 1.0 / duration_s.sqrt();
    Ok((0..count)
        .map(|n| {
            let samples = (0..len)
                .map(|m| {
                    let phase = 2.0 * std::f64::consts::PI * n as f64 * m as f64 / len as f64;
                    Complex64::from_polar(norm, phase)
                })
                .collect();
            SampledWaveform { samples, sample_rate_hz: fs, start_s: 0.0 }
        })
        .collect())
}

/// Matched-filter bank output: <y, psi_n> for every waveform in the bank.
pub fn matched_filter_bank(y: &SampledWaveform, bank: &[SampledWaveform]) -> Result<Vec<Complex64>> {
    bank.iter().map(|psi| y.inner_product(psi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_geometry(n: usize) -> ArrayGeometry {
        ArrayGeometry::half_wavelength(n, 3.0e9)
    }

    #[test]
    fn steering_broadside_is_all_ones() {
        let a = steering(&test_geometry(6), 0.0);
        for e in &a.entries {
            assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn steering_endfire_two_elements() {
        let a = steering(&test_geometry(2), std::f64::consts::FRAC_PI_2);
        assert!((a.entries[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((a.entries[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn steering_entries_unit_modulus_and_conjugate_symmetric() {
        let geom = test_geometry(8);
        for &theta in &[0.3, -0.7, 1.1] {
            let a = steering(&geom, theta);
            let b = steering(&geom, -theta);
            assert!((a.entries[0] - Complex64::new(1.0, 0.0)).norm() == 0.0);
            for (x, y) in a.entries.iter().zip(&b.entries) {
                assert!((x.norm() - 1.0).abs() < 1e-12);
                assert!((x.conj() - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sparse_steering_matches_direct_indexing() {
        let geom = test_geometry(8);
        let a = steering(&geom, 0.42);
        // All 2-of-8 subarrays against the elementwise indexing oracle.
        for i in 0..8 {
            for j in (i + 1)..8 {
                let p = SelectionPattern::new(vec![i, j], 8).unwrap();
                let q = SelectionMatrix::from_pattern(&p);
                let got = sparse_steering(&q, &a).unwrap();
                assert_eq!(got, vec![a.entries[i], a.entries[j]]);
            }
        }
    }

    #[test]
    fn sparse_steering_respects_row_order() {
        // Rows need not pick columns in ascending order.
        let geom = test_geometry(8);
        let a = steering(&geom, 0.9);
        let q = SelectionMatrix::new(vec![5, 1, 6], 8).unwrap();
        let got = sparse_steering(&q, &a).unwrap();
        assert_eq!(got, vec![a.entries[5], a.entries[1], a.entries[6]]);
        let scattered = q.scatter(&got).unwrap();
        assert_eq!(scattered[5], a.entries[5]);
        assert_eq!(scattered[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn identity_selection_is_identity() {
        let geom = test_geometry(5);
        let a = steering(&geom, -0.2);
        let q = SelectionMatrix::identity(5);
        assert_eq!(sparse_steering(&q, &a).unwrap(), a.entries);
        let q0 = SelectionMatrix::new(vec![0], 5).unwrap();
        let first = sparse_steering(&q0, &a).unwrap();
        assert_eq!(first, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn selection_matrix_rejects_duplicates_and_mismatch() {
        assert!(SelectionMatrix::new(vec![1, 1], 4).is_err());
        assert!(SelectionMatrix::new(vec![4], 4).is_err());
        let q = SelectionMatrix::new(vec![0, 2], 4).unwrap();
        assert!(q.apply(&[Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn rect_window_support() {
        let w = rect_window(1.0, 0.5, 64.0).unwrap();
        assert_eq!(w.len(), 32);
        assert_eq!(w.samples[0], Complex64::new(1.0, 0.0));
        // Half-open support: integral equals the duration within one sample.
        assert!((w.energy() - 0.5).abs() < 1.0 / 64.0);
    }

    #[test]
    fn chirp_starts_at_unity_with_unit_modulus() {
        let spec = FmcwSpec::new(1.0, 1.0, 1.0, 4).unwrap();
        let w = fmcw_chirp(&spec, 64.0).unwrap();
        assert_eq!(w.samples[0], Complex64::new(1.0, 0.0));
        for s in &w.samples {
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chirp_instantaneous_frequency_is_linear() {
        let spec = FmcwSpec::new(4.0, 1.0, 1.0, 4).unwrap();
        let fs = 512.0;
        let w = fmcw_chirp(&spec, fs).unwrap();
        // Phase finite difference / 2pi approximates kappa * t.
        let sweep = spec.chirp_rate * spec.chirp_duration_s;
        for m in 1..w.len() {
            let t_mid = (m as f64 - 0.5) / fs;
            let df = (w.samples[m] * w.samples[m - 1].conj()).arg() / (2.0 * std::f64::consts::PI) * fs;
            assert!(
                (df - spec.chirp_rate * t_mid).abs() <= 0.01 * sweep,
                "inst. freq {df} vs {} at t={t_mid}",
                spec.chirp_rate * t_mid
            );
        }
    }

    #[test]
    fn chirp_phase_is_quadratic() {
        let spec = FmcwSpec::new(2.0, 1.0, 1.0, 4).unwrap();
        let fs = 256.0;
        let w = fmcw_chirp(&spec, fs).unwrap();
        // Second difference of the unwrapped phase is constant for a pure
        // quadratic phase.
        let expected = 2.0 * std::f64::consts::PI * spec.chirp_rate / (fs * fs);
        for m in 2..w.len() {
            let d2 = (w.samples[m] * w.samples[m - 1].conj()
                * (w.samples[m - 1] * w.samples[m - 2].conj()).conj())
            .arg();
            assert!((d2 - expected).abs() < 1e-6 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn chirp_rejects_undersampling() {
        let spec = FmcwSpec::new(100.0, 1.0, 1.0, 4).unwrap();
        assert!(matches!(fmcw_chirp(&spec, 32.0), Err(WaveformError::Undersampled { .. })));
    }

    #[test]
    fn fh_subpulse_zero_code_is_rect() {
        let spec = FhSpec::canonical(2, 1.0, 3).unwrap();
        let fs = 64.0;
        let w = fh_subpulse(0, &spec, 1, fs).unwrap();
        let per_hop = 32;
        for (m, s) in w.samples.iter().enumerate() {
            if (per_hop..2 * per_hop).contains(&m) {
                assert_eq!(*s, Complex64::new(1.0, 0.0));
            } else {
                assert_eq!(*s, Complex64::new(0.0, 0.0));
            }
        }
        // Energy equals the occupied duration.
        assert!((w.energy() - spec.hop_duration_s).abs() < 1e-12);
    }

    #[test]
    fn fh_distinct_codes_are_orthogonal_within_a_hop() {
        let spec = FhSpec::canonical(2, 1.0, 3).unwrap();
        let fs = 96.0;
        for h in 0..2 {
            for c1 in 0..3 {
                for c2 in 0..3 {
                    if c1 == c2 {
                        continue;
                    }
                    let a = fh_subpulse(c1, &spec, h, fs).unwrap();
                    let b = fh_subpulse(c2, &spec, h, fs).unwrap();
                    assert!(a.inner_product(&b).unwrap().norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn fh_rejects_bad_hop_and_code() {
        let spec = FhSpec::canonical(2, 1.0, 3).unwrap();
        assert!(fh_subpulse(0, &spec, 2, 64.0).is_err());
        assert!(fh_subpulse(5, &spec, 0, 64.0).is_err());
    }

    #[test]
    fn waveform_bank_gram_matrix_is_identity() {
        let bank = orthogonal_waveform_bank(4, 1.0, 64.0).unwrap();
        for (i, a) in bank.iter().enumerate() {
            for (j, b) in bank.iter().enumerate() {
                let g = a.inner_product(b).unwrap();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((g.norm() - expected).abs() < 1e-9, "gram[{i}][{j}] = {g}");
            }
        }
    }

    #[test]
    fn waveform_bank_single_entry_has_unit_energy() {
        let bank = orthogonal_waveform_bank(1, 2.0, 32.0).unwrap();
        assert_eq!(bank.len(), 1);
        assert!((bank[0].energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matched_filter_recovers_standard_basis() {
        let bank = orthogonal_waveform_bank(3, 1.0, 48.0).unwrap();
        for (n, psi) in bank.iter().enumerate() {
            let out = matched_filter_bank(psi, &bank).unwrap();
            for (m, v) in out.iter().enumerate() {
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((v.norm() - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bank_too_large_is_rejected() {
        assert!(matches!(
            orthogonal_waveform_bank(65, 1.0, 64.0),
            Err(WaveformError::BankTooLarge { .. })
        ));
    }
}
