//! Stochastic channel and noise generation shared by all schemes.
//!
//! Reproducibility contract: every stochastic output is a pure function of
//! a `(seed, stream)` pair. The generator is a counter-based splitmix64
//! stream (documented below) and Gaussians come from Box-Muller on explicit
//! uniform draws, so a reimplementation in any language can match the bit
//! stream exactly:
//!
//! - `state_0 = mix(seed) XOR mix(stream XOR 0x9E3779B97F4A7C15)`
//! - each draw: `state += 0x9E3779B97F4A7C15; output = mix(state)`
//! - `mix(z)`: `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
//!   z *= 0x94D049BB133111EB; z ^= z >> 31`
//! - `uniform = (output >> 11) * 2^-53` in [0, 1)
//! - Box-Muller pair from consecutive uniforms `u1, u2`:
//!   `r = sqrt(-2 ln(1 - u1))`, `z0 = r cos(2 pi u2)`, `z1 = r sin(2 pi u2)`
//! - a complex Gaussian of variance `v` is `(z0 + j z1) * sqrt(v / 2)`.

use num_complex::Complex64;

use crate::waveform::{SampledWaveform, SelectionMatrix, SteeringVector};

const GAMMA: u64 = 0x9E3779B97F4A7C15;

fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58476D1CE4E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D049BB133111EB);
    z ^= z >> 31;
    z
}

/// One independent, reproducible random stream. Streams with distinct ids
/// are independent; Monte-Carlo workers own one stream per trial so thread
/// scheduling can never change results.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { state: mix(seed) ^ mix(stream ^ GAMMA) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw in [0, 1) with 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn bit(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    pub fn bits(&mut self, count: usize) -> Vec<bool> {
        (0..count).map(|_| self.bit()).collect()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: u64) -> u64 {
        // Desk-scale ranges; modulo bias is below 2^-50 for n < 2^13.
        self.next_u64() % n
    }

    /// Standard-normal pair via Box-Muller on two explicit uniform draws.
    pub fn standard_normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        (r * phi.cos(), r * phi.sin())
    }

    /// Circularly-symmetric complex Gaussian with total variance `variance`.
    pub fn complex_gaussian(&mut self, variance: f64) -> Complex64 {
        let (re, im) = self.standard_normal_pair();
        Complex64::new(re, im) * (variance / 2.0).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Noise and fading
// ---------------------------------------------------------------------------

/// Noise power description; SNR is defined as signal power over `variance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
}

impl NoiseSpec {
    pub fn from_snr_db(signal_power: f64, snr_db: f64) -> Self {
        Self { variance: signal_power / 10f64.powf(snr_db / 10.0) }
    }
}

/// Adds i.i.d. circularly-symmetric complex Gaussian noise of the given
/// variance per sample. `variance = 0` returns the input untouched but
/// still leaves the stream untouched as well.
pub fn awgn(x: &[Complex64], variance: f64, rng: &mut RngStream) -> Vec<Complex64> {
    if variance == 0.0 {
        return x.to_vec();
    }
    x.iter().map(|&s| s + rng.complex_gaussian(variance)).collect()
}

/// In-place AWGN on a sampled waveform.
pub fn awgn_waveform(w: &mut SampledWaveform, variance: f64, rng: &mut RngStream) {
    if variance == 0.0 {
        return;
    }
    for s in &mut w.samples {
        *s += rng.complex_gaussian(variance);
    }
}

/// I.i.d. unit-variance complex Gaussian fading gains (Rayleigh envelope).
pub fn rayleigh_gains(count: usize, rng: &mut RngStream) -> Vec<Complex64> {
    (0..count).map(|_| rng.complex_gaussian(1.0)).collect()
}

// ---------------------------------------------------------------------------
// Radar echoes
// ---------------------------------------------------------------------------

/// Point targets seen by the radar: direction plus per-pulse reflection
/// coefficients.
#[derive(Debug, Clone)]
pub struct TargetScene {
    pub targets: Vec<Target>,
}

#[derive(Debug, Clone)]
pub struct Target {
    pub angle_rad: f64,
    /// Reflection coefficient per pulse.
    pub reflectivity: Vec<Complex64>,
}

impl TargetScene {
    pub fn empty() -> Self {
        Self { targets: Vec::new() }
    }
}

/// Synthesizes the receive-array output for one pulse:
/// y_j(t) = sum_r alpha_r (abar^T(theta_r) Psi(t)) atilde_j(theta_r) + noise,
/// where abar = Q a_tx(theta_r) is the sparse transmit steering vector.
///
/// `noise_variance` is the per-sample waveform-domain variance; pass the
/// matched-filter noise power divided by the sample period to model white
/// noise of that spectral density.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_echo(
    scene: &TargetScene,
    q: &SelectionMatrix,
    tx_steering: &dyn Fn(f64) -> SteeringVector,
    rx_steering: &dyn Fn(f64) -> SteeringVector,
    bank: &[SampledWaveform],
    pulse: usize,
    noise_variance: f64,
    rng: &mut RngStream,
) -> Vec<SampledWaveform> {
    let (len, fs) = bank
        .first()
        .map(|w| (w.len(), w.sample_rate_hz))
        .expect("waveform bank must not be empty");
    let n_rx = rx_steering(0.0).len();
    let mut out = vec![SampledWaveform::zeros(len, fs, 0.0); n_rx];

    for target in &scene.targets {
        let alpha = target.reflectivity[pulse];
        let abar = q.apply(&tx_steering(target.angle_rad).entries).expect("selection dims");
        let atilde = rx_steering(target.angle_rad);
        // Scalar waveform abar^T Psi(t).
        let mut composite = vec![Complex64::new(0.0, 0.0); len];
        for (a, psi) in abar.iter().zip(bank) {
            for (c, s) in composite.iter_mut().zip(&psi.samples) {
                *c += a * s;
            }
        }
        for (j, rx) in out.iter_mut().enumerate() {
            let gain = alpha * atilde.entries[j];
            for (o, c) in rx.samples.iter_mut().zip(&composite) {
                *o += gain * c;
            }
        }
    }
    for rx in &mut out {
        awgn_waveform(rx, noise_variance, rng);
    }
    out
}
