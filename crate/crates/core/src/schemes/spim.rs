//! Spatial-path index modulation with hybrid analog/digital beamformers.
//!
//! The analog stage steers one column per radar path and one per selected
//! user path, F_RF = [F_R | F_C^(i)]; the index bits pick which L_s of the
//! L_C user paths are wired to RF chains (the spatial pattern). The
//! baseband stage splits power between the radar and communication chains
//! with the trade-off parameter eta: fraction 1 - eta to the radar chains
//! and eta to the communication chains, then Frobenius-normalizes so
//! ||F_RF F_BB||_F^2 = N_S. eta -> 1 therefore suppresses the beampattern
//! at the target direction and eta -> 0 at the user paths.
//!
//! Spectral efficiency uses the pattern-mixture determinant expression with
//! Sigma_i = I + (1/(sigma^2 N_S)) H F_i F_i^H H^H, evaluated through
//! Cholesky log-determinants and a log-sum-exp reduction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::RngStream;
use crate::codebook::{bits_for_selection, bits_to_value, unrank_combination, value_to_bits, SelectionPattern};
use crate::schemes::{check_bit_len, psk_bits, psk_point, validate_psk_order};
use crate::schemes::{ImScheme, Result, SchemeError, Transceived};
use crate::waveform::{steering, ArrayGeometry};

#[derive(Debug, Clone)]
pub struct SpimConfig {
    /// Transmit antennas N.
    pub tx_antennas: usize,
    /// User receive antennas.
    pub rx_antennas: usize,
    /// Radar path directions (L_R).
    pub radar_angles_rad: Vec<f64>,
    /// User path directions (L_C).
    pub user_angles_rad: Vec<f64>,
    /// Selected user paths per pattern (L_s).
    pub selected_paths: usize,
    /// Data streams N_S <= L_s + L_R.
    pub data_streams: usize,
    /// Constellation order of the data streams.
    pub psk_order: usize,
    /// Noise variance used by direct SE evaluations.
    pub noise_variance: f64,
    /// Radar-communication trade-off in [0, 1]; 1 puts all baseband power
    /// on the communication chains.
    pub eta: f64,
    pub geometry: ArrayGeometry,
    pub rx_geometry: ArrayGeometry,
}

impl SpimConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tx_antennas: usize,
        rx_antennas: usize,
        radar_angles_rad: Vec<f64>,
        user_angles_rad: Vec<f64>,
        selected_paths: usize,
        data_streams: usize,
        psk_order: usize,
        eta: f64,
    ) -> Result<Self> {
        if selected_paths == 0 || selected_paths > user_angles_rad.len() {
            return Err(SchemeError::InvalidParameter(format!(
                "selected paths must satisfy 1 <= selected <= user paths, got selected={selected_paths}, user paths={}",
                user_angles_rad.len()
            )));
        }
        let chains = selected_paths + radar_angles_rad.len();
        if data_streams == 0 || data_streams > chains {
            return Err(SchemeError::InvalidParameter(format!(
                "data streams must satisfy 1 <= streams <= RF chains, got streams={data_streams}, chains={chains}"
            )));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(SchemeError::InvalidParameter(format!(
                "eta must lie in [0, 1], got {eta}"
            )));
        }
        validate_psk_order(psk_order)?;
        let mut all = radar_angles_rad.clone();
        all.extend(&user_angles_rad);
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if (a - b).abs() < 1e-9 {
                    return Err(SchemeError::InvalidParameter(
                        "radar and user path angles must be distinct".into(),
                    ));
                }
            }
        }
        Ok(Self {
            tx_antennas,
            rx_antennas,
            radar_angles_rad,
            user_angles_rad,
            selected_paths,
            data_streams,
            psk_order,
            noise_variance: 0.1,
            eta,
            geometry: ArrayGeometry::half_wavelength(tx_antennas, 28.0e9),
            rx_geometry: ArrayGeometry::half_wavelength(rx_antennas, 28.0e9),
        })
    }

    pub fn radar_paths(&self) -> usize {
        self.radar_angles_rad.len()
    }

    pub fn user_paths(&self) -> usize {
        self.user_angles_rad.len()
    }

    pub fn rf_chains(&self) -> usize {
        self.radar_paths() + self.selected_paths
    }

    /// Spatial-pattern count S = 2^floor(log2 C(L_s, L_C)).
    pub fn pattern_count(&self) -> usize {
        1 << self.index_bits()
    }

    pub fn index_bits(&self) -> usize {
        bits_for_selection(self.selected_paths, self.user_paths()).expect("validated") as usize
    }

    pub fn symbol_bits(&self) -> usize {
        self.data_streams * psk_bits(self.psk_order)
    }

    pub fn bits_per_use(&self) -> usize {
        self.index_bits() + self.symbol_bits()
    }

    /// Noise variance for a swept SNR point under the per-transmit-antenna
    /// convention: snr = (total transmit power / N) / sigma^2 with the
    /// power invariant fixing total power at N_S.
    pub fn noise_for_snr_db(&self, snr_db: f64) -> f64 {
        self.data_streams as f64 / (self.tx_antennas as f64 * 10f64.powf(snr_db / 10.0))
    }
}

/// One spatial pattern: which user paths are wired to the communication
/// chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpatialPattern {
    /// Pattern index (codebook rank).
    pub index: usize,
    pub selection: SelectionPattern,
}

/// The S spatial patterns: the first 2^floor(log2 C(L_s, L_C)) subsets of
/// the user paths in colexicographic order.
pub fn build_patterns(cfg: &SpimConfig) -> Vec<SpatialPattern> {
    (0..cfg.pattern_count())
        .map(|i| SpatialPattern {
            index: i,
            selection: unrank_combination(i as u64, cfg.selected_paths, cfg.user_paths())
                .expect("validated config"),
        })
        .collect()
}

/// Analog + baseband beamformer pair for one spatial pattern.
#[derive(Debug, Clone)]
pub struct HybridBeamformer {
    /// N x N_RF analog stage, unit-modulus entries (steering columns).
    pub rf: DMatrix<Complex64>,
    /// N_RF x N_S baseband stage.
    pub bb: DMatrix<Complex64>,
}

impl HybridBeamformer {
    /// Effective N x N_S precoder F_RF F_BB.
    pub fn combined(&self) -> DMatrix<Complex64> {
        &self.rf * &self.bb
    }
}

/// Builds the hybrid beamformer for a pattern: steering columns toward the
/// radar paths then the selected user paths, and a diagonal-style power
/// split (1 - eta on radar chains, eta on communication chains) followed by
/// Frobenius normalization to the power invariant.
pub fn build_beamformer(cfg: &SpimConfig, pattern: &SpatialPattern) -> Result<HybridBeamformer> {
    let n = cfg.tx_antennas;
    let chains = cfg.rf_chains();
    let mut rf = DMatrix::<Complex64>::zeros(n, chains);
    for (c, &theta) in cfg.radar_angles_rad.iter().enumerate() {
        let a = steering(&cfg.geometry, theta);
        for r in 0..n {
            rf[(r, c)] = a.entries[r];
        }
    }
    for (s, &path) in pattern.selection.indices().iter().enumerate() {
        let a = steering(&cfg.geometry, cfg.user_angles_rad[path]);
        for r in 0..n {
            rf[(r, cfg.radar_paths() + s)] = a.entries[r];
        }
    }

    let radar_weight = ((1.0 - cfg.eta) / cfg.radar_paths() as f64).sqrt();
    let comm_weight = (cfg.eta / cfg.selected_paths as f64).sqrt();
    let mut bb = DMatrix::<Complex64>::zeros(chains, cfg.data_streams);
    for c in 0..chains {
        let w = if c < cfg.radar_paths() { radar_weight } else { comm_weight };
        bb[(c, c % cfg.data_streams)] = Complex64::new(w, 0.0);
    }
    let norm = (&rf * &bb).norm();
    if norm < 1e-12 {
        return Err(SchemeError::Numerical(
            "beamformer power collapsed to zero before normalization".into(),
        ));
    }
    let scale = (cfg.data_streams as f64).sqrt() / norm;
    bb *= Complex64::new(scale, 0.0);
    Ok(HybridBeamformer { rf, bb })
}

/// All S beamformers in pattern order.
pub fn build_all_beamformers(cfg: &SpimConfig) -> Result<Vec<HybridBeamformer>> {
    build_patterns(cfg).iter().map(|p| build_beamformer(cfg, p)).collect()
}

// ---------------------------------------------------------------------------
// Spectral efficiency
// ---------------------------------------------------------------------------

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn ln_det_hermitian(m: &DMatrix<Complex64>) -> Result<f64> {
    let chol = hermitian_part(m)
        .cholesky()
        .ok_or_else(|| SchemeError::Numerical("covariance matrix is not positive definite".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.re.ln()).sum::<f64>())
}

/// Sigma_i = I + (1/(sigma^2 N_S)) (H F_i)(H F_i)^H.
pub fn sigma_matrix(
    h: &DMatrix<Complex64>,
    combined: &DMatrix<Complex64>,
    sigma2: f64,
    n_streams: usize,
) -> DMatrix<Complex64> {
    let g = h * combined;
    let scale = Complex64::new(1.0 / (sigma2 * n_streams as f64), 0.0);
    DMatrix::identity(h.nrows(), h.nrows()) + (&g * g.adjoint()) * scale
}

/// Pattern-mixture spectral efficiency in bits/s/Hz:
/// log2(2^S / (2 sigma^2)^Nr) - (1/S) sum_i log2(sum_j det(Sigma_i + Sigma_j)^-1).
pub fn spim_se(
    h: &DMatrix<Complex64>,
    beamformers: &[HybridBeamformer],
    sigma2: f64,
    n_streams: usize,
) -> Result<f64> {
    if sigma2 <= 0.0 {
        return Err(SchemeError::InvalidParameter("sigma^2 must be positive".into()));
    }
    let s = beamformers.len();
    let n_r = h.nrows();
    let sigmas: Vec<DMatrix<Complex64>> = beamformers
        .iter()
        .map(|bf| sigma_matrix(h, &bf.combined(), sigma2, n_streams))
        .collect();
    // ln det(Sigma_i + Sigma_j), symmetric in (i, j).
    let mut ln_dets = vec![vec![0.0; s]; s];
    for i in 0..s {
        for j in i..s {
            let ld = ln_det_hermitian(&(&sigmas[i] + &sigmas[j]))?;
            ln_dets[i][j] = ld;
            ln_dets[j][i] = ld;
        }
    }
    let ln2 = std::f64::consts::LN_2;
    let mut avg = 0.0;
    for row in ln_dets.iter() {
        // log2 sum_j exp(-l_ij) via log-sum-exp.
        let m = row.iter().map(|l| -l).fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|l| (-l - m).exp()).sum();
        avg += (m + sum.ln()) / ln2;
    }
    avg /= s as f64;
    Ok(s as f64 - n_r as f64 * (2.0 * sigma2).log2() - avg)
}

/// Conventional (single-pattern) spectral efficiency log2 det(Sigma_1).
pub fn isac_se(
    h: &DMatrix<Complex64>,
    beamformer: &HybridBeamformer,
    sigma2: f64,
    n_streams: usize,
) -> Result<f64> {
    if sigma2 <= 0.0 {
        return Err(SchemeError::InvalidParameter("sigma^2 must be positive".into()));
    }
    let sigma = sigma_matrix(h, &beamformer.combined(), sigma2, n_streams);
    Ok(ln_det_hermitian(&sigma)? / std::f64::consts::LN_2)
}

// ---------------------------------------------------------------------------
// Transmit / decode
// ---------------------------------------------------------------------------

/// Encodes one channel use: index bits pick the spatial pattern, symbol
/// bits drive M-PSK data streams. Returns (pattern index, stream symbols,
/// transmit vector).
pub fn tx_spim(
    bits: &[bool],
    cfg: &SpimConfig,
    beamformers: &[HybridBeamformer],
) -> Result<(usize, Vec<u64>, DVector<Complex64>)> {
    check_bit_len(bits, cfg.bits_per_use())?;
    let idx = bits_to_value(&bits[..cfg.index_bits()]) as usize;
    let per = psk_bits(cfg.psk_order);
    let symbols: Vec<u64> = (0..cfg.data_streams)
        .map(|s| {
            if per == 0 {
                0
            } else {
                bits_to_value(&bits[cfg.index_bits() + s * per..cfg.index_bits() + (s + 1) * per])
            }
        })
        .collect();
    let s_vec = DVector::from_iterator(
        cfg.data_streams,
        symbols.iter().map(|&m| psk_point(m, cfg.psk_order)),
    );
    let x = beamformers[idx].combined() * &s_vec;
    Ok((idx, symbols, x))
}

/// Joint maximum-likelihood decoding over (pattern, symbol vector):
/// argmin ||y - H F_i s||; ties break toward the lower pattern index and
/// then the lower symbol value.
pub fn decode_spim(
    y: &DVector<Complex64>,
    h: &DMatrix<Complex64>,
    cfg: &SpimConfig,
    beamformers: &[HybridBeamformer],
) -> Vec<bool> {
    let per = psk_bits(cfg.psk_order);
    let sym_space = (cfg.psk_order as u64).pow(cfg.data_streams as u32);
    let mut best = (0usize, 0u64);
    let mut best_cost = f64::INFINITY;
    for (i, bf) in beamformers.iter().enumerate() {
        let hf = h * bf.combined();
        for v in 0..sym_space {
            let mut digits = vec![0u64; cfg.data_streams];
            let mut rem = v;
            for d in (0..cfg.data_streams).rev() {
                digits[d] = rem % cfg.psk_order as u64;
                rem /= cfg.psk_order as u64;
            }
            let s_vec = DVector::from_iterator(
                cfg.data_streams,
                digits.iter().map(|&m| psk_point(m, cfg.psk_order)),
            );
            let cost = (y - &hf * &s_vec).norm_squared();
            if cost < best_cost {
                best_cost = cost;
                best = (i, v);
            }
        }
    }
    let (idx, v) = best;
    let mut bits = value_to_bits(idx as u64, cfg.index_bits());
    let mut digits = vec![0u64; cfg.data_streams];
    let mut rem = v;
    for d in (0..cfg.data_streams).rev() {
        digits[d] = rem % cfg.psk_order as u64;
        rem /= cfg.psk_order as u64;
    }
    for &m in &digits {
        bits.extend(value_to_bits(m, per));
    }
    bits
}

/// Transmit beampattern over an angle grid, normalized so the peak sits at
/// exactly 0 dB: P(theta) = ||a^H(theta) F||^2.
pub fn beampattern(
    combined: &DMatrix<Complex64>,
    geometry: &ArrayGeometry,
    angles_rad: &[f64],
) -> Vec<f64> {
    let powers: Vec<f64> = angles_rad
        .iter()
        .map(|&theta| {
            let a = steering(geometry, theta);
            (0..combined.ncols())
                .map(|s| {
                    let acc: Complex64 = (0..combined.nrows())
                        .map(|n| a.entries[n].conj() * combined[(n, s)])
                        .sum();
                    acc.norm_sqr()
                })
                .sum()
        })
        .collect();
    let peak = powers.iter().cloned().fold(f64::MIN, f64::max);
    powers.iter().map(|p| 10.0 * (p / peak).log10()).collect()
}

// ---------------------------------------------------------------------------
// Channel model
// ---------------------------------------------------------------------------

/// Geometric multipath channel H = sum_l beta_l a_rx(phi_l^rx) a_tx^H(phi_l):
/// one path per configured user direction, unit-variance complex gains and
/// uniformly drawn receive-side angles.
pub fn draw_channel(cfg: &SpimConfig, rng: &mut RngStream) -> DMatrix<Complex64> {
    let mut h = DMatrix::<Complex64>::zeros(cfg.rx_antennas, cfg.tx_antennas);
    for &phi in &cfg.user_angles_rad {
        let beta = rng.complex_gaussian(1.0);
        let rx_angle = rng.uniform_in(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        let a_tx = steering(&cfg.geometry, phi);
        let a_rx = steering(&cfg.rx_geometry, rx_angle);
        for j in 0..cfg.rx_antennas {
            for n in 0..cfg.tx_antennas {
                h[(j, n)] += beta * a_rx.entries[j] * a_tx.entries[n].conj();
            }
        }
    }
    h
}

// ---------------------------------------------------------------------------
// Monte-Carlo chain
// ---------------------------------------------------------------------------

/// Channel-use simulator over a fixed random channel (drawn once from the
/// construction seed so noiseless round trips stay exact).
pub struct SpimSim {
    pub cfg: SpimConfig,
    beamformers: Vec<HybridBeamformer>,
    channel: DMatrix<Complex64>,
    power: f64,
}

impl SpimSim {
    pub fn new(cfg: SpimConfig, channel_seed: u64) -> Result<Self> {
        let beamformers = build_all_beamformers(&cfg)?;
        let hypotheses = cfg.pattern_count() as u64 * (cfg.psk_order as u64).pow(cfg.data_streams as u32);
        if hypotheses > 1 << 20 {
            return Err(SchemeError::InvalidParameter(format!(
                "joint decoding space of {hypotheses} hypotheses exceeds the desk-scale guard"
            )));
        }
        let mut rng = RngStream::new(channel_seed, 0);
        let channel = draw_channel(&cfg, &mut rng);
        let power = beamformers
            .iter()
            .map(|bf| (&channel * bf.combined()).norm_squared())
            .sum::<f64>()
            / (beamformers.len() * cfg.rx_antennas) as f64;
        Ok(Self { cfg, beamformers, channel, power })
    }

    pub fn desk_default(channel_seed: u64) -> Self {
        let cfg = SpimConfig::new(
            128,
            2,
            vec![40f64.to_radians()],
            vec![50f64.to_radians(), 60f64.to_radians()],
            1,
            1,
            4,
            0.5,
        )
        .expect("desk-scale config");
        Self::new(cfg, channel_seed).expect("desk-scale scheme")
    }

    pub fn beamformers(&self) -> &[HybridBeamformer] {
        &self.beamformers
    }

    pub fn channel(&self) -> &DMatrix<Complex64> {
        &self.channel
    }
}

impl ImScheme for SpimSim {
    fn name(&self) -> &'static str {
        "spim"
    }

    fn frame_bits(&self) -> usize {
        self.cfg.bits_per_use()
    }

    fn index_bit_mask(&self) -> Vec<bool> {
        let mut mask = vec![true; self.cfg.index_bits()];
        mask.extend(vec![false; self.cfg.symbol_bits()]);
        mask
    }

    fn decoder_input_power(&self) -> f64 {
        self.power
    }

    fn transceive(&self, bits: &[bool], noise_variance: f64, rng: &mut RngStream) -> Transceived {
        let (_, _, x) = tx_spim(bits, &self.cfg, &self.beamformers).expect("payload length enforced");
        let mut y = &self.channel * &x;
        let signal_power = y.norm_squared() / self.cfg.rx_antennas as f64;
        if noise_variance > 0.0 {
            for v in y.iter_mut() {
                *v += rng.complex_gaussian(noise_variance);
            }
        }
        let decoded = decode_spim(&y, &self.channel, &self.cfg, &self.beamformers);
        Transceived { decoded, signal_power }
    }
}
