//! Monte-Carlo BER, spectral-efficiency sweeps, beampattern sweeps and the
//! noiseless round-trip harness.
//!
//! Every run is a pure function of (config, seed): each trial owns its own
//! RNG stream keyed by the trial index, results are reduced in trial order,
//! and worker counts can therefore never change the output bytes.

use rayon::prelude::*;

use crate::channel::RngStream;
use crate::schemes::spim::{build_all_beamformers, draw_channel, isac_se, spim_se, SpimConfig};
use crate::schemes::{ImScheme, Result, SchemeError};

/// 95% two-sided normal quantile for the Wilson interval.
const Z_95: f64 = 1.959963984540054;

/// Per-SNR Monte-Carlo outcome with the index/symbol error split.
#[derive(Debug, Clone, PartialEq)]
pub struct BerResult {
    pub snr_db: f64,
    pub trials: u64,
    pub total_bits: u64,
    pub index_bits: u64,
    pub symbol_bits: u64,
    pub index_bit_errors: u64,
    pub symbol_bit_errors: u64,
    pub ber: f64,
    pub ber_index: f64,
    pub ber_symbol: f64,
    /// Wilson 95% half-width on the overall BER.
    pub ci_half_width: f64,
    /// Empirical decoder-input signal power, for SNR bookkeeping.
    pub measured_signal_power: f64,
    /// Noise variance the sweep point actually used.
    pub noise_variance: f64,
}

impl BerResult {
    pub fn bit_errors(&self) -> u64 {
        self.index_bit_errors + self.symbol_bit_errors
    }
}

fn wilson_half_width(errors: u64, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    Z_95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Runs `trials` frames per SNR point. The noise variance per point is
/// `scheme.decoder_input_power() / 10^(snr/10)`; trial `t` of point `i`
/// draws from stream `i * trials + t` of `seed`.
pub fn monte_carlo_ber(
    scheme: &dyn ImScheme,
    snrs_db: &[f64],
    trials: u64,
    seed: u64,
) -> Vec<BerResult> {
    let mask = scheme.index_bit_mask();
    let frame_bits = scheme.frame_bits();
    assert_eq!(mask.len(), frame_bits, "index mask must cover the frame");
    let index_per_frame = mask.iter().filter(|&&b| b).count() as u64;
    let symbol_per_frame = frame_bits as u64 - index_per_frame;

    snrs_db
        .iter()
        .enumerate()
        .map(|(si, &snr_db)| {
            let noise_variance = scheme.decoder_input_power() / 10f64.powf(snr_db / 10.0);
            let per_trial: Vec<(u64, u64, f64)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = RngStream::new(seed, si as u64 * trials + t);
                    let bits = rng.bits(frame_bits);
                    let out = scheme.transceive(&bits, noise_variance, &mut rng);
                    let mut idx_err = 0u64;
                    let mut sym_err = 0u64;
                    for ((tx, rx), &is_index) in bits.iter().zip(&out.decoded).zip(&mask) {
                        if tx != rx {
                            if is_index {
                                idx_err += 1;
                            } else {
                                sym_err += 1;
                            }
                        }
                    }
                    (idx_err, sym_err, out.signal_power)
                })
                .collect();

            // Ordered reduction keeps float sums independent of scheduling.
            let mut index_bit_errors = 0u64;
            let mut symbol_bit_errors = 0u64;
            let mut power_acc = 0.0;
            for (ie, se, p) in &per_trial {
                index_bit_errors += ie;
                symbol_bit_errors += se;
                power_acc += p;
            }
            let total_bits = trials * frame_bits as u64;
            let index_bits = trials * index_per_frame;
            let symbol_bits = trials * symbol_per_frame;
            let errors = index_bit_errors + symbol_bit_errors;
            BerResult {
                snr_db,
                trials,
                total_bits,
                index_bits,
                symbol_bits,
                index_bit_errors,
                symbol_bit_errors,
                ber: errors as f64 / total_bits as f64,
                ber_index: if index_bits > 0 { index_bit_errors as f64 / index_bits as f64 } else { 0.0 },
                ber_symbol: if symbol_bits > 0 { symbol_bit_errors as f64 / symbol_bits as f64 } else { 0.0 },
                ci_half_width: wilson_half_width(errors, total_bits),
                measured_signal_power: power_acc / trials as f64,
                noise_variance,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// One labelled curve over a strictly increasing axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
    pub config_hash: u64,
}

fn require_increasing(axis: &[f64]) -> Result<()> {
    if axis.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SchemeError::InvalidParameter(
            "sweep axis must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// FNV-1a over a canonical description, recorded with every sweep so
/// outputs are traceable to their configuration.
pub fn config_hash(description: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in description.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Pattern-mixture vs conventional spectral efficiency, averaged over
/// `draws` random geometric channels per SNR point. Draw `d` uses stream
/// `d` of `seed`.
pub fn se_sweep(
    cfg: &SpimConfig,
    draws: u64,
    snrs_db: &[f64],
    seed: u64,
) -> Result<(SweepResult, SweepResult)> {
    if draws == 0 {
        return Err(SchemeError::InvalidParameter("need at least one channel draw".into()));
    }
    require_increasing(snrs_db)?;
    let beamformers = build_all_beamformers(cfg)?;
    let mut spim_avg = vec![0.0; snrs_db.len()];
    let mut isac_avg = vec![0.0; snrs_db.len()];
    for d in 0..draws {
        let mut rng = RngStream::new(seed, d);
        let h = draw_channel(cfg, &mut rng);
        for (i, &snr) in snrs_db.iter().enumerate() {
            let sigma2 = cfg.noise_for_snr_db(snr);
            spim_avg[i] += spim_se(&h, &beamformers, sigma2, cfg.data_streams)?;
            isac_avg[i] += isac_se(&h, &beamformers[0], sigma2, cfg.data_streams)?;
        }
    }
    for v in spim_avg.iter_mut().chain(isac_avg.iter_mut()) {
        *v /= draws as f64;
    }
    let hash = config_hash(&format!(
        "se n={} nr={} ls={} ns={} eta={} draws={draws} seed={seed}",
        cfg.tx_antennas, cfg.rx_antennas, cfg.selected_paths, cfg.data_streams, cfg.eta
    ));
    Ok((
        SweepResult { axis: snrs_db.to_vec(), values: spim_avg, label: "se_spim".into(), config_hash: hash },
        SweepResult { axis: snrs_db.to_vec(), values: isac_avg, label: "se_isac".into(), config_hash: hash },
    ))
}

/// Normalized beampatterns (dB, peak at 0) for a list of trade-off values,
/// evaluated for one spatial pattern index.
pub fn beampattern_sweep(
    cfg: &SpimConfig,
    etas: &[f64],
    grid_deg: &[f64],
    pattern_index: usize,
) -> Result<Vec<SweepResult>> {
    require_increasing(grid_deg)?;
    if grid_deg
        .iter()
        .any(|&a| a.to_radians() <= -std::f64::consts::FRAC_PI_2 || a.to_radians() >= std::f64::consts::FRAC_PI_2)
    {
        return Err(SchemeError::InvalidParameter(
            "angle grid must stay strictly inside (-90, 90) degrees".into(),
        ));
    }
    let grid_rad: Vec<f64> = grid_deg.iter().map(|a| a.to_radians()).collect();
    etas.iter()
        .map(|&eta| {
            let mut cfg_eta = cfg.clone();
            cfg_eta.eta = eta;
            let patterns = crate::schemes::spim::build_patterns(&cfg_eta);
            if pattern_index >= patterns.len() {
                return Err(SchemeError::InvalidParameter(format!(
                    "pattern index {pattern_index} outside the {} available patterns",
                    patterns.len()
                )));
            }
            let bf = crate::schemes::spim::build_beamformer(&cfg_eta, &patterns[pattern_index])?;
            let values = crate::schemes::spim::beampattern(&bf.combined(), &cfg_eta.geometry, &grid_rad);
            let hash = config_hash(&format!(
                "beampattern n={} eta={eta} pattern={pattern_index}",
                cfg.tx_antennas
            ));
            Ok(SweepResult {
                axis: grid_deg.to_vec(),
                values,
                label: format!("power_db_eta{eta}"),
                config_hash: hash,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Round-trip harness
// ---------------------------------------------------------------------------

/// Outcome of the noiseless round-trip check for one scheme.
#[derive(Debug, Clone)]
pub struct RoundtripReport {
    pub scheme: String,
    pub frames: u64,
    pub bit_errors: u64,
    pub first_failure: Option<String>,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.bit_errors == 0
    }
}

/// Runs `frames` random noiseless frames through each scheme and reports
/// exact round-trip failures. Frame `f` of case `c` draws from stream
/// `c * frames + f`.
pub fn run_roundtrip(cases: &[Box<dyn ImScheme>], frames: u64, seed: u64) -> Vec<RoundtripReport> {
    cases
        .iter()
        .enumerate()
        .map(|(c, scheme)| {
            let per_frame: Vec<(u64, Option<String>)> = (0..frames)
                .into_par_iter()
                .map(|f| {
                    let mut rng = RngStream::new(seed, c as u64 * frames + f);
                    let bits = rng.bits(scheme.frame_bits());
                    let out = scheme.transceive(&bits, 0.0, &mut rng);
                    let errors = bits.iter().zip(&out.decoded).filter(|(a, b)| a != b).count() as u64;
                    let detail = (errors > 0).then(|| {
                        format!("frame {f}: {errors} bit errors (payload {})", describe_bits(&bits))
                    });
                    (errors, detail)
                })
                .collect();
            let bit_errors = per_frame.iter().map(|(e, _)| e).sum();
            let first_failure = per_frame.into_iter().find_map(|(_, d)| d);
            RoundtripReport { scheme: scheme.name().to_string(), frames, bit_errors, first_failure }
        })
        .collect()
}

fn describe_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::subcarrier::SubcarrierImSim;
    use crate::schemes::Transceived;

    #[test]
    fn wilson_interval_is_sane() {
        assert_eq!(wilson_half_width(0, 0), 0.0);
        let w = wilson_half_width(0, 10_000);
        assert!(w > 0.0 && w < 1e-3);
        let mid = wilson_half_width(5_000, 10_000);
        assert!((mid - Z_95 * 0.005).abs() < 1e-4);
    }

    #[test]
    fn noiseless_ber_is_zero_and_reproducible() {
        let sim = SubcarrierImSim::desk_default();
        let a = monte_carlo_ber(&sim, &[f64::INFINITY], 200, 42);
        assert_eq!(a[0].bit_errors(), 0);
        assert_eq!(a[0].ber, 0.0);
        let b = monte_carlo_ber(&sim, &[f64::INFINITY], 200, 42);
        assert_eq!(a, b);
    }

    #[test]
    fn ber_is_monotone_within_confidence() {
        let sim = SubcarrierImSim::desk_default();
        let results = monte_carlo_ber(&sim, &[0.0, 10.0], 3000, 7);
        assert!(
            results[1].ber <= results[0].ber + results[0].ci_half_width + results[1].ci_half_width,
            "{} vs {}",
            results[1].ber,
            results[0].ber
        );
        // Error split adds up.
        for r in &results {
            assert_eq!(r.bit_errors(), r.index_bit_errors + r.symbol_bit_errors);
        }
    }

    #[test]
    fn reported_snr_matches_measured_power() {
        let sim = SubcarrierImSim::desk_default();
        let results = monte_carlo_ber(&sim, &[10.0], 2000, 3);
        let r = &results[0];
        let implied_snr = r.measured_signal_power / r.noise_variance;
        let requested = 10f64.powf(r.snr_db / 10.0);
        assert!(
            (implied_snr - requested).abs() <= 0.01 * requested,
            "measured {implied_snr} vs requested {requested}"
        );
    }

    #[test]
    fn parallel_and_serial_runs_agree() {
        let sim = SubcarrierImSim::desk_default();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| monte_carlo_ber(&sim, &[0.0, 5.0], 500, 9));
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| monte_carlo_ber(&sim, &[0.0, 5.0], 500, 9));
        assert_eq!(single, many);
    }

    struct BrokenScheme;

    impl ImScheme for BrokenScheme {
        fn name(&self) -> &'static str {
            "broken-double"
        }
        fn frame_bits(&self) -> usize {
            8
        }
        fn index_bit_mask(&self) -> Vec<bool> {
            vec![true; 8]
        }
        fn decoder_input_power(&self) -> f64 {
            1.0
        }
        fn transceive(&self, bits: &[bool], _noise: f64, _rng: &mut RngStream) -> Transceived {
            let mut decoded = bits.to_vec();
            decoded[0] = !decoded[0];
            Transceived { decoded, signal_power: 1.0 }
        }
    }

    #[test]
    fn roundtrip_harness_flags_injected_decoder_fault() {
        let cases: Vec<Box<dyn ImScheme>> =
            vec![Box::new(SubcarrierImSim::desk_default()), Box::new(BrokenScheme)];
        let reports = run_roundtrip(&cases, 50, 1);
        assert!(reports[0].passed());
        assert!(!reports[1].passed());
        assert_eq!(reports[1].scheme, "broken-double");
        assert!(reports[1].first_failure.is_some());
    }

    #[test]
    fn sweep_axis_must_increase() {
        let cfg = crate::schemes::spim::SpimSim::desk_default(1).cfg.clone();
        assert!(se_sweep(&cfg, 1, &[0.0, 0.0], 1).is_err());
    }

    #[test]
    fn se_sweep_is_deterministic() {
        let cfg = crate::schemes::spim::SpimSim::desk_default(1).cfg.clone();
        let a = se_sweep(&cfg, 1, &[0.0, 10.0], 5).unwrap();
        let b = se_sweep(&cfg, 1, &[0.0, 10.0], 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn beampattern_peak_location_is_grid_stable() {
        // Doubling the grid resolution moves the reported peak by less
        // than one coarse step.
        let cfg = crate::schemes::spim::SpimSim::desk_default(1).cfg.clone();
        let peak_of = |step_milli_deg: i64| -> f64 {
            let grid: Vec<f64> = (-85_000..=85_000)
                .step_by(step_milli_deg as usize)
                .map(|i| i as f64 / 1000.0)
                .collect();
            let sweeps = beampattern_sweep(&cfg, &[0.0], &grid, 0).unwrap();
            let idx = sweeps[0]
                .values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            grid[idx]
        };
        let coarse_step = 0.25;
        let coarse = peak_of(250);
        let fine = peak_of(125);
        assert!(
            (coarse - fine).abs() < coarse_step,
            "peak moved from {coarse} to {fine} under refinement"
        );
    }
}
