//! The five subcommands. Every command renders its output as a string
//! (CSV or report) so runs with identical config and seed are
//! byte-identical regardless of worker count.

use imisac_core::codebook::scheme_rate;
use imisac_core::metrics::{beampattern_sweep, monte_carlo_ber, run_roundtrip, se_sweep};
use imisac_core::schemes::standard_suite;

use crate::config::{config_err, CliError, Config, Result};
use crate::scenario::{build_sim, build_spim_config, rate_rows};

/// Fixed decimal float format with 10 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.9e}")
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// `rate-table`: one row per configured scheme with nominal and exact bits.
/// Header: `scheme,params,nominal_bits,exact_bits`.
pub fn cmd_rate_table(cfg: &Config) -> Result<String> {
    let mut out = String::from("scheme,params,nominal_bits,exact_bits\n");
    for row in rate_rows(cfg)? {
        let rate = scheme_rate(row.spec).map_err(|e| config_err(e.to_string()))?;
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.scheme, row.params, rate.nominal_bits, rate.exact_bits
        ));
    }
    Ok(out)
}

/// `ber`: Monte-Carlo sweep. Header: `snr_db,ber,ber_index,ber_symbol,ci`.
/// The empirically measured decoder-input power per point goes to stderr
/// for SNR bookkeeping.
pub fn cmd_ber(cfg: &Config, seed: u64) -> Result<String> {
    let sim = build_sim(cfg)?;
    let snrs = cfg.require_f64_list("snr_db")?;
    let trials = cfg.require_u64("trials")?;
    if trials == 0 {
        return Err(config_err("key `trials`: must be >= 1"));
    }
    let results = monte_carlo_ber(sim.as_ref(), &snrs, trials, seed);
    let mut out = String::from("snr_db,ber,ber_index,ber_symbol,ci\n");
    for r in &results {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.snr_db),
            fmt_f64(r.ber),
            fmt_f64(r.ber_index),
            fmt_f64(r.ber_symbol),
            fmt_f64(r.ci_half_width)
        ));
        eprintln!(
            "# {} snr_db={} measured_signal_power={} noise_variance={}",
            sim.name(),
            fmt_f64(r.snr_db),
            fmt_f64(r.measured_signal_power),
            fmt_f64(r.noise_variance)
        );
    }
    Ok(out)
}

/// `se`: averaged spectral-efficiency curves.
/// Header: `snr_db,se_spim,se_isac`.
pub fn cmd_se(cfg: &Config, seed: u64) -> Result<String> {
    let spim_cfg = build_spim_config(cfg)?;
    let snrs = cfg.require_f64_list("snr_db")?;
    let draws = cfg.require_u64("draws")?;
    let (spim, isac) = se_sweep(&spim_cfg, draws, &snrs, seed).map_err(runtime_err)?;
    let mut out = String::from("snr_db,se_spim,se_isac\n");
    for i in 0..snrs.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(spim.axis[i]),
            fmt_f64(spim.values[i]),
            fmt_f64(isac.values[i])
        ));
    }
    Ok(out)
}

/// `beampattern`: normalized patterns per trade-off value.
/// Header: `theta_deg` followed by one `power_db_eta<value>` column per eta.
pub fn cmd_beampattern(cfg: &Config) -> Result<String> {
    let spim_cfg = build_spim_config(cfg)?;
    let etas = cfg.require_f64_list("eta_list")?;
    let grid = cfg.require_f64_list("theta_grid_deg")?;
    let pattern_index = cfg.get_usize("pattern_index", 0)?;
    let sweeps = beampattern_sweep(&spim_cfg, &etas, &grid, pattern_index).map_err(runtime_err)?;
    let mut out = String::from("theta_deg");
    for s in &sweeps {
        out.push(',');
        out.push_str(&s.label);
    }
    out.push('\n');
    for (i, &theta) in grid.iter().enumerate() {
        out.push_str(&fmt_f64(theta));
        for s in &sweeps {
            out.push(',');
            out.push_str(&fmt_f64(s.values[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// `roundtrip`: noiseless encode/decode check of every scheme at
/// desk-scale defaults. Returns (report, all_passed).
pub fn cmd_roundtrip(cfg: &Config, seed: u64) -> Result<(String, bool)> {
    let frames = cfg.get_u64("frames", 1000)?;
    if frames == 0 {
        return Err(config_err("key `frames`: must be >= 1"));
    }
    let suite = standard_suite(seed);
    let reports = run_roundtrip(&suite, frames, seed);
    let mut out = String::new();
    let mut all = true;
    for r in &reports {
        if r.passed() {
            out.push_str(&format!("{}: PASS (frames={})\n", r.scheme, r.frames));
        } else {
            all = false;
            out.push_str(&format!(
                "{}: FAIL ({} bit errors over {} frames; {})\n",
                r.scheme,
                r.bit_errors,
                r.frames,
                r.first_failure.as_deref().unwrap_or("no detail")
            ));
        }
    }
    Ok((out, all))
}
