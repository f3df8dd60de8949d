//! Builds scheme simulators and rate rows from a scenario config.

use imisac_core::codebook::SchemeRateSpec;
use imisac_core::schemes::antenna::{AntennaIm, AntennaImConfig, AntennaImSim};
use imisac_core::schemes::fh::{FhConfig, FhSim};
use imisac_core::schemes::frac::{FracConfig, FracSim};
use imisac_core::schemes::freq_agile::{FreqAgileConfig, FreqAgileMode, FreqAgileSim};
use imisac_core::schemes::spim::{SpimConfig, SpimSim};
use imisac_core::schemes::subcarrier::{OfdmImConfig, SubcarrierImSim};
use imisac_core::schemes::ImScheme;

use crate::config::{config_err, CliError, Config, Result};

pub const SCHEME_IDS: &[&str] = &[
    "subcarrier-im",
    "antenna-im",
    "majorcom",
    "majorcom-grouped",
    "frac",
    "fh",
    "spim",
];

fn scheme_err(e: impl std::fmt::Display) -> CliError {
    config_err(e.to_string())
}

/// Instantiates the simulator selected by the `scheme` key, applying any
/// per-scheme overrides present in the config.
pub fn build_sim(cfg: &Config) -> Result<Box<dyn ImScheme>> {
    let scheme = cfg.require("scheme")?;
    match scheme {
        "subcarrier-im" => {
            let mut c = OfdmImConfig::new(
                cfg.get_usize("k", 4)?,
                cfg.get_usize("k_s", 2)?,
                cfg.get_usize("b", 4)?,
                cfg.get_usize("m", 2)?,
            )
            .map_err(scheme_err)?;
            c.rayleigh_fading = match cfg.get("channel") {
                None | Some("awgn") => false,
                Some("rayleigh") => true,
                Some(other) => {
                    return Err(config_err(format!(
                        "key `channel`: expected awgn or rayleigh, got `{other}`"
                    )))
                }
            };
            Ok(Box::new(SubcarrierImSim::new(c)))
        }
        "antenna-im" => {
            let mut c = AntennaImConfig::new(
                cfg.get_usize("n", 8)?,
                cfg.get_usize("n_s", 2)?,
                cfg.get_usize("n_rx", 4)?,
                cfg.get_usize("m", 2)?,
            )
            .map_err(scheme_err)?;
            c.user_angle_rad = cfg.get_f64("user_angle_deg", 25.0)?.to_radians();
            if cfg.contains("max_sidelobe_db") {
                c.max_sidelobe_db = Some(cfg.get_f64("max_sidelobe_db", 0.0)?);
            }
            Ok(Box::new(AntennaImSim::new(AntennaIm::new(c).map_err(scheme_err)?)))
        }
        "majorcom" => {
            let mode = if cfg.get_bool("reuse", false)? {
                FreqAgileMode::Reuse
            } else {
                FreqAgileMode::Distinct
            };
            let mut c = FreqAgileConfig::new(cfg.get_usize("n", 4)?, cfg.get_usize("k", 8)?, mode)
                .map_err(scheme_err)?;
            c.target_angle_rad = cfg.get_f64("target_angle_deg", 15.0)?.to_radians();
            Ok(Box::new(FreqAgileSim::new(c)))
        }
        "majorcom-grouped" => {
            let mut c = FreqAgileConfig::new(
                cfg.get_usize("n", 4)?,
                cfg.get_usize("k", 4)?,
                FreqAgileMode::Grouped { groups: cfg.get_usize("g", 2)? },
            )
            .map_err(scheme_err)?;
            c.target_angle_rad = cfg.get_f64("target_angle_deg", 15.0)?.to_radians();
            Ok(Box::new(FreqAgileSim::new(c)))
        }
        "frac" => {
            let mut c = FracConfig::new(
                cfg.get_usize("n", 4)?,
                cfg.get_usize("n_s", 2)?,
                cfg.get_usize("k", 4)?,
                cfg.get_usize("m", 2)?,
            )
            .map_err(scheme_err)?;
            c.user_angle_rad = cfg.get_f64("user_angle_deg", 20.0)?.to_radians();
            Ok(Box::new(FracSim::new(c)))
        }
        "fh" => {
            let mut c = FhConfig::new(
                cfg.get_usize("n", 2)?,
                cfg.get_usize("k", 3)?,
                cfg.get_usize("h", 2)?,
            )
            .map_err(scheme_err)?;
            c.target_angle_rad = cfg.get_f64("target_angle_deg", 30.0)?.to_radians();
            Ok(Box::new(FhSim::new(c)))
        }
        "spim" => {
            let c = build_spim_config(cfg)?;
            let channel_seed = cfg.get_u64("channel_seed", 7)?;
            Ok(Box::new(SpimSim::new(c, channel_seed).map_err(scheme_err)?))
        }
        other => Err(config_err(format!(
            "key `scheme`: unknown scheme `{other}` (expected one of {})",
            SCHEME_IDS.join(", ")
        ))),
    }
}

/// Spatial-path config shared by the `se` and `beampattern` commands.
pub fn build_spim_config(cfg: &Config) -> Result<SpimConfig> {
    let radar: Vec<f64> = cfg
        .get_f64_list("radar_angles_deg", &[40.0])?
        .iter()
        .map(|a| a.to_radians())
        .collect();
    let user: Vec<f64> = cfg
        .get_f64_list("user_angles_deg", &[50.0, 60.0])?
        .iter()
        .map(|a| a.to_radians())
        .collect();
    SpimConfig::new(
        cfg.get_usize("n", 128)?,
        cfg.get_usize("n_rx", 2)?,
        radar,
        user,
        cfg.get_usize("l_s", 1)?,
        cfg.get_usize("n_streams", 1)?,
        cfg.get_usize("m", 4)?,
        cfg.get_f64("eta", 0.5)?,
    )
    .map_err(scheme_err)
}

/// One rate-table row: scheme id, display parameters, rate spec.
#[derive(Debug)]
pub struct RateRow {
    pub scheme: &'static str,
    pub params: String,
    pub spec: SchemeRateSpec,
}

/// Collects the rate-table rows whose `group.` keys are present; insisting
/// on at least one row. Within a group every key is required so partial
/// rows fail loudly.
pub fn rate_rows(cfg: &Config) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    if cfg.contains("subcarrier.k") || cfg.contains("subcarrier.k_s") {
        let k = cfg.require_usize("subcarrier.k")?;
        let ks = cfg.require_usize("subcarrier.k_s")?;
        let m = cfg.require_usize("subcarrier.m")?;
        rows.push(RateRow {
            scheme: "subcarrier-im",
            params: format!("K={k} Ks={ks} M={m}"),
            spec: SchemeRateSpec::SubcarrierIm { subcarriers: k, active: ks, psk_order: m },
        });
    }
    if cfg.contains("antenna.n") || cfg.contains("antenna.n_s") {
        let n = cfg.require_usize("antenna.n")?;
        let ns = cfg.require_usize("antenna.n_s")?;
        let m = cfg.require_usize("antenna.m")?;
        rows.push(RateRow {
            scheme: "antenna-im",
            params: format!("N={n} Ns={ns} M={m}"),
            spec: SchemeRateSpec::AntennaIm { antennas: n, active: ns, psk_order: m },
        });
    }
    if cfg.contains("majorcom.n") || cfg.contains("majorcom.k") {
        let n = cfg.require_usize("majorcom.n")?;
        let k = cfg.require_usize("majorcom.k")?;
        let reuse = cfg.get_bool("majorcom.reuse", false)?;
        rows.push(RateRow {
            scheme: "majorcom",
            params: format!("N={n} K={k}{}", if reuse { " reuse" } else { "" }),
            spec: SchemeRateSpec::FreqAgile { antennas: n, slots: k, reuse },
        });
    }
    if cfg.contains("grouped.n") || cfg.contains("grouped.k") {
        let n = cfg.require_usize("grouped.n")?;
        let k = cfg.require_usize("grouped.k")?;
        let g = cfg.require_usize("grouped.g")?;
        rows.push(RateRow {
            scheme: "majorcom-grouped",
            params: format!("N={n} K={k} G={g}"),
            spec: SchemeRateSpec::FreqAgileGrouped { antennas: n, slots: k, groups: g },
        });
    }
    if cfg.contains("frac.n") || cfg.contains("frac.n_s") {
        let n = cfg.require_usize("frac.n")?;
        let ns = cfg.require_usize("frac.n_s")?;
        let k = cfg.require_usize("frac.k")?;
        let m = cfg.require_usize("frac.m")?;
        rows.push(RateRow {
            scheme: "frac",
            params: format!("N={n} Ns={ns} K={k} M={m}"),
            spec: SchemeRateSpec::Frac { antennas: n, active: ns, slots: k, psk_order: m },
        });
    }
    if cfg.contains("fh.n") || cfg.contains("fh.k") {
        let n = cfg.require_usize("fh.n")?;
        let k = cfg.require_usize("fh.k")?;
        let h = cfg.require_usize("fh.h")?;
        rows.push(RateRow {
            scheme: "fh",
            params: format!("H={h} N={n} K={k}"),
            spec: SchemeRateSpec::Fh { antennas: n, codes: k, hops: h },
        });
    }
    if cfg.contains("spim.l_c") || cfg.contains("spim.l_s") {
        let lc = cfg.require_usize("spim.l_c")?;
        let ls = cfg.require_usize("spim.l_s")?;
        rows.push(RateRow {
            scheme: "spim",
            params: format!("Lc={lc} Ls={ls}"),
            spec: SchemeRateSpec::Spim { user_paths: lc, selected: ls },
        });
    }
    if rows.is_empty() {
        return Err(config_err(
            "no rate-table rows configured; add keys like `majorcom.n` (see the README key list)",
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_scheme_id_builds_with_defaults() {
        for id in SCHEME_IDS {
            let cfg = Config::parse_str(&format!("scheme = {id}")).unwrap();
            let sim = build_sim(&cfg).unwrap();
            assert_eq!(&sim.name(), id);
            assert!(sim.frame_bits() > 0);
        }
    }

    #[test]
    fn unknown_scheme_is_a_config_error() {
        let cfg = Config::parse_str("scheme = nonesuch").unwrap();
        assert!(build_sim(&cfg).is_err());
    }

    #[test]
    fn partial_rate_row_names_missing_key() {
        let cfg = Config::parse_str("majorcom.n = 4").unwrap();
        let err = rate_rows(&cfg).unwrap_err();
        assert!(err.to_string().contains("`majorcom.k`"));
    }
}
