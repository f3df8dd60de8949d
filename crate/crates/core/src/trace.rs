//! Formula-to-code map.
//!
//! Every operation in the workspace is registered here, flagged as either
//! implementing a published formula/procedure from the radar-communications
//! literature or being artifact plumbing. Literature-backed operations get
//! exactly one row in the rendered map (`docs/paper-map.md`), and a test
//! cross-checks the registry against the rows so the map cannot silently
//! rot.

/// One row of the map: the concept, a neutral rendering of the formula,
/// and where it lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub concept: &'static str,
    pub formula: &'static str,
    pub module: &'static str,
    pub operation: &'static str,
}

/// Registry record for one operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperationRecord {
    pub module: &'static str,
    pub operation: &'static str,
    /// True when the operation realizes a formula or procedure from the
    /// literature; false for artifact plumbing.
    pub literature: bool,
}

/// Every public operation of the workspace.
pub fn operation_registry() -> &'static [OperationRecord] {
    const R: &[OperationRecord] = &[
        // codebook
        OperationRecord { module: "codebook", operation: "binomial", literature: true },
        OperationRecord { module: "codebook", operation: "bits_for_selection", literature: true },
        OperationRecord { module: "codebook", operation: "rank_combination/unrank_combination", literature: false },
        OperationRecord { module: "codebook", operation: "rank_permutation/unrank_permutation", literature: true },
        OperationRecord { module: "codebook", operation: "rank_arrangement/unrank_arrangement", literature: false },
        OperationRecord { module: "codebook", operation: "rank_equal_partition/unrank_equal_partition", literature: false },
        OperationRecord { module: "codebook", operation: "rank_grouped_assignment/unrank_grouped_assignment", literature: false },
        OperationRecord { module: "codebook", operation: "scheme_rate", literature: true },
        OperationRecord { module: "codebook", operation: "build_lut", literature: true },
        // waveform
        OperationRecord { module: "waveform", operation: "steering", literature: true },
        OperationRecord { module: "waveform", operation: "sparse_steering", literature: true },
        OperationRecord { module: "waveform", operation: "fmcw_chirp", literature: true },
        OperationRecord { module: "waveform", operation: "fh_subpulse", literature: true },
        OperationRecord { module: "waveform", operation: "orthogonal_waveform_bank", literature: true },
        OperationRecord { module: "waveform", operation: "rect_window", literature: true },
        OperationRecord { module: "waveform", operation: "matched_filter_bank", literature: true },
        // channel
        OperationRecord { module: "channel", operation: "RngStream", literature: false },
        OperationRecord { module: "channel", operation: "awgn", literature: true },
        OperationRecord { module: "channel", operation: "rayleigh_gains", literature: true },
        OperationRecord { module: "channel", operation: "synthesize_echo", literature: true },
        // subcarrier scheme
        OperationRecord { module: "schemes::subcarrier", operation: "tx_subcarrier_im", literature: true },
        OperationRecord { module: "schemes::subcarrier", operation: "rx_null_detect", literature: true },
        // antenna scheme
        OperationRecord { module: "schemes::antenna", operation: "AntennaIm::tx", literature: true },
        OperationRecord { module: "schemes::antenna", operation: "user_matched_filter", literature: true },
        OperationRecord { module: "schemes::antenna", operation: "AntennaIm::decode", literature: true },
        OperationRecord { module: "schemes::antenna", operation: "radar_receive", literature: true },
        OperationRecord { module: "schemes::antenna", operation: "subarray_peak_sidelobe_db", literature: true },
        // frequency-agile scheme
        OperationRecord { module: "schemes::freq_agile", operation: "tx_freq_agile (distinct mode)", literature: true },
        OperationRecord { module: "schemes::freq_agile", operation: "tx_freq_agile (grouped mode)", literature: true },
        OperationRecord { module: "schemes::freq_agile", operation: "rx_freq_agile", literature: true },
        OperationRecord { module: "schemes::freq_agile", operation: "assignment_rank", literature: false },
        // chirp hybrid scheme
        OperationRecord { module: "schemes::frac", operation: "tx_frac", literature: true },
        OperationRecord { module: "schemes::frac", operation: "rx_frac", literature: true },
        OperationRecord { module: "schemes::frac", operation: "build_dictionary", literature: false },
        // frequency-hopping scheme
        OperationRecord { module: "schemes::fh", operation: "tx_fh", literature: true },
        OperationRecord { module: "schemes::fh", operation: "rx_fh", literature: false },
        // spatial-path scheme
        OperationRecord { module: "schemes::spim", operation: "build_patterns", literature: true },
        OperationRecord { module: "schemes::spim", operation: "build_beamformer", literature: true },
        OperationRecord { module: "schemes::spim", operation: "spim_se", literature: true },
        OperationRecord { module: "schemes::spim", operation: "isac_se", literature: true },
        OperationRecord { module: "schemes::spim", operation: "tx_spim", literature: true },
        OperationRecord { module: "schemes::spim", operation: "decode_spim", literature: false },
        OperationRecord { module: "schemes::spim", operation: "beampattern", literature: true },
        OperationRecord { module: "schemes::spim", operation: "draw_channel", literature: false },
        // metrics
        OperationRecord { module: "metrics", operation: "monte_carlo_ber", literature: false },
        OperationRecord { module: "metrics", operation: "se_sweep", literature: true },
        OperationRecord { module: "metrics", operation: "beampattern_sweep", literature: true },
        OperationRecord { module: "metrics", operation: "run_roundtrip", literature: false },
        // cli
        OperationRecord { module: "cli", operation: "cmd_rate_table", literature: true },
        OperationRecord { module: "cli", operation: "cmd_ber", literature: false },
        OperationRecord { module: "cli", operation: "cmd_se", literature: true },
        OperationRecord { module: "cli", operation: "cmd_beampattern", literature: true },
        OperationRecord { module: "cli", operation: "cmd_roundtrip", literature: false },
        // trace
        OperationRecord { module: "trace", operation: "generate_trace_table", literature: false },
    ];
    R
}

/// One row per literature-backed operation.
pub fn trace_entries() -> &'static [TraceEntry] {
    const E: &[TraceEntry] = &[
        TraceEntry {
            concept: "binomial coefficient of a k-of-n selection",
            formula: "C(k,n) = n! / (k! (n-k)!)",
            module: "codebook",
            operation: "binomial",
        },
        TraceEntry {
            concept: "index bits carried by a k-of-n selection",
            formula: "B_i = floor(log2 C(k,n))",
            module: "codebook",
            operation: "bits_for_selection",
        },
        TraceEntry {
            concept: "ordering bits carried by waveform permutations",
            formula: "floor(log2 k!)",
            module: "codebook",
            operation: "rank_permutation/unrank_permutation",
        },
        TraceEntry {
            concept: "per-scheme communication-rate formulas (nominal vs exact)",
            formula: "e.g. N_s log2 M + floor(log2 C(N_s,K)) + floor(log2 C(N_s,N)) + floor(log2 N_s!)",
            module: "codebook",
            operation: "scheme_rate",
        },
        TraceEntry {
            concept: "receiver-known index look-up table",
            formula: "LUT[i] = unrank(i), exactly 2^B entries",
            module: "codebook",
            operation: "build_lut",
        },
        TraceEntry {
            concept: "uniform linear array steering vector",
            formula: "a(theta)_n = exp(j 2 pi (d/lambda) n sin theta)",
            module: "waveform",
            operation: "steering",
        },
        TraceEntry {
            concept: "sparse-array steering vector",
            formula: "abar(theta) = Q a(theta)",
            module: "waveform",
            operation: "sparse_steering",
        },
        TraceEntry {
            concept: "linear-FM baseband chirp",
            formula: "s(t) = exp(j pi kappa t^2) on [0, T)",
            module: "waveform",
            operation: "fmcw_chirp",
        },
        TraceEntry {
            concept: "frequency-hop subpulse",
            formula: "u(t,h) = exp(j 2 pi c delta_f t) v(t - h delta_t)",
            module: "waveform",
            operation: "fh_subpulse",
        },
        TraceEntry {
            concept: "orthogonal radar waveform bank",
            formula: "<psi_n, psi_m> = delta_{nm}, unit energy",
            module: "waveform",
            operation: "orthogonal_waveform_bank",
        },
        TraceEntry {
            concept: "rectangular pulse window",
            formula: "rect((t - b T0) / T0)",
            module: "waveform",
            operation: "rect_window",
        },
        TraceEntry {
            concept: "matched filtering against a waveform bank",
            formula: "y_n = integral y(t) psi_n^*(t) dt",
            module: "waveform",
            operation: "matched_filter_bank",
        },
        TraceEntry {
            concept: "additive circularly-symmetric receiver noise",
            formula: "y = x + n, n ~ CN(0, sigma^2 I)",
            module: "channel",
            operation: "awgn",
        },
        TraceEntry {
            concept: "per-subcarrier flat fading gains",
            formula: "h_k ~ CN(0, 1) i.i.d. (Rayleigh envelope)",
            module: "channel",
            operation: "rayleigh_gains",
        },
        TraceEntry {
            concept: "radar receive-array echo synthesis",
            formula: "y(t,p) = sum_r alpha_r(p) (abar^T(theta_r) Psi(t)) atilde(theta_r) + n(t,p)",
            module: "channel",
            operation: "synthesize_echo",
        },
        TraceEntry {
            concept: "OFDM-IM baseband superposition",
            formula: "x(t) = sum_b sum_k alpha_{b,k} exp(j 2 pi f_k t) rect((t - b T0)/T0)",
            module: "schemes::subcarrier",
            operation: "tx_subcarrier_im",
        },
        TraceEntry {
            concept: "null-subcarrier detection",
            formula: "nulls_b = argmin-set over k of |Y_{b,k}|^2",
            module: "schemes::subcarrier",
            operation: "rx_null_detect",
        },
        TraceEntry {
            concept: "subarray-selection transmit chain",
            formula: "selected antenna i radiates s_i psi_i(t), Q(p) from the index bits",
            module: "schemes::antenna",
            operation: "AntennaIm::tx",
        },
        TraceEntry {
            concept: "single-antenna user matched filter",
            formula: "y_C(p) = alpha_C abar(phi, p) + n_C(p) after the bank projection",
            module: "schemes::antenna",
            operation: "user_matched_filter",
        },
        TraceEntry {
            concept: "minimum-distance subarray decoding",
            formula: "i* = argmin_i || y_C(p)/alpha_C - abar_i(phi,p) ||_2",
            module: "schemes::antenna",
            operation: "AntennaIm::decode",
        },
        TraceEntry {
            concept: "Kronecker-structured radar snapshot",
            formula: "y_R(p) = sum_r alpha_r(p) [Q(p) a(theta_r)] kron atilde(theta_r) + n(p)",
            module: "schemes::antenna",
            operation: "radar_receive",
        },
        TraceEntry {
            concept: "sidelobe-constrained subarray pruning",
            formula: "keep patterns with peak sidelobe below a configured level",
            module: "schemes::antenna",
            operation: "subarray_peak_sidelobe_db",
        },
        TraceEntry {
            concept: "frequency-agile transmit signal (distinct tones)",
            formula: "x_n(t,p) = w_n(theta, f_{n,p}) rect((t - pT)/T) exp(j 2 pi f_{n,p} t)",
            module: "schemes::freq_agile",
            operation: "tx_freq_agile (distinct mode)",
        },
        TraceEntry {
            concept: "grouped-subarray frequency-agile signal",
            formula: "x(t,p) = sum_g Qtilde(p,g) w(theta,g,p) rect((t - pT)/T) exp(j 2 pi f_{n,p,g} t)",
            module: "schemes::freq_agile",
            operation: "tx_freq_agile (grouped mode)",
        },
        TraceEntry {
            concept: "tone-bank frequency detection",
            formula: "slot_n = argmax_k |<y_n, tone_k>|, distinctness enforced greedily",
            module: "schemes::freq_agile",
            operation: "rx_freq_agile",
        },
        TraceEntry {
            concept: "chirp hybrid transmit waveform",
            formula: "x_n(t,p) = s(t - pT) exp(j 2 pi f_{n,p} t) exp(j phi_{n,p})",
            module: "schemes::frac",
            operation: "tx_frac",
        },
        TraceEntry {
            concept: "block-sparse hybrid decoding",
            formula: "xi_hat = argmin || y - Phi xi ||_2 with N_s active (antenna, frequency) blocks",
            module: "schemes::frac",
            operation: "rx_frac",
        },
        TraceEntry {
            concept: "frequency-hopping transmit waveform",
            formula: "z_n(t,h) = exp(j(theta_BPSK + zeta_n)) u_n(t,h), zeta_n = n pi/N - arg a(theta_r)_n",
            module: "schemes::fh",
            operation: "tx_fh",
        },
        TraceEntry {
            concept: "spatial-pattern codebook",
            formula: "S = 2^floor(log2 C(L_s, L_C)) path subsets",
            module: "schemes::spim",
            operation: "build_patterns",
        },
        TraceEntry {
            concept: "hybrid beamformer block structure",
            formula: "F_RF^(i) = [F_R | F_C^(i)], F_C^(i) = A_user B^(i)T",
            module: "schemes::spim",
            operation: "build_beamformer",
        },
        TraceEntry {
            concept: "pattern-mixture spectral efficiency",
            formula: "log2(2^S/(2 sigma^2)^Nr) - (1/S) sum_i log2 sum_j det(Sigma_i + Sigma_j)^{-1}",
            module: "schemes::spim",
            operation: "spim_se",
        },
        TraceEntry {
            concept: "conventional (single-pattern) spectral efficiency",
            formula: "SE = log2 det(Sigma_1)",
            module: "schemes::spim",
            operation: "isac_se",
        },
        TraceEntry {
            concept: "spatial-pattern transmit vector",
            formula: "x = F_RF^(i) F_BB^(i) s",
            module: "schemes::spim",
            operation: "tx_spim",
        },
        TraceEntry {
            concept: "transmit beampattern",
            formula: "P(theta) = || a^H(theta) F_RF F_BB ||^2, peak-normalized",
            module: "schemes::spim",
            operation: "beampattern",
        },
        TraceEntry {
            concept: "spectral efficiency versus SNR",
            formula: "averaged pattern-mixture and conventional SE per SNR point",
            module: "metrics",
            operation: "se_sweep",
        },
        TraceEntry {
            concept: "trade-off beampattern family",
            formula: "normalized P(theta) per eta in {0, 0.5, 1}",
            module: "metrics",
            operation: "beampattern_sweep",
        },
        TraceEntry {
            concept: "communication-rate table",
            formula: "one row per scheme: nominal and exact bits per modulation unit",
            module: "cli",
            operation: "cmd_rate_table",
        },
        TraceEntry {
            concept: "spectral-efficiency sweep command",
            formula: "CSV rows (snr_db, se_spim, se_isac)",
            module: "cli",
            operation: "cmd_se",
        },
        TraceEntry {
            concept: "beampattern sweep command",
            formula: "CSV rows (theta_deg, power_db per eta)",
            module: "cli",
            operation: "cmd_beampattern",
        },
    ];
    E
}

/// Renders the map as a markdown table (the `docs/paper-map.md` artifact).
pub fn generate_trace_table() -> String {
    let mut out = String::new();
    out.push_str("# Formula map\n\n");
    out.push_str(
        "Where each implemented formula or procedure lives. Operations flagged as\n\
         plumbing (ranking bijections, harnesses, command glue) are listed at the\n\
         bottom without a formula row. Regenerate with\n\
         `cargo run -p imisac-core --example gen_paper_map > docs/paper-map.md`.\n\n",
    );
    out.push_str("| Concept | Formula | Module | Operation |\n");
    out.push_str("|---|---|---|---|\n");
    for e in trace_entries() {
        out.push_str(&format!(
            "| {} | `{}` | `{}` | `{}` |\n",
            e.concept, e.formula, e.module, e.operation
        ));
    }
    out.push_str("\n## Plumbing operations\n\n");
    for r in operation_registry().iter().filter(|r| !r.literature) {
        out.push_str(&format!("- `{}::{}`\n", r.module, r.operation));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn every_literature_operation_has_exactly_one_entry() {
        for record in operation_registry().iter().filter(|r| r.literature) {
            let count = trace_entries()
                .iter()
                .filter(|e| e.module == record.module && e.operation == record.operation)
                .count();
            assert_eq!(
                count, 1,
                "{}::{} must have exactly one map row, found {count}",
                record.module, record.operation
            );
        }
    }

    #[test]
    fn plumbing_operations_have_no_entry() {
        for record in operation_registry().iter().filter(|r| !r.literature) {
            assert!(
                !trace_entries()
                    .iter()
                    .any(|e| e.module == record.module && e.operation == record.operation),
                "{}::{} is plumbing but has a map row",
                record.module,
                record.operation
            );
        }
    }

    #[test]
    fn every_entry_points_at_a_registered_operation() {
        let registry: HashSet<(&str, &str)> = operation_registry()
            .iter()
            .map(|r| (r.module, r.operation))
            .collect();
        for e in trace_entries() {
            assert!(
                registry.contains(&(e.module, e.operation)),
                "map row {}::{} has no registry record",
                e.module,
                e.operation
            );
        }
    }

    #[test]
    fn no_duplicate_rows() {
        let mut seen = HashSet::new();
        for e in trace_entries() {
            assert!(
                seen.insert((e.module, e.operation, e.concept)),
                "duplicate row {}::{} ({})",
                e.module,
                e.operation,
                e.concept
            );
        }
    }

    #[test]
    fn table_covers_key_formulas() {
        let table = generate_trace_table();
        assert!(table.contains("OFDM-IM baseband superposition"));
        assert!(table.contains("pattern-mixture spectral efficiency"));
        assert!(table.contains("| Concept | Formula | Module | Operation |"));
    }
}
