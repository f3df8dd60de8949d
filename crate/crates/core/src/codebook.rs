//! Combinatorial bit <-> index mappings shared by every modulation scheme.
//!
//! Index modulation conveys information by *which* resources are active, so
//! every scheme needs a bijection between bit values and resource-selection
//! patterns. This module provides:
//!
//! - exact binomial / factorial arithmetic with overflow guards,
//! - ranking and unranking of combinations (colexicographic order),
//!   permutations (lexicographic, Lehmer codes) and ordered arrangements
//!   (k distinct items out of n, assigned to k slots),
//! - ranking of equal-size set partitions (used by grouped frequency-agile
//!   arrays),
//! - per-scheme communication-rate evaluation (nominal formula vs. the
//!   exactly enumerable pattern count),
//! - look-up-table generation for small index spaces.
//!
//! Orderings are fixed for cross-implementation reproducibility:
//! combinations are colexicographic, permutations lexicographic, and bit
//! words map to ranks big-endian (first bit is the most significant).

use thiserror::Error;

/// Largest universe size accepted by [`binomial`]; keeps every count inside
/// exact 64-bit arithmetic.
pub const MAX_UNIVERSE: usize = 62;

/// Largest LUT size, expressed in index bits (2^20 entries).
pub const MAX_LUT_BITS: u32 = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodebookError {
    #[error("selection count k={k} exceeds universe size n={n}")]
    KExceedsN { k: usize, n: usize },
    #[error("universe size n={n} exceeds exact-arithmetic guard n<={max}")]
    UniverseTooLarge { n: usize, max: usize },
    #[error("{0} does not fit exact 64-bit arithmetic")]
    Overflow(&'static str),
    #[error("rank {rank} outside codebook domain [0, {limit})")]
    RankOutOfRange { rank: u64, limit: u64 },
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("look-up table of {bits} index bits exceeds the {max}-bit guard")]
    TableTooLarge { bits: u32, max: u32 },
}

pub type Result<T> = std::result::Result<T, CodebookError>;

// ---------------------------------------------------------------------------
// Exact counting
// ---------------------------------------------------------------------------

/// Binomial coefficient for selecting `k` elements out of `n`, computed
/// exactly. Errors when `k > n` or `n` exceeds [`MAX_UNIVERSE`].
pub fn binomial(k: usize, n: usize) -> Result<u64> {
    if k > n {
        return Err(CodebookError::KExceedsN { k, n });
    }
    if n > MAX_UNIVERSE {
        return Err(CodebookError::UniverseTooLarge { n, max: MAX_UNIVERSE });
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // Product of i consecutive integers is divisible by i!.
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    u64::try_from(acc).map_err(|_| CodebookError::Overflow("binomial coefficient"))
}

/// `k!` as an exact 64-bit integer (valid for `k <= 20`).
pub fn factorial(k: usize) -> Result<u64> {
    if k > 20 {
        return Err(CodebookError::Overflow("factorial"));
    }
    Ok((2..=k as u64).product())
}

/// Falling factorial `n! / (n-k)!`: the number of ordered arrangements of
/// `k` distinct items out of `n`.
pub fn arrangement_count(k: usize, n: usize) -> Result<u64> {
    if k > n {
        return Err(CodebookError::KExceedsN { k, n });
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or(CodebookError::Overflow("arrangement count"))?;
    }
    u64::try_from(acc).map_err(|_| CodebookError::Overflow("arrangement count"))
}

/// Number of ways to split `n` labelled items into `g` labelled groups of
/// equal size `n/g`: the multinomial `n! / ((n/g)!)^g`.
pub fn equal_partition_count(n: usize, g: usize) -> Result<u64> {
    if g == 0 || !n.is_multiple_of(g) {
        return Err(CodebookError::InvalidParameter(format!(
            "group count g={g} must divide item count n={n}"
        )));
    }
    let m = n / g;
    let mut acc: u128 = 1;
    let mut remaining = n;
    for _ in 0..g {
        acc = acc
            .checked_mul(binomial(m, remaining)? as u128)
            .ok_or(CodebookError::Overflow("partition count"))?;
        remaining -= m;
    }
    u64::try_from(acc).map_err(|_| CodebookError::Overflow("partition count"))
}

/// Floor of log2 of a positive integer; 0 for inputs 0 and 1.
pub fn floor_log2(v: u128) -> u32 {
    if v <= 1 {
        0
    } else {
        127 - v.leading_zeros()
    }
}

/// Index bits available from selecting `k` out of `n`: floor(log2 C(k,n)).
pub fn bits_for_selection(k: usize, n: usize) -> Result<u32> {
    Ok(floor_log2(binomial(k, n)? as u128))
}

/// Index bits available from ordering `k` slots: floor(log2 k!).
pub fn bits_for_permutation(k: usize) -> Result<u32> {
    Ok(floor_log2(factorial(k)? as u128))
}

/// Index bits available from an ordered `k`-of-`n` arrangement:
/// floor(log2 (n!/(n-k)!)).
pub fn bits_for_arrangement(k: usize, n: usize) -> Result<u32> {
    Ok(floor_log2(arrangement_count(k, n)? as u128))
}

// ---------------------------------------------------------------------------
// Bit packing (big-endian: first bit is most significant)
// ---------------------------------------------------------------------------

/// Packs a big-endian bit slice into an integer rank.
pub fn bits_to_value(bits: &[bool]) -> u64 {
    assert!(bits.len() <= 63, "bit word wider than 63 bits");
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// Unpacks `value` into `width` big-endian bits.
pub fn value_to_bits(value: u64, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

// ---------------------------------------------------------------------------
// Selection patterns (combinations)
// ---------------------------------------------------------------------------

/// A sorted `k`-of-`n` index subset: which subcarriers / antennas /
/// frequencies / spatial paths are active.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectionPattern {
    indices: Vec<usize>,
    universe: usize,
}

impl SelectionPattern {
    /// Validates that `indices` is strictly increasing with every entry
    /// below `universe`.
    pub fn new(indices: Vec<usize>, universe: usize) -> Result<Self> {
        if indices.len() > universe {
            return Err(CodebookError::KExceedsN { k: indices.len(), n: universe });
        }
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(CodebookError::InvalidPattern(format!(
                    "indices must be strictly increasing, got {:?}",
                    indices
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= universe {
                return Err(CodebookError::InvalidPattern(format!(
                    "index {last} outside universe [0, {universe})"
                )));
            }
        }
        Ok(Self { indices, universe })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Sorted indices of the universe that are not part of the pattern.
    pub fn complement(&self) -> SelectionPattern {
        let indices = (0..self.universe)
            .filter(|i| !self.indices.contains(i))
            .collect();
        SelectionPattern { indices, universe: self.universe }
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }
}

/// `top` choose `bottom` extended by zero when `bottom > top`; the
/// combinadic sums need the degenerate terms.
fn choose(top: usize, bottom: usize) -> u64 {
    if bottom > top {
        0
    } else {
        binomial(bottom, top).expect("universe bound checked by the caller")
    }
}

/// Colexicographic rank of a pattern among all C(k,n) subsets. Total over
/// every valid pattern; ranks at or beyond the 2^bits codebook limit simply
/// identify patterns outside the bit-mapped codebook.
pub fn rank_combination(pattern: &SelectionPattern) -> Result<u64> {
    binomial(pattern.len(), pattern.universe())?;
    let mut rank: u64 = 0;
    for (i, &c) in pattern.indices.iter().enumerate() {
        rank += choose(c, i + 1);
    }
    Ok(rank)
}

/// Colex unranking over the full range `[0, C(k,n))`; private because the
/// public codebook domain is the power-of-two prefix.
fn unrank_combination_full(rank: u64, k: usize, n: usize) -> Result<SelectionPattern> {
    let total = binomial(k, n)?;
    debug_assert!(rank < total, "full-range combination rank {rank} >= {total}");
    let mut r = rank;
    let mut indices = vec![0usize; k];
    let mut bound = n;
    for i in (1..=k).rev() {
        // Largest value v with (v choose i) <= r.
        let mut v = bound - 1;
        while choose(v, i) > r {
            v -= 1;
        }
        indices[i - 1] = v;
        r -= choose(v, i);
        bound = v;
    }
    SelectionPattern::new(indices, n)
}

/// Inverse of [`rank_combination`] over the bit-mapped codebook domain
/// `[0, 2^bits_for_selection(k,n))`.
pub fn unrank_combination(rank: u64, k: usize, n: usize) -> Result<SelectionPattern> {
    let limit = 1u64 << bits_for_selection(k, n)?;
    if rank >= limit {
        return Err(CodebookError::RankOutOfRange { rank, limit });
    }
    unrank_combination_full(rank, k, n)
}

/// Every `k`-of-`n` selection pattern in colexicographic order.
pub fn unrank_combination_sequence(k: usize, n: usize) -> Result<Vec<SelectionPattern>> {
    (0..binomial(k, n)?).map(|r| unrank_combination_full(r, k, n)).collect()
}

// ---------------------------------------------------------------------------
// Permutations (Lehmer codes, lexicographic)
// ---------------------------------------------------------------------------

fn validate_permutation(order: &[usize]) -> Result<()> {
    let k = order.len();
    let mut seen = vec![false; k];
    for &v in order {
        if v >= k || seen[v] {
            return Err(CodebookError::InvalidPattern(format!(
                "order {:?} is not a permutation of 0..{k}",
                order
            )));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Lexicographic rank of a permutation of `0..k` via its Lehmer code.
pub fn rank_permutation(order: &[usize]) -> Result<u64> {
    validate_permutation(order)?;
    let k = order.len();
    let mut rank: u64 = 0;
    for i in 0..k {
        let smaller_later = order[i + 1..].iter().filter(|&&v| v < order[i]).count() as u64;
        rank += smaller_later * factorial(k - 1 - i)?;
    }
    Ok(rank)
}

fn unrank_permutation_full(rank: u64, k: usize) -> Result<Vec<usize>> {
    let mut r = rank;
    let mut pool: Vec<usize> = (0..k).collect();
    let mut order = Vec::with_capacity(k);
    for i in 0..k {
        let f = factorial(k - 1 - i)?;
        let d = (r / f) as usize;
        r %= f;
        order.push(pool.remove(d));
    }
    Ok(order)
}

/// Inverse of [`rank_permutation`] over `[0, 2^bits_for_permutation(k))`.
pub fn unrank_permutation(rank: u64, k: usize) -> Result<Vec<usize>> {
    let limit = 1u64 << bits_for_permutation(k)?;
    if rank >= limit {
        return Err(CodebookError::RankOutOfRange { rank, limit });
    }
    unrank_permutation_full(rank, k)
}

// ---------------------------------------------------------------------------
// Ordered arrangements (k distinct items of n, assigned to k slots)
// ---------------------------------------------------------------------------

/// A selection pattern plus a slot ordering: slot `i` is served by item
/// `pattern.indices()[order[i]]`. Carries the permutation factor of the
/// hybrid schemes (which selected frequency feeds which selected antenna).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedAssignment {
    pub pattern: SelectionPattern,
    pub order: Vec<usize>,
}

impl OrderedAssignment {
    pub fn new(pattern: SelectionPattern, order: Vec<usize>) -> Result<Self> {
        if order.len() != pattern.len() {
            return Err(CodebookError::InvalidPattern(format!(
                "order length {} != pattern length {}",
                order.len(),
                pattern.len()
            )));
        }
        validate_permutation(&order)?;
        Ok(Self { pattern, order })
    }

    /// Identity-ordered assignment (slot `i` gets the `i`-th smallest item).
    pub fn identity(pattern: SelectionPattern) -> Self {
        let order = (0..pattern.len()).collect();
        Self { pattern, order }
    }

    /// Item assigned to each slot, in slot order.
    pub fn slot_items(&self) -> Vec<usize> {
        self.order.iter().map(|&o| self.pattern.indices()[o]).collect()
    }

    /// Reconstructs an assignment from the per-slot item list.
    pub fn from_slot_items(items: &[usize], universe: usize) -> Result<Self> {
        let mut sorted: Vec<usize> = items.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != items.len() {
            return Err(CodebookError::InvalidPattern(format!(
                "slot items {:?} are not distinct",
                items
            )));
        }
        let pattern = SelectionPattern::new(sorted, universe)?;
        let order = items
            .iter()
            .map(|item| pattern.indices().binary_search(item).unwrap())
            .collect();
        Ok(Self { pattern, order })
    }
}

/// Mixed-radix rank: combination rank (colex) times k! plus permutation
/// rank (lex). Total over all n!/(n-k)! arrangements.
pub fn rank_arrangement(assignment: &OrderedAssignment) -> Result<u64> {
    let k = assignment.pattern.len();
    Ok(rank_combination(&assignment.pattern)? * factorial(k)? + rank_permutation(&assignment.order)?)
}

fn unrank_arrangement_full(rank: u64, k: usize, n: usize) -> Result<OrderedAssignment> {
    let f = factorial(k)?;
    let pattern = unrank_combination_full(rank / f, k, n)?;
    let order = unrank_permutation_full(rank % f, k)?;
    OrderedAssignment::new(pattern, order)
}

/// Inverse of [`rank_arrangement`] over `[0, 2^bits_for_arrangement(k,n))`.
pub fn unrank_arrangement(rank: u64, k: usize, n: usize) -> Result<OrderedAssignment> {
    let limit = 1u64 << bits_for_arrangement(k, n)?;
    if rank >= limit {
        return Err(CodebookError::RankOutOfRange { rank, limit });
    }
    unrank_arrangement_full(rank, k, n)
}

// ---------------------------------------------------------------------------
// Equal-size set partitions (grouped subarrays)
// ---------------------------------------------------------------------------

fn validate_partition(labels: &[usize], g: usize) -> Result<usize> {
    let n = labels.len();
    if g == 0 || !n.is_multiple_of(g) {
        return Err(CodebookError::InvalidParameter(format!(
            "group count g={g} must divide item count n={n}"
        )));
    }
    let m = n / g;
    let mut counts = vec![0usize; g];
    for &l in labels {
        if l >= g {
            return Err(CodebookError::InvalidPattern(format!(
                "group label {l} outside [0, {g})"
            )));
        }
        counts[l] += 1;
    }
    if counts.iter().any(|&c| c != m) {
        return Err(CodebookError::InvalidPattern(format!(
            "groups must have equal size {m}, got counts {:?}",
            counts
        )));
    }
    Ok(m)
}

/// Ranks a labelled equal-size partition (entry `i` of `labels` is the group
/// of item `i`) among all n!/((n/g)!)^g partitions. Groups are consumed in
/// label order; member sets are ranked colexicographically over the items
/// still unassigned.
pub fn rank_equal_partition(labels: &[usize], g: usize) -> Result<u64> {
    let m = validate_partition(labels, g)?;
    let mut remaining: Vec<usize> = (0..labels.len()).collect();
    let mut rank: u128 = 0;
    for group in 0..g {
        let members: Vec<usize> = remaining
            .iter()
            .enumerate()
            .filter(|(_, &item)| labels[item] == group)
            .map(|(pos, _)| pos)
            .collect();
        let pattern = SelectionPattern::new(members, remaining.len())?;
        let radix = binomial(m, remaining.len())? as u128;
        rank = rank * radix + rank_combination(&pattern)? as u128;
        remaining.retain(|&item| labels[item] != group);
    }
    u64::try_from(rank).map_err(|_| CodebookError::Overflow("partition rank"))
}

/// Inverse of [`rank_equal_partition`] over the full multinomial range.
pub fn unrank_equal_partition(rank: u64, n: usize, g: usize) -> Result<Vec<usize>> {
    let total = equal_partition_count(n, g)?;
    if rank >= total {
        return Err(CodebookError::RankOutOfRange { rank, limit: total });
    }
    let m = n / g;
    // Peel mixed-radix digits most-significant first.
    let mut radices = Vec::with_capacity(g);
    let mut remaining_count = n;
    for _ in 0..g {
        radices.push(binomial(m, remaining_count)?);
        remaining_count -= m;
    }
    let mut suffix: Vec<u64> = vec![1; g + 1];
    for i in (0..g).rev() {
        suffix[i] = suffix[i + 1] * radices[i];
    }
    let mut labels = vec![usize::MAX; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut r = rank;
    for group in 0..g {
        let digit = r / suffix[group + 1];
        r %= suffix[group + 1];
        let members = unrank_combination_full(digit, m, remaining.len())?;
        for &pos in members.indices() {
            labels[remaining[pos]] = group;
        }
        remaining.retain(|&item| labels[item] == usize::MAX);
    }
    Ok(labels)
}

// ---------------------------------------------------------------------------
// Grouped assignments (frequency subset plus equal partition)
// ---------------------------------------------------------------------------

/// Pattern count of the grouped mode: choose `groups` of `slots`
/// frequencies, then split `antennas` into `groups` equal subarrays
/// (ascending frequencies map to group labels in order).
pub fn grouped_assignment_count(antennas: usize, groups: usize, slots: usize) -> Result<u64> {
    let c = binomial(groups, slots)? as u128;
    let p = equal_partition_count(antennas, groups)? as u128;
    u64::try_from(c * p).map_err(|_| CodebookError::Overflow("grouped assignment count"))
}

/// Mixed-radix rank of a grouped assignment: frequency-subset rank (colex)
/// times the partition count, plus the partition rank.
pub fn rank_grouped_assignment(freqs: &SelectionPattern, labels: &[usize]) -> Result<u64> {
    let g = freqs.len();
    let p = equal_partition_count(labels.len(), g)?;
    Ok(rank_combination(freqs)? * p + rank_equal_partition(labels, g)?)
}

/// Inverse of [`rank_grouped_assignment`] over the full pattern count.
pub fn unrank_grouped_assignment(
    rank: u64,
    antennas: usize,
    groups: usize,
    slots: usize,
) -> Result<(SelectionPattern, Vec<usize>)> {
    let total = grouped_assignment_count(antennas, groups, slots)?;
    if rank >= total {
        return Err(CodebookError::RankOutOfRange { rank, limit: total });
    }
    let p = equal_partition_count(antennas, groups)?;
    let freqs = unrank_combination_full(rank / p, groups, slots)?;
    let labels = unrank_equal_partition(rank % p, antennas, groups)?;
    Ok((freqs, labels))
}

// ---------------------------------------------------------------------------
// Communication-rate evaluation
// ---------------------------------------------------------------------------

/// Scheme identifier plus the parameters entering its rate formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeRateSpec {
    /// OFDM subcarrier IM with `active` of `subcarriers` tones and M-PSK
    /// symbol bits (`psk_order = 1` disables phase modulation).
    SubcarrierIm { subcarriers: usize, active: usize, psk_order: usize },
    /// Sparse-array antenna IM with `active` of `antennas` selected.
    AntennaIm { antennas: usize, active: usize, psk_order: usize },
    /// Full-array frequency-agile IM: every antenna carries one of `slots`
    /// tones. `reuse = false` (the default mode) forces distinct tones.
    FreqAgile { antennas: usize, slots: usize, reuse: bool },
    /// Grouped-subarray frequency-agile IM: `groups` equal subarrays, each
    /// on its own tone chosen from `slots`.
    FreqAgileGrouped { antennas: usize, slots: usize, groups: usize },
    /// Chirp-based joint antenna/frequency/phase IM.
    Frac { antennas: usize, active: usize, slots: usize, psk_order: usize },
    /// Frequency-hopping IM over (code, initial phase, antenna) tuples.
    Fh { antennas: usize, codes: usize, hops: usize },
    /// Spatial-path IM over `selected` of `user_paths` beamformer taps.
    Spim { user_paths: usize, selected: usize },
}

/// Nominal (closed-form) and exact (enumeration-based) bits per modulation
/// unit. Transmit chains always consume `exact_bits` so that decoding is
/// well defined; both values are reported so discrepancies stay visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateReport {
    pub nominal_bits: u32,
    pub exact_bits: u32,
}

fn psk_bits(psk_order: usize) -> Result<u32> {
    if psk_order == 0 || !psk_order.is_power_of_two() {
        return Err(CodebookError::InvalidParameter(format!(
            "psk_order must be a power of two >= 1, got {psk_order}"
        )));
    }
    Ok(psk_order.trailing_zeros())
}

fn pow_bits(base: usize, exp: usize, what: &'static str) -> Result<u32> {
    if base == 0 {
        return Err(CodebookError::InvalidParameter(format!(
            "{what}: base of {base}^{exp} must be positive"
        )));
    }
    let v = (base as u128)
        .checked_pow(exp as u32)
        .ok_or(CodebookError::Overflow(what))?;
    Ok(floor_log2(v))
}

/// Evaluates the communication-rate formula for `spec`, returning both the
/// closed-form nominal value and the floor-log2 of the exactly enumerable
/// pattern count.
pub fn scheme_rate(spec: SchemeRateSpec) -> Result<RateReport> {
    match spec {
        SchemeRateSpec::SubcarrierIm { subcarriers, active, psk_order } => {
            if active == 0 || active > subcarriers {
                return Err(CodebookError::InvalidParameter(format!(
                    "subcarrier IM requires 1 <= active <= subcarriers, got active={active}, subcarriers={subcarriers}"
                )));
            }
            let bits = active as u32 * psk_bits(psk_order)? + bits_for_selection(active, subcarriers)?;
            Ok(RateReport { nominal_bits: bits, exact_bits: bits })
        }
        SchemeRateSpec::AntennaIm { antennas, active, psk_order } => {
            if active == 0 || active > antennas {
                return Err(CodebookError::InvalidParameter(format!(
                    "antenna IM requires 1 <= active <= antennas, got active={active}, antennas={antennas}"
                )));
            }
            let bits = active as u32 * psk_bits(psk_order)? + bits_for_selection(active, antennas)?;
            Ok(RateReport { nominal_bits: bits, exact_bits: bits })
        }
        SchemeRateSpec::FreqAgile { antennas, slots, reuse } => {
            if antennas == 0 {
                return Err(CodebookError::InvalidParameter(
                    "frequency-agile IM requires antennas >= 1".into(),
                ));
            }
            let nominal = pow_bits(slots, antennas, "slots^antennas")?;
            let exact = if reuse {
                nominal
            } else {
                if antennas > slots {
                    return Err(CodebookError::InvalidParameter(format!(
                        "distinct-frequency mode requires antennas <= slots, got antennas={antennas}, slots={slots}"
                    )));
                }
                bits_for_arrangement(antennas, slots)?
            };
            Ok(RateReport { nominal_bits: nominal, exact_bits: exact })
        }
        SchemeRateSpec::FreqAgileGrouped { antennas, slots, groups } => {
            if groups == 0 || !antennas.is_multiple_of(groups) {
                return Err(CodebookError::InvalidParameter(format!(
                    "grouped mode requires groups to divide antennas, got groups={groups}, antennas={antennas}"
                )));
            }
            if groups > slots {
                return Err(CodebookError::InvalidParameter(format!(
                    "grouped mode requires groups <= slots, got groups={groups}, slots={slots}"
                )));
            }
            let nominal = pow_bits(slots, groups, "slots^groups")? + pow_bits(groups, antennas, "groups^antennas")?;
            let count = (binomial(groups, slots)? as u128)
                .checked_mul(equal_partition_count(antennas, groups)? as u128)
                .ok_or(CodebookError::Overflow("grouped pattern count"))?;
            Ok(RateReport { nominal_bits: nominal, exact_bits: floor_log2(count) })
        }
        SchemeRateSpec::Frac { antennas, active, slots, psk_order } => {
            if active == 0 || active > antennas || active > slots {
                return Err(CodebookError::InvalidParameter(format!(
                    "chirp hybrid IM requires 1 <= active <= min(antennas, slots), got active={active}, antennas={antennas}, slots={slots}"
                )));
            }
            let bits = active as u32 * psk_bits(psk_order)?
                + bits_for_selection(active, slots)?
                + bits_for_selection(active, antennas)?
                + bits_for_permutation(active)?;
            Ok(RateReport { nominal_bits: bits, exact_bits: bits })
        }
        SchemeRateSpec::Fh { antennas, codes, hops } => {
            if antennas == 0 || antennas > codes {
                return Err(CodebookError::InvalidParameter(format!(
                    "frequency hopping requires 1 <= antennas <= codes, got antennas={antennas}, codes={codes}"
                )));
            }
            if hops == 0 {
                return Err(CodebookError::InvalidParameter("frequency hopping requires hops >= 1".into()));
            }
            let per_hop = antennas as u32 + bits_for_arrangement(antennas, codes)?;
            let bits = hops as u32 * per_hop;
            Ok(RateReport { nominal_bits: bits, exact_bits: bits })
        }
        SchemeRateSpec::Spim { user_paths, selected } => {
            if selected == 0 || selected > user_paths {
                return Err(CodebookError::InvalidParameter(format!(
                    "spatial-path IM requires 1 <= selected <= user_paths, got selected={selected}, user_paths={user_paths}"
                )));
            }
            let bits = bits_for_selection(selected, user_paths)?;
            Ok(RateReport { nominal_bits: bits, exact_bits: bits })
        }
    }
}

// ---------------------------------------------------------------------------
// Look-up tables
// ---------------------------------------------------------------------------

/// A `k`-of-`n` codebook description: pattern universe plus the bit counts
/// its LUT realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodebookSpec {
    pub k: usize,
    pub n: usize,
    pub ordered: bool,
    pub nominal_bits: u32,
    pub exact_bits: u32,
}

impl CodebookSpec {
    /// Unordered `k`-of-`n` selection codebook.
    pub fn selection(k: usize, n: usize) -> Result<Self> {
        let bits = bits_for_selection(k, n)?;
        Ok(Self { k, n, ordered: false, nominal_bits: bits, exact_bits: bits })
    }

    /// Ordered `k`-of-`n` arrangement codebook.
    pub fn ordered_selection(k: usize, n: usize) -> Result<Self> {
        let bits = bits_for_arrangement(k, n)?;
        Ok(Self { k, n, ordered: true, nominal_bits: bits, exact_bits: bits })
    }
}

/// Materializes the codebook as a table with exactly `2^exact_bits` entries;
/// entry `i` equals `unrank(i)`. Unordered codebooks carry the identity slot
/// order.
pub fn build_lut(spec: &CodebookSpec) -> Result<Vec<OrderedAssignment>> {
    if spec.exact_bits > MAX_LUT_BITS {
        return Err(CodebookError::TableTooLarge { bits: spec.exact_bits, max: MAX_LUT_BITS });
    }
    let size = 1u64 << spec.exact_bits;
    (0..size)
        .map(|r| {
            if spec.ordered {
                unrank_arrangement_full(r, spec.k, spec.n)
            } else {
                Ok(OrderedAssignment::identity(unrank_combination_full(r, spec.k, spec.n)?))
            }
        })
        .collect()
}
