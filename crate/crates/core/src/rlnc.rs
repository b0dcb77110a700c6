//! Expanding-window random linear network coding over GF(2^8).
//!
//! A coded element of window `ℓ` is a random linear combination of the
//! first `K_ℓ` source elements; coefficients past `K_ℓ` are implicitly zero,
//! so the generator matrix is block lower-triangular. Decodability is a rank
//! question, answered by incremental Gaussian elimination. Payload bytes are
//! optional: probability experiments only need the coefficient matrix.

use std::collections::BTreeSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decode_prob::{DecodeProbability, Provenance};
use crate::error::{Error, Result};
use crate::gf256::{mul_add_row, scale_row, Gf256};
use crate::layers::{LayerConfig, TransmissionPlan};

/// Trials per independently seeded Monte Carlo block.
const TRIALS_PER_BLOCK: u64 = 4096;

/// One coded element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedElement {
    /// 1-based expanding window the element was drawn from.
    pub window: usize,
    /// `K_ℓ` coding coefficients.
    pub coefficients: Vec<Gf256>,
    pub payload: Option<Vec<u8>>,
}

/// Coded elements collected by one user, grouped by window and by PDU.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReceivedSet {
    windows: Vec<Vec<Vec<CodedElement>>>,
}

impl ReceivedSet {
    pub fn new(layers: usize) -> Self {
        Self { windows: vec![Vec::new(); layers] }
    }

    /// Adds one PDU; all its elements must come from the same window.
    pub fn push_pdu(&mut self, pdu: Vec<CodedElement>) -> Result<()> {
        let Some(first) = pdu.first() else {
            return Ok(());
        };
        let window = first.window;
        if window == 0 || window > self.windows.len() {
            return Err(Error::WindowOutOfRange { index: window, layers: self.windows.len() });
        }
        if pdu.iter().any(|e| e.window != window) {
            return Err(Error::InvalidParameter("PDU mixes elements of different windows".into()));
        }
        self.windows[window - 1].push(pdu);
        Ok(())
    }

    /// Adds a single element as its own PDU.
    pub fn push(&mut self, element: CodedElement) -> Result<()> {
        self.push_pdu(vec![element])
    }

    pub fn pdus(&self, window: usize) -> &[Vec<CodedElement>] {
        &self.windows[window - 1]
    }

    /// Elements of a 1-based window in arrival order.
    pub fn elements(&self, window: usize) -> impl Iterator<Item = &CodedElement> {
        self.windows[window - 1].iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.windows.iter().flatten().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn window_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` coded elements of window `window` (1-based) with i.i.d. uniform
/// coefficients; identical seeds give identical elements.
pub fn encode_window(layers: &LayerConfig, window: usize, count: usize, seed: u64) -> Result<Vec<CodedElement>> {
    let width = layers.window_size(window)?;
    let mut rng = window_rng(seed);
    Ok((0..count)
        .map(|_| {
            let mut bytes = vec![0u8; width];
            rng.fill_bytes(&mut bytes);
            CodedElement { window, coefficients: bytes.into_iter().map(Gf256).collect(), payload: None }
        })
        .collect())
}

/// Like [`encode_window`] but also combines the source payloads. `source`
/// holds one equally sized byte vector per source element.
pub fn encode_window_payload(
    layers: &LayerConfig,
    source: &[Vec<u8>],
    window: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<CodedElement>> {
    if source.len() != layers.total() {
        return Err(Error::InvalidParameter(format!(
            "{} source elements for a message of {}",
            source.len(),
            layers.total()
        )));
    }
    let size = source.first().map_or(0, Vec::len);
    if source.iter().any(|s| s.len() != size) {
        return Err(Error::InvalidParameter("source elements differ in size".into()));
    }
    let mut out = encode_window(layers, window, count, seed)?;
    for element in &mut out {
        let mut payload = vec![0u8; size];
        for (g, x) in element.coefficients.iter().zip(source) {
            mul_add_row(&mut payload, x, g.0);
        }
        element.payload = Some(payload);
    }
    Ok(out)
}

/// Incremental row-echelon basis over GF(2^8).
///
/// Row storage is padded to a multiple of 32 bytes so that row operations
/// run on whole SIMD lanes; padding columns stay zero.
#[derive(Debug, Clone)]
pub struct RankTracker {
    width: usize,
    stride: usize,
    rows: Vec<u8>,
    has_pivot: Vec<bool>,
    rank: usize,
    // Leading columns that all hold a pivot.
    solved_prefix: usize,
    scratch: Vec<u8>,
    avx2: bool,
}

impl RankTracker {
    pub fn new(width: usize) -> Self {
        let stride = width.div_ceil(32).max(1) * 32;
        Self {
            width,
            stride,
            rows: vec![0; width * stride],
            has_pivot: vec![false; width],
            rank: 0,
            solved_prefix: 0,
            scratch: vec![0; stride],
            #[cfg(target_arch = "x86_64")]
            avx2: crate::gf256::avx2::available(),
            #[cfg(not(target_arch = "x86_64"))]
            avx2: false,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn reset(&mut self) {
        self.has_pivot.fill(false);
        self.rank = 0;
        self.solved_prefix = 0;
    }

    /// Inserts a row, returning whether it increased the rank.
    pub fn insert(&mut self, coefficients: &[Gf256]) -> bool {
        assert!(coefficients.len() <= self.width, "row wider than tracker");
        let mut row = std::mem::take(&mut self.scratch);
        row.fill(0);
        for (d, c) in row.iter_mut().zip(coefficients) {
            *d = c.0;
        }
        let grew = self.insert_scratch(&mut row, coefficients.len());
        self.scratch = row;
        grew
    }

    /// Draws a uniform row supported on the first `active` columns and
    /// inserts it.
    pub fn insert_random<R: RngCore>(&mut self, active: usize, rng: &mut R) -> bool {
        let mut row = std::mem::take(&mut self.scratch);
        rng.fill_bytes(&mut row[..active]);
        row[active..].fill(0);
        let grew = self.insert_scratch(&mut row, active);
        self.scratch = row;
        grew
    }

    /// Same rank distribution as [`insert_random`](Self::insert_random),
    /// but only draws the columns past the solved prefix. Reducing a uniform
    /// row by a complete set of leading pivots leaves a uniform remainder, so
    /// the leading part is never materialised.
    pub fn insert_random_reduced<R: RngCore>(&mut self, active: usize, rng: &mut R) -> bool {
        let from = self.solved_prefix.min(active);
        let mut row = std::mem::take(&mut self.scratch);
        row.fill(0);
        rng.fill_bytes(&mut row[from..active]);
        let grew = self.insert_scratch(&mut row, active);
        self.scratch = row;
        grew
    }

    // `row` has length `stride`, zero from `active` on.
    fn insert_scratch(&mut self, row: &mut [u8], active: usize) -> bool {
        #[cfg(target_arch = "x86_64")]
        if self.avx2 {
            // SAFETY: feature detected at construction.
            return unsafe { self.insert_avx2(row, active) };
        }
        self.insert_portable(row, active)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn insert_avx2(&mut self, row: &mut [u8], active: usize) -> bool {
        let end = active.div_ceil(32) * 32;
        debug_assert!(end <= row.len());
        for col in 0..active {
            let c = *row.get_unchecked(col);
            if c == 0 {
                continue;
            }
            let base = col * self.stride;
            if *self.has_pivot.get_unchecked(col) {
                let start = col & !31;
                crate::gf256::avx2::mul_add(
                    row.as_mut_ptr().add(start),
                    self.rows.as_ptr().add(base + start),
                    (end - start) / 32,
                    c,
                );
            } else {
                return self.store_pivot(row, col, end, c);
            }
        }
        false
    }

    fn store_pivot(&mut self, row: &mut [u8], col: usize, end: usize, c: u8) -> bool {
        let inv = Gf256(c).inv().expect("nonzero").0;
        scale_row(&mut row[col..end], inv);
        let base = col * self.stride;
        self.rows[base..base + self.stride].copy_from_slice(row);
        self.has_pivot[col] = true;
        self.rank += 1;
        while self.solved_prefix < self.width && self.has_pivot[self.solved_prefix] {
            self.solved_prefix += 1;
        }
        true
    }

    fn insert_portable(&mut self, row: &mut [u8], active: usize) -> bool {
        let end = active.div_ceil(16) * 16;
        for col in 0..active {
            let c = row[col];
            if c == 0 {
                continue;
            }
            let base = col * self.stride;
            if self.has_pivot[col] {
                // Pivot rows are zero before their pivot column.
                let start = col & !15;
                mul_add_row(&mut row[start..end], &self.rows[base + start..base + end], c);
            } else {
                return self.store_pivot(row, col, end, c);
            }
        }
        false
    }
}

/// Per-window rank events: entry `ℓ−1` is true iff the elements of windows
/// `1..=ℓ` span all `K_ℓ` columns of window `ℓ`.
pub fn window_rank_events(received: &ReceivedSet, layers: &LayerConfig) -> Vec<bool> {
    let mut tracker = RankTracker::new(layers.total());
    let mut out = Vec::with_capacity(layers.count());
    for (i, &k) in layers.cumulative().iter().enumerate() {
        if i < received.windows.len() {
            for e in received.elements(i + 1) {
                tracker.insert(&e.coefficients);
            }
        }
        out.push(tracker.rank() == k);
    }
    out
}

/// Windows whose source elements are recovered, closed downwards: if the
/// rank condition holds for window `i`, every window `ℓ ≤ i` is reported.
pub fn decodable_windows(received: &ReceivedSet, layers: &LayerConfig) -> BTreeSet<usize> {
    let events = window_rank_events(received, layers);
    let top = events.iter().rposition(|&d| d).map_or(0, |i| i + 1);
    (1..=top).collect()
}

/// Recovers the first `K_ℓ` source payloads from the elements of windows
/// `1..=ℓ`, or `None` if they do not have full rank or lack payloads.
pub fn decode_payload(received: &ReceivedSet, layers: &LayerConfig, window: usize) -> Result<Option<Vec<Vec<u8>>>> {
    let k = layers.window_size(window)?;
    let mut pivots: Vec<Option<(Vec<Gf256>, Vec<u8>)>> = vec![None; k];
    for w in 1..=window.min(received.windows.len()) {
        for e in received.elements(w) {
            let Some(payload) = &e.payload else {
                return Ok(None);
            };
            let mut coeffs = e.coefficients.clone();
            coeffs.resize(k, Gf256::ZERO);
            let mut data = payload.clone();
            for col in 0..k {
                let c = coeffs[col];
                if c.is_zero() {
                    continue;
                }
                match &pivots[col] {
                    Some((pc, pd)) => {
                        for j in col..k {
                            coeffs[j] += c * pc[j];
                        }
                        mul_add_row(&mut data, pd, c.0);
                    }
                    None => {
                        let inv = c.inv().expect("nonzero");
                        coeffs.iter_mut().skip(col).for_each(|v| *v *= inv);
                        scale_row(&mut data, inv.0);
                        pivots[col] = Some((coeffs, data));
                        break;
                    }
                }
            }
        }
    }
    if pivots.iter().any(Option::is_none) {
        return Ok(None);
    }
    let mut rows: Vec<(Vec<Gf256>, Vec<u8>)> = pivots.into_iter().map(|p| p.expect("full rank")).collect();
    // Back substitution from the last pivot up.
    for col in (0..k).rev() {
        let (pivot_coeffs, pivot_data) = rows[col].clone();
        for row in rows.iter_mut().take(col) {
            let c = row.0[col];
            if !c.is_zero() {
                for j in col..k {
                    row.0[j] += c * pivot_coeffs[j];
                }
                mul_add_row(&mut row.1, &pivot_data, c.0);
            }
        }
    }
    Ok(Some(rows.into_iter().map(|(_, d)| d).collect()))
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Monte Carlo estimate of every window's recovery probability.
///
/// Each trial erases each of the `N_ℓ` PDUs of window `ℓ` independently with
/// probability `erasure[ℓ]` (all `n_ℓ` elements together), draws fresh
/// coefficients for the received elements and checks the per-window rank
/// condition of [`window_rank_events`]. Trials run in fixed-size blocks with
/// derived seeds, so the result does not depend on how blocks are scheduled.
pub fn simulate_decode_prob(
    layers: &LayerConfig,
    plan: &TransmissionPlan,
    erasure: &[f64],
    trials: u64,
    seed: u64,
) -> Result<DecodeProbability> {
    plan.check_against(layers)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    if erasure.len() != layers.count() || erasure.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidParameter(format!("bad erasure vector {erasure:?}")));
    }
    let blocks = trials.div_ceil(TRIALS_PER_BLOCK);
    let mut counts = vec![0u64; layers.count()];
    let mut tracker = RankTracker::new(layers.total());
    for block in 0..blocks {
        let n = TRIALS_PER_BLOCK.min(trials - block * TRIALS_PER_BLOCK);
        let block_counts = simulate_block(layers, plan, erasure, n, derive_seed(seed, block), &mut tracker, true);
        counts.iter_mut().zip(block_counts).for_each(|(c, b)| *c += b);
    }
    let t = trials as f64;
    let per_window: Vec<f64> = counts.iter().map(|&c| c as f64 / t).collect();
    let standard_error = per_window.iter().map(|p| (p * (1.0 - p) / t).sqrt()).collect();
    Ok(DecodeProbability {
        per_window,
        provenance: Provenance::Simulated { trials },
        standard_error: Some(standard_error),
    })
}

fn simulate_block(
    layers: &LayerConfig,
    plan: &TransmissionPlan,
    erasure: &[f64],
    trials: u64,
    seed: u64,
    tracker: &mut RankTracker,
    reduced: bool,
) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; layers.count()];
    let cumulative = layers.cumulative();
    for _ in 0..trials {
        tracker.reset();
        for (i, &k) in cumulative.iter().enumerate() {
            let received_pdus = (0..plan.tbs[i]).filter(|_| !rng.random_bool(erasure[i])).count();
            let elements = received_pdus * plan.capacity[i];
            for _ in 0..elements {
                // Further rows of this window cannot raise the rank past K_ℓ.
                if tracker.rank() == k {
                    break;
                }
                if reduced {
                    tracker.insert_random_reduced(k, &mut rng);
                } else {
                    tracker.insert_random(k, &mut rng);
                }
            }
            if tracker.rank() == k {
                counts[i] += 1;
            }
        }
    }
    counts
}
