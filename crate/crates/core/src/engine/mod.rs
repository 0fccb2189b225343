//! Exact amplitudes by summing Clifford amplitudes over the sliced register.
//!
//! ```text
//! ⟨y|C|0⟩ = 2^{-mR} Σ_{xR} (−1)^{yR·xR} · (−1)^{δB_y·x*} / 2^{rank Γ(xR)}
//! ```
//!
//! where `x*` solves `Γ(xR)·x = δG_y` and the term is zero when no solution
//! exists or `δB_y ∉ Row(Γ(xR))`. Patterns are visited in Gray-code order so
//! each step changes Γ by one slice and δ by one row.

mod dyadic;
mod quadratic;

pub use dyadic::{DyadicAmplitude, DyadicProbability};

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bits::BitString;
use crate::circuit::Circuit;
use crate::gf2kernel::{
    clifford_kernel, clifford_kernel_cols, BitIter, BitMatrix, BitVector, Lane,
};
use crate::phasepoly::{
    absorb_linear_stage, extract, Color, LinearStage, PhasePolyError, RegisterBits,
    TriColorPolynomial,
};
use crate::slicer::{canonical_cover, slice, SliceError, SlicedForm};
use quadratic::QuadraticForm;

/// Default refusal threshold on the sliced register size.
pub const DEFAULT_MAX_SLICED: u32 = 40;
/// Largest sliced register the 128-bit accumulator supports.
pub const HARD_MAX_SLICED: u32 = 62;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("sliced register has {size} variables; the limit is {cap} (2^{size} patterns)")]
    ResourceLimit { size: usize, cap: u32 },
    #[error("outcome has register shape {found:?}, expected {expected:?}")]
    DimensionMismatch {
        expected: [usize; 3],
        found: [usize; 3],
    },
    #[error("the parity quick-check needs equal, index-aligned registers")]
    QuickCheckUnsupported,
    #[error("circuit is invalid: {0}")]
    InvalidCircuit(String),
    #[error(transparent)]
    Slice(#[from] SliceError),
    #[error(transparent)]
    PhasePoly(#[from] PhasePolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuickCheckMode {
    /// On exactly when the symmetry condition is verified for the instance.
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub threads: usize,
    pub quickcheck: QuickCheckMode,
    /// Gray-code chunks per thread; the pattern range is split into
    /// `threads · shard_granularity` contiguous chunks.
    pub shard_granularity: usize,
    pub max_sliced: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            threads: thread::available_parallelism().map_or(1, |n| n.get()),
            quickcheck: QuickCheckMode::Auto,
            shard_granularity: 16,
            max_sliced: DEFAULT_MAX_SLICED,
        }
    }
}

impl EngineConfig {
    pub fn single_threaded() -> Self {
        Self {
            threads: 1,
            ..Self::default()
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_quickcheck(mut self, mode: QuickCheckMode) -> Self {
        self.quickcheck = mode;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Loop over all sliced patterns.
    GrayCode,
    /// No cubic terms: one closed-form quadratic sum, no pattern loop. The
    /// pattern counters then report the total only.
    QuadraticForm,
}

#[derive(Debug, Clone)]
pub struct EngineReport {
    pub amplitude: DyadicAmplitude,
    pub total_patterns: u64,
    pub discarded_by_quickcheck: u64,
    pub evaluated: u64,
    pub nonzero_contributions: u64,
    pub wall_time: Duration,
    pub threads: usize,
    pub quickcheck_used: bool,
    pub method: Method,
}

/// `(−1)^{δB·x} / 2^{rank Γ}` for a solution `x` of `Γ·x = δG`, or zero when
/// `δG ∉ Col(Γ)` or `δB ∉ Row(Γ)`.
///
/// Panics on mismatched dimensions.
pub fn clifford_amplitude(gamma: &BitMatrix, dg: &BitVector, db: &BitVector) -> DyadicAmplitude {
    assert_eq!(
        dg.len(),
        gamma.rows(),
        "δG length must equal the row count of Γ"
    );
    assert_eq!(
        db.len(),
        gamma.cols(),
        "δB length must equal the column count of Γ"
    );
    match clifford_kernel(gamma.row_words(), gamma.cols(), dg.word(), db.word()) {
        None => DyadicAmplitude::ZERO,
        Some((rank, neg)) => DyadicAmplitude::new(if neg { -1 } else { 1 }, rank),
    }
}

/// True when the pattern's Clifford amplitude is provably zero, valid only
/// when Γ(xR) is symmetric with `xR` in its kernel.
#[inline]
pub fn quick_check(xr: &BitVector, dg: &BitVector, db: &BitVector) -> bool {
    parity_discard(xr.word(), dg.word(), db.word())
}

#[inline(always)]
fn parity_discard(x: u64, dg: u64, db: u64) -> bool {
    ((dg & x).count_ones() | (db & x).count_ones()) & 1 == 1
}

fn quickcheck_enabled(sliced: &SlicedForm, mode: QuickCheckMode) -> Result<bool, EngineError> {
    match mode {
        QuickCheckMode::Off => Ok(false),
        QuickCheckMode::On if sliced.is_square() => Ok(true),
        QuickCheckMode::On => Err(EngineError::QuickCheckUnsupported),
        QuickCheckMode::Auto => Ok(sliced.symmetry_holds_exactly()),
    }
}

/// Amplitude of a sliced polynomial with no linear terms at outcome `y`
/// (register bits in the polynomial's own colors).
pub fn amplitude(
    sliced: &SlicedForm,
    y: &RegisterBits,
    cfg: &EngineConfig,
) -> Result<EngineReport, EngineError> {
    let start = Instant::now();
    let sizes = sliced.sizes();
    let [mr, mg, mb] = sizes;
    let roles = sliced.roles();
    let expected = Color::ALL.map(|c| sizes[position(roles, c)]);
    if y.sizes() != expected {
        return Err(EngineError::DimensionMismatch {
            expected,
            found: y.sizes(),
        });
    }
    let cap = cfg.max_sliced.min(HARD_MAX_SLICED);
    if mr > cap as usize {
        return Err(EngineError::ResourceLimit { size: mr, cap });
    }
    let yr = sliced.to_roles(y).map(|b| b.word());
    let threads = cfg.threads.max(1);
    let total = 1u64 << mr;

    if !sliced.has_cubic_terms() {
        let amplitude = quadratic_amplitude(sliced, yr);
        return Ok(EngineReport {
            amplitude,
            total_patterns: total,
            discarded_by_quickcheck: 0,
            evaluated: 0,
            nonzero_contributions: 0,
            wall_time: start.elapsed(),
            threads,
            quickcheck_used: false,
            method: Method::QuadraticForm,
        });
    }

    let quick = quickcheck_enabled(sliced, cfg.quickcheck)?;
    let chunks = ((threads * cfg.shard_granularity.max(1)) as u64).min(total);
    let chunk_len = total.div_ceil(chunks);
    let cols16 = (mg <= 16 && mb <= 16).then(|| ColumnGamma::<u16, 16>::new(sliced));
    let cols32 =
        (cols16.is_none() && mg <= 32 && mb <= 32).then(|| ColumnGamma::<u32, 32>::new(sliced));
    let next = AtomicU64::new(0);
    let worker = || {
        let mut tally = Tally::default();
        loop {
            let c = next.fetch_add(1, Ordering::Relaxed);
            if c >= chunks {
                break;
            }
            let lo = c * chunk_len;
            let hi = (lo + chunk_len).min(total);
            if lo >= hi {
                continue;
            }
            match (&cols16, &cols32, quick) {
                (Some(g), _, true) => {
                    run_chunk_cols::<_, 16, true>(sliced, g, yr, lo, hi, &mut tally)
                }
                (Some(g), _, false) => {
                    run_chunk_cols::<_, 16, false>(sliced, g, yr, lo, hi, &mut tally)
                }
                (_, Some(g), true) => {
                    run_chunk_cols::<_, 32, true>(sliced, g, yr, lo, hi, &mut tally)
                }
                (_, Some(g), false) => {
                    run_chunk_cols::<_, 32, false>(sliced, g, yr, lo, hi, &mut tally)
                }
                (None, None, true) => run_chunk::<true>(sliced, yr, lo, hi, &mut tally),
                (None, None, false) => run_chunk::<false>(sliced, yr, lo, hi, &mut tally),
            }
        }
        tally
    };
    let tally = if threads == 1 {
        worker()
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..threads).map(|_| s.spawn(worker)).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("engine worker panicked"))
                .fold(Tally::default(), Tally::merge)
        })
    };
    debug_assert_eq!(tally.discarded + tally.evaluated, total);
    let mmax = mg.min(mb) as u32;
    Ok(EngineReport {
        amplitude: DyadicAmplitude::new(tally.acc, mr as u32 + mmax),
        total_patterns: total,
        discarded_by_quickcheck: tally.discarded,
        evaluated: tally.evaluated,
        nonzero_contributions: tally.nonzero,
        wall_time: start.elapsed(),
        threads,
        quickcheck_used: quick,
        method: Method::GrayCode,
    })
}

fn position(roles: [Color; 3], c: Color) -> usize {
    roles
        .iter()
        .position(|&r| r == c)
        .expect("roles are a permutation")
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    acc: i128,
    discarded: u64,
    evaluated: u64,
    nonzero: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            acc: self.acc + o.acc,
            discarded: self.discarded + o.discarded,
            evaluated: self.evaluated + o.evaluated,
            nonzero: self.nonzero + o.nonzero,
        }
    }
}

/// Patterns `gray(lo) .. gray(hi - 1)`; contributions scaled by
/// `2^{min(mG, mB)}` so they are integers.
fn run_chunk<const QUICK: bool>(sliced: &SlicedForm, y: [u64; 3], lo: u64, hi: u64, t: &mut Tally) {
    let [_, mg, mb] = sliced.sizes();
    let mmax = mg.min(mb) as u32;
    let [yr, yg, yb] = y;
    let mut gamma = [0u64; 64];
    let gamma = &mut gamma[..mg];
    gamma.copy_from_slice(sliced.gamma0_words());
    let mut x = lo ^ (lo >> 1);
    let (mut dg, mut db) = (0u64, 0u64);
    for r in BitIter(x) {
        xor_rows(gamma, sliced.gamma_words(r));
        dg ^= sliced.delta_g_word(r);
        db ^= sliced.delta_b_word(r);
    }
    let mut i = lo;
    loop {
        let dgy = dg ^ yg;
        let dby = db ^ yb;
        if QUICK && parity_discard(x, dgy, dby) {
            t.discarded += 1;
        } else {
            t.evaluated += 1;
            if let Some((rank, neg)) = clifford_kernel(gamma, mb, dgy, dby) {
                let neg = neg ^ ((yr & x).count_ones() & 1 == 1);
                let v = 1i128 << (mmax - rank);
                t.acc += if neg { -v } else { v };
                t.nonzero += 1;
            }
        }
        i += 1;
        if i == hi {
            break;
        }
        let r = i.trailing_zeros() as usize;
        x ^= 1 << r;
        xor_rows(gamma, sliced.gamma_words(r));
        dg ^= sliced.delta_g_word(r);
        db ^= sliced.delta_b_word(r);
        if cfg!(debug_assertions) && i & 0x3ff == 0 {
            let fresh = sliced.gamma_at(&BitVector::from_word(sliced.sliced_size(), x));
            debug_assert_eq!(
                fresh.row_words(),
                &gamma[..],
                "incremental Γ drifted at step {i}"
            );
        }
    }
}

/// Γ0 and every Γ_r column-major in `N`-bit lanes.
struct ColumnGamma<L, const N: usize> {
    gamma0: [L; N],
    gamma: Vec<[L; N]>,
}

impl<L: Lane, const N: usize> ColumnGamma<L, N> {
    fn new(sliced: &SlicedForm) -> Self {
        let cols = |rows: &[u64]| {
            let mut out = [L::default(); N];
            for (i, &w) in rows.iter().enumerate() {
                for c in BitIter(w) {
                    out[c] |= L::ONE << i as u32;
                }
            }
            out
        };
        Self {
            gamma0: cols(sliced.gamma0_words()),
            gamma: (0..sliced.sliced_size())
                .map(|r| cols(sliced.gamma_words(r)))
                .collect(),
        }
    }
}

/// [`run_chunk`] with Γ kept column-major for the lane kernel.
fn run_chunk_cols<L: Lane, const N: usize, const QUICK: bool>(
    sliced: &SlicedForm,
    cg: &ColumnGamma<L, N>,
    y: [u64; 3],
    lo: u64,
    hi: u64,
    t: &mut Tally,
) {
    let [_, mg, mb] = sliced.sizes();
    let mmax = mg.min(mb) as u32;
    let [yr, yg, yb] = y;
    let mut gamma = cg.gamma0;
    let mut x = lo ^ (lo >> 1);
    let (mut dg, mut db) = (0u64, 0u64);
    for r in BitIter(x) {
        xor_cols(&mut gamma, &cg.gamma[r]);
        dg ^= sliced.delta_g_word(r);
        db ^= sliced.delta_b_word(r);
    }
    let mut i = lo;
    loop {
        let dgy = dg ^ yg;
        let dby = db ^ yb;
        if QUICK && parity_discard(x, dgy, dby) {
            t.discarded += 1;
        } else {
            t.evaluated += 1;
            if let Some((rank, neg)) =
                clifford_kernel_cols(&gamma, mb, L::from_u64(dgy), L::from_u64(dby))
            {
                let neg = neg ^ ((yr & x).count_ones() & 1 == 1);
                let v = 1i128 << (mmax - rank);
                t.acc += if neg { -v } else { v };
                t.nonzero += 1;
            }
        }
        i += 1;
        if i == hi {
            break;
        }
        let r = i.trailing_zeros() as usize;
        x ^= 1 << r;
        xor_cols(&mut gamma, &cg.gamma[r]);
        dg ^= sliced.delta_g_word(r);
        db ^= sliced.delta_b_word(r);
        if cfg!(debug_assertions) && i & 0x3ff == 0 {
            let fresh = sliced.gamma_at(&BitVector::from_word(sliced.sliced_size(), x));
            for (c, &col) in gamma.iter().enumerate().take(mb) {
                let want = (0..mg)
                    .filter(|&row| fresh.get(row, c))
                    .fold(L::default(), |a, row| a | L::ONE << row as u32);
                debug_assert!(col == want, "incremental Γ column {c} drifted at step {i}");
            }
        }
    }
}

#[inline(always)]
fn xor_cols<L: Lane, const N: usize>(dst: &mut [L; N], src: &[L; N]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

#[inline(always)]
fn xor_rows(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Closed form when Γ does not depend on the sliced register.
fn quadratic_amplitude(sliced: &SlicedForm, y: [u64; 3]) -> DyadicAmplitude {
    let [mr, mg, mb] = sliced.sizes();
    let n = mr + mg + mb;
    let (og, ob) = (mr, mr + mg);
    let mut q = QuadraticForm::new(n);
    for r in 0..mr {
        for g in BitIter(sliced.delta_g_word(r)) {
            q.toggle_pair(r, og + g);
        }
        for b in BitIter(sliced.delta_b_word(r)) {
            q.toggle_pair(r, ob + b);
        }
    }
    for (g, &w) in sliced.gamma0_words().iter().enumerate() {
        for b in BitIter(w) {
            q.toggle_pair(og + g, ob + b);
        }
    }
    for (offset, word) in [(0, y[0]), (og, y[1]), (ob, y[2])] {
        for i in BitIter(word) {
            q.toggle_linear(offset + i);
        }
    }
    match q.phase_sum() {
        None => DyadicAmplitude::ZERO,
        Some((neg, twos)) => {
            let exp = n as u32 - twos;
            DyadicAmplitude::new(if neg { -1 } else { 1 }, exp)
        }
    }
}

/// Circuit-level front end: phase polynomial with the CNOT stage absorbed,
/// linear terms split off as outcome flips, and the sliced form.
#[derive(Debug, Clone)]
pub struct Simulator {
    polynomial: TriColorPolynomial,
    linear: RegisterBits,
    negate: bool,
    sliced: SlicedForm,
    stage: Option<LinearStage>,
}

impl Simulator {
    pub fn new(c: &Circuit) -> Result<Self, EngineError> {
        let violations = c.validate();
        if !violations.is_empty() {
            return Err(EngineError::InvalidCircuit(
                violations
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; "),
            ));
        }
        let (f, l) = extract(c);
        let g = absorb_linear_stage(&f, &l)?;
        let mut sim = Self::from_polynomial(&g)?;
        sim.stage = Some(l);
        Ok(sim)
    }

    /// Simulator for `H^n · diag((−1)^{g}) · H^n` over the polynomial's
    /// variables (qubits outside its coloring are ignored).
    pub fn from_polynomial(g: &TriColorPolynomial) -> Result<Self, EngineError> {
        let zero = RegisterBits::zeros(g.sizes());
        let (folded, linear, negate) = g.fold_linear(&zero);
        let sliced = slice(&folded, canonical_cover(&folded))?;
        Ok(Self {
            polynomial: folded,
            linear,
            negate,
            sliced,
            stage: None,
        })
    }

    /// Polynomial without its linear part and constant.
    pub fn polynomial(&self) -> &TriColorPolynomial {
        &self.polynomial
    }

    pub fn sliced(&self) -> &SlicedForm {
        &self.sliced
    }

    pub fn n(&self) -> usize {
        self.polynomial.coloring().n_qubits()
    }

    pub fn amplitude(
        &self,
        y: &BitString,
        cfg: &EngineConfig,
    ) -> Result<EngineReport, EngineError> {
        let split = self.polynomial.coloring().split(y)?;
        self.amplitude_registers(&split, cfg)
    }

    pub fn amplitude_registers(
        &self,
        y: &RegisterBits,
        cfg: &EngineConfig,
    ) -> Result<EngineReport, EngineError> {
        if y.sizes() != self.polynomial.sizes() {
            return Err(EngineError::DimensionMismatch {
                expected: self.polynomial.sizes(),
                found: y.sizes(),
            });
        }
        let mut flipped = y.clone();
        for c in 0..3 {
            flipped.bits[c].xor_assign(&self.linear.bits[c]);
        }
        let mut report = amplitude(&self.sliced, &flipped, cfg)?;
        if self.negate {
            report.amplitude = -report.amplitude;
        }
        Ok(report)
    }

    /// `⟨y|C|x⟩` for a basis input `x`. The input's Hadamard phase
    /// `(−1)^{x·z}` on the first layer becomes `(L⁻ᵀx)·w` after the CNOT
    /// substitution, so this is the zero-input amplitude at `y ⊕ L⁻ᵀx`
    /// (just `y ⊕ x` when the circuit has no CNOTs).
    pub fn amplitude_from_input(
        &self,
        x: &BitString,
        y: &BitString,
        cfg: &EngineConfig,
    ) -> Result<EngineReport, EngineError> {
        let moved = match &self.stage {
            Some(l) => l.transpose_inverse(x),
            None => x.clone(),
        };
        self.amplitude(&y.xor(&moved), cfg)
    }
}

#[cfg(test)]
mod tests;
