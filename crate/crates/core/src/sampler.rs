//! Sampling outcomes by opening the final Hadamard layer one qubit at a time.
//!
//! Before the last Hadamard layer the state is a phase state, so its
//! computational-basis distribution is uniform. With Hadamards applied to
//! qubits `0..t` only, the still-unhadamarded qubits carry fixed values and
//! drop out of the sum: the distribution is
//!
//! ```text
//! P_t(y) = 2^{t-n} · amp(h, y_{0..t})²,   h = g with qubits t..n fixed to y
//! ```
//!
//! Adding qubit `t` to the Hadamarded set only touches that qubit, so a
//! sample of `P_t` becomes a sample of `P_{t+1}` by redrawing bit `t` from
//! its conditional given the others. After `n` steps the sample follows the
//! circuit's output distribution.
//!
//! Draw sequence per sample: one `next_u64` per 64 qubits for the uniform
//! start (bit `i` of word `j` is qubit `64j + i`), then for `q = 0..n` one
//! `next_f64`; bit `q` becomes 1 when the draw is below `p1 / (p0 + p1)`.
//! Sample `i` of a run uses `SplitMix64::stream(seed, i)`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use thiserror::Error;

use crate::bits::BitString;
use crate::circuit::Circuit;
use crate::engine::{DyadicAmplitude, EngineConfig, EngineError, Simulator};
use crate::phasepoly::{absorb_linear_stage, extract, PhasePolyError, TriColorPolynomial};
use crate::rng::SplitMix64;

const CACHE_LIMIT: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("frontier step {step}: {source}")]
    Engine {
        step: usize,
        #[source]
        source: EngineError,
    },
    #[error(transparent)]
    PhasePoly(#[from] PhasePolyError),
    #[error("circuit is invalid: {0}")]
    InvalidCircuit(String),
    #[error("qubit {0} is not a variable of the polynomial")]
    MissingQubit(usize),
}

/// Frontier position and the current sample at one resampling step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerState {
    pub frontier: usize,
    pub y: BitString,
}

pub struct Sampler {
    g: TriColorPolynomial,
    n: usize,
    engine: EngineConfig,
    workers: usize,
    cache: Mutex<HashMap<(usize, BitString), (DyadicAmplitude, DyadicAmplitude)>>,
}

impl Sampler {
    pub fn new(c: &Circuit) -> Result<Self, SamplerError> {
        let violations = c.validate();
        if !violations.is_empty() {
            return Err(SamplerError::InvalidCircuit(
                violations
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; "),
            ));
        }
        let (f, l) = extract(c);
        Self::from_polynomial(absorb_linear_stage(&f, &l)?)
    }

    /// Sampler for `H^n · diag((−1)^{g}) · H^n |0⟩`. Every qubit of the
    /// coloring must be a variable of `g`.
    pub fn from_polynomial(g: TriColorPolynomial) -> Result<Self, SamplerError> {
        let n = g.coloring().n_qubits();
        if let Some(q) = (0..n).find(|&q| g.coloring().locate(q).is_none()) {
            return Err(SamplerError::MissingQubit(q));
        }
        Ok(Self {
            g,
            n,
            engine: EngineConfig::single_threaded(),
            workers: 1,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Engine settings for the conditional amplitudes.
    pub fn with_engine(mut self, cfg: EngineConfig) -> Self {
        self.engine = cfg;
        self
    }

    /// Threads drawing independent samples.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `count` samples; identical for identical `(g, seed, count)`
    /// regardless of the worker count.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<BitString>, SamplerError> {
        if self.workers == 1 || count < 2 {
            return (0..count)
                .map(|i| self.sample_one(&mut SplitMix64::stream(seed, i as u64)))
                .collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<BitString, SamplerError>>>> =
            (0..count).map(|_| Mutex::new(None)).collect();
        thread::scope(|s| {
            for _ in 0..self.workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= count {
                        break;
                    }
                    let r = self.sample_one(&mut SplitMix64::stream(seed, i as u64));
                    *slots[i].lock().expect("slot lock") = Some(r);
                });
            }
        });
        slots
            .into_iter()
            .map(|m| {
                m.into_inner()
                    .expect("slot lock")
                    .expect("every slot filled")
            })
            .collect()
    }

    /// One sample following the documented draw sequence.
    pub fn sample_one(&self, rng: &mut SplitMix64) -> Result<BitString, SamplerError> {
        let words: Vec<u64> = (0..self.n.div_ceil(64)).map(|_| rng.next_u64()).collect();
        let mut state = SamplerState {
            frontier: 0,
            y: BitString::from_words(self.n, &words),
        };
        while state.frontier < self.n {
            self.step(&mut state, rng)?;
        }
        Ok(state.y)
    }

    /// Open the Hadamard on qubit `state.frontier` and redraw that bit.
    pub fn step(&self, state: &mut SamplerState, rng: &mut SplitMix64) -> Result<(), SamplerError> {
        let q = state.frontier;
        let (a0, a1) = self.conditional_amplitudes(q, &state.y)?;
        let (p0, p1) = (a0.probability(), a1.probability());
        let total = p0.add(&p1);
        let threshold = p1.to_f64() / total.to_f64();
        state.y.set(q, rng.next_f64() < threshold);
        state.frontier += 1;
        Ok(())
    }

    /// Amplitudes of the instance with qubits `q+1..n` fixed to `y`, at
    /// `y_{0..q}` with bit `q` set to 0 and to 1.
    pub fn conditional_amplitudes(
        &self,
        q: usize,
        y: &BitString,
    ) -> Result<(DyadicAmplitude, DyadicAmplitude), SamplerError> {
        let key = (q, y.clone());
        if let Some(&hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit);
        }
        let pair = self.pair_at(q, y)?;
        if cfg!(debug_assertions) {
            self.assert_normalized(q, y, pair)?;
        }
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() < CACHE_LIMIT {
            cache.insert(key, pair);
        }
        Ok(pair)
    }

    fn pair_at(
        &self,
        q: usize,
        y: &BitString,
    ) -> Result<(DyadicAmplitude, DyadicAmplitude), SamplerError> {
        let fixes: Vec<(usize, bool)> = (q + 1..self.n).map(|i| (i, y.get(i))).collect();
        let h = self.g.specialize(&fixes)?;
        let sim = Simulator::from_polynomial(&h)
            .map_err(|e| SamplerError::Engine { step: q, source: e })?;
        let mut out = [DyadicAmplitude::ZERO; 2];
        for (b, slot) in out.iter_mut().enumerate() {
            let mut yb = y.clone();
            yb.set(q, b == 1);
            *slot = sim
                .amplitude(&yb, &self.engine)
                .map_err(|e| SamplerError::Engine { step: q, source: e })?
                .amplitude;
        }
        Ok((out[0], out[1]))
    }

    /// Children `2^{q+1-n}(a0² + a1²)` must equal the parent marginal
    /// `Σ_b 2^{q-n} amp(h_b, y_{0..q})²` where `h_b` fixes qubit `q` to `b`.
    fn assert_normalized(
        &self,
        q: usize,
        y: &BitString,
        (a0, a1): (DyadicAmplitude, DyadicAmplitude),
    ) -> Result<(), SamplerError> {
        let children = a0.probability().add(&a1.probability()).scaled(1);
        let mut parent = crate::engine::DyadicProbability::zero();
        for b in [false, true] {
            let fixes: Vec<(usize, bool)> = (q..self.n)
                .map(|i| (i, if i == q { b } else { y.get(i) }))
                .collect();
            let h = self.g.specialize(&fixes)?;
            let sim = Simulator::from_polynomial(&h)
                .map_err(|e| SamplerError::Engine { step: q, source: e })?;
            let a = sim
                .amplitude(y, &self.engine)
                .map_err(|e| SamplerError::Engine { step: q, source: e })?
                .amplitude;
            parent = parent.add(&a.probability());
        }
        debug_assert_eq!(
            children, parent,
            "probability mass not conserved at step {q}"
        );
        Ok(())
    }
}

/// Convenience wrapper: `count` samples of the circuit's output.
pub fn sample(c: &Circuit, seed: u64, count: usize) -> Result<Vec<BitString>, SamplerError> {
    Sampler::new(c)?.sample(seed, count)
}
