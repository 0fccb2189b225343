//! Brute-force reference computations.
//!
//! Nothing here touches the phase-polynomial or engine code: the dense
//! simulator applies the gate list to a statevector and the symbolic
//! expander multiplies out wire expressions over qubit-indexed variables.
//! Both are slow and exist to be compared against.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::bits::BitString;
use crate::circuit::{Circuit, Stage};

/// Largest qubit count the dense simulator accepts.
pub const MAX_DENSE_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{n} qubits exceeds the dense-simulation cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("outcome has {found} bits, expected {expected}")]
    OutcomeLength { expected: usize, found: usize },
    #[error("circuit is invalid: {0}")]
    Invalid(String),
}

/// Full output state; HQ amplitudes are real.
#[derive(Debug, Clone)]
pub struct DenseState {
    n: usize,
    amplitudes: Vec<f64>,
}

impl DenseState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Basis index `Σ y_q 2^q`.
    pub fn amplitude_at(&self, index: usize) -> f64 {
        self.amplitudes[index]
    }

    pub fn amplitude(&self, y: &BitString) -> Result<f64, OracleError> {
        if y.len() != self.n {
            return Err(OracleError::OutcomeLength {
                expected: self.n,
                found: y.len(),
            });
        }
        Ok(self.amplitudes[y.to_u128() as usize])
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a * a).collect()
    }
}

/// Simulate `H^n · stages · H^n |0⟩` gate by gate.
pub fn statevector(c: &Circuit) -> Result<DenseState, OracleError> {
    statevector_from(c, &BitString::zeros(c.n()))
}

/// Same as [`statevector`] started from basis state `|x⟩`.
pub fn statevector_from(c: &Circuit, x: &BitString) -> Result<DenseState, OracleError> {
    let violations = c.validate();
    if !violations.is_empty() {
        return Err(OracleError::Invalid(
            violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    let n = c.n();
    if n > MAX_DENSE_QUBITS {
        return Err(OracleError::TooLarge {
            n,
            cap: MAX_DENSE_QUBITS,
        });
    }
    if x.len() != n {
        return Err(OracleError::OutcomeLength {
            expected: n,
            found: x.len(),
        });
    }
    let dim = 1usize << n;
    let mut psi = vec![0.0f64; dim];
    psi[x.to_u128() as usize] = 1.0;
    hadamard_all(&mut psi, n);
    for stage in &c.stages {
        match stage {
            Stage::Diagonal(gates) => {
                for g in gates {
                    let mask: usize = g.qubits.iter().map(|q| 1usize << q).sum();
                    for (i, a) in psi.iter_mut().enumerate() {
                        if i & mask == mask {
                            *a = -*a;
                        }
                    }
                }
            }
            Stage::Cnot(layer) => {
                for (ctl, tgt) in layer.cnots(c.k) {
                    let (cm, tm) = (1usize << ctl, 1usize << tgt);
                    for i in 0..dim {
                        if i & cm != 0 && i & tm == 0 {
                            psi.swap(i, i | tm);
                        }
                    }
                }
            }
        }
    }
    hadamard_all(&mut psi, n);
    Ok(DenseState { n, amplitudes: psi })
}

pub fn statevector_amplitude(c: &Circuit, y: &BitString) -> Result<f64, OracleError> {
    statevector(c)?.amplitude(y)
}

fn hadamard_all(psi: &mut [f64], n: usize) {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for q in 0..n {
        let bit = 1usize << q;
        for i in 0..psi.len() {
            if i & bit == 0 {
                let (a, b) = (psi[i], psi[i | bit]);
                psi[i] = (a + b) * scale;
                psi[i | bit] = (a - b) * scale;
            }
        }
    }
}

/// `2^{-N} Σ_x (−1)^{p(x) + y·x}` over `N` variables, where `p` is the XOR
/// of the listed monomials (an empty monomial is the constant 1).
pub fn phase_sum_amplitude(num_vars: usize, monomials: &[Vec<usize>], y: &[bool]) -> f64 {
    assert!(
        num_vars <= MAX_DENSE_QUBITS,
        "too many variables for brute force"
    );
    assert_eq!(y.len(), num_vars);
    let masks: Vec<usize> = monomials
        .iter()
        .map(|m| m.iter().map(|&v| 1usize << v).fold(0, |a, b| a | b))
        .collect();
    let ymask: usize = y
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| 1usize << i)
        .sum();
    let mut total: i64 = 0;
    for x in 0..1usize << num_vars {
        let mut parity = (x & ymask).count_ones() & 1;
        for &m in &masks {
            if x & m == m {
                parity ^= 1;
            }
        }
        total += if parity == 0 { 1 } else { -1 };
    }
    total as f64 / (1u64 << num_vars) as f64
}

/// Reduced GF(2) phase polynomial over primary qubit variables.
///
/// Monomials are sorted qubit lists; the empty list is the constant term.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolicPolynomial {
    pub monomials: BTreeSet<Vec<usize>>,
}

impl SymbolicPolynomial {
    fn toggle(&mut self, m: Vec<usize>) {
        if !self.monomials.remove(&m) {
            self.monomials.insert(m);
        }
    }

    pub fn of_degree(&self, d: usize) -> BTreeSet<Vec<usize>> {
        self.monomials
            .iter()
            .filter(|m| m.len() == d)
            .cloned()
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Expand every diagonal gate as a product of its wires' current linear
/// expressions in the input variables, reducing mod 2 with `x² = x`.
/// CNOT layers are handled by updating the expressions, so the result is
/// the diagonal part with the CNOTs commuted to the end.
pub fn expand_symbolic(c: &Circuit) -> SymbolicPolynomial {
    let n = c.n();
    let mut wire: Vec<BTreeSet<usize>> = (0..n).map(|q| BTreeSet::from([q])).collect();
    let mut poly = SymbolicPolynomial::default();
    for stage in &c.stages {
        match stage {
            Stage::Cnot(layer) => {
                for (ctl, tgt) in layer.cnots(c.k) {
                    let src = wire[ctl].clone();
                    let dst = &mut wire[tgt];
                    for v in src {
                        if !dst.remove(&v) {
                            dst.insert(v);
                        }
                    }
                }
            }
            Stage::Diagonal(gates) => {
                for g in gates {
                    // product of sums: iterate the cartesian product of terms
                    let factors: Vec<Vec<usize>> = g
                        .qubits
                        .iter()
                        .map(|&q| wire[q].iter().copied().collect())
                        .collect();
                    let mut terms: Vec<Vec<usize>> = vec![Vec::new()];
                    for f in &factors {
                        let mut next = Vec::with_capacity(terms.len() * f.len());
                        for t in &terms {
                            for &v in f {
                                let mut m = t.clone();
                                if !m.contains(&v) {
                                    m.push(v);
                                    m.sort_unstable();
                                }
                                next.push(m);
                            }
                        }
                        terms = next;
                    }
                    for t in terms {
                        poly.toggle(t);
                    }
                }
            }
        }
    }
    poly
}
