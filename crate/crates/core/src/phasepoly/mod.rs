//! Degree-3 phase polynomials with red/green/blue register structure.
//!
//! Every variable belongs to one of three color registers and every
//! monomial uses at most one variable per color. The polynomial is stored as
//!
//! * `cubic[r]`: green × blue matrix of the `(g, b)` partners of red index `r`,
//! * pairwise coupling matrices `A_RG`, `A_RB`, `A_GB`,
//! * one linear vector per register and a constant bit.
//!
//! GF(2) cancellation is implicit: toggling a monomial twice removes it.

mod extract;

pub use extract::{absorb_linear_stage, extract, LinearStage};

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::bits::BitString;
use crate::gf2kernel::{BitIter, BitMatrix, BitVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhasePolyError {
    #[error("circuit is invalid: {0}")]
    InvalidCircuit(String),
    #[error("linear stage maps qubit {control} ({control_color:?}) onto qubit {target} ({target_color:?}); only color-preserving stages can be absorbed")]
    NotColorPreserving {
        control: usize,
        target: usize,
        control_color: Option<Color>,
        target_color: Option<Color>,
    },
    #[error("qubit {0} is not a variable of this polynomial")]
    UnknownQubit(usize),
    #[error("qubit {0} is fixed more than once")]
    DuplicateFix(usize),
    #[error("outcome has {found} bits, polynomial has {expected} qubits")]
    OutcomeLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red = 0,
    Green = 1,
    Blue = 2,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Red, Color::Green, Color::Blue];

    pub fn letter(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Green => 'G',
            Color::Blue => 'B',
        }
    }

    #[inline]
    pub fn idx(self) -> usize {
        self as usize
    }
}

/// A variable: register color and index inside the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub color: Color,
    pub index: usize,
}

impl Var {
    pub fn new(color: Color, index: usize) -> Self {
        Self { color, index }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.color.letter(), self.index)
    }
}

/// Assignment of register slots to circuit qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    n_qubits: usize,
    registers: [Vec<usize>; 3],
}

impl Coloring {
    /// Wire `w` of block `b` is variable `(color w, index b)`.
    pub fn hypercube(k: u32) -> Self {
        let m = 1usize << k;
        let reg = |w: usize| (0..m).map(|b| 3 * b + w).collect::<Vec<_>>();
        Self {
            n_qubits: 3 * m,
            registers: [reg(0), reg(1), reg(2)],
        }
    }

    pub fn from_registers(n_qubits: usize, registers: [Vec<usize>; 3]) -> Self {
        Self {
            n_qubits,
            registers,
        }
    }

    /// Number of qubits of the underlying circuit (including any that are
    /// not variables of this polynomial).
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn register(&self, c: Color) -> &[usize] {
        &self.registers[c.idx()]
    }

    pub fn qubit(&self, v: Var) -> usize {
        self.registers[v.color.idx()][v.index]
    }

    pub fn locate(&self, qubit: usize) -> Option<Var> {
        for c in Color::ALL {
            if let Some(i) = self.registers[c.idx()].iter().position(|&q| q == qubit) {
                return Some(Var::new(c, i));
            }
        }
        None
    }

    /// Restrict a qubit-indexed outcome to the three registers.
    pub fn split(&self, y: &BitString) -> Result<RegisterBits, PhasePolyError> {
        if y.len() != self.n_qubits {
            return Err(PhasePolyError::OutcomeLength {
                expected: self.n_qubits,
                found: y.len(),
            });
        }
        let mut out = RegisterBits::zeros(self.sizes());
        for c in Color::ALL {
            for (i, &q) in self.registers[c.idx()].iter().enumerate() {
                if y.get(q) {
                    out.bits[c.idx()].set(i, true);
                }
            }
        }
        Ok(out)
    }

    /// Write register bits back to qubit positions; other qubits are zero.
    pub fn join(&self, r: &RegisterBits) -> BitString {
        let mut out = BitString::zeros(self.n_qubits);
        for c in Color::ALL {
            for i in r.bits[c.idx()].ones() {
                out.set(self.registers[c.idx()][i], true);
            }
        }
        out
    }

    pub fn sizes(&self) -> [usize; 3] {
        [
            self.registers[0].len(),
            self.registers[1].len(),
            self.registers[2].len(),
        ]
    }
}

/// A bit per variable, grouped by register.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegisterBits {
    pub bits: [BitVector; 3],
}

impl RegisterBits {
    pub fn zeros(sizes: [usize; 3]) -> Self {
        Self {
            bits: sizes.map(BitVector::zeros),
        }
    }

    pub fn get(&self, c: Color) -> &BitVector {
        &self.bits[c.idx()]
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.bits.map(|b| b.len())
    }

    pub fn var(&self, v: Var) -> bool {
        self.bits[v.color.idx()].get(v.index)
    }

    pub fn permuted(&self, order: [Color; 3]) -> Self {
        Self {
            bits: order.map(|c| self.bits[c.idx()]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriColorPolynomial {
    sizes: [usize; 3],
    cubic: Vec<BitMatrix>,
    a_rg: BitMatrix,
    a_rb: BitMatrix,
    a_gb: BitMatrix,
    linear: [BitVector; 3],
    constant: bool,
    coloring: Coloring,
}

impl TriColorPolynomial {
    pub fn zero(coloring: Coloring) -> Self {
        let [r, g, b] = coloring.sizes();
        Self {
            sizes: [r, g, b],
            cubic: vec![BitMatrix::zeros(g, b); r],
            a_rg: BitMatrix::zeros(r, g),
            a_rb: BitMatrix::zeros(r, b),
            a_gb: BitMatrix::zeros(g, b),
            linear: [
                BitVector::zeros(r),
                BitVector::zeros(g),
                BitVector::zeros(b),
            ],
            constant: false,
            coloring,
        }
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.sizes
    }

    pub fn size(&self, c: Color) -> usize {
        self.sizes[c.idx()]
    }

    pub fn num_vars(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    /// Green × blue matrix of cubic partners of red index `r`.
    pub fn cubic_slice(&self, r: usize) -> &BitMatrix {
        &self.cubic[r]
    }

    pub fn a_rg(&self) -> &BitMatrix {
        &self.a_rg
    }

    pub fn a_rb(&self) -> &BitMatrix {
        &self.a_rb
    }

    pub fn a_gb(&self) -> &BitMatrix {
        &self.a_gb
    }

    pub fn linear(&self, c: Color) -> &BitVector {
        &self.linear[c.idx()]
    }

    pub fn constant(&self) -> bool {
        self.constant
    }

    pub(crate) fn cubic_mut(&mut self) -> &mut Vec<BitMatrix> {
        &mut self.cubic
    }

    pub(crate) fn parts_mut(
        &mut self,
    ) -> (
        &mut BitMatrix,
        &mut BitMatrix,
        &mut BitMatrix,
        &mut [BitVector; 3],
    ) {
        (
            &mut self.a_rg,
            &mut self.a_rb,
            &mut self.a_gb,
            &mut self.linear,
        )
    }

    pub fn has_cubic_terms(&self) -> bool {
        self.cubic.iter().any(|t| !t.is_zero())
    }

    pub fn degree(&self) -> usize {
        if self.has_cubic_terms() {
            3
        } else if !(self.a_rg.is_zero() && self.a_rb.is_zero() && self.a_gb.is_zero()) {
            2
        } else if self.linear.iter().any(|l| !l.is_zero()) {
            1
        } else {
            0
        }
    }

    /// Cubic monomials as sorted `(r, g, b)` triples.
    pub fn cubic_terms(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (r, t) in self.cubic.iter().enumerate() {
            for g in 0..t.rows() {
                for b in BitIter(t.row_word(g)) {
                    out.push((r, g, b));
                }
            }
        }
        out
    }

    /// Toggle a monomial (product of distinct-color variables; empty = 1).
    ///
    /// Panics when two variables share a color.
    pub fn toggle(&mut self, vars: &[Var]) {
        let mut slot: [Option<usize>; 3] = [None; 3];
        for v in vars {
            assert!(
                slot[v.color.idx()].is_none(),
                "monomial repeats color {:?}",
                v.color
            );
            assert!(
                v.index < self.sizes[v.color.idx()],
                "variable {v} out of range"
            );
            slot[v.color.idx()] = Some(v.index);
        }
        match slot {
            [None, None, None] => self.constant ^= true,
            [Some(i), None, None] => self.linear[0].flip(i),
            [None, Some(i), None] => self.linear[1].flip(i),
            [None, None, Some(i)] => self.linear[2].flip(i),
            [Some(r), Some(g), None] => self.a_rg.flip(r, g),
            [Some(r), None, Some(b)] => self.a_rb.flip(r, b),
            [None, Some(g), Some(b)] => self.a_gb.flip(g, b),
            [Some(r), Some(g), Some(b)] => self.cubic[r].flip(g, b),
        }
    }

    /// Visit every monomial with coefficient 1, variables in color order.
    pub fn for_each_monomial(&self, mut f: impl FnMut(&[Var])) {
        use Color::*;
        if self.constant {
            f(&[]);
        }
        for c in Color::ALL {
            for i in self.linear[c.idx()].ones() {
                f(&[Var::new(c, i)]);
            }
        }
        let pairs = [
            (&self.a_rg, Red, Green),
            (&self.a_rb, Red, Blue),
            (&self.a_gb, Green, Blue),
        ];
        for (m, ca, cb) in pairs {
            for i in 0..m.rows() {
                for j in BitIter(m.row_word(i)) {
                    f(&[Var::new(ca, i), Var::new(cb, j)]);
                }
            }
        }
        for (r, t) in self.cubic.iter().enumerate() {
            for g in 0..t.rows() {
                for b in BitIter(t.row_word(g)) {
                    f(&[Var::new(Red, r), Var::new(Green, g), Var::new(Blue, b)]);
                }
            }
        }
    }

    /// All monomials, each as a color-ordered variable list.
    pub fn monomials(&self) -> BTreeSet<Vec<Var>> {
        let mut out = BTreeSet::new();
        self.for_each_monomial(|m| {
            out.insert(m.to_vec());
        });
        out
    }

    /// Evaluate at a register assignment.
    pub fn eval(&self, x: &RegisterBits) -> bool {
        assert_eq!(x.sizes(), self.sizes, "assignment shape mismatch");
        let [xr, xg, xb] = &x.bits;
        let mut acc = self.constant;
        for c in 0..3 {
            acc ^= self.linear[c].dot(&x.bits[c]);
        }
        let quad = |m: &BitMatrix, u: &BitVector, v: &BitVector| {
            let row = u.ones().fold(0u64, |w, i| w ^ m.row_word(i));
            (row & v.word()).count_ones() & 1 == 1
        };
        acc ^= quad(&self.a_rg, xr, xg);
        acc ^= quad(&self.a_rb, xr, xb);
        acc ^= quad(&self.a_gb, xg, xb);
        for r in xr.ones() {
            acc ^= quad(&self.cubic[r], xg, xb);
        }
        acc
    }

    /// Evaluate at a qubit-indexed assignment.
    pub fn eval_qubits(&self, x: &BitString) -> Result<bool, PhasePolyError> {
        Ok(self.eval(&self.coloring.split(x)?))
    }

    /// Drop linear terms and the constant.
    ///
    /// Returns `(g′, y′, negate)` with `amp(g, y) = (−1)^negate · amp(g′, y′)`
    /// and `y′ = y ⊕ λ`.
    pub fn fold_linear(&self, y: &RegisterBits) -> (TriColorPolynomial, RegisterBits, bool) {
        let mut g = self.clone();
        let mut y2 = y.clone();
        for c in 0..3 {
            y2.bits[c].xor_assign(&self.linear[c]);
            g.linear[c] = BitVector::zeros(self.sizes[c]);
        }
        g.constant = false;
        (g, y2, self.constant)
    }

    /// Fix the listed qubits to constants.
    ///
    /// The result is a polynomial over the remaining variables (registers
    /// shrink, coloring keeps the surviving qubit labels) such that
    /// `self(x) = result(x restricted)` for every `x` extending the fixes.
    pub fn specialize(
        &self,
        fixes: &[(usize, bool)],
    ) -> Result<TriColorPolynomial, PhasePolyError> {
        // slot[c][i] = Err(value) if fixed, Ok(new index) if kept
        let mut fixed: [Vec<Option<bool>>; 3] = self.sizes.map(|s| vec![None; s]);
        for &(q, value) in fixes {
            let v = self
                .coloring
                .locate(q)
                .ok_or(PhasePolyError::UnknownQubit(q))?;
            let cell = &mut fixed[v.color.idx()][v.index];
            if cell.is_some() {
                return Err(PhasePolyError::DuplicateFix(q));
            }
            *cell = Some(value);
        }
        let mut remap: [Vec<Option<usize>>; 3] = Default::default();
        let mut registers: [Vec<usize>; 3] = Default::default();
        for c in Color::ALL {
            let mut next = 0;
            for (i, f) in fixed[c.idx()].iter().enumerate() {
                if f.is_none() {
                    remap[c.idx()].push(Some(next));
                    registers[c.idx()].push(self.coloring.registers[c.idx()][i]);
                    next += 1;
                } else {
                    remap[c.idx()].push(None);
                }
            }
        }
        let mut out =
            TriColorPolynomial::zero(Coloring::from_registers(self.coloring.n_qubits, registers));
        let mut kept = Vec::with_capacity(3);
        self.for_each_monomial(|mono| {
            kept.clear();
            for v in mono {
                match fixed[v.color.idx()][v.index] {
                    Some(false) => return,
                    Some(true) => {}
                    None => kept.push(Var::new(
                        v.color,
                        remap[v.color.idx()][v.index].expect("kept variable has an index"),
                    )),
                }
            }
            out.toggle(&kept);
        });
        Ok(out)
    }

    /// Relabel registers: the result's register `i` is this polynomial's
    /// register `order[i]`. `order` must be a permutation.
    pub fn permute_colors(&self, order: [Color; 3]) -> TriColorPolynomial {
        let mut seen = [false; 3];
        for c in order {
            assert!(!seen[c.idx()], "color order is not a permutation");
            seen[c.idx()] = true;
        }
        // new color of each old color
        let mut new_of = [Color::Red; 3];
        for (new, old) in order.iter().enumerate() {
            new_of[old.idx()] = Color::ALL[new];
        }
        let registers = order.map(|c| self.coloring.registers[c.idx()].clone());
        let mut out =
            TriColorPolynomial::zero(Coloring::from_registers(self.coloring.n_qubits, registers));
        let mut buf = Vec::with_capacity(3);
        self.for_each_monomial(|mono| {
            buf.clear();
            buf.extend(
                mono.iter()
                    .map(|v| Var::new(new_of[v.color.idx()], v.index)),
            );
            out.toggle(&buf);
        });
        out
    }

    /// Stable textual listing: one monomial per line, ordered by degree and
    /// then lexicographically by variables (`R0 G1 B2` style names).
    pub fn dump(&self) -> String {
        let mut monos: Vec<Vec<Var>> = self.monomials().into_iter().collect();
        monos.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# registers R={} G={} B={}",
            self.sizes[0], self.sizes[1], self.sizes[2]
        );
        for m in monos {
            if m.is_empty() {
                s.push_str("1\n");
            } else {
                let names: Vec<String> = m.iter().map(ToString::to_string).collect();
                let _ = writeln!(s, "{}", names.join("*"));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests;
