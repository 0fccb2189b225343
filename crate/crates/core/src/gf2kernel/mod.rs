//! Word-packed linear algebra over GF(2).
//!
//! Every vector and every matrix row fits in a single `u64`, so matrices are
//! limited to 64 columns (and, for convenience, 64 rows). Public operations
//! never mutate their inputs: elimination runs on a scratch copy.

mod echelon;

pub(crate) use echelon::{clifford_kernel, clifford_kernel_cols, Lane};
pub use echelon::{Echelon, ReducedSystem};

use std::fmt;

use thiserror::Error;

/// Widest vector / matrix row supported.
pub const WORD_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("width {0} exceeds the {WORD_BITS}-bit word limit")]
    TooWide(usize),
}

#[inline]
pub(crate) fn low_mask(len: usize) -> u64 {
    if len >= WORD_BITS {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// A vector over GF(2) of at most 64 entries, packed into one word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    bits: u64,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        assert!(
            len <= WORD_BITS,
            "BitVector length {len} exceeds {WORD_BITS}"
        );
        Self { len, bits: 0 }
    }

    /// Build from a raw word; bits above `len` are discarded.
    pub fn from_word(len: usize, word: u64) -> Self {
        assert!(
            len <= WORD_BITS,
            "BitVector length {len} exceeds {WORD_BITS}"
        );
        Self {
            len,
            bits: word & low_mask(len),
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn word(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.bits >> i) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        if value {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.bits ^= 1 << i;
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Inner product mod 2.
    #[inline]
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        (self.bits & other.bits).count_ones() & 1 == 1
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len, "BitVector xor length mismatch");
        BitVector {
            len: self.len,
            bits: self.bits ^ other.bits,
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "BitVector xor length mismatch");
        self.bits ^= other.bits;
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        BitIter(self.bits)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, ")")
    }
}

/// Iterates the positions of set bits in a word, lowest first.
#[derive(Clone, Copy)]
pub struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

/// A dense GF(2) matrix, one `u64` per row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(
            cols <= WORD_BITS,
            "BitMatrix width {cols} exceeds {WORD_BITS}"
        );
        Self {
            rows,
            cols,
            data: vec![0; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i] = 1 << i;
        }
        m
    }

    /// Build from packed row words; bits above `cols` are discarded.
    pub fn from_row_words(cols: usize, words: &[u64]) -> Self {
        assert!(
            cols <= WORD_BITS,
            "BitMatrix width {cols} exceeds {WORD_BITS}"
        );
        let mask = low_mask(cols);
        Self {
            rows: words.len(),
            cols,
            data: words.iter().map(|w| w & mask).collect(),
        }
    }

    /// Build from rows of 0/1 entries. All rows must share one length.
    pub fn from_rows(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged BitMatrix rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v != 0);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row_words(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub(crate) fn row_words_mut(&mut self) -> &mut [u64] {
        &mut self.data
    }

    #[inline]
    pub fn row_word(&self, i: usize) -> u64 {
        self.data[i]
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector::from_word(self.cols, self.data[i])
    }

    pub fn col(&self, j: usize) -> BitVector {
        assert!(j < self.cols);
        let mut v = BitVector::zeros(self.rows);
        for (i, w) in self.data.iter().enumerate() {
            if (w >> j) & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        (self.data[i] >> j) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        if value {
            self.data[i] |= 1 << j;
        } else {
            self.data[i] &= !(1 << j);
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize, j: usize) {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        self.data[i] ^= 1 << j;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BitMatrix) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "BitMatrix xor shape mismatch"
        );
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a ^= b;
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        assert!(
            self.rows <= WORD_BITS,
            "cannot transpose {} rows",
            self.rows
        );
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for (i, &w) in self.data.iter().enumerate() {
            for j in BitIter(w) {
                t.data[j] |= 1 << i;
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && *self == self.transpose()
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                op: "mul_vec",
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for (i, &w) in self.data.iter().enumerate() {
            if (w & v.word()).count_ones() & 1 == 1 {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// `vᵀ · self`, i.e. the XOR of the rows selected by `v`.
    pub fn vec_mul(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch {
                op: "vec_mul",
                expected: self.rows,
                found: v.len(),
            });
        }
        let word = v.ones().fold(0u64, |acc, i| acc ^ self.data[i]);
        Ok(BitVector::from_word(self.cols, word))
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch {
                op: "mul",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for (i, &w) in self.data.iter().enumerate() {
            out.data[i] = BitIter(w).fold(0u64, |acc, k| acc ^ other.data[k]);
        }
        Ok(out)
    }

    /// Drop the listed rows and columns, keeping the order of the rest.
    pub fn select(&self, keep_rows: &[usize], keep_cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(keep_rows.len(), keep_cols.len());
        for (ni, &i) in keep_rows.iter().enumerate() {
            let w = self.data[i];
            let mut nw = 0u64;
            for (nj, &j) in keep_cols.iter().enumerate() {
                nw |= ((w >> j) & 1) << nj;
            }
            out.data[ni] = nw;
        }
        out
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{}", u8::from(self.get(i, j)))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Outcome of [`solve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub feasible: bool,
    pub solution: Option<BitVector>,
    pub rank: usize,
}

/// Dimension of the row space of `m`.
pub fn rank(m: &BitMatrix) -> usize {
    Echelon::new(m).rank()
}

/// Solve `m · x = b`.
///
/// When the system is consistent the returned solution is the one obtained
/// by back-substitution with every free variable set to zero.
pub fn solve(m: &BitMatrix, b: &BitVector) -> Result<SolveResult, Gf2Error> {
    if b.len() != m.rows() {
        return Err(Gf2Error::DimensionMismatch {
            op: "solve",
            expected: m.rows(),
            found: b.len(),
        });
    }
    let sys = ReducedSystem::new(m, b);
    let rank = sys.rank();
    let solution = sys.particular_solution();
    Ok(SolveResult {
        feasible: solution.is_some(),
        solution,
        rank,
    })
}

/// Whether `v` lies in the span of the rows of `m`.
pub fn in_row_space(m: &BitMatrix, v: &BitVector) -> Result<bool, Gf2Error> {
    if v.len() != m.cols() {
        return Err(Gf2Error::DimensionMismatch {
            op: "in_row_space",
            expected: m.cols(),
            found: v.len(),
        });
    }
    Ok(Echelon::new(m).contains(v.word()))
}

/// Whether `v` lies in the span of the columns of `m`.
pub fn in_col_space(m: &BitMatrix, v: &BitVector) -> Result<bool, Gf2Error> {
    if v.len() != m.rows() {
        return Err(Gf2Error::DimensionMismatch {
            op: "in_col_space",
            expected: m.rows(),
            found: v.len(),
        });
    }
    Ok(Echelon::new(&m.transpose()).contains(v.word()))
}
