use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, BitXor, BitXorAssign, Not, Shl, Shr};

use super::{BitMatrix, BitVector, WORD_BITS};

/// Row echelon basis of a set of GF(2) rows, keyed by pivot (lowest set bit).
///
/// Rows are inserted one at a time and reduced against the basis; the pivot
/// of every stored row is distinct, which makes membership tests a single
/// pass over the pivots of the candidate.
#[derive(Clone, Debug)]
pub struct Echelon {
    basis: [u64; WORD_BITS],
    rank: usize,
}

impl Echelon {
    pub fn empty() -> Self {
        Self {
            basis: [0; WORD_BITS],
            rank: 0,
        }
    }

    pub fn new(m: &BitMatrix) -> Self {
        let mut e = Self::empty();
        for &w in m.row_words() {
            e.insert(w);
        }
        e
    }

    /// Reduce `row` against the basis and keep the remainder if it is
    /// nonzero. Returns whether the rank grew.
    pub fn insert(&mut self, mut row: u64) -> bool {
        while row != 0 {
            let p = row.trailing_zeros() as usize;
            let b = self.basis[p];
            if b == 0 {
                self.basis[p] = row;
                self.rank += 1;
                return true;
            }
            row ^= b;
        }
        false
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn contains(&self, mut v: u64) -> bool {
        while v != 0 {
            let b = self.basis[v.trailing_zeros() as usize];
            if b == 0 {
                return false;
            }
            v ^= b;
        }
        true
    }
}

/// Forward-eliminated augmented system `[M | b]`.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    cols: usize,
    // basis[p] = (row word with pivot p, augmented bit)
    basis: Vec<Option<(u64, bool)>>,
    rank: usize,
    consistent: bool,
}

impl ReducedSystem {
    pub fn new(m: &BitMatrix, b: &BitVector) -> Self {
        debug_assert_eq!(m.rows(), b.len());
        let mut sys = Self {
            cols: m.cols(),
            basis: vec![None; m.cols()],
            rank: 0,
            consistent: true,
        };
        for (i, &w) in m.row_words().iter().enumerate() {
            let mut row = w;
            let mut aug = b.get(i);
            loop {
                if row == 0 {
                    if aug {
                        sys.consistent = false;
                    }
                    break;
                }
                let p = row.trailing_zeros() as usize;
                match sys.basis[p] {
                    Some((r, a)) => {
                        row ^= r;
                        aug ^= a;
                    }
                    None => {
                        sys.basis[p] = Some((row, aug));
                        sys.rank += 1;
                        break;
                    }
                }
            }
        }
        sys
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    /// Back-substitution with free variables fixed to zero.
    pub fn particular_solution(&self) -> Option<BitVector> {
        if !self.consistent {
            return None;
        }
        // Pivot rows only have bits at or above their pivot, so resolving
        // pivots from the highest column down sees every dependency solved.
        let mut x = 0u64;
        for p in (0..self.cols).rev() {
            if let Some((row, aug)) = self.basis[p] {
                let rest = row & !(1u64 << p);
                let bit = aug ^ ((rest & x).count_ones() & 1 == 1);
                if bit {
                    x |= 1 << p;
                }
            }
        }
        Some(BitVector::from_word(self.cols, x))
    }
}

/// Result of the fused Clifford kernel: `None` for a vanishing amplitude,
/// otherwise `(rank, sign_bit)`.
pub(crate) type KernelOutcome = Option<(u32, bool)>;

/// Fused evaluation of `Σ_{u,v} (-1)^{u·Γv + dg·u + db·v}` up to scale.
///
/// `rows` are the rows of Γ (`rows.len()` = dim of `dg`, row width = dim of
/// `db`). Returns `None` when `dg ∉ Col(Γ)` or `db ∉ Row(Γ)`, otherwise the
/// rank of Γ and the parity `db · x` for any solution of `Γ x = dg`.
///
/// The parity is collected while reducing `db` against the echelon rows:
/// each echelon row `e` satisfies `e · x = aug(e)` for every solution, so if
/// `db = Σ e_i` then `db · x = Σ aug(e_i)`.
#[inline]
pub(crate) fn clifford_kernel(rows: &[u64], cols: usize, dg: u64, db: u64) -> KernelOutcome {
    if cols <= 16 {
        kernel_packed::<16>(rows, dg, db)
    } else if cols <= 32 {
        kernel_packed::<32>(rows, dg, db)
    } else if cols < WORD_BITS {
        kernel_packed::<WORD_BITS>(rows, dg, db)
    } else {
        kernel_wide(rows, dg, db)
    }
}

const AUG: u64 = 1 << 63;

/// Column word for [`clifford_kernel_cols`]: bit `i` is row `i`.
pub(crate) trait Lane:
    Copy
    + Default
    + Eq
    + BitAnd<Output = Self>
    + BitOr<Output = Self>
    + BitXor<Output = Self>
    + BitXorAssign
    + BitOrAssign
    + BitAndAssign
    + Not<Output = Self>
    + Shl<u32, Output = Self>
    + Shr<u32, Output = Self>
{
    const ONE: Self;
    const ALL: Self;
    fn low_bits(n: usize) -> Self;
    fn from_u64(w: u64) -> Self;
    fn tz(self) -> u32;
    fn popcount(self) -> u32;
    fn neg(self) -> Self;
    fn clear_lowest(self) -> Self;
}

macro_rules! lane {
    ($t:ty) => {
        impl Lane for $t {
            const ONE: Self = 1;
            const ALL: Self = <$t>::MAX;
            #[inline(always)]
            fn low_bits(n: usize) -> Self {
                if n >= <$t>::BITS as usize {
                    <$t>::MAX
                } else {
                    (1 << n) - 1
                }
            }
            #[inline(always)]
            fn from_u64(w: u64) -> Self {
                w as $t
            }
            #[inline(always)]
            fn tz(self) -> u32 {
                self.trailing_zeros()
            }
            #[inline(always)]
            fn popcount(self) -> u32 {
                self.count_ones()
            }
            #[inline(always)]
            fn neg(self) -> Self {
                self.wrapping_neg()
            }
            #[inline(always)]
            fn clear_lowest(self) -> Self {
                self & self.wrapping_sub(1)
            }
        }
    };
}

lane!(u16);
lane!(u32);

/// [`clifford_kernel`] for Γ of at most `N` rows and `N` columns given
/// column-major: bit `i` of `cols[c]` is `Γ[i][c]`, with `N` the lane width.
///
/// Gauss-Jordan by columns. Finding a pivot is one mask and a row operation
/// is a masked XOR on every column, so the work is a fixed number of word
/// operations per pivot. After reduction every non-pivot column is zero on
/// the unused rows; `db` lies in the row space exactly when it is orthogonal
/// to the kernel vectors read off those columns.
#[inline]
pub(crate) fn clifford_kernel_cols<L: Lane, const N: usize>(
    cols: &[L; N],
    ncols: usize,
    dg: L,
    db: L,
) -> KernelOutcome {
    let mut m = *cols;
    let mut aug = dg;
    let mut free = L::ALL;
    let mut pivots = L::default();
    let mut pivot_row = [0u8; N];
    for p in 0..ncols {
        let cand = m[p] & free;
        if cand == L::default() {
            continue;
        }
        let i = cand.tz();
        let bit = L::ONE << i;
        free &= !bit;
        pivots |= L::ONE << p as u32;
        pivot_row[p] = i as u8;
        let s = m[p] & !bit;
        for c in m.iter_mut() {
            *c ^= s & ((*c >> i) & L::ONE).neg();
        }
        aug ^= s & ((aug >> i) & L::ONE).neg();
    }
    if aug & free != L::default() {
        return None;
    }
    let mut d = L::default();
    let mut sel = db & pivots;
    while sel != L::default() {
        d |= L::ONE << pivot_row[sel.tz() as usize] as u32;
        sel = sel.clear_lowest();
    }
    let mut nonpivot = !pivots & L::low_bits(ncols);
    while nonpivot != L::default() {
        let f = nonpivot.tz();
        let want = (db >> f) & L::ONE != L::default();
        if want != ((m[f as usize] & d).popcount() & 1 == 1) {
            return None;
        }
        nonpivot = nonpivot.clear_lowest();
    }
    Some((pivots.popcount(), (aug & d).popcount() & 1 == 1))
}

/// `N` bounds the pivot positions, i.e. the column count.
#[inline]
fn kernel_packed<const N: usize>(rows: &[u64], dg: u64, db: u64) -> KernelOutcome {
    let mut basis = [0u64; N];
    let mut rank = 0u32;
    for (i, &w) in rows.iter().enumerate() {
        let mut row = w | (((dg >> i) & 1) << 63);
        loop {
            let body = row & !AUG;
            if body == 0 {
                if row != 0 {
                    return None;
                }
                break;
            }
            let p = body.trailing_zeros() as usize;
            let b = basis[p];
            if b == 0 {
                basis[p] = row;
                rank += 1;
                break;
            }
            row ^= b;
        }
    }
    let mut v = db;
    let mut sign = 0u64;
    while v != 0 {
        let b = basis[v.trailing_zeros() as usize];
        if b == 0 {
            return None;
        }
        v ^= b & !AUG;
        sign ^= b;
    }
    Some((rank, sign & AUG != 0))
}

#[cold]
fn kernel_wide(rows: &[u64], dg: u64, db: u64) -> KernelOutcome {
    const WAUG: u128 = 1 << 64;
    let mut basis = [0u128; WORD_BITS];
    let mut rank = 0u32;
    for (i, &w) in rows.iter().enumerate() {
        let mut row = w as u128 | ((((dg >> i) & 1) as u128) << 64);
        loop {
            let body = row as u64;
            if body == 0 {
                if row != 0 {
                    return None;
                }
                break;
            }
            let p = body.trailing_zeros() as usize;
            let b = basis[p];
            if b == 0 {
                basis[p] = row;
                rank += 1;
                break;
            }
            row ^= b;
        }
    }
    let mut v = db;
    let mut sign = 0u128;
    while v != 0 {
        let b = basis[v.trailing_zeros() as usize];
        if b == 0 {
            return None;
        }
        v ^= b as u64;
        sign ^= b;
    }
    Some((rank, sign & WAUG != 0))
}
