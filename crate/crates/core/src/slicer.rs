//! Covering registers and the sliced form of a cubic phase polynomial.
//!
//! Every cubic monomial has exactly one variable of each color, so fixing a
//! whole register leaves a quadratic form in the other two:
//!
//! ```text
//! g(xR, xG, xB) = xG·Γ(xR)·xB ⊕ δG(xR)·xG ⊕ δB(xR)·xB
//! Γ(xR) = Γ0 ⊕ Σ_{r : xR_r = 1} Γ_r
//! ```
//!
//! The sliced register is always presented in the "red" role; when another
//! register is smaller the colors are relabeled first.

use std::sync::OnceLock;

use thiserror::Error;

use crate::gf2kernel::{low_mask, BitMatrix, BitVector};
use crate::phasepoly::{Color, RegisterBits, TriColorPolynomial, Var};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceError {
    #[error("polynomial still has linear or constant terms; fold them into the outcome first")]
    LinearTermsPresent,
}

/// A whole color register used as the covering set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverSet {
    pub register: Color,
    pub size: usize,
}

/// Smallest register; ties prefer red, then green, then blue.
pub fn canonical_cover(g: &TriColorPolynomial) -> CoverSet {
    let register = Color::ALL
        .into_iter()
        .min_by_key(|c| (g.size(*c), c.idx()))
        .expect("three colors");
    CoverSet {
        register,
        size: g.size(register),
    }
}

/// Whether every cubic monomial contains a variable from `set`.
pub fn is_cover(g: &TriColorPolynomial, set: &[Var]) -> bool {
    let mut mark: [u64; 3] = [0; 3];
    for v in set {
        mark[v.color.idx()] |= 1 << v.index;
    }
    g.cubic_terms()
        .into_iter()
        .all(|(r, gi, b)| mark[0] >> r & 1 == 1 || mark[1] >> gi & 1 == 1 || mark[2] >> b & 1 == 1)
}

/// Γ0, the per-index slices Γ_r and the couplings producing δG and δB.
///
/// Register roles: `roles[0]` is the sliced register, `roles[1]` indexes
/// rows of Γ and `roles[2]` indexes its columns.
#[derive(Debug)]
pub struct SlicedForm {
    roles: [Color; 3],
    sizes: [usize; 3],
    gamma0: Vec<u64>,
    /// `gamma[r * rows + i]` is row `i` of Γ_r.
    gamma: Vec<u64>,
    /// Row `r` of A_RG and of A_RB.
    delta_g: Vec<u64>,
    delta_b: Vec<u64>,
    cubic_free: bool,
    symmetric: OnceLock<bool>,
}

impl Clone for SlicedForm {
    fn clone(&self) -> Self {
        let symmetric = OnceLock::new();
        if let Some(&s) = self.symmetric.get() {
            let _ = symmetric.set(s);
        }
        Self {
            roles: self.roles,
            sizes: self.sizes,
            gamma0: self.gamma0.clone(),
            gamma: self.gamma.clone(),
            delta_g: self.delta_g.clone(),
            delta_b: self.delta_b.clone(),
            cubic_free: self.cubic_free,
            symmetric,
        }
    }
}

/// Build the sliced form of `g` over `cover`.
pub fn slice(g: &TriColorPolynomial, cover: CoverSet) -> Result<SlicedForm, SliceError> {
    if g.constant() || Color::ALL.iter().any(|&c| !g.linear(c).is_zero()) {
        return Err(SliceError::LinearTermsPresent);
    }
    let roles = match cover.register {
        Color::Red => [Color::Red, Color::Green, Color::Blue],
        Color::Green => [Color::Green, Color::Red, Color::Blue],
        Color::Blue => [Color::Blue, Color::Red, Color::Green],
    };
    let relabeled;
    let p = if cover.register == Color::Red {
        g
    } else {
        relabeled = g.permute_colors(roles);
        &relabeled
    };
    let sizes = p.sizes();
    let [mr, mg, _] = sizes;
    let mut gamma = Vec::with_capacity(mr * mg);
    for r in 0..mr {
        gamma.extend_from_slice(p.cubic_slice(r).row_words());
    }
    Ok(SlicedForm {
        roles,
        sizes,
        gamma0: p.a_gb().row_words().to_vec(),
        gamma,
        delta_g: p.a_rg().row_words().to_vec(),
        delta_b: p.a_rb().row_words().to_vec(),
        cubic_free: !p.has_cubic_terms(),
        symmetric: OnceLock::new(),
    })
}

impl SlicedForm {
    pub fn roles(&self) -> [Color; 3] {
        self.roles
    }

    /// Register sizes in role order: sliced, rows of Γ, columns of Γ.
    pub fn sizes(&self) -> [usize; 3] {
        self.sizes
    }

    pub fn sliced_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn has_cubic_terms(&self) -> bool {
        !self.cubic_free
    }

    pub fn gamma0(&self) -> BitMatrix {
        BitMatrix::from_row_words(self.sizes[2], &self.gamma0)
    }

    pub fn gamma_slice(&self, r: usize) -> BitMatrix {
        let rows = self.sizes[1];
        BitMatrix::from_row_words(self.sizes[2], &self.gamma[r * rows..(r + 1) * rows])
    }

    pub(crate) fn gamma0_words(&self) -> &[u64] {
        &self.gamma0
    }

    pub(crate) fn gamma_words(&self, r: usize) -> &[u64] {
        let rows = self.sizes[1];
        &self.gamma[r * rows..(r + 1) * rows]
    }

    pub(crate) fn delta_g_word(&self, r: usize) -> u64 {
        self.delta_g[r]
    }

    pub(crate) fn delta_b_word(&self, r: usize) -> u64 {
        self.delta_b[r]
    }

    /// Γ(xR) recomputed from scratch.
    pub fn gamma_at(&self, xr: &BitVector) -> BitMatrix {
        let mut words = self.gamma0.clone();
        for r in xr.ones() {
            for (w, s) in words.iter_mut().zip(self.gamma_words(r)) {
                *w ^= s;
            }
        }
        BitMatrix::from_row_words(self.sizes[2], &words)
    }

    /// `(δG(xR), δB(xR))`.
    pub fn deltas_at(&self, xr: &BitVector) -> (BitVector, BitVector) {
        let dg = xr.ones().fold(0, |a, r| a ^ self.delta_g[r]);
        let db = xr.ones().fold(0, |a, r| a ^ self.delta_b[r]);
        (
            BitVector::from_word(self.sizes[1], dg),
            BitVector::from_word(self.sizes[2], db),
        )
    }

    /// Value of the polynomial at an assignment given in role order.
    pub fn eval_roles(&self, xr: &BitVector, xg: &BitVector, xb: &BitVector) -> bool {
        let gamma = self.gamma_at(xr);
        let (dg, db) = self.deltas_at(xr);
        let quad = xg.ones().fold(0u64, |a, i| a ^ gamma.row_word(i)) & xb.word();
        (quad.count_ones() & 1 == 1) ^ dg.dot(xg) ^ db.dot(xb)
    }

    /// Reorder register bits given in the original colors into role order.
    pub fn to_roles(&self, x: &RegisterBits) -> [BitVector; 3] {
        self.roles.map(|c| *x.get(c))
    }

    /// Square, index-aligned registers: the only shape the parity
    /// quick-check is defined for.
    pub fn is_square(&self) -> bool {
        self.sizes[0] == self.sizes[1] && self.sizes[1] == self.sizes[2]
    }

    /// Sampled check that `Γ(xR)` is symmetric with `xR` in its kernel, at
    /// `xR = 0`, all-ones and `samples` random patterns.
    pub fn validate_symmetry(&self, samples: usize, seed: u64) -> bool {
        if !self.is_square() {
            return false;
        }
        let m = self.sizes[0];
        let mut rng = SplitMix64::new(seed);
        let mut patterns = vec![0, low_mask(m)];
        patterns.extend((0..samples).map(|_| rng.next_u64() & low_mask(m)));
        patterns.into_iter().all(|x| {
            let xr = BitVector::from_word(m, x);
            let gamma = self.gamma_at(&xr);
            gamma.is_symmetric() && gamma.mul_vec(&xr).map(|v| v.is_zero()).unwrap_or(false)
        })
    }

    /// Exact form of the same property for every `xR`: expanding
    /// `Γ(x)·x = 0` as a polynomial identity gives `Γ0[i][b] = Γ_b[i][b]`
    /// and `Γ_r[i][b] = Γ_b[i][r]`; symmetry for all `x` needs Γ0 and every
    /// Γ_r symmetric. Cached after the first call.
    pub fn symmetry_holds_exactly(&self) -> bool {
        *self.symmetric.get_or_init(|| self.check_symmetry_exactly())
    }

    fn check_symmetry_exactly(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let m = self.sizes[0];
        let g0 = self.gamma0();
        if !g0.is_symmetric() {
            return false;
        }
        let slices: Vec<BitMatrix> = (0..m).map(|r| self.gamma_slice(r)).collect();
        if !slices.iter().all(BitMatrix::is_symmetric) {
            return false;
        }
        for i in 0..m {
            for b in 0..m {
                if g0.get(i, b) != slices[b].get(i, b) {
                    return false;
                }
                for r in 0..m {
                    if slices[r].get(i, b) != slices[b].get(i, r) {
                        return false;
                    }
                }
            }
        }
        true
    }
}
