use super::{Color, Coloring, PhasePolyError, TriColorPolynomial};
use crate::bits::BitString;
use crate::circuit::{Circuit, GateKind, Stage};
use crate::gf2kernel::{BitIter, BitMatrix};

/// All CNOTs of a circuit, in application order, as one reversible map
/// `x ↦ L·x` on basis states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearStage {
    n: usize,
    gates: Vec<(usize, usize)>,
}

impl LinearStage {
    pub fn new(n: usize, gates: Vec<(usize, usize)>) -> Self {
        for &(c, t) in &gates {
            assert!(
                c < n && t < n && c != t,
                "bad CNOT ({c}, {t}) on {n} qubits"
            );
        }
        Self { n, gates }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[(usize, usize)] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `L·x`.
    pub fn apply(&self, x: &BitString) -> BitString {
        let mut x = x.clone();
        for &(c, t) in &self.gates {
            if x.get(c) {
                x.flip(t);
            }
        }
        x
    }

    /// `L⁻¹·x`.
    pub fn apply_inverse(&self, x: &BitString) -> BitString {
        let mut x = x.clone();
        for &(c, t) in self.gates.iter().rev() {
            if x.get(c) {
                x.flip(t);
            }
        }
        x
    }

    /// `L⁻ᵀ·x`, the inverse of [`Self::pull_back_outcome`].
    pub fn transpose_inverse(&self, x: &BitString) -> BitString {
        let mut x = x.clone();
        for &(c, t) in &self.gates {
            if x.get(t) {
                x.flip(c);
            }
        }
        x
    }

    /// `Lᵀ·y`: the outcome to query on the diagonal part alone when the
    /// CNOTs are pushed through the final Hadamard layer (where they turn
    /// around, target becoming control).
    pub fn pull_back_outcome(&self, y: &BitString) -> BitString {
        let mut y = y.clone();
        for &(c, t) in self.gates.iter().rev() {
            if y.get(t) {
                y.flip(c);
            }
        }
        y
    }
}

/// Phase polynomial of the diagonal content in the input variables, plus
/// the CNOT stage commuted to the end.
///
/// Panics if the circuit is invalid; callers validate first.
pub fn extract(c: &Circuit) -> (TriColorPolynomial, LinearStage) {
    let violations = c.validate();
    assert!(
        violations.is_empty(),
        "extract needs a valid circuit: {}",
        violations
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    );
    let coloring = Coloring::hypercube(c.k);
    let n = c.n();
    // expr[q]: current value of wire q as a combination of its own color's
    // input variables (CNOTs are transversal so colors never mix).
    let mut expr: Vec<u64> = (0..n).map(|q| 1u64 << (q / 3)).collect();
    let color = |q: usize| Color::ALL[q % 3];
    let mut f = TriColorPolynomial::zero(coloring);
    let mut gates = Vec::new();

    for stage in &c.stages {
        match stage {
            Stage::Cnot(layer) => {
                for (ctl, tgt) in layer.cnots(c.k) {
                    expr[tgt] ^= expr[ctl];
                    gates.push((ctl, tgt));
                }
            }
            Stage::Diagonal(diag) => {
                for g in diag {
                    let mut by_color = [0u64; 3];
                    for &q in &g.qubits {
                        by_color[color(q).idx()] = expr[q];
                    }
                    match g.kind {
                        GateKind::Z => {
                            let q = g.qubits[0];
                            let lin = &mut f.parts_mut().3[color(q).idx()];
                            for i in BitIter(expr[q]) {
                                lin.flip(i);
                            }
                        }
                        GateKind::Cz => {
                            let (mut a, mut b) = (color(g.qubits[0]), color(g.qubits[1]));
                            if a > b {
                                std::mem::swap(&mut a, &mut b);
                            }
                            let (rg, rb, gb, _) = f.parts_mut();
                            let m = match (a, b) {
                                (Color::Red, Color::Green) => rg,
                                (Color::Red, Color::Blue) => rb,
                                _ => gb,
                            };
                            add_outer(m, by_color[a.idx()], by_color[b.idx()]);
                        }
                        GateKind::Ccz => {
                            let [er, eg, eb] = by_color;
                            for r in BitIter(er) {
                                add_outer(&mut f.cubic_mut()[r], eg, eb);
                            }
                        }
                    }
                }
            }
        }
    }
    (f, LinearStage::new(n, gates))
}

/// `m ^= u·vᵀ` for row-index set `u` and column word `v`.
fn add_outer(m: &mut BitMatrix, u: u64, v: u64) {
    let rows = m.row_words_mut();
    for i in BitIter(u) {
        rows[i] ^= v;
    }
}

/// Substitute `x = L⁻¹ z`, giving `g` with `g(L·x) = f(x)`.
pub fn absorb_linear_stage(
    f: &TriColorPolynomial,
    l: &LinearStage,
) -> Result<TriColorPolynomial, PhasePolyError> {
    let coloring = f.coloring();
    let mut subst: [BitMatrix; 3] = f.sizes().map(BitMatrix::identity);
    let mut located = Vec::with_capacity(l.gates.len());
    for &(c, t) in &l.gates {
        let (vc, vt) = (coloring.locate(c), coloring.locate(t));
        match (vc, vt) {
            (Some(a), Some(b)) if a.color == b.color => located.push((a, b)),
            _ => {
                return Err(PhasePolyError::NotColorPreserving {
                    control: c,
                    target: t,
                    control_color: vc.map(|v| v.color),
                    target_color: vt.map(|v| v.color),
                })
            }
        }
    }
    // M = E_1·E_2·…·E_N built by left-multiplying in reverse gate order.
    for &(vc, vt) in located.iter().rev() {
        let m = &mut subst[vc.color.idx()];
        let src = m.row_word(vc.index);
        m.row_words_mut()[vt.index] ^= src;
    }
    let [mr, mg, mb] = &subst;
    let (mrt, mgt) = (mr.transpose(), mg.transpose());
    let prod = |a: &BitMatrix, b: &BitMatrix| a.mul(b).expect("register shapes agree");

    let mut g = TriColorPolynomial::zero(coloring.clone());
    // T'_{r'} = Σ_{r : M_R[r][r'] = 1} M_Gᵀ T_r M_B
    for r in 0..f.size(Color::Red) {
        let t = f.cubic_slice(r);
        if t.is_zero() {
            continue;
        }
        let conj = prod(&prod(&mgt, t), mb);
        for r2 in BitIter(mr.row_word(r)) {
            g.cubic_mut()[r2].xor_assign(&conj);
        }
    }
    let (rg, rb, gb, lin) = g.parts_mut();
    *rg = prod(&prod(&mrt, f.a_rg()), mg);
    *rb = prod(&prod(&mrt, f.a_rb()), mb);
    *gb = prod(&prod(&mgt, f.a_gb()), mb);
    for (c, m) in subst.iter().enumerate() {
        lin[c] = m
            .vec_mul(f.linear(Color::ALL[c]))
            .expect("register shapes agree");
    }
    if f.constant() {
        g.toggle(&[]);
    }
    Ok(g)
}
