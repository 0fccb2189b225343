//! Exact `Σ_x (−1)^{Q(x) + l·x + c}` for a quadratic form over GF(2), by
//! eliminating variables in pairs. Used when the polynomial has no cubic
//! terms, where looping over slice patterns would be wasted work.

const WORDS: usize = 4;
pub(crate) const MAX_VARS: usize = WORDS * 64;

type Row = [u64; WORDS];

fn bit(r: &Row, i: usize) -> bool {
    r[i / 64] >> (i % 64) & 1 == 1
}

fn toggle(r: &mut Row, i: usize) {
    r[i / 64] ^= 1 << (i % 64);
}

fn clear(r: &mut Row, i: usize) {
    r[i / 64] &= !(1 << (i % 64));
}

fn xor(a: &mut Row, b: &Row) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

fn and(a: &Row, b: &Row) -> Row {
    let mut out = *a;
    for (x, y) in out.iter_mut().zip(b) {
        *x &= y;
    }
    out
}

fn first(r: &Row) -> Option<usize> {
    r.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| 64 * i + w.trailing_zeros() as usize)
}

fn ones(r: &Row) -> impl Iterator<Item = usize> + '_ {
    r.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            (w != 0).then(|| {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                64 * i + b
            })
        })
    })
}

/// Symmetric adjacency with zero diagonal, linear part and constant.
#[derive(Debug, Clone)]
pub(crate) struct QuadraticForm {
    n: usize,
    adj: Vec<Row>,
    linear: Row,
    constant: bool,
}

impl QuadraticForm {
    pub(crate) fn new(n: usize) -> Self {
        assert!(n <= MAX_VARS);
        Self {
            n,
            adj: vec![[0; WORDS]; n],
            linear: [0; WORDS],
            constant: false,
        }
    }

    /// Toggle the monomial `x_i x_j` (`i ≠ j`).
    pub(crate) fn toggle_pair(&mut self, i: usize, j: usize) {
        assert_ne!(i, j);
        toggle(&mut self.adj[i], j);
        toggle(&mut self.adj[j], i);
    }

    pub(crate) fn toggle_linear(&mut self, i: usize) {
        toggle(&mut self.linear, i);
    }

    /// `None` when the sum vanishes, otherwise `(negative, log2 |sum|)`.
    pub(crate) fn phase_sum(mut self) -> Option<(bool, u32)> {
        let mut alive: Row = [0; WORDS];
        for i in 0..self.n {
            toggle(&mut alive, i);
        }
        let mut twos = 0u32;
        while let Some(i) = first(&alive) {
            let row = self.adj[i];
            let Some(j) = first(&row) else {
                if bit(&self.linear, i) {
                    return None;
                }
                twos += 1;
                clear(&mut alive, i);
                continue;
            };
            // Σ_{x_i} (−1)^{x_i (x_j + a)} = 2·[x_j = a], a = Σ_{t∈S} x_t + c
            let mut s = row;
            clear(&mut s, j);
            let c = bit(&self.linear, i);
            let mut nbr = self.adj[j];
            clear(&mut nbr, i);
            let lj = bit(&self.linear, j);
            for v in [i, j] {
                clear(&mut alive, v);
                clear(&mut self.linear, v);
                self.adj[v] = [0; WORDS];
            }
            for t in ones(&s).chain(ones(&nbr)).collect::<Vec<_>>() {
                clear(&mut self.adj[t], i);
                clear(&mut self.adj[t], j);
            }
            // x_j (Σ_{u∈N} x_u + l_j) with x_j replaced by a
            for t in ones(&s).collect::<Vec<_>>() {
                xor(&mut self.adj[t], &nbr);
            }
            for u in ones(&nbr).collect::<Vec<_>>() {
                xor(&mut self.adj[u], &s);
            }
            xor(&mut self.linear, &and(&s, &nbr));
            if lj {
                xor(&mut self.linear, &s);
            }
            if c {
                xor(&mut self.linear, &nbr);
            }
            self.constant ^= c & lj;
            twos += 1;
        }
        Some((self.constant, twos))
    }
}
