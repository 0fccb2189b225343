//! Hypercube IQP circuits.
//!
//! A circuit over `k` dimensions acts on `n = 3·2^k` qubits grouped into
//! `2^k` blocks of three; qubit `q = 3·block + wire`. Blocks sit on the
//! vertices of a `k`-cube. Between two implicit full Hadamard layers the
//! circuit alternates diagonal stages (Z, CZ and CCZ confined to one block)
//! with transversal CNOT layers along one cube dimension: every edge along
//! the dimension carries three CNOTs, wire `i` of the control block onto
//! wire `i` of the target block.

mod format;
mod generate;

pub use format::CircuitError;
pub use generate::{GateDensity, GeneratorSpec};

use std::fmt;

/// Largest supported cube dimension; one color register must fit a word.
pub const MAX_K: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Z,
    Cz,
    Ccz,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Z => 1,
            GateKind::Cz => 2,
            GateKind::Ccz => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Z => "z",
            GateKind::Cz => "cz",
            GateKind::Ccz => "ccz",
        }
    }
}

/// A Z, CZ or CCZ gate on global qubit indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiagonalGate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl DiagonalGate {
    /// Gate on the given wires of one block.
    pub fn in_block(kind: GateKind, block: usize, wires: &[usize]) -> Self {
        Self {
            kind,
            qubits: wires.iter().map(|w| 3 * block + w).collect(),
        }
    }

    pub fn z(block: usize, wire: usize) -> Self {
        Self::in_block(GateKind::Z, block, &[wire])
    }

    pub fn cz(block: usize, a: usize, b: usize) -> Self {
        Self::in_block(GateKind::Cz, block, &[a, b])
    }

    pub fn ccz(block: usize) -> Self {
        Self::in_block(GateKind::Ccz, block, &[0, 1, 2])
    }

    /// Block of the first qubit.
    pub fn block(&self) -> usize {
        self.qubits.first().map_or(0, |q| q / 3)
    }

    /// Whether every qubit lies in one block.
    pub fn is_block_local(&self) -> bool {
        let b = self.block();
        self.qubits.iter().all(|q| q / 3 == b)
    }
}

/// Transversal CNOTs along one cube dimension.
///
/// Edges along `dimension` are listed by ascending index of the endpoint
/// whose bit `dimension` is clear. Orientation bit `false` makes that lower
/// endpoint the control; `true` makes the upper endpoint the control.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnotLayer {
    pub dimension: usize,
    pub orientation: Vec<bool>,
}

impl CnotLayer {
    /// Default orientation: even-popcount blocks control, odd-popcount
    /// blocks are targets.
    pub fn parity_oriented(k: u32, dimension: usize) -> Self {
        let orientation = lower_endpoints(k, dimension)
            .map(|b| b.count_ones() % 2 == 1)
            .collect();
        Self {
            dimension,
            orientation,
        }
    }

    /// Every edge has its lower endpoint (bit `dimension` clear) as control.
    pub fn lower_to_upper(k: u32, dimension: usize) -> Self {
        Self {
            dimension,
            orientation: vec![false; 1 << (k - 1)],
        }
    }

    /// `(control_block, target_block)` for every edge, in edge order.
    pub fn block_pairs(&self, k: u32) -> Vec<(usize, usize)> {
        lower_endpoints(k, self.dimension)
            .zip(&self.orientation)
            .map(|(lo, &flip)| {
                let hi = lo | (1 << self.dimension);
                if flip {
                    (hi, lo)
                } else {
                    (lo, hi)
                }
            })
            .collect()
    }

    /// `(control_qubit, target_qubit)` for all `3·2^{k-1}` CNOTs.
    pub fn cnots(&self, k: u32) -> Vec<(usize, usize)> {
        self.block_pairs(k)
            .into_iter()
            .flat_map(|(c, t)| (0..3).map(move |w| (3 * c + w, 3 * t + w)))
            .collect()
    }
}

/// Blocks with bit `dimension` clear, ascending.
pub fn lower_endpoints(k: u32, dimension: usize) -> impl Iterator<Item = usize> {
    (0..1usize << k).filter(move |b| (b >> dimension) & 1 == 0)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stage {
    Diagonal(Vec<DiagonalGate>),
    Cnot(CnotLayer),
}

/// An HQ circuit: stages alternate diagonal / CNOT, beginning and ending
/// with a diagonal stage. The enclosing Hadamard layers are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    pub k: u32,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    DimensionRange,
    QubitCount,
    StageOrder,
    MissingBaseLayers,
    CnotDimensionRange,
    DimensionReuse,
    OrientationLength,
    GateArity,
    QubitRange,
    DuplicateQubit,
    Transversality,
}

/// One broken structural rule. `stage` is `None` for circuit-level rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub stage: Option<usize>,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stage {
            Some(s) => write!(f, "stage {s}: {:?}: {}", self.rule, self.message),
            None => write!(f, "{:?}: {}", self.rule, self.message),
        }
    }
}

impl Circuit {
    pub fn n(&self) -> usize {
        3 << self.k
    }

    pub fn blocks(&self) -> usize {
        1 << self.k
    }

    pub fn cnot_layers(&self) -> impl Iterator<Item = &CnotLayer> {
        self.stages.iter().filter_map(|s| match s {
            Stage::Cnot(c) => Some(c),
            Stage::Diagonal(_) => None,
        })
    }

    pub fn diagonal_stages(&self) -> impl Iterator<Item = &[DiagonalGate]> {
        self.stages.iter().filter_map(|s| match s {
            Stage::Diagonal(g) => Some(g.as_slice()),
            Stage::Cnot(_) => None,
        })
    }

    pub fn gate_counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for stage in &self.stages {
            match stage {
                Stage::Diagonal(gates) => {
                    for g in gates {
                        match g.kind {
                            GateKind::Z => c.z += 1,
                            GateKind::Cz => c.cz += 1,
                            GateKind::Ccz => c.ccz += 1,
                        }
                    }
                }
                Stage::Cnot(_) => {
                    c.cnot_layers += 1;
                    c.cnot += 3 << (self.k - 1);
                }
            }
        }
        c
    }

    /// Structural check; an empty list means the circuit is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |stage: Option<usize>, rule: Rule, message: String| {
            out.push(Violation {
                stage,
                rule,
                message,
            })
        };
        if self.k == 0 || self.k > MAX_K {
            push(
                None,
                Rule::DimensionRange,
                format!("k = {} outside 1..={MAX_K}", self.k),
            );
            return out;
        }
        let n = self.n();
        let k = self.k as usize;

        if self.stages.len().is_multiple_of(2) {
            push(
                None,
                Rule::StageOrder,
                format!("{} stages; expected an odd count", self.stages.len()),
            );
        }
        let mut seen_dims = vec![false; k];
        let mut cnot_index = 0;
        for (i, stage) in self.stages.iter().enumerate() {
            let want_diag = i % 2 == 0;
            match stage {
                Stage::Diagonal(gates) => {
                    if !want_diag {
                        push(Some(i), Rule::StageOrder, "expected a CNOT layer".into());
                    }
                    for g in gates {
                        if g.qubits.len() != g.kind.arity() {
                            push(
                                Some(i),
                                Rule::GateArity,
                                format!("{} on {} qubits", g.kind.name(), g.qubits.len()),
                            );
                        }
                        if let Some(&q) = g.qubits.iter().find(|&&q| q >= n) {
                            push(
                                Some(i),
                                Rule::QubitRange,
                                format!("qubit {q} outside 0..{n}"),
                            );
                            continue;
                        }
                        let mut qs = g.qubits.clone();
                        qs.sort_unstable();
                        qs.dedup();
                        if qs.len() != g.qubits.len() {
                            push(
                                Some(i),
                                Rule::DuplicateQubit,
                                format!("{} repeats a qubit: {:?}", g.kind.name(), g.qubits),
                            );
                        }
                        if !g.is_block_local() {
                            push(
                                Some(i),
                                Rule::Transversality,
                                format!("{} spans blocks: qubits {:?}", g.kind.name(), g.qubits),
                            );
                        }
                    }
                }
                Stage::Cnot(layer) => {
                    if want_diag {
                        push(
                            Some(i),
                            Rule::StageOrder,
                            "expected a diagonal stage".into(),
                        );
                    }
                    if layer.dimension >= k {
                        push(
                            Some(i),
                            Rule::CnotDimensionRange,
                            format!("dimension {} outside 0..{k}", layer.dimension),
                        );
                    } else if cnot_index < k {
                        if seen_dims[layer.dimension] {
                            push(
                                Some(i),
                                Rule::DimensionReuse,
                                format!("dimension {} repeated in base layers", layer.dimension),
                            );
                        }
                        seen_dims[layer.dimension] = true;
                    }
                    let edges = 1usize << (k - 1);
                    if layer.orientation.len() != edges {
                        push(
                            Some(i),
                            Rule::OrientationLength,
                            format!(
                                "{} orientation bits for {edges} edges",
                                layer.orientation.len()
                            ),
                        );
                    }
                    cnot_index += 1;
                }
            }
        }
        if matches!(self.stages.last(), Some(Stage::Cnot(_))) || self.stages.is_empty() {
            push(
                None,
                Rule::StageOrder,
                "circuit must begin and end with a diagonal stage".into(),
            );
        }
        if cnot_index < k {
            push(
                None,
                Rule::MissingBaseLayers,
                format!("{cnot_index} CNOT layers; at least k = {k} required"),
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub z: usize,
    pub cz: usize,
    pub ccz: usize,
    pub cnot: usize,
    pub cnot_layers: usize,
}
