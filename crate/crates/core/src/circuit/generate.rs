use serde::{Deserialize, Serialize};

use super::{Circuit, CircuitError, CnotLayer, DiagonalGate, GateKind, Stage, MAX_K};
use crate::rng::SplitMix64;

/// Per-block, per-stage inclusion probabilities for the diagonal content.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDensity {
    pub ccz: f64,
    pub cz: f64,
    pub z: f64,
    /// When set, a block carries `CZ(wire 1, wire 2)` exactly when it carries
    /// a CCZ. Under this pairing the sliced coupling matrix is symmetric and
    /// annihilates the red pattern, which is what licenses the parity
    /// quick-check. When clear, that CZ is drawn independently like the
    /// other two.
    pub pair_gb_cz_with_ccz: bool,
}

impl Default for GateDensity {
    fn default() -> Self {
        Self {
            ccz: 0.5,
            cz: 0.5,
            z: 0.5,
            pair_gb_cz_with_ccz: true,
        }
    }
}

impl GateDensity {
    pub fn empty() -> Self {
        Self {
            ccz: 0.0,
            cz: 0.0,
            z: 0.0,
            pair_gb_cz_with_ccz: false,
        }
    }

    pub fn independent() -> Self {
        Self {
            pair_gb_cz_with_ccz: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub k: u32,
    pub seed: u64,
    pub extra_layers: usize,
    pub density: GateDensity,
}

impl GeneratorSpec {
    pub fn new(k: u32, seed: u64) -> Self {
        Self {
            k,
            seed,
            extra_layers: 0,
            density: GateDensity::default(),
        }
    }

    pub fn with_extra_layers(mut self, extra: usize) -> Self {
        self.extra_layers = extra;
        self
    }

    pub fn with_density(mut self, density: GateDensity) -> Self {
        self.density = density;
        self
    }

    /// Build the circuit.
    ///
    /// Layout: diagonal stage, then CNOT layers along dimensions `0..k` in
    /// order (parity orientation) each followed by a diagonal stage, then
    /// `extra_layers` (CNOT, diagonal) pairs with random dimension and
    /// per-edge orientation.
    ///
    /// Draw sequence from `SplitMix64(seed)`, stage by stage:
    /// * diagonal stage: for each block in ascending order, Bernoulli draws
    ///   for CCZ, CZ(0,1), CZ(0,2), CZ(1,2), Z(0), Z(1), Z(2) — seven draws,
    ///   the CZ(1,2) draw is consumed and discarded when it is paired with
    ///   the CCZ;
    /// * extra CNOT layer: `below(k)` for the dimension, then `bit()` per
    ///   edge in edge order.
    pub fn build(&self) -> Result<Circuit, CircuitError> {
        let k = self.k;
        if k == 0 || k > MAX_K {
            return Err(CircuitError::InvalidSpec(format!(
                "k = {k} outside 1..={MAX_K}"
            )));
        }
        let d = &self.density;
        for (name, p) in [("ccz", d.ccz), ("cz", d.cz), ("z", d.z)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(CircuitError::InvalidSpec(format!(
                    "{name} density {p} outside [0, 1]"
                )));
            }
        }
        let mut rng = SplitMix64::new(self.seed);
        let mut stages = Vec::with_capacity(2 * (k as usize + self.extra_layers) + 1);
        stages.push(Stage::Diagonal(self.diagonal_stage(&mut rng)));
        for dim in 0..k as usize {
            stages.push(Stage::Cnot(CnotLayer::parity_oriented(k, dim)));
            stages.push(Stage::Diagonal(self.diagonal_stage(&mut rng)));
        }
        for _ in 0..self.extra_layers {
            let dimension = rng.below(u64::from(k)) as usize;
            let orientation = (0..1usize << (k - 1)).map(|_| rng.bit()).collect();
            stages.push(Stage::Cnot(CnotLayer {
                dimension,
                orientation,
            }));
            stages.push(Stage::Diagonal(self.diagonal_stage(&mut rng)));
        }
        Ok(Circuit { k, stages })
    }

    fn diagonal_stage(&self, rng: &mut SplitMix64) -> Vec<DiagonalGate> {
        let d = &self.density;
        let mut gates = Vec::new();
        for block in 0..1usize << self.k {
            let ccz = rng.bernoulli(d.ccz);
            let cz01 = rng.bernoulli(d.cz);
            let cz02 = rng.bernoulli(d.cz);
            let cz12_draw = rng.bernoulli(d.cz);
            let cz12 = if d.pair_gb_cz_with_ccz {
                ccz
            } else {
                cz12_draw
            };
            let zs = [rng.bernoulli(d.z), rng.bernoulli(d.z), rng.bernoulli(d.z)];
            if ccz {
                gates.push(DiagonalGate::ccz(block));
            }
            for (on, a, b) in [(cz01, 0, 1), (cz02, 0, 2), (cz12, 1, 2)] {
                if on {
                    gates.push(DiagonalGate::in_block(GateKind::Cz, block, &[a, b]));
                }
            }
            for (wire, on) in zs.into_iter().enumerate() {
                if on {
                    gates.push(DiagonalGate::z(block, wire));
                }
            }
        }
        gates
    }
}
