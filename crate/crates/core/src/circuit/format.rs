//! JSON circuit documents.
//!
//! ```json
//! {"k": 1, "n": 6, "stages": [
//!   {"type": "diag", "gates": [{"kind": "ccz", "block": 0, "wires": [0, 1, 2]}]},
//!   {"type": "cnot", "dimension": 0, "orientation": [0]},
//!   {"type": "diag", "gates": []}
//! ]}
//! ```
//!
//! A gate may instead name global qubits (`{"kind": "cz", "qubits": [0, 4]}`);
//! this form exists so malformed, block-spanning gates can be written down
//! and rejected by validation. Block-local gates are always written in the
//! `block`/`wires` form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Circuit, CnotLayer, DiagonalGate, GateKind, Stage, Violation};

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid circuit: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    k: u32,
    n: usize,
    stages: Vec<StageDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum StageDoc {
    Diag {
        gates: Vec<GateDoc>,
    },
    Cnot {
        dimension: usize,
        orientation: Vec<u8>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDoc {
    kind: KindDoc,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    block: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    wires: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    qubits: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Z,
    Cz,
    Ccz,
}

impl From<GateKind> for KindDoc {
    fn from(k: GateKind) -> Self {
        match k {
            GateKind::Z => KindDoc::Z,
            GateKind::Cz => KindDoc::Cz,
            GateKind::Ccz => KindDoc::Ccz,
        }
    }
}

impl From<KindDoc> for GateKind {
    fn from(k: KindDoc) -> Self {
        match k {
            KindDoc::Z => GateKind::Z,
            KindDoc::Cz => GateKind::Cz,
            KindDoc::Ccz => GateKind::Ccz,
        }
    }
}

fn syntax_error(line: usize, column: usize, message: impl Into<String>) -> CircuitError {
    CircuitError::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl Circuit {
    /// Serialize to the JSON document format (compact, one line).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("circuit documents always serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("circuit documents always serialize")
    }

    fn to_doc(&self) -> CircuitDoc {
        let stages = self
            .stages
            .iter()
            .map(|s| match s {
                Stage::Diagonal(gates) => StageDoc::Diag {
                    gates: gates
                        .iter()
                        .map(|g| {
                            if g.is_block_local() && !g.qubits.is_empty() {
                                GateDoc {
                                    kind: g.kind.into(),
                                    block: Some(g.block()),
                                    wires: Some(g.qubits.iter().map(|q| q % 3).collect()),
                                    qubits: None,
                                }
                            } else {
                                GateDoc {
                                    kind: g.kind.into(),
                                    block: None,
                                    wires: None,
                                    qubits: Some(g.qubits.clone()),
                                }
                            }
                        })
                        .collect(),
                },
                Stage::Cnot(layer) => StageDoc::Cnot {
                    dimension: layer.dimension,
                    orientation: layer.orientation.iter().map(|&b| u8::from(b)).collect(),
                },
            })
            .collect();
        CircuitDoc {
            k: self.k,
            n: self.n(),
            stages,
        }
    }

    /// Parse and validate a JSON circuit document.
    pub fn from_json(text: &str) -> Result<Circuit, CircuitError> {
        let doc: CircuitDoc = serde_json::from_str(text)
            .map_err(|e| syntax_error(e.line(), e.column(), e.to_string()))?;
        let mut stages = Vec::with_capacity(doc.stages.len());
        for (i, s) in doc.stages.into_iter().enumerate() {
            stages.push(match s {
                StageDoc::Diag { gates } => {
                    let mut out = Vec::with_capacity(gates.len());
                    for g in gates {
                        let kind = GateKind::from(g.kind);
                        let qubits = match (g.block, g.wires, g.qubits) {
                            (Some(block), Some(wires), None) => {
                                if let Some(w) = wires.iter().find(|&&w| w > 2) {
                                    return Err(syntax_error(
                                        0,
                                        0,
                                        format!("stage {i}: wire {w} outside 0..3"),
                                    ));
                                }
                                wires.iter().map(|w| 3 * block + w).collect()
                            }
                            (None, None, Some(q)) => q,
                            _ => {
                                return Err(syntax_error(
                                    0,
                                    0,
                                    format!("stage {i}: a gate needs either block+wires or qubits"),
                                ))
                            }
                        };
                        out.push(DiagonalGate { kind, qubits });
                    }
                    Stage::Diagonal(out)
                }
                StageDoc::Cnot {
                    dimension,
                    orientation,
                } => {
                    if let Some(b) = orientation.iter().find(|&&b| b > 1) {
                        return Err(syntax_error(
                            0,
                            0,
                            format!("stage {i}: orientation entry {b} is not a bit"),
                        ));
                    }
                    Stage::Cnot(CnotLayer {
                        dimension,
                        orientation: orientation.into_iter().map(|b| b == 1).collect(),
                    })
                }
            });
        }
        let circuit = Circuit { k: doc.k, stages };
        let mut violations = circuit.validate();
        if violations.is_empty() && doc.n != circuit.n() {
            violations.push(Violation {
                stage: None,
                rule: super::Rule::QubitCount,
                message: format!("n = {} but 3·2^k = {}", doc.n, circuit.n()),
            });
        }
        if violations.is_empty() {
            Ok(circuit)
        } else {
            Err(CircuitError::Invalid(violations))
        }
    }
}
