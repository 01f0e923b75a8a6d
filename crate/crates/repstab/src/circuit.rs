//! Layered Clifford-circuit IR.
//!
//! A [`Circuit`] is an ordered list of [`Moment`]s, each holding a set of
//! disjoint operations. Operations carry the noise-class information the
//! sampler needs: every op kind maps to one of the six error-rate components,
//! with idles split into gate-idle (`I`) and measure/reset-idle (`DD`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which error-rate parameter applies to an idling qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdleClass {
    /// Idle while other qubits run single- or two-qubit gates.
    Gate,
    /// Idle during the measurement-and-reset window (dynamically decoupled
    /// for the phase flip code; plain idle otherwise).
    MeasureReset,
}

/// A single operation inside a moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    H(usize),
    X(usize),
    Cz(usize, usize),
    M(usize),
    R(usize),
    Idle(usize, IdleClass),
}

impl Op {
    /// Qubits touched by this op (second entry unused for 1q ops).
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Op::H(q) | Op::X(q) | Op::M(q) | Op::R(q) | Op::Idle(q, _) => (q, None),
            Op::Cz(a, b) => (a, Some(b)),
        }
    }

    fn min_qubit(&self) -> usize {
        let (a, b) = self.qubits();
        b.map_or(a, |b| a.min(b))
    }
}

/// One layer of simultaneous operations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Moment {
    ops: Vec<Op>,
}

impl Moment {
    /// Build a moment; ops are kept in a canonical order (ascending lowest
    /// qubit) so traversal order is deterministic.
    pub fn new(mut ops: Vec<Op>) -> Self {
        ops.sort_by_key(|op| op.min_qubit());
        Moment { ops }
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }
}

/// What a measurement outcome means in the shot record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureRole {
    /// Stabilizer readout of measure qubit `s` (its index along the code).
    Stabilizer { s: usize },
    /// Final readout of data qubit `d`.
    FinalData { d: usize },
}

/// Schedule entry tying an `M` op to its place in the shot record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSlot {
    pub qubit: usize,
    /// Stabilizer round index, or the last round for final-data readouts.
    pub round: usize,
    pub role: MeasureRole,
}

/// Shot-record dimensions, shared by the archive format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordDims {
    pub n_measure: usize,
    pub n_rounds: usize,
    pub n_data: usize,
}

impl RecordDims {
    pub fn stabilizer_bits(&self) -> usize {
        self.n_measure * self.n_rounds
    }
}

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("moment {moment}: qubit {qubit} appears more than once")]
    DuplicateQubit { moment: usize, qubit: usize },
    #[error("moment {moment}: qubit {qubit} out of range (qubit_count {qubit_count})")]
    QubitOutOfRange {
        moment: usize,
        qubit: usize,
        qubit_count: usize,
    },
    #[error("moment {moment}: CZ with identical operands {qubit}")]
    CzSameQubit { moment: usize, qubit: usize },
    #[error("moment {moment}: qubit {qubit} used after measurement without reset")]
    MeasuredWithoutReset { moment: usize, qubit: usize },
    #[error("measurement schedule mismatch at entry {index}: expected qubit {expected}, schedule has {found}")]
    ScheduleMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("measurement schedule has {schedule} entries but circuit has {circuit} M ops")]
    ScheduleLength { schedule: usize, circuit: usize },
    #[error("invalid code spec: {0}")]
    InvalidSpec(String),
}

/// A layered Clifford circuit with its measurement schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Circuit {
    pub qubit_count: usize,
    pub moments: Vec<Moment>,
    pub schedule: Vec<MeasureSlot>,
    pub dims: RecordDims,
}

impl Circuit {
    /// Validate structural invariants. Builders call this once; foreign
    /// circuits (e.g. deserialized) should be validated before use.
    pub fn validate(&self) -> Result<(), CircuitError> {
        // Tracks qubits that were measured and not yet reset.
        let mut pending_reset = vec![false; self.qubit_count];
        let mut seen = vec![usize::MAX; self.qubit_count];
        let mut m_ops = 0usize;

        for (mi, moment) in self.moments.iter().enumerate() {
            for op in moment.ops() {
                if let Op::Cz(x, y) = *op {
                    if x == y {
                        return Err(CircuitError::CzSameQubit { moment: mi, qubit: x });
                    }
                }
                let (a, b) = op.qubits();
                for q in std::iter::once(a).chain(b) {
                    if q >= self.qubit_count {
                        return Err(CircuitError::QubitOutOfRange {
                            moment: mi,
                            qubit: q,
                            qubit_count: self.qubit_count,
                        });
                    }
                    if seen[q] == mi {
                        return Err(CircuitError::DuplicateQubit { moment: mi, qubit: q });
                    }
                    seen[q] = mi;
                    if pending_reset[q] && !matches!(op, Op::R(_)) {
                        return Err(CircuitError::MeasuredWithoutReset { moment: mi, qubit: q });
                    }
                }
                match *op {
                    Op::M(q) => {
                        pending_reset[q] = true;
                        let slot = self.schedule.get(m_ops).ok_or(CircuitError::ScheduleLength {
                            schedule: self.schedule.len(),
                            circuit: self.count_m_ops(),
                        })?;
                        if slot.qubit != q {
                            return Err(CircuitError::ScheduleMismatch {
                                index: m_ops,
                                expected: q,
                                found: slot.qubit,
                            });
                        }
                        m_ops += 1;
                    }
                    Op::R(q) => pending_reset[q] = false,
                    _ => {}
                }
            }
        }
        if m_ops != self.schedule.len() {
            return Err(CircuitError::ScheduleLength {
                schedule: self.schedule.len(),
                circuit: m_ops,
            });
        }
        Ok(())
    }

    fn count_m_ops(&self) -> usize {
        self.moments
            .iter()
            .flat_map(|m| m.ops())
            .filter(|op| matches!(op, Op::M(_)))
            .count()
    }

    /// Position of a scheduled measurement in the flat shot record:
    /// stabilizer bits are round-major, final-data bits follow.
    pub fn record_pos(&self, slot: &MeasureSlot) -> usize {
        match slot.role {
            MeasureRole::Stabilizer { s } => slot.round * self.dims.n_measure + s,
            MeasureRole::FinalData { d } => self.dims.stabilizer_bits() + d,
        }
    }

    /// Total measurement outcomes per shot.
    pub fn record_len(&self) -> usize {
        self.dims.stabilizer_bits() + self.dims.n_data
    }

    /// Total op slots (for counter-based noise indexing).
    pub fn op_slots(&self) -> usize {
        self.moments.iter().map(|m| m.ops().len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Circuit {
        Circuit {
            qubit_count: 3,
            moments: vec![
                Moment::new(vec![Op::H(0), Op::H(1), Op::H(2)]),
                Moment::new(vec![Op::Cz(0, 1), Op::Idle(2, IdleClass::Gate)]),
                Moment::new(vec![Op::M(1)]),
                Moment::new(vec![Op::R(1)]),
            ],
            schedule: vec![MeasureSlot {
                qubit: 1,
                round: 0,
                role: MeasureRole::Stabilizer { s: 0 },
            }],
            dims: RecordDims {
                n_measure: 1,
                n_rounds: 1,
                n_data: 2,
            },
        }
    }

    #[test]
    fn valid_circuit_passes() {
        tiny().validate().unwrap();
    }

    #[test]
    fn duplicate_qubit_rejected() {
        let mut c = tiny();
        c.moments[1] = Moment::new(vec![Op::Cz(0, 1), Op::H(0)]);
        assert!(matches!(
            c.validate(),
            Err(CircuitError::DuplicateQubit { moment: 1, qubit: 0 })
        ));
    }

    #[test]
    fn cz_same_operand_rejected() {
        let mut c = tiny();
        c.moments[1] = Moment::new(vec![Op::Cz(0, 0)]);
        assert!(matches!(c.validate(), Err(CircuitError::CzSameQubit { .. })));
    }

    #[test]
    fn measured_qubit_needs_reset() {
        let mut c = tiny();
        c.moments[3] = Moment::new(vec![Op::H(1)]);
        assert!(matches!(
            c.validate(),
            Err(CircuitError::MeasuredWithoutReset { moment: 3, qubit: 1 })
        ));
    }

    #[test]
    fn out_of_range_qubit_rejected() {
        let mut c = tiny();
        c.moments[0] = Moment::new(vec![Op::H(5)]);
        assert!(matches!(c.validate(), Err(CircuitError::QubitOutOfRange { .. })));
    }
}
