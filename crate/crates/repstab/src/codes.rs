//! Code constructors: bit/phase flip repetition codes and the distance-2
//! surface code, plus the spatial subsampling index maps.
//!
//! Qubit layout for repetition codes follows the 1D chain: data qubit `k`
//! sits at chain position `2k`, measure qubit `s` at `2s+1`, so measure `s`
//! checks data `s` and `s+1`. CZ layers are split into left-partner and
//! right-partner moments, which fixes the spacetime-edge orientation to
//! (s, t) -- (s+1, t+1).

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuit::{Circuit, CircuitError, IdleClass, MeasureRole, MeasureSlot, Moment, Op, RecordDims};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RepBit,
    RepPhase,
    Surface2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    X,
    Z,
}

/// Data-qubit initialization: a fixed bitstring or fresh random strings
/// drawn per shot batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitSpec {
    Random,
    Fixed(Vec<bool>),
}

impl Serialize for InitSpec {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            InitSpec::Random => ser.serialize_str("random"),
            InitSpec::Fixed(bits) => {
                let s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                ser.serialize_str(&s)
            }
        }
    }
}

impl<'de> Deserialize<'de> for InitSpec {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        if s == "random" {
            return Ok(InitSpec::Random);
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(D::Error::custom(format!("init string has non-binary char {c:?}"))),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        Ok(InitSpec::Fixed(bits))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub family: Family,
    pub distance: usize,
    pub rounds: usize,
    #[serde(default = "default_basis")]
    pub basis: Basis,
    #[serde(default = "default_init")]
    pub init: InitSpec,
}

fn default_basis() -> Basis {
    Basis::Z
}

fn default_init() -> InitSpec {
    InitSpec::Random
}

impl CodeSpec {
    pub fn repetition(family: Family, distance: usize, rounds: usize) -> Self {
        CodeSpec {
            family,
            distance,
            rounds,
            basis: Basis::Z,
            init: InitSpec::Random,
        }
    }

    pub fn surface2(rounds: usize, basis: Basis) -> Self {
        CodeSpec {
            family: Family::Surface2,
            distance: 2,
            rounds,
            basis,
            init: InitSpec::Random,
        }
    }
}

/// A built code: the circuit plus everything detection and decoding need to
/// interpret its records.
#[derive(Debug, Clone)]
pub struct Code {
    pub spec: CodeSpec,
    pub circuit: Circuit,
    /// Data-qubit indices checked by each stabilizer.
    pub measure_support: Vec<Vec<usize>>,
    /// Circuit qubit id of each data qubit.
    pub data_qubit: Vec<usize>,
    /// Circuit qubit id of each measure qubit.
    pub measure_qubit: Vec<usize>,
    /// Per detection node (space-first index `t * n_measure + s`): false for
    /// nodes skipped because the comparison is nondeterministic.
    pub node_mask: Vec<bool>,
    /// Data indices whose (corrected, reference-relative) readout parity is
    /// the logical outcome.
    pub logical_support: Vec<usize>,
    /// Moment index where each stabilizer round begins.
    pub round_start: Vec<usize>,
}

impl Code {
    pub fn n_measure(&self) -> usize {
        self.circuit.dims.n_measure
    }

    pub fn n_rounds(&self) -> usize {
        self.circuit.dims.n_rounds
    }

    pub fn n_data(&self) -> usize {
        self.circuit.dims.n_data
    }

    /// Detection nodes per shot: `(n_rounds + 1) * n_measure`.
    pub fn n_nodes(&self) -> usize {
        (self.n_rounds() + 1) * self.n_measure()
    }

    #[inline]
    pub fn node_index(&self, s: usize, t: usize) -> usize {
        t * self.n_measure() + s
    }

    #[inline]
    pub fn node_coords(&self, node: usize) -> (usize, usize) {
        (node % self.n_measure(), node / self.n_measure())
    }

    /// Initial-state bits mapped onto circuit qubit ids.
    pub fn initial_bits(&self, init: &[bool]) -> u64 {
        let mut bits = 0u64;
        for (d, &b) in init.iter().enumerate() {
            if b {
                bits |= (b as u64) << self.data_qubit[d];
            }
        }
        bits
    }

    /// Is this a repetition-code family (decodable by matching)?
    pub fn is_repetition(&self) -> bool {
        matches!(self.spec.family, Family::RepBit | Family::RepPhase)
    }
}

/// Build the circuit for a code spec.
pub fn build(spec: &CodeSpec) -> Result<Code, CircuitError> {
    match spec.family {
        Family::RepBit | Family::RepPhase => build_repetition(spec),
        Family::Surface2 => build_surface2(spec),
    }
}

fn check_init(spec: &CodeSpec, n_data: usize) -> Result<(), CircuitError> {
    if let InitSpec::Fixed(bits) = &spec.init {
        if bits.len() != n_data {
            return Err(CircuitError::InvalidSpec(format!(
                "init string length {} != data count {}",
                bits.len(),
                n_data
            )));
        }
    }
    Ok(())
}

/// Repetition code (bit or phase flip variant).
pub fn build_repetition(spec: &CodeSpec) -> Result<Code, CircuitError> {
    let d = spec.distance;
    if !matches!(spec.family, Family::RepBit | Family::RepPhase) {
        return Err(CircuitError::InvalidSpec("not a repetition family".into()));
    }
    if d < 3 || d > 11 || d % 2 == 0 {
        return Err(CircuitError::InvalidSpec(format!(
            "repetition distance must be odd in 3..=11, got {d}"
        )));
    }
    if spec.rounds < 1 {
        return Err(CircuitError::InvalidSpec("rounds must be >= 1".into()));
    }
    check_init(spec, d)?;

    let phase = spec.family == Family::RepPhase;
    let n_mq = d - 1;
    let n_rounds = spec.rounds;
    let data_qubit: Vec<usize> = (0..d).map(|k| 2 * k).collect();
    let measure_qubit: Vec<usize> = (0..n_mq).map(|s| 2 * s + 1).collect();
    let qubit_count = 2 * d - 1;

    let mut moments = Vec::new();
    let mut schedule = Vec::new();
    let mut round_start = Vec::new();

    if phase {
        // State preparation: rotate the Z bitstring into |+>/|-> signs.
        moments.push(Moment::new(data_qubit.iter().map(|&q| Op::H(q)).collect()));
    }

    let h_all = || Moment::new((0..qubit_count).map(Op::H).collect());
    let h_measure_idle_data = || {
        let mut ops: Vec<Op> = measure_qubit.iter().map(|&q| Op::H(q)).collect();
        ops.extend(data_qubit.iter().map(|&q| Op::Idle(q, IdleClass::Gate)));
        Moment::new(ops)
    };
    // Left partners, then right partners; the unpaired chain end idles.
    let cz_left = || {
        let mut ops: Vec<Op> = (0..n_mq).map(|s| Op::Cz(measure_qubit[s], data_qubit[s])).collect();
        ops.push(Op::Idle(data_qubit[d - 1], IdleClass::Gate));
        Moment::new(ops)
    };
    let cz_right = || {
        let mut ops: Vec<Op> = (0..n_mq)
            .map(|s| Op::Cz(measure_qubit[s], data_qubit[s + 1]))
            .collect();
        ops.push(Op::Idle(data_qubit[0], IdleClass::Gate));
        Moment::new(ops)
    };

    for t in 0..n_rounds {
        let last = t == n_rounds - 1;
        round_start.push(moments.len());
        if phase {
            moments.push(h_all());
        } else {
            moments.push(h_measure_idle_data());
        }
        moments.push(cz_left());
        moments.push(cz_right());
        if phase && !last {
            moments.push(h_all());
        } else {
            moments.push(h_measure_idle_data());
        }
        if !phase {
            // Data pi pulses keep the qubits from settling into the ground
            // state; deterministic, absorbed by the reference run.
            moments.push(Moment::new(data_qubit.iter().map(|&q| Op::X(q)).collect()));
        }
        if last {
            // Final readout of everything at once; the derived last-round
            // stabilizer values need no data idling or entangling gates.
            let mut ops: Vec<Op> = measure_qubit.iter().map(|&q| Op::M(q)).collect();
            ops.extend(data_qubit.iter().map(|&q| Op::M(q)));
            moments.push(Moment::new(ops));
            let mut slots: Vec<MeasureSlot> = (0..n_mq)
                .map(|s| MeasureSlot {
                    qubit: measure_qubit[s],
                    round: t,
                    role: MeasureRole::Stabilizer { s },
                })
                .collect();
            slots.extend((0..d).map(|k| MeasureSlot {
                qubit: data_qubit[k],
                round: t,
                role: MeasureRole::FinalData { d: k },
            }));
            slots.sort_by_key(|slot| slot.qubit);
            schedule.extend(slots);
        } else {
            let mut ops: Vec<Op> = measure_qubit.iter().map(|&q| Op::M(q)).collect();
            ops.extend(data_qubit.iter().map(|&q| Op::Idle(q, IdleClass::MeasureReset)));
            moments.push(Moment::new(ops));
            moments.push(Moment::new(measure_qubit.iter().map(|&q| Op::R(q)).collect()));
            let mut slots: Vec<MeasureSlot> = (0..n_mq)
                .map(|s| MeasureSlot {
                    qubit: measure_qubit[s],
                    round: t,
                    role: MeasureRole::Stabilizer { s },
                })
                .collect();
            slots.sort_by_key(|slot| slot.qubit);
            schedule.extend(slots);
        }
    }

    let circuit = Circuit {
        qubit_count,
        moments,
        schedule,
        dims: RecordDims {
            n_measure: n_mq,
            n_rounds,
            n_data: d,
        },
    };
    circuit.validate()?;

    let code = Code {
        spec: spec.clone(),
        circuit,
        measure_support: (0..n_mq).map(|s| vec![s, s + 1]).collect(),
        data_qubit,
        measure_qubit,
        node_mask: vec![true; (n_rounds + 1) * n_mq],
        logical_support: vec![0],
        round_start,
    };
    Ok(code)
}

/// Distance-2 surface code: stabilizers Z0Z1, X0X1X2X3, Z2Z3 on a 2x2 data
/// patch, measured through four CZ layers per round.
pub fn build_surface2(spec: &CodeSpec) -> Result<Code, CircuitError> {
    if spec.family != Family::Surface2 {
        return Err(CircuitError::InvalidSpec("not surface2".into()));
    }
    if spec.distance != 2 {
        return Err(CircuitError::InvalidSpec(format!(
            "surface2 distance must be 2, got {}",
            spec.distance
        )));
    }
    if spec.rounds < 1 {
        return Err(CircuitError::InvalidSpec("rounds must be >= 1".into()));
    }
    check_init(spec, 4)?;

    // Qubit ids: data 0..=3, measure A=4 (Z0Z1), B=5 (X0X1X2X3), C=6 (Z2Z3).
    let (d0, d1, d2, d3, qa, qb, qc) = (0usize, 1, 2, 3, 4, 5, 6);
    let n_rounds = spec.rounds;
    let x_basis = spec.basis == Basis::X;

    let mut moments = Vec::new();
    let mut schedule = Vec::new();
    let mut round_start = Vec::new();

    if x_basis {
        // Rotate the initial bitstring into the X basis.
        moments.push(Moment::new(vec![Op::H(d0), Op::H(d1), Op::H(d2), Op::H(d3)]));
    }

    let idle = |q: usize| Op::Idle(q, IdleClass::Gate);
    for t in 0..n_rounds {
        let last = t == n_rounds - 1;
        round_start.push(moments.len());
        // Opening single-qubit layer: measure Hadamards plus the rotation
        // window opening for data 0, whose X-stabilizer CZ comes first.
        moments.push(Moment::new(vec![
            Op::H(qa),
            Op::H(qb),
            Op::H(qc),
            Op::H(d0),
            idle(d1),
            idle(d2),
            idle(d3),
        ]));
        // Four CZ layers. The weight-4 X stabilizer takes one data qubit per
        // layer inside that qubit's H window; each Z-stabilizer CZ is placed
        // so the pair crosses an even number of open X windows, which keeps
        // the extracted Z parities independent of the X measure qubit.
        moments.push(Moment::new(vec![
            Op::Cz(qb, d0),
            Op::Cz(qc, d2),
            idle(d1),
            idle(d3),
            idle(qa),
        ]));
        moments.push(Moment::new(vec![
            Op::H(d0),
            Op::H(d1),
            idle(d2),
            idle(d3),
            idle(qa),
            idle(qb),
            idle(qc),
        ]));
        moments.push(Moment::new(vec![Op::Cz(qb, d1), Op::Cz(qa, d0), Op::Cz(qc, d3), idle(d2)]));
        moments.push(Moment::new(vec![
            Op::H(d1),
            Op::H(d2),
            idle(d0),
            idle(d3),
            idle(qa),
            idle(qb),
            idle(qc),
        ]));
        moments.push(Moment::new(vec![
            Op::Cz(qb, d2),
            Op::Cz(qa, d1),
            idle(d0),
            idle(d3),
            idle(qc),
        ]));
        moments.push(Moment::new(vec![
            Op::H(d2),
            Op::H(d3),
            idle(d0),
            idle(d1),
            idle(qa),
            idle(qb),
            idle(qc),
        ]));
        moments.push(Moment::new(vec![
            Op::Cz(qb, d3),
            idle(d0),
            idle(d1),
            idle(d2),
            idle(qa),
            idle(qc),
        ]));
        // Closing single-qubit layer. In the final round the data rotations
        // merge with the readout-basis change: Z-basis readout keeps the
        // regular closing H on data 3 only, X-basis readout needs H on data
        // 0..2 and none on data 3 (its closing H cancels the basis change).
        if !last {
            moments.push(Moment::new(vec![
                Op::H(qa),
                Op::H(qb),
                Op::H(qc),
                Op::H(d3),
                idle(d0),
                idle(d1),
                idle(d2),
            ]));
            moments.push(Moment::new(vec![
                Op::M(qa),
                Op::M(qb),
                Op::M(qc),
                Op::Idle(d0, IdleClass::MeasureReset),
                Op::Idle(d1, IdleClass::MeasureReset),
                Op::Idle(d2, IdleClass::MeasureReset),
                Op::Idle(d3, IdleClass::MeasureReset),
            ]));
            moments.push(Moment::new(vec![Op::R(qa), Op::R(qb), Op::R(qc)]));
        } else {
            if x_basis {
                moments.push(Moment::new(vec![
                    Op::H(qa),
                    Op::H(qb),
                    Op::H(qc),
                    Op::H(d0),
                    Op::H(d1),
                    Op::H(d2),
                    idle(d3),
                ]));
            } else {
                moments.push(Moment::new(vec![
                    Op::H(qa),
                    Op::H(qb),
                    Op::H(qc),
                    Op::H(d3),
                    idle(d0),
                    idle(d1),
                    idle(d2),
                ]));
            }
            moments.push(Moment::new(vec![
                Op::M(qa),
                Op::M(qb),
                Op::M(qc),
                Op::M(d0),
                Op::M(d1),
                Op::M(d2),
                Op::M(d3),
            ]));
        }

        let mut slots: Vec<MeasureSlot> = [qa, qb, qc]
            .iter()
            .enumerate()
            .map(|(s, &q)| MeasureSlot {
                qubit: q,
                round: t,
                role: MeasureRole::Stabilizer { s },
            })
            .collect();
        if last {
            slots.extend((0..4).map(|k| MeasureSlot {
                qubit: k,
                round: t,
                role: MeasureRole::FinalData { d: k },
            }));
        }
        slots.sort_by_key(|slot| slot.qubit);
        schedule.extend(slots);
    }

    let circuit = Circuit {
        qubit_count: 7,
        moments,
        schedule,
        dims: RecordDims {
            n_measure: 3,
            n_rounds,
            n_data: 4,
        },
    };
    circuit.validate()?;

    // Opposite-basis stabilizers start random (node t=0 masked) and cannot be
    // reconstructed from the final data readout (node t=N_r masked).
    let n_nodes = (n_rounds + 1) * 3;
    let mut node_mask = vec![true; n_nodes];
    let opposite: &[usize] = if x_basis { &[0, 2] } else { &[1] };
    for &s in opposite {
        node_mask[s] = false; // t = 0
        node_mask[n_rounds * 3 + s] = false; // t = N_r
    }

    Ok(Code {
        spec: spec.clone(),
        circuit,
        measure_support: vec![vec![0, 1], vec![0, 1, 2, 3], vec![2, 3]],
        data_qubit: vec![0, 1, 2, 3],
        measure_qubit: vec![qa, qb, qc],
        node_mask,
        logical_support: if x_basis { vec![0, 1] } else { vec![0, 2] },
        round_start,
    })
}

/// A contiguous sub-chain selection turning a distance-`parent` repetition
/// dataset into the dataset a distance-`child` code would have produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsampleMap {
    pub parent_d: usize,
    pub child_d: usize,
    pub offset: usize,
}

impl SubsampleMap {
    pub fn child_measure_count(&self) -> usize {
        self.child_d - 1
    }

    /// Parent measure-qubit index for a child index.
    pub fn parent_s(&self, child_s: usize) -> usize {
        child_s + self.offset
    }

    /// Parent data-qubit index for a child index.
    pub fn parent_data(&self, child_k: usize) -> usize {
        child_k + self.offset
    }
}

/// All contiguous sub-chain maps from distance `d` down to `d_s`.
pub fn subsample_maps(d: usize, d_s: usize) -> Result<Vec<SubsampleMap>, CircuitError> {
    if d % 2 == 0 || d_s % 2 == 0 {
        return Err(CircuitError::InvalidSpec(format!(
            "subsampling needs odd distances, got {d} -> {d_s}"
        )));
    }
    if d_s > d {
        return Err(CircuitError::InvalidSpec(format!(
            "child distance {d_s} exceeds parent {d}"
        )));
    }
    Ok((0..=(d - d_s))
        .map(|offset| SubsampleMap {
            parent_d: d,
            child_d: d_s,
            offset,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d11_has_21_qubits_10_measure() {
        let code = build(&CodeSpec::repetition(Family::RepPhase, 11, 3)).unwrap();
        assert_eq!(code.circuit.qubit_count, 21);
        assert_eq!(code.n_measure(), 10);
        // Both CZ layers run all 10 gates simultaneously.
        let max_cz = code
            .circuit
            .moments
            .iter()
            .map(|m| m.ops().iter().filter(|op| matches!(op, Op::Cz(..))).count())
            .max()
            .unwrap();
        assert_eq!(max_cz, 10);
    }

    #[test]
    fn d5_runs_four_simultaneous_czs() {
        let code = build(&CodeSpec::repetition(Family::RepPhase, 5, 2)).unwrap();
        let max_cz = code
            .circuit
            .moments
            .iter()
            .map(|m| m.ops().iter().filter(|op| matches!(op, Op::Cz(..))).count())
            .max()
            .unwrap();
        assert_eq!(max_cz, 4);
    }

    #[test]
    fn d3_single_round_measurement_counts() {
        let code = build(&CodeSpec::repetition(Family::RepPhase, 3, 1)).unwrap();
        let stab = code
            .circuit
            .schedule
            .iter()
            .filter(|s| matches!(s.role, MeasureRole::Stabilizer { .. }))
            .count();
        let data = code
            .circuit
            .schedule
            .iter()
            .filter(|s| matches!(s.role, MeasureRole::FinalData { .. }))
            .count();
        assert_eq!(stab, 2);
        assert_eq!(data, 3);
    }

    #[test]
    fn even_distance_rejected() {
        assert!(build(&CodeSpec::repetition(Family::RepBit, 4, 2)).is_err());
        assert!(build(&CodeSpec::repetition(Family::RepBit, 13, 2)).is_err());
    }

    #[test]
    fn surface2_four_cz_layers_per_round() {
        let code = build(&CodeSpec::surface2(2, Basis::Z)).unwrap();
        let cz_layers = code
            .circuit
            .moments
            .iter()
            .filter(|m| m.ops().iter().any(|op| matches!(op, Op::Cz(..))))
            .count();
        assert_eq!(cz_layers, 8); // 4 per round
        assert_eq!(code.n_data(), 4);
        assert_eq!(code.n_measure(), 3);
    }

    #[test]
    fn surface2_masks_opposite_basis_time_boundaries() {
        let z = build(&CodeSpec::surface2(3, Basis::Z)).unwrap();
        // X stabilizer (s=1) masked at t=0 and t=N_r.
        assert!(!z.node_mask[z.node_index(1, 0)]);
        assert!(!z.node_mask[z.node_index(1, 3)]);
        assert!(z.node_mask[z.node_index(1, 1)]);
        assert!(z.node_mask[z.node_index(0, 0)]);
        let x = build(&CodeSpec::surface2(3, Basis::X)).unwrap();
        assert!(!x.node_mask[x.node_index(0, 0)]);
        assert!(!x.node_mask[x.node_index(2, 3)]);
        assert!(x.node_mask[x.node_index(1, 0)]);
    }

    #[test]
    fn subsample_map_counts() {
        assert_eq!(subsample_maps(5, 3).unwrap().len(), 3);
        assert_eq!(subsample_maps(11, 11).unwrap().len(), 1);
        assert_eq!(subsample_maps(11, 3).unwrap().len(), 9);
        assert!(subsample_maps(5, 4).is_err());
        // Covering all odd child sizes of d=11 from one dataset replaces
        // sum_{d_s} (11 - d_s + 1) = 9+7+5+3+1 = 25 separate experiments.
        let total: usize = (3..=11)
            .step_by(2)
            .map(|ds| subsample_maps(11, ds).unwrap().len())
            .sum();
        assert_eq!(total, 25);
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"family":"rep-phase","distance":11,"rounds":50,"basis":"z","init":"random"}"#;
        let spec: CodeSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.family, Family::RepPhase);
        let fixed: CodeSpec =
            serde_json::from_str(r#"{"family":"surface2","distance":2,"rounds":5,"basis":"x","init":"0111"}"#)
                .unwrap();
        assert_eq!(
            fixed.init,
            InitSpec::Fixed(vec![false, true, true, true])
        );
        let back = serde_json::to_string(&fixed).unwrap();
        let again: CodeSpec = serde_json::from_str(&back).unwrap();
        assert_eq!(fixed, again);
    }
}
