//! Shot sampling: noiseless reference trajectories per batch, Pauli-frame
//! noise propagation per shot, and exhaustive single-error enumeration.
//!
//! A shot is a pure function of `(code, noise, seed, shot index)`: all
//! randomness comes from the counter stream, so shots are reproducible and
//! embarrassingly parallel, and runs that share a seed see identical
//! per-op-slot uniforms regardless of their rate vectors.

use rand::Rng;

use crate::circuit::Op;
use crate::codes::{Code, Family, InitSpec};
use crate::frame::PauliFrame;
use crate::noise::{Component, CorrelatedChannel, NoiseModel};
use crate::rng::{self, Domain};
use crate::tableau::Tableau;

/// One shot's measurement outcomes, bit-packed in record order
/// (stabilizer bits round-major, then final data bits).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub bits: Vec<u64>,
    /// Ground truth: was this shot taken during an injected burst?
    pub burst: bool,
}

impl ShotRecord {
    pub fn zeros(record_len: usize) -> Self {
        ShotRecord {
            bits: vec![0; record_len.div_ceil(64)],
            burst: false,
        }
    }

    #[inline]
    pub fn get(&self, pos: usize) -> bool {
        self.bits[pos / 64] >> (pos % 64) & 1 != 0
    }

    #[inline]
    pub fn toggle(&mut self, pos: usize) {
        self.bits[pos / 64] ^= 1 << (pos % 64);
    }
}

/// Per-batch noiseless reference: the initialization string and the full
/// reference record (nondeterministic first measurements fixed by seeded
/// tableau coins, shared across the batch).
#[derive(Debug, Clone)]
pub struct Batch {
    pub init: Vec<bool>,
    pub ref_bits: Vec<u64>,
}

/// Reference trajectories for a run, one per shot batch.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    pub batch_size: u64,
    batches: Vec<Batch>,
}

pub const DEFAULT_BATCH_SIZE: u64 = 1000;

impl ReferenceSet {
    pub fn new(code: &Code, seed: u64, n_shots: u64, batch_size: u64) -> Self {
        let batch_size = batch_size.max(1);
        let n_batches = n_shots.div_ceil(batch_size).max(1);
        let batches = (0..n_batches)
            .map(|b| {
                let init = match &code.spec.init {
                    InitSpec::Fixed(bits) => bits.clone(),
                    InitSpec::Random => {
                        let mut rng = rng::stream(seed, Domain::InitString, b);
                        (0..code.n_data()).map(|_| rng.gen::<bool>()).collect()
                    }
                };
                let ref_bits = reference_bits(code, &init, seed, b);
                Batch { init, ref_bits }
            })
            .collect();
        ReferenceSet { batch_size, batches }
    }

    #[inline]
    pub fn batch_for(&self, shot: u64) -> &Batch {
        &self.batches[((shot / self.batch_size) as usize).min(self.batches.len() - 1)]
    }
}

/// Noiseless record for one initialization, with measurement coins drawn
/// from the `(seed, batch)` reference stream.
fn reference_bits(code: &Code, init: &[bool], seed: u64, batch: u64) -> Vec<u64> {
    let mut rng = rng::stream(seed, Domain::Reference, batch);
    let outcomes = Tableau::run_circuit(&code.circuit, code.initial_bits(init), &mut rng);
    let mut bits = vec![0u64; code.circuit.record_len().div_ceil(64)];
    for (slot, outcome) in code.circuit.schedule.iter().zip(outcomes) {
        if outcome {
            let pos = code.circuit.record_pos(slot);
            bits[pos / 64] ^= 1 << (pos % 64);
        }
    }
    bits
}

/// Noiseless run of the full circuit for a given initialization.
pub fn reference_run(code: &Code, init: &[bool], seed: u64) -> ShotRecord {
    ShotRecord {
        bits: reference_bits(code, init, seed, 0),
        burst: false,
    }
}

/// A prepared sampling run.
pub struct Sampler<'c> {
    pub code: &'c Code,
    pub noise: NoiseModel,
    pub seed: u64,
    pub n_shots: u64,
    refs: ReferenceSet,
    base_rates: [f64; 6],
    /// Per-shot burst multiplier and ground-truth flag, when bursts are on.
    burst: Option<(Vec<f32>, Vec<bool>)>,
}

impl<'c> Sampler<'c> {
    pub fn new(code: &'c Code, noise: NoiseModel, n_shots: u64, seed: u64) -> Result<Self, crate::noise::NoiseError> {
        Self::with_batch_size(code, noise, n_shots, seed, DEFAULT_BATCH_SIZE)
    }

    pub fn with_batch_size(
        code: &'c Code,
        noise: NoiseModel,
        n_shots: u64,
        seed: u64,
        batch_size: u64,
    ) -> Result<Self, crate::noise::NoiseError> {
        noise.validate()?;
        let refs = ReferenceSet::new(code, seed, n_shots, batch_size);
        let mut base_rates = [0.0; 6];
        for (i, c) in Component::ALL.iter().enumerate() {
            base_rates[i] = noise.rate(*c);
        }
        let burst = noise.bursts.map(|cfg| {
            let mut mult = vec![1.0f32; n_shots as usize];
            let mut flag = vec![false; n_shots as usize];
            let mut active: Vec<u64> = Vec::new();
            for j in 0..n_shots {
                if rng::uniform(seed, Domain::Burst, j, 0, 0) < cfg.rate {
                    active.push(j);
                }
                active.retain(|&k| j - k < cfg.active_len());
                let m = active
                    .iter()
                    .map(|&k| cfg.multiplier(j - k))
                    .fold(1.0f64, f64::max);
                mult[j as usize] = m as f32;
                flag[j as usize] = m > 1.0;
            }
            (mult, flag)
        });
        Ok(Sampler {
            code,
            noise,
            seed,
            n_shots,
            refs,
            base_rates,
            burst,
        })
    }

    pub fn refs(&self) -> &ReferenceSet {
        &self.refs
    }

    /// Ground-truth burst flags (empty when bursts are not configured).
    pub fn burst_flags(&self) -> Option<&[bool]> {
        self.burst.as_ref().map(|(_, f)| f.as_slice())
    }

    /// Generate shot `idx`. Pure function of the sampler configuration.
    pub fn shot(&self, idx: u64) -> ShotRecord {
        let circuit = &self.code.circuit;
        let batch = self.refs.batch_for(idx);
        let mut record = ShotRecord {
            bits: batch.ref_bits.clone(),
            burst: false,
        };

        let mut rates = self.base_rates;
        if let Some((mult, flag)) = &self.burst {
            let m = mult[idx as usize] as f64;
            if m > 1.0 {
                for r in rates.iter_mut() {
                    *r = (*r * m).min(0.5);
                }
            }
            record.burst = flag[idx as usize];
        }
        let seed = self.seed;

        // Persistent-channel state machines.
        let persistent: Vec<usize> = self
            .noise
            .correlated
            .iter()
            .enumerate()
            .filter(|(_, ch)| matches!(ch, CorrelatedChannel::PersistentFlip { .. }))
            .map(|(i, _)| i)
            .collect();
        let mut persist_active = vec![false; persistent.len()];
        let detected_flip = |frame: &mut PauliFrame, q: usize| match self.code.spec.family {
            Family::RepBit => frame.flip_x(q),
            Family::RepPhase | Family::Surface2 => frame.flip_z(q),
        };

        let mut frame = PauliFrame::default();
        let mut slot = 0u64;
        let mut m_idx = 0usize;
        let mut next_round = 0usize;
        let n_rounds = self.code.n_rounds();

        for (mi, moment) in circuit.moments.iter().enumerate() {
            if next_round < n_rounds && self.code.round_start[next_round] == mi {
                let t = next_round;
                next_round += 1;
                for (pi, &ci) in persistent.iter().enumerate() {
                    let CorrelatedChannel::PersistentFlip {
                        data_qubit,
                        trigger_prob,
                        survival_prob,
                    } = self.noise.correlated[ci]
                    else {
                        unreachable!()
                    };
                    let cslot = (ci * (n_rounds + 1) + t) as u64;
                    if persist_active[pi]
                        && rng::uniform(seed, Domain::Correlated, idx, cslot, 3) >= survival_prob
                    {
                        persist_active[pi] = false;
                    }
                    if !persist_active[pi]
                        && rng::uniform(seed, Domain::Correlated, idx, cslot, 1) < trigger_prob
                    {
                        persist_active[pi] = true;
                    }
                    if persist_active[pi]
                        && rng::uniform(seed, Domain::Correlated, idx, cslot, 2) < 0.5
                    {
                        detected_flip(&mut frame, self.code.data_qubit[data_qubit]);
                    }
                }
            }

            for op in moment.ops() {
                match *op {
                    Op::H(q) => {
                        frame.conj_h(q);
                        self.depolarize1(idx, slot, rates[4], q, &mut frame);
                    }
                    Op::X(_) => {}
                    Op::Cz(a, b) => {
                        frame.conj_cz(a, b);
                        self.depolarize2(idx, slot, rates[1], a, b, &mut frame);
                    }
                    Op::Idle(q, class) => {
                        let rate = match class {
                            crate::circuit::IdleClass::Gate => rates[5],
                            crate::circuit::IdleClass::MeasureReset => rates[0],
                        };
                        self.depolarize1(idx, slot, rate, q, &mut frame);
                    }
                    Op::M(q) => {
                        let mut delta = frame.x_bit(q);
                        if rates[2] > 0.0 && rng::uniform(seed, Domain::OpNoise, idx, slot, 0) < rates[2] {
                            delta = !delta;
                        }
                        if delta {
                            record.toggle(circuit.record_pos(&circuit.schedule[m_idx]));
                        }
                        m_idx += 1;
                        // Post-measurement phase content is meaningless.
                        frame.z &= !(1 << q);
                    }
                    Op::R(q) => {
                        frame.erase(q);
                        if rates[3] > 0.0 && rng::uniform(seed, Domain::OpNoise, idx, slot, 0) < rates[3] {
                            frame.flip_x(q);
                        }
                    }
                }
                slot += 1;
            }
        }

        // Pair-flip channels are classical readout flips; apply post hoc.
        for (ci, ch) in self.noise.correlated.iter().enumerate() {
            if let CorrelatedChannel::PairFlip { s_a, s_b, dt, prob } = *ch {
                for t in 0..n_rounds {
                    let cslot = (ci * (n_rounds + 1) + t) as u64;
                    if rng::uniform(seed, Domain::Correlated, idx, cslot, 10) < prob {
                        record.toggle(t * self.code.n_measure() + s_a);
                        if t + dt < n_rounds {
                            record.toggle((t + dt) * self.code.n_measure() + s_b);
                        }
                    }
                }
            }
        }

        record
    }

    #[inline]
    fn depolarize1(&self, shot: u64, slot: u64, rate: f64, q: usize, frame: &mut PauliFrame) {
        if rate > 0.0 && rng::uniform(self.seed, Domain::OpNoise, shot, slot, 0) < rate {
            match rng::mix(self.seed, Domain::OpNoise, shot, slot, 1) % 3 {
                0 => frame.flip_x(q),
                1 => frame.flip_y(q),
                _ => frame.flip_z(q),
            }
        }
    }

    #[inline]
    fn depolarize2(&self, shot: u64, slot: u64, rate: f64, a: usize, b: usize, frame: &mut PauliFrame) {
        if rate > 0.0 && rng::uniform(self.seed, Domain::OpNoise, shot, slot, 0) < rate {
            let idx = 1 + (rng::mix(self.seed, Domain::OpNoise, shot, slot, 1) % 15) as usize;
            apply_pauli(frame, a, idx / 4);
            apply_pauli(frame, b, idx % 4);
        }
    }
}

#[inline]
fn apply_pauli(frame: &mut PauliFrame, q: usize, pauli: usize) {
    match pauli {
        0 => {}
        1 => frame.flip_x(q),
        2 => frame.flip_y(q),
        _ => frame.flip_z(q),
    }
}

/// A possible single error at one circuit location.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Depolarizing Pauli after a 1q op (X=1, Y=2, Z=3).
    Single(usize),
    /// Two-qubit Pauli after a CZ, index 1..=15 as (idx/4, idx%4).
    Two(usize),
    /// Classical flip of the measurement outcome.
    MeasureFlip,
    /// X insertion after reset.
    ResetFlip,
}

#[derive(Debug, Clone)]
pub struct SingleError {
    pub moment: usize,
    pub slot: usize,
    pub op: Op,
    pub kind: ErrorKind,
    /// Detection nodes flipped, in space-first index order.
    pub nodes: Vec<u16>,
}

impl SingleError {
    /// Probability of exactly this error under a noise model.
    pub fn probability(&self, noise: &NoiseModel) -> f64 {
        let component = NoiseModel::component_for(&self.op);
        match self.kind {
            ErrorKind::Single(_) => component.map_or(0.0, |c| noise.rate(c) / 3.0),
            ErrorKind::Two(_) => noise.rate(Component::Cz) / 15.0,
            ErrorKind::MeasureFlip => noise.rate(Component::M),
            ErrorKind::ResetFlip => noise.rate(Component::R),
        }
    }
}

/// Enumerate every possible single component error and the detection nodes
/// it flips. Drives first-principles edge weights and the parity tests.
pub fn enumerate_single_errors(code: &Code) -> Vec<SingleError> {
    let circuit = &code.circuit;
    let mut out = Vec::new();
    let mut slot = 0usize;
    let mut m_seen = 0usize;
    for (mi, moment) in circuit.moments.iter().enumerate() {
        for (oi, op) in moment.ops().iter().enumerate() {
            let kinds: Vec<ErrorKind> = match op {
                Op::H(_) | Op::Idle(..) => (1..=3).map(ErrorKind::Single).collect(),
                Op::Cz(..) => (1..=15).map(ErrorKind::Two).collect(),
                Op::M(_) => vec![ErrorKind::MeasureFlip],
                Op::R(_) => vec![ErrorKind::ResetFlip],
                Op::X(_) => vec![],
            };
            for kind in kinds {
                let nodes = propagate_single(code, mi, oi, m_seen, *op, kind);
                out.push(SingleError {
                    moment: mi,
                    slot,
                    op: *op,
                    kind,
                    nodes,
                });
            }
            if matches!(op, Op::M(_)) {
                m_seen += 1;
            }
            slot += 1;
        }
    }
    out
}

/// Propagate one injected error through the rest of the circuit and extract
/// the flipped (unmasked) detection nodes from the outcome deltas.
fn propagate_single(
    code: &Code,
    moment: usize,
    op_index: usize,
    m_seen: usize,
    op: Op,
    kind: ErrorKind,
) -> Vec<u16> {
    let delta = propagate_delta(code, moment, op_index, m_seen, op, kind);
    delta_detection_nodes(code, &delta)
}

/// Outcome-delta record of one injected error (all other noise zero).
pub(crate) fn propagate_delta(
    code: &Code,
    moment: usize,
    op_index: usize,
    m_seen: usize,
    op: Op,
    kind: ErrorKind,
) -> Vec<u64> {
    let circuit = &code.circuit;
    let mut delta = vec![0u64; circuit.record_len().div_ceil(64)];
    let mut frame = PauliFrame::default();
    let mut m_idx = m_seen;

    match (op, kind) {
        (Op::M(_), ErrorKind::MeasureFlip) => {
            let pos = circuit.record_pos(&circuit.schedule[m_seen]);
            delta[pos / 64] ^= 1 << (pos % 64);
            m_idx = m_seen + 1;
        }
        (Op::R(q), ErrorKind::ResetFlip) => frame.flip_x(q),
        (op, ErrorKind::Single(p)) => {
            let (q, _) = op.qubits();
            apply_pauli(&mut frame, q, p);
        }
        (Op::Cz(a, b), ErrorKind::Two(idx)) => {
            apply_pauli(&mut frame, a, idx / 4);
            apply_pauli(&mut frame, b, idx % 4);
        }
        _ => unreachable!(),
    }

    for (mi, m) in circuit.moments.iter().enumerate().skip(moment) {
        for (oi, later) in m.ops().iter().enumerate() {
            if mi == moment && oi <= op_index {
                continue;
            }
            match *later {
                Op::H(q) => frame.conj_h(q),
                Op::Cz(a, b) => frame.conj_cz(a, b),
                Op::M(q) => {
                    if frame.x_bit(q) {
                        let pos = circuit.record_pos(&circuit.schedule[m_idx]);
                        delta[pos / 64] ^= 1 << (pos % 64);
                    }
                    m_idx += 1;
                    frame.z &= !(1 << q);
                }
                Op::R(q) => frame.erase(q),
                Op::X(_) | Op::Idle(..) => {}
            }
        }
    }

    delta
}

/// Detection events of a pure delta record (record XOR reference).
pub fn delta_detection_nodes(code: &Code, delta: &[u64]) -> Vec<u16> {
    let n_mq = code.n_measure();
    let n_rounds = code.n_rounds();
    let get = |pos: usize| delta[pos / 64] >> (pos % 64) & 1 != 0;
    let stab = |s: usize, t: usize| get(t * n_mq + s);
    let mut nodes = Vec::new();
    for t in 0..=n_rounds {
        for s in 0..n_mq {
            if !code.node_mask[t * n_mq + s] {
                continue;
            }
            let flipped = if t == 0 {
                stab(s, 0)
            } else if t < n_rounds {
                stab(s, t) ^ stab(s, t - 1)
            } else {
                let final_parity = code.measure_support[s]
                    .iter()
                    .fold(false, |acc, &d| acc ^ get(n_mq * n_rounds + d));
                final_parity ^ stab(s, n_rounds - 1)
            };
            if flipped {
                nodes.push((t * n_mq + s) as u16);
            }
        }
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build, Basis, CodeSpec, Family};

    fn fixed_spec(family: Family, d: usize, rounds: usize, init: &str) -> CodeSpec {
        let mut spec = CodeSpec::repetition(family, d, rounds);
        spec.init = InitSpec::Fixed(init.chars().map(|c| c == '1').collect());
        spec
    }

    #[test]
    fn phase_flip_reference_is_constant_parity() {
        // |++-> style init: parities fixed by the initial string, repeated
        // identically over rounds.
        let spec = fixed_spec(Family::RepPhase, 3, 2, "110");
        let code = build(&spec).unwrap();
        let record = reference_run(&code, &[true, true, false], 7);
        // Parities: d0^d1 = 0, d1^d2 = 1, for both rounds.
        for t in 0..2 {
            assert!(!record.get(t * 2), "s=0 t={t}");
            assert!(record.get(t * 2 + 1), "s=1 t={t}");
        }
        // Final data reads back the initial string.
        assert!(record.get(4));
        assert!(record.get(5));
        assert!(!record.get(6));
    }

    #[test]
    fn bit_flip_reference_parities_odd_odd() {
        // Initial data 010 -> neighbor parities (1, 1); the per-round pi
        // pulses preserve pair parities.
        let spec = fixed_spec(Family::RepBit, 3, 1, "010");
        let code = build(&spec).unwrap();
        let record = reference_run(&code, &[false, true, false], 3);
        assert!(record.get(0));
        assert!(record.get(1));
        // One round: final data flipped once by the pi pulse -> 101.
        assert!(record.get(2));
        assert!(!record.get(3));
        assert!(record.get(4));
    }

    #[test]
    fn surface2_z_init_stabilizer_signs() {
        // init 0111: Z0Z1 = -1, Z2Z3 = +1; X stabilizer is a seeded coin
        // that repeats over rounds.
        let mut spec = CodeSpec::surface2(3, Basis::Z);
        spec.init = InitSpec::Fixed(vec![false, true, true, true]);
        let code = build(&spec).unwrap();
        for seed in 0..6 {
            let record = reference_run(&code, &[false, true, true, true], seed);
            let coin = record.get(1);
            for t in 0..3 {
                assert!(record.get(t * 3), "Z0Z1 odd at t={t}");
                assert_eq!(record.get(t * 3 + 1), coin, "X coin repeats");
                assert!(!record.get(t * 3 + 2), "Z2Z3 even at t={t}");
            }
            // Z_L = Z0 Z2 = -1: final data parity over {0, 2} is odd.
            let zl = record.get(9) ^ record.get(11);
            assert!(zl);
        }
    }

    #[test]
    fn surface2_x_init_stabilizer_signs() {
        // init 0111 -> |+---|: X0X1X2X3 = -1 and X_L = X0X1 = -1.
        let mut spec = CodeSpec::surface2(2, Basis::X);
        spec.init = InitSpec::Fixed(vec![false, true, true, true]);
        let code = build(&spec).unwrap();
        for seed in 0..6 {
            let record = reference_run(&code, &[false, true, true, true], seed);
            for t in 0..2 {
                assert!(record.get(t * 3 + 1), "X stab odd at t={t}");
            }
            let xl = record.get(6) ^ record.get(7);
            assert!(xl, "X_L = -1");
        }
    }

    #[test]
    fn zero_noise_shots_match_reference() {
        let spec = CodeSpec::repetition(Family::RepPhase, 5, 4);
        let code = build(&spec).unwrap();
        let sampler = Sampler::new(&code, NoiseModel::zero(), 32, 11).unwrap();
        for i in 0..32 {
            let shot = sampler.shot(i);
            assert_eq!(shot.bits, sampler.refs().batch_for(i).ref_bits);
            assert!(!shot.burst);
        }
    }

    #[test]
    fn shots_are_deterministic() {
        let spec = CodeSpec::repetition(Family::RepBit, 5, 6);
        let code = build(&spec).unwrap();
        let noise = NoiseModel::reference_low();
        let a = Sampler::new(&code, noise.clone(), 64, 99).unwrap();
        let b = Sampler::new(&code, noise, 64, 99).unwrap();
        for i in 0..64 {
            assert_eq!(a.shot(i), b.shot(i));
        }
    }

    #[test]
    fn enumerate_flips_one_or_two_nodes() {
        // Pair production: single errors flip exactly 1 or 2 unmasked nodes;
        // single-node flips only at spatial boundaries.
        for family in [Family::RepPhase, Family::RepBit] {
            for d in [3usize, 5] {
                let spec = CodeSpec::repetition(family, d, 3);
                let code = build(&spec).unwrap();
                for err in enumerate_single_errors(&code) {
                    assert!(
                        err.nodes.len() <= 2,
                        "error {:?} at moment {} flips {:?}",
                        err.kind,
                        err.moment,
                        err.nodes
                    );
                    if err.nodes.len() == 1 {
                        let s = err.nodes[0] as usize % code.n_measure();
                        assert!(
                            s == 0 || s == code.n_measure() - 1,
                            "interior single-node flip: {err:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn measure_flip_gives_timelike_pair() {
        let spec = CodeSpec::repetition(Family::RepPhase, 5, 4);
        let code = build(&spec).unwrap();
        let n_mq = code.n_measure();
        for err in enumerate_single_errors(&code) {
            if let (ErrorKind::MeasureFlip, Op::M(q)) = (err.kind, err.op) {
                // Only stabilizer measurements produce timelike pairs; the
                // final data measurement flips produce final-node events.
                if let Some(s) = code.measure_qubit.iter().position(|&mq| mq == q) {
                    let t = err
                        .nodes
                        .iter()
                        .map(|&n| n as usize / n_mq)
                        .min()
                        .unwrap();
                    assert_eq!(
                        err.nodes,
                        vec![(t * n_mq + s) as u16, ((t + 1) * n_mq + s) as u16],
                        "readout flip at s={s} t={t}"
                    );
                }
            }
        }
    }

    /// Tableau run with one Pauli error injected after a specific op.
    fn tableau_with_injection(
        code: &Code,
        target_moment: usize,
        target_op: usize,
        kind: ErrorKind,
        init: &[bool],
    ) -> Vec<u64> {
        use crate::tableau::Tableau;
        let circuit = &code.circuit;
        let mut rng = crate::rng::stream(17, crate::rng::Domain::Reference, 0);
        let mut t = Tableau::new(circuit.qubit_count);
        let init_bits = code.initial_bits(init);
        for q in 0..circuit.qubit_count {
            if init_bits >> q & 1 != 0 {
                t.pauli_x(q);
            }
        }
        let mut bits = vec![0u64; circuit.record_len().div_ceil(64)];
        let mut m_idx = 0usize;
        let inject_pauli = |t: &mut Tableau, q: usize, p: usize| match p {
            1 => t.pauli_x(q),
            2 => t.pauli_y(q),
            3 => t.pauli_z(q),
            _ => {}
        };
        for (mi, moment) in circuit.moments.iter().enumerate() {
            for (oi, op) in moment.ops().iter().enumerate() {
                let mut flip_outcome = false;
                if mi == target_moment && oi == target_op {
                    flip_outcome = matches!(kind, ErrorKind::MeasureFlip);
                }
                match *op {
                    Op::H(q) => t.h(q),
                    Op::X(q) => t.pauli_x(q),
                    Op::Cz(a, b) => t.cz(a, b),
                    Op::M(q) => {
                        let out = t.measure(q, &mut rng) ^ flip_outcome;
                        if out {
                            let pos = circuit.record_pos(&circuit.schedule[m_idx]);
                            bits[pos / 64] ^= 1 << (pos % 64);
                        }
                        m_idx += 1;
                    }
                    Op::R(q) => t.reset(q, &mut rng),
                    Op::Idle(..) => {}
                }
                if mi == target_moment && oi == target_op {
                    match kind {
                        ErrorKind::Single(p) => {
                            let (q, _) = op.qubits();
                            inject_pauli(&mut t, q, p);
                        }
                        ErrorKind::Two(idx) => {
                            if let Op::Cz(a, b) = *op {
                                inject_pauli(&mut t, a, idx / 4);
                                inject_pauli(&mut t, b, idx % 4);
                            }
                        }
                        ErrorKind::ResetFlip => {
                            let (q, _) = op.qubits();
                            t.pauli_x(q);
                        }
                        ErrorKind::MeasureFlip => {}
                    }
                }
            }
        }
        bits
    }

    #[test]
    fn frame_and_tableau_agree_on_all_single_errors() {
        // d=3, 2 rounds, every error location: frame propagation must produce
        // the same record as full stabilizer simulation.
        for family in [Family::RepPhase, Family::RepBit] {
            let init = vec![true, false, true];
            let mut spec = CodeSpec::repetition(family, 3, 2);
            spec.init = InitSpec::Fixed(init.clone());
            let code = build(&spec).unwrap();
            let reference = reference_run(&code, &init, 17);
            let circuit = &code.circuit;
            let mut op_coords = Vec::new();
            for (mi, m) in circuit.moments.iter().enumerate() {
                for (oi, _) in m.ops().iter().enumerate() {
                    op_coords.push((mi, oi));
                }
            }
            for err in enumerate_single_errors(&code) {
                let (mi, oi) = op_coords[err.slot];
                let tableau_bits = tableau_with_injection(&code, mi, oi, err.kind, &init);
                // Frame route: reference XOR propagated delta.
                let m_seen = circuit.moments[..mi]
                    .iter()
                    .flat_map(|m| m.ops())
                    .chain(circuit.moments[mi].ops()[..oi].iter())
                    .filter(|op| matches!(op, Op::M(_)))
                    .count();
                let delta = super::propagate_delta(&code, mi, oi, m_seen, err.op, err.kind);
                let frame_bits: Vec<u64> = reference
                    .bits
                    .iter()
                    .zip(&delta)
                    .map(|(a, b)| a ^ b)
                    .collect();
                assert_eq!(
                    tableau_bits, frame_bits,
                    "family {family:?} error {:?} at moment {mi} op {oi}",
                    err.kind
                );
            }
        }
    }

    #[test]
    fn burst_multiplier_flags_shots() {
        let spec = CodeSpec::repetition(Family::RepPhase, 3, 2);
        let code = build(&spec).unwrap();
        let mut noise = NoiseModel::zero();
        noise.bursts = Some(crate::noise::BurstConfig {
            rate: 0.05,
            amplitude: 8.0,
            decay_shots: 5.0,
        });
        let sampler = Sampler::new(&code, noise, 2000, 5).unwrap();
        let flags = sampler.burst_flags().unwrap();
        let flagged = flags.iter().filter(|&&f| f).count();
        assert!(flagged > 100, "bursts should cover a visible fraction, got {flagged}");
        assert!(flagged < 1900);
    }
}
