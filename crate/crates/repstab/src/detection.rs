//! Detection-event extraction, DEF statistics, and the high-energy-burst
//! filter.
//!
//! A detection event at node (s, t) means measure qubit `s` disagreed with
//! its previous comparison point: the initial data parity at t = 0, the
//! previous round for 0 < t < N_r, and the final data-readout parity at
//! t = N_r. Extraction works on reference-relative records, which bakes the
//! initial parities and the nondeterministic-first-round coins into the
//! reference and makes the zero-noise record extract to all-zeros.

use thiserror::Error;

use crate::codes::Code;
use crate::sampler::{Batch, ShotRecord};

#[derive(Debug, Error)]
pub enum DetectionError {
    #[error("record has {got} words, code expects {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("burst statistics undefined below 100 shots (got {0})")]
    TooFewShots(usize),
}

/// Per-shot detection events plus what decoding needs downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionTensor {
    /// Event bits, space-first node index `t * n_measure + s`.
    pub events: Vec<u64>,
    /// Final data readout XOR the reference final readout.
    pub rel_final: u64,
    pub burst: bool,
}

impl DetectionTensor {
    pub fn zeros(n_nodes: usize) -> Self {
        DetectionTensor {
            events: vec![0; n_nodes.div_ceil(64)],
            rel_final: 0,
            burst: false,
        }
    }

    #[inline]
    pub fn event(&self, node: usize) -> bool {
        self.events[node / 64] >> (node % 64) & 1 != 0
    }

    #[inline]
    pub fn set_event(&mut self, node: usize) {
        self.events[node / 64] ^= 1 << (node % 64);
    }

    pub fn event_nodes(&self, n_nodes: usize) -> Vec<u16> {
        (0..n_nodes).filter(|&n| self.event(n)).map(|n| n as u16).collect()
    }

    pub fn count(&self) -> usize {
        self.events.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Extract the detection tensor of one shot against its batch reference.
pub fn extract(code: &Code, record: &ShotRecord, batch: &Batch) -> Result<DetectionTensor, DetectionError> {
    let want = code.circuit.record_len().div_ceil(64);
    if record.bits.len() != want || batch.ref_bits.len() != want {
        return Err(DetectionError::DimensionMismatch {
            got: record.bits.len(),
            want,
        });
    }
    let delta: Vec<u64> = record
        .bits
        .iter()
        .zip(&batch.ref_bits)
        .map(|(a, b)| a ^ b)
        .collect();

    let n_mq = code.n_measure();
    let n_rounds = code.n_rounds();
    let stab_bits = n_mq * n_rounds;
    let get = |pos: usize| delta[pos / 64] >> (pos % 64) & 1 != 0;

    let mut tensor = DetectionTensor::zeros(code.n_nodes());
    tensor.burst = record.burst;
    for d in 0..code.n_data() {
        if get(stab_bits + d) {
            tensor.rel_final |= 1 << d;
        }
    }
    for t in 0..=n_rounds {
        for s in 0..n_mq {
            let node = t * n_mq + s;
            if !code.node_mask[node] {
                continue;
            }
            let flipped = if t == 0 {
                get(s)
            } else if t < n_rounds {
                get(t * n_mq + s) ^ get((t - 1) * n_mq + s)
            } else {
                let final_parity = code.measure_support[s]
                    .iter()
                    .fold(false, |acc, &d| acc ^ (tensor.rel_final >> d & 1 != 0));
                final_parity ^ get((n_rounds - 1) * n_mq + s)
            };
            if flipped {
                tensor.set_event(node);
            }
        }
    }
    Ok(tensor)
}

/// Detection-event-fraction aggregates.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DefReport {
    pub n_shots: u64,
    /// Mean events per node (masked nodes reported as 0).
    pub per_node: Vec<f64>,
    /// Mean over unmasked nodes of each round.
    pub per_round: Vec<f64>,
    /// Mean over unmasked nodes of each measure qubit.
    pub per_measure: Vec<f64>,
    /// Overall mean DEF across unmasked nodes.
    pub mean: f64,
    /// Mean DEF over the bulk rounds 0 < t < N_r.
    pub bulk_mean: f64,
}

/// Mergeable DEF accumulator for parallel folds.
#[derive(Debug, Clone)]
pub struct DefAccumulator {
    n_nodes: usize,
    counts: Vec<u64>,
    shots: u64,
    /// Per-shot mean DEF, kept in shot order for burst filtering.
    pub shot_means: Vec<f64>,
}

impl DefAccumulator {
    pub fn new(code: &Code) -> Self {
        DefAccumulator {
            n_nodes: code.n_nodes(),
            counts: vec![0; code.n_nodes()],
            shots: 0,
            shot_means: Vec::new(),
        }
    }

    pub fn add(&mut self, code: &Code, tensor: &DetectionTensor) {
        let mut events = 0usize;
        for node in 0..self.n_nodes {
            if tensor.event(node) {
                self.counts[node] += 1;
                events += 1;
            }
        }
        let unmasked = code.node_mask.iter().filter(|&&m| m).count();
        self.shot_means.push(events as f64 / unmasked as f64);
        self.shots += 1;
    }

    pub fn merge(&mut self, other: DefAccumulator) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.shots += other.shots;
        self.shot_means.extend(other.shot_means);
    }

    pub fn finalize(&self, code: &Code) -> DefReport {
        let n_mq = code.n_measure();
        let n_rounds = code.n_rounds();
        let shots = self.shots.max(1) as f64;
        let per_node: Vec<f64> = self.counts.iter().map(|&c| c as f64 / shots).collect();

        let mut per_round = vec![0.0; n_rounds + 1];
        let mut per_measure = vec![0.0; n_mq];
        let mut round_n = vec![0usize; n_rounds + 1];
        let mut measure_n = vec![0usize; n_mq];
        let mut total = 0.0;
        let mut total_n = 0usize;
        let mut bulk = 0.0;
        let mut bulk_n = 0usize;
        for t in 0..=n_rounds {
            for s in 0..n_mq {
                let node = t * n_mq + s;
                if !code.node_mask[node] {
                    continue;
                }
                let v = per_node[node];
                per_round[t] += v;
                round_n[t] += 1;
                per_measure[s] += v;
                measure_n[s] += 1;
                total += v;
                total_n += 1;
                if t > 0 && t < n_rounds {
                    bulk += v;
                    bulk_n += 1;
                }
            }
        }
        for (v, n) in per_round.iter_mut().zip(round_n) {
            *v /= n.max(1) as f64;
        }
        for (v, n) in per_measure.iter_mut().zip(measure_n) {
            *v /= n.max(1) as f64;
        }
        DefReport {
            n_shots: self.shots,
            per_node,
            per_round,
            per_measure,
            mean: total / total_n.max(1) as f64,
            bulk_mean: bulk / bulk_n.max(1) as f64,
        }
    }
}

/// DEF aggregates over a batch of tensors.
pub fn def_report(code: &Code, tensors: &[DetectionTensor]) -> DefReport {
    let mut acc = DefAccumulator::new(code);
    for t in tensors {
        acc.add(code, t);
    }
    acc.finalize(code)
}

/// Index ranges removed by the burst filter (half-open).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RemovedRange {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct BurstFilterOutcome {
    /// Per-shot keep decision, in shot order.
    pub keep: Vec<bool>,
    pub removed: Vec<RemovedRange>,
    /// The flagging threshold that was applied.
    pub threshold: f64,
}

/// Flag shots whose mean DEF exceeds `median + k_sigma * IQR/1.349`, and
/// extend each removal until `cooldown` consecutive shots stay unflagged.
pub fn burst_filter(shot_means: &[f64], k_sigma: f64, cooldown: usize) -> Result<BurstFilterOutcome, DetectionError> {
    if shot_means.len() < 100 {
        return Err(DetectionError::TooFewShots(shot_means.len()));
    }
    let mut sorted = shot_means.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let quantile = |q: f64| {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    };
    let median = quantile(0.5);
    let robust_sigma = (quantile(0.75) - quantile(0.25)) / 1.349;
    let threshold = median + k_sigma * robust_sigma;

    let mut keep = vec![true; shot_means.len()];
    let mut countdown = 0usize;
    for (j, &m) in shot_means.iter().enumerate() {
        if m > threshold {
            countdown = cooldown;
            keep[j] = false;
        } else if countdown > 0 {
            countdown -= 1;
            keep[j] = false;
        }
    }

    let mut removed = Vec::new();
    let mut start = None;
    for (j, &k) in keep.iter().enumerate() {
        match (k, start) {
            (false, None) => start = Some(j),
            (true, Some(s)) => {
                removed.push(RemovedRange { start: s, end: j });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        removed.push(RemovedRange {
            start: s,
            end: keep.len(),
        });
    }
    Ok(BurstFilterOutcome {
        keep,
        removed,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build, CodeSpec, Family};
    use crate::noise::NoiseModel;
    use crate::sampler::Sampler;

    #[test]
    fn reference_extracts_to_zero() {
        for family in [Family::RepPhase, Family::RepBit] {
            let spec = CodeSpec::repetition(family, 5, 4);
            let code = build(&spec).unwrap();
            let sampler = Sampler::new(&code, NoiseModel::zero(), 8, 21).unwrap();
            for i in 0..8 {
                let shot = sampler.shot(i);
                let tensor = extract(&code, &shot, sampler.refs().batch_for(i)).unwrap();
                assert_eq!(tensor.count(), 0);
                assert_eq!(tensor.rel_final, 0);
            }
        }
    }

    #[test]
    fn single_readout_flip_gives_two_events() {
        let spec = CodeSpec::repetition(Family::RepPhase, 5, 6);
        let code = build(&spec).unwrap();
        let sampler = Sampler::new(&code, NoiseModel::zero(), 1, 4).unwrap();
        let mut shot = sampler.shot(0);
        // Flip measure qubit s=2 at round t=3.
        let (s, t) = (2usize, 3usize);
        shot.toggle(t * code.n_measure() + s);
        let tensor = extract(&code, &shot, sampler.refs().batch_for(0)).unwrap();
        let nodes = tensor.event_nodes(code.n_nodes());
        assert_eq!(
            nodes,
            vec![
                (t * code.n_measure() + s) as u16,
                ((t + 1) * code.n_measure() + s) as u16
            ]
        );
    }

    #[test]
    fn double_injection_cancels() {
        let spec = CodeSpec::repetition(Family::RepBit, 3, 4);
        let code = build(&spec).unwrap();
        let sampler = Sampler::new(&code, NoiseModel::zero(), 1, 4).unwrap();
        let mut shot = sampler.shot(0);
        shot.toggle(2 * code.n_measure());
        shot.toggle(2 * code.n_measure());
        let tensor = extract(&code, &shot, sampler.refs().batch_for(0)).unwrap();
        assert_eq!(tensor.count(), 0);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let code = build(&CodeSpec::repetition(Family::RepPhase, 3, 2)).unwrap();
        let other = build(&CodeSpec::repetition(Family::RepPhase, 11, 40)).unwrap();
        let sampler = Sampler::new(&other, NoiseModel::zero(), 1, 0).unwrap();
        let shot = sampler.shot(0);
        let refs = crate::sampler::ReferenceSet::new(&code, 0, 1, 10);
        assert!(extract(&code, &shot, refs.batch_for(0)).is_err());
    }

    #[test]
    fn burst_filter_refuses_tiny_input() {
        assert!(matches!(
            burst_filter(&[0.1; 50], 5.0, 10),
            Err(DetectionError::TooFewShots(50))
        ));
    }

    #[test]
    fn burst_filter_keeps_identical_series() {
        let out = burst_filter(&[0.11; 500], 5.0, 20).unwrap();
        assert!(out.keep.iter().all(|&k| k));
        assert!(out.removed.is_empty());
    }

    #[test]
    fn burst_filter_removes_spike_with_cooldown() {
        let mut means = vec![0.10; 400];
        for (i, m) in means.iter_mut().enumerate().take(210).skip(200) {
            *m = 0.4 - (i - 200) as f64 * 0.02;
        }
        // Mild jitter so the IQR is nonzero.
        for (i, m) in means.iter_mut().enumerate() {
            *m += (i % 7) as f64 * 1e-4;
        }
        let out = burst_filter(&means, 5.0, 15).unwrap();
        assert!(!out.keep[200]);
        assert!(!out.keep[205]);
        // Cooldown extends past the spike tail.
        assert!(!out.keep[215]);
        assert!(out.keep[150]);
        assert!(out.keep[300]);
        assert_eq!(out.removed.len(), 1);
    }
}
