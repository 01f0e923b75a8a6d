//! The six-component depolarizing noise model with optional burst and
//! correlated-channel extensions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{IdleClass, Op};

/// The six component classes of the error model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Dd,
    Cz,
    M,
    R,
    H,
    I,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::Dd,
        Component::Cz,
        Component::M,
        Component::R,
        Component::H,
        Component::I,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Component::Dd => "DD",
            Component::Cz => "CZ",
            Component::M => "M",
            Component::R => "R",
            Component::H => "H",
            Component::I => "I",
        }
    }
}

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("component {component} rate {rate} outside [0, 0.5]")]
    RateOutOfRange { component: &'static str, rate: f64 },
    #[error("burst config invalid: {0}")]
    BadBurst(String),
    #[error("correlated channel {0} invalid: {1}")]
    BadChannel(usize, String),
}

/// Device-wide error-rate spike: starting at some shot, all six rates are
/// multiplied by `amplitude * exp(-(j - start) / decay_shots)` until the
/// multiplier falls back to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstConfig {
    /// Probability per shot that a new burst starts.
    pub rate: f64,
    /// Initial rate multiplier, >= 1.
    pub amplitude: f64,
    /// e-folding length of the decay, in shots.
    pub decay_shots: f64,
}

impl BurstConfig {
    fn validate(&self) -> Result<(), NoiseError> {
        if !(0.0..=0.1).contains(&self.rate) {
            return Err(NoiseError::BadBurst(format!("rate {} outside [0, 0.1]", self.rate)));
        }
        if self.amplitude < 1.0 {
            return Err(NoiseError::BadBurst(format!("amplitude {} < 1", self.amplitude)));
        }
        if self.decay_shots <= 0.0 {
            return Err(NoiseError::BadBurst("decay_shots must be positive".into()));
        }
        Ok(())
    }

    /// Shots after the start for which the multiplier exceeds 1.
    pub fn active_len(&self) -> u64 {
        (self.decay_shots * self.amplitude.ln()).ceil() as u64
    }

    /// Multiplier contributed by a burst that started `delta` shots ago.
    pub fn multiplier(&self, delta: u64) -> f64 {
        (self.amplitude * (-(delta as f64) / self.decay_shots).exp()).max(1.0)
    }
}

/// Injectable correlated error channels, used to validate the correlation
/// diagnostics against planted ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorrelatedChannel {
    /// Each round, with probability `prob`, flip the readouts of measure
    /// qubits `s_a` (that round) and `s_b` (`dt` rounds later) together.
    /// With `dt = 0` this is the same-round crosstalk signature.
    PairFlip { s_a: usize, s_b: usize, dt: usize, prob: f64 },
    /// A persistent data-qubit fault: triggered with `trigger_prob` per
    /// round, it survives each subsequent round with `survival_prob`, and
    /// while active flips the code-detected Pauli of that data qubit with
    /// probability 1/2 per round.
    PersistentFlip {
        data_qubit: usize,
        trigger_prob: f64,
        survival_prob: f64,
    },
}

impl CorrelatedChannel {
    fn validate(&self, index: usize) -> Result<(), NoiseError> {
        match *self {
            CorrelatedChannel::PairFlip { prob, .. } => {
                if !(0.0..=0.5).contains(&prob) {
                    return Err(NoiseError::BadChannel(index, format!("prob {prob} outside [0, 0.5]")));
                }
            }
            CorrelatedChannel::PersistentFlip {
                trigger_prob,
                survival_prob,
                ..
            } => {
                if !(0.0..=0.5).contains(&trigger_prob) {
                    return Err(NoiseError::BadChannel(
                        index,
                        format!("trigger_prob {trigger_prob} outside [0, 0.5]"),
                    ));
                }
                if !(survival_prob > 0.0 && survival_prob < 1.0) {
                    return Err(NoiseError::BadChannel(
                        index,
                        format!("survival_prob {survival_prob} outside (0, 1)"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The component error vector `x` plus optional extensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub dd: f64,
    pub cz: f64,
    pub m: f64,
    pub r: f64,
    pub h: f64,
    pub i: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bursts: Option<BurstConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub correlated: Vec<CorrelatedChannel>,
}

impl NoiseModel {
    pub fn zero() -> Self {
        NoiseModel {
            dd: 0.0,
            cz: 0.0,
            m: 0.0,
            r: 0.0,
            h: 0.0,
            i: 0.0,
            bursts: None,
            correlated: Vec::new(),
        }
    }

    /// Table of rates used for the subsampling and boundary-effect studies
    /// (H 1e-3, CZ 5e-3, M 2e-3, R 5e-3, idle-during-M+R 4.4e-2, gate idle 7e-4).
    pub fn reference_low() -> Self {
        NoiseModel {
            dd: 4.4e-2,
            cz: 5e-3,
            m: 2e-3,
            r: 5e-3,
            h: 1e-3,
            i: 7e-4,
            bursts: None,
            correlated: Vec::new(),
        }
    }

    /// Component rates calibrated for the bit flip code.
    pub fn bitflip_calibrated() -> Self {
        NoiseModel {
            dd: 5.1e-2,
            cz: 6.6e-3,
            m: 1.9e-2,
            r: 5.0e-3,
            h: 1.1e-3,
            i: 8.4e-4,
            bursts: None,
            correlated: Vec::new(),
        }
    }

    /// Component rates calibrated for the phase flip code (also used for the
    /// distance-2 surface code, whose data qubits hold superposition states).
    pub fn phaseflip_calibrated() -> Self {
        NoiseModel {
            dd: 4.1e-2,
            cz: 6.6e-3,
            m: 1.9e-2,
            r: 5.0e-3,
            h: 1.1e-3,
            i: 5.8e-4,
            bursts: None,
            correlated: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for c in Component::ALL {
            let rate = self.rate(c);
            if !(0.0..=0.5).contains(&rate) {
                return Err(NoiseError::RateOutOfRange {
                    component: c.name(),
                    rate,
                });
            }
        }
        if let Some(b) = &self.bursts {
            b.validate()?;
        }
        for (idx, ch) in self.correlated.iter().enumerate() {
            ch.validate(idx)?;
        }
        Ok(())
    }

    pub fn rate(&self, c: Component) -> f64 {
        match c {
            Component::Dd => self.dd,
            Component::Cz => self.cz,
            Component::M => self.m,
            Component::R => self.r,
            Component::H => self.h,
            Component::I => self.i,
        }
    }

    pub fn set_rate(&mut self, c: Component, rate: f64) {
        match c {
            Component::Dd => self.dd = rate,
            Component::Cz => self.cz = rate,
            Component::M => self.m = rate,
            Component::R => self.r = rate,
            Component::H => self.h = rate,
            Component::I => self.i = rate,
        }
    }

    /// All six rates scaled by `factor` (bursts/correlated dropped; used for
    /// budget sweeps over the plain component vector).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = NoiseModel::zero();
        for c in Component::ALL {
            out.set_rate(c, self.rate(c) * factor);
        }
        out
    }

    /// The component governing errors after a given op, if any. The data
    /// pi pulses (`Op::X`) are deterministic bookkeeping absorbed into the
    /// reference trajectory and carry no noise of their own.
    pub fn component_for(op: &Op) -> Option<Component> {
        match op {
            Op::H(_) => Some(Component::H),
            Op::X(_) => None,
            Op::Cz(..) => Some(Component::Cz),
            Op::M(_) => Some(Component::M),
            Op::R(_) => Some(Component::R),
            Op::Idle(_, IdleClass::Gate) => Some(Component::I),
            Op::Idle(_, IdleClass::MeasureReset) => Some(Component::Dd),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let json = r##"{"dd":0.041,"cz":0.0066,"m":0.019,"r":0.005,"h":0.0011,"i":0.00058,
            "bursts":{"rate":0.005,"amplitude":20.0,"decay_shots":30.0},
            "correlated":[{"kind":"pair-flip","s_a":0,"s_b":4,"dt":0,"prob":0.002},
                          {"kind":"persistent-flip","data_qubit":2,"trigger_prob":0.001,"survival_prob":0.8}]}"##;
        let model: NoiseModel = serde_json::from_str(json).unwrap();
        model.validate().unwrap();
        assert_eq!(model.rate(Component::Dd), 0.041);
        assert_eq!(model.correlated.len(), 2);
        let back = serde_json::to_string(&model).unwrap();
        let again: NoiseModel = serde_json::from_str(&back).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn rate_bounds_enforced() {
        let mut m = NoiseModel::zero();
        m.dd = 0.6;
        assert!(matches!(m.validate(), Err(NoiseError::RateOutOfRange { .. })));
    }

    #[test]
    fn burst_multiplier_decays_to_one() {
        let b = BurstConfig {
            rate: 0.005,
            amplitude: 20.0,
            decay_shots: 30.0,
        };
        assert!((b.multiplier(0) - 20.0).abs() < 1e-12);
        assert!(b.multiplier(b.active_len()) <= 1.0 + 1e-9);
        assert!(b.multiplier(10) > b.multiplier(20));
    }
}
