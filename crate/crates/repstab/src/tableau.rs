//! Stabilizer-tableau simulation for noiseless reference trajectories.
//!
//! Follows the Aaronson–Gottesman encoding: `n` destabilizer rows, `n`
//! stabilizer rows, one scratch row, with X/Z parts packed into `u64`
//! (qubit counts here never exceed 64). Only used once per shot batch, so
//! clarity wins over bit-level batching.

use rand::Rng;

use crate::circuit::{Circuit, Op};

#[derive(Debug, Clone)]
pub struct Tableau {
    n: usize,
    /// Row-major; rows 0..n are destabilizers, n..2n stabilizers, 2n scratch.
    x: Vec<u64>,
    z: Vec<u64>,
    /// Phase exponent of i, mod 4 (valid rows hold 0 or 2).
    r: Vec<u8>,
}

impl Tableau {
    /// |0...0> on `n` qubits.
    pub fn new(n: usize) -> Self {
        assert!(n <= 64, "tableau limited to 64 qubits");
        let mut t = Tableau {
            n,
            x: vec![0; 2 * n + 1],
            z: vec![0; 2 * n + 1],
            r: vec![0; 2 * n + 1],
        };
        for q in 0..n {
            t.x[q] = 1 << q; // destabilizer X_q
            t.z[n + q] = 1 << q; // stabilizer Z_q
        }
        t
    }

    #[inline]
    fn bit(v: u64, q: usize) -> u8 {
        ((v >> q) & 1) as u8
    }

    /// Phase contribution when multiplying Pauli (x1,z1) by (x2,z2) on one qubit.
    #[inline]
    fn g(x1: u8, z1: u8, x2: u8, z2: u8) -> i8 {
        match (x1, z1) {
            (0, 0) => 0,
            (1, 1) => z2 as i8 - x2 as i8,
            (1, 0) => (z2 as i8) * (2 * x2 as i8 - 1),
            (0, 1) => (x2 as i8) * (1 - 2 * z2 as i8),
            _ => unreachable!(),
        }
    }

    /// row[h] := row[i] * row[h]
    fn row_mult(&mut self, h: usize, i: usize) {
        let mut phase = self.r[h] as i32 + self.r[i] as i32;
        for q in 0..self.n {
            phase += Self::g(
                Self::bit(self.x[i], q),
                Self::bit(self.z[i], q),
                Self::bit(self.x[h], q),
                Self::bit(self.z[h], q),
            ) as i32;
        }
        self.r[h] = (phase.rem_euclid(4)) as u8;
        self.x[h] ^= self.x[i];
        self.z[h] ^= self.z[i];
    }

    pub fn h(&mut self, q: usize) {
        let m = 1u64 << q;
        for row in 0..2 * self.n {
            let xb = self.x[row] & m;
            let zb = self.z[row] & m;
            if xb != 0 && zb != 0 {
                self.r[row] = (self.r[row] + 2) % 4;
            }
            self.x[row] = (self.x[row] & !m) | zb;
            self.z[row] = (self.z[row] & !m) | xb;
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        let mc = 1u64 << c;
        let mt = 1u64 << t;
        for row in 0..2 * self.n {
            let xc = (self.x[row] & mc) != 0;
            let zc = (self.z[row] & mc) != 0;
            let xt = (self.x[row] & mt) != 0;
            let zt = (self.z[row] & mt) != 0;
            if xc && zt && (xt == zc) {
                self.r[row] = (self.r[row] + 2) % 4;
            }
            if xc {
                self.x[row] ^= mt;
            }
            if zt {
                self.z[row] ^= mc;
            }
        }
    }

    /// Apply Pauli X as a state update (flips signs of anticommuting rows).
    pub fn pauli_x(&mut self, q: usize) {
        let m = 1u64 << q;
        for row in 0..2 * self.n {
            if self.z[row] & m != 0 {
                self.r[row] = (self.r[row] + 2) % 4;
            }
        }
    }

    /// Apply Pauli Z as a state update.
    pub fn pauli_z(&mut self, q: usize) {
        let m = 1u64 << q;
        for row in 0..2 * self.n {
            if self.x[row] & m != 0 {
                self.r[row] = (self.r[row] + 2) % 4;
            }
        }
    }

    /// Apply Pauli Y (X and Z up to global phase).
    pub fn pauli_y(&mut self, q: usize) {
        self.pauli_x(q);
        self.pauli_z(q);
    }

    /// Measure qubit `q` in the Z basis. Random outcomes drawn from `rng`.
    pub fn measure<R: Rng>(&mut self, q: usize, rng: &mut R) -> bool {
        let n = self.n;
        let m = 1u64 << q;
        // A stabilizer row anticommuting with Z_q means the outcome is random.
        let pivot = (n..2 * n).find(|&row| self.x[row] & m != 0);
        if let Some(p) = pivot {
            let outcome: bool = rng.gen();
            for row in 0..2 * n {
                if row != p && self.x[row] & m != 0 {
                    self.row_mult(row, p);
                }
            }
            // Old stabilizer becomes the destabilizer; new stabilizer is ±Z_q.
            self.x[p - n] = self.x[p];
            self.z[p - n] = self.z[p];
            self.r[p - n] = self.r[p];
            self.x[p] = 0;
            self.z[p] = m;
            self.r[p] = if outcome { 2 } else { 0 };
            outcome
        } else {
            // Deterministic: accumulate into scratch row 2n.
            let s = 2 * n;
            self.x[s] = 0;
            self.z[s] = 0;
            self.r[s] = 0;
            for d in 0..n {
                if self.x[d] & m != 0 {
                    self.row_mult(s, d + n);
                }
            }
            self.r[s] == 2
        }
    }

    /// Measure-and-reset to |0>.
    pub fn reset<R: Rng>(&mut self, q: usize, rng: &mut R) {
        if self.measure(q, rng) {
            self.pauli_x(q);
        }
    }

    /// Run a full circuit from |0..0> with `initial_bits` applied as perfect
    /// X preparations; returns one outcome bit per scheduled measurement, in
    /// schedule order.
    pub fn run_circuit<R: Rng>(circuit: &Circuit, initial_bits: u64, rng: &mut R) -> Vec<bool> {
        let mut t = Tableau::new(circuit.qubit_count);
        for q in 0..circuit.qubit_count {
            if initial_bits >> q & 1 != 0 {
                t.pauli_x(q);
            }
        }
        let mut outcomes = Vec::with_capacity(circuit.schedule.len());
        for moment in &circuit.moments {
            for op in moment.ops() {
                match *op {
                    Op::H(q) => t.h(q),
                    Op::X(q) => t.pauli_x(q),
                    Op::Cz(a, b) => t.cz(a, b),
                    Op::M(q) => outcomes.push(t.measure(q, rng)),
                    Op::R(q) => t.reset(q, rng),
                    Op::Idle(..) => {}
                }
            }
        }
        outcomes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn computational_basis_measurements_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = Tableau::new(3);
        t.pauli_x(1);
        assert!(!t.measure(0, &mut rng));
        assert!(t.measure(1, &mut rng));
        assert!(!t.measure(2, &mut rng));
    }

    #[test]
    fn bell_pair_correlations() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut t = Tableau::new(2);
            t.h(0);
            t.cnot(0, 1);
            let a = t.measure(0, &mut rng);
            let b = t.measure(1, &mut rng);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn cz_in_plus_basis_measures_parity() {
        // |+>|1> -> CZ -> H on first: first qubit reads the Z value of second.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = Tableau::new(2);
        t.pauli_x(1);
        t.h(0);
        t.cz(0, 1);
        t.h(0);
        assert!(t.measure(0, &mut rng));
        // And with target |0> the outcome is 0.
        let mut t = Tableau::new(2);
        t.h(0);
        t.cz(0, 1);
        t.h(0);
        assert!(!t.measure(0, &mut rng));
    }

    #[test]
    fn repeated_random_measurement_is_sticky() {
        // Measuring X-basis state in Z: first outcome random, then repeats.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut t = Tableau::new(1);
        t.h(0);
        let first = t.measure(0, &mut rng);
        for _ in 0..5 {
            assert_eq!(t.measure(0, &mut rng), first);
        }
    }

    #[test]
    fn reset_clears_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut t = Tableau::new(2);
        t.pauli_x(0);
        t.h(1);
        t.reset(0, &mut rng);
        t.reset(1, &mut rng);
        assert!(!t.measure(0, &mut rng));
        assert!(!t.measure(1, &mut rng));
    }
}
