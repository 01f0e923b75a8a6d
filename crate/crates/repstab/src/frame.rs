//! Pauli frames: classical X/Z flip records propagated through Clifford
//! gates by conjugation. Phases are discarded; they are unobservable in
//! these experiments.

/// X/Z masks over at most 64 qubits; the all-zero frame is "no error".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PauliFrame {
    pub x: u64,
    pub z: u64,
}

impl PauliFrame {
    pub fn clear(&mut self) {
        self.x = 0;
        self.z = 0;
    }

    #[inline]
    pub fn flip_x(&mut self, q: usize) {
        self.x ^= 1 << q;
    }

    #[inline]
    pub fn flip_z(&mut self, q: usize) {
        self.z ^= 1 << q;
    }

    #[inline]
    pub fn flip_y(&mut self, q: usize) {
        self.x ^= 1 << q;
        self.z ^= 1 << q;
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        self.x >> q & 1 != 0
    }

    /// H: X <-> Z on qubit q.
    #[inline]
    pub fn conj_h(&mut self, q: usize) {
        let m = 1u64 << q;
        let xb = self.x & m;
        let zb = self.z & m;
        self.x = (self.x & !m) | zb;
        self.z = (self.z & !m) | xb;
    }

    /// CZ: X_a -> X_a Z_b and X_b -> X_b Z_a; Z components unchanged.
    #[inline]
    pub fn conj_cz(&mut self, a: usize, b: usize) {
        let xa = self.x >> a & 1;
        let xb = self.x >> b & 1;
        self.z ^= (xa << b) | (xb << a);
    }

    /// Discard all error content on a reset qubit.
    #[inline]
    pub fn erase(&mut self, q: usize) {
        let m = !(1u64 << q);
        self.x &= m;
        self.z &= m;
    }
}
