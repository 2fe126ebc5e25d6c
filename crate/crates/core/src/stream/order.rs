use crate::scalar::Scalar;

use super::{FrequencyVector, Update};

/// Enumerates `Z_{a_0} x ... x Z_{a_{i-1}} x N x {0}^{n-i-1}` in little-endian
/// order, starting from the zero vector.
///
/// Little-endian means the highest coordinate is the most significant digit,
/// so the vectors are counted like a mixed-radix number whose top digit (the
/// free coordinate `i = moduli.len()`) is unbounded.
#[derive(Clone, Debug)]
pub struct LittleEndian<Z> {
    dim: usize,
    moduli: Vec<Z>,
    digits: Vec<Z>,
    position: u64,
}

impl<Z: Scalar> LittleEndian<Z> {
    /// # Panics
    /// If a modulus is below one or the free coordinate is not below `dim`.
    pub fn new(dim: usize, moduli: &[Z]) -> Self {
        assert!(moduli.len() < dim, "free coordinate must be below dim");
        assert!(
            moduli.iter().all(|a| *a >= Z::one()),
            "moduli must be positive"
        );
        Self {
            dim,
            moduli: moduli.to_vec(),
            digits: vec![Z::zero(); moduli.len() + 1],
            position: 0,
        }
    }

    /// Enumerator positioned at the `position`-th vector.
    pub fn starting_at(dim: usize, moduli: &[Z], position: u64) -> Self {
        let mut it = Self::new(dim, moduli);
        let mut rest = Z::from_u64(position).expect("position fits scalar");
        for (k, a) in moduli.iter().enumerate() {
            let (q, r) = rest.div_mod_floor(a);
            it.digits[k] = r;
            rest = q;
        }
        let top = moduli.len();
        it.digits[top] = rest;
        it.position = position;
        it
    }

    pub fn free_coordinate(&self) -> usize {
        self.moduli.len()
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn current(&self) -> FrequencyVector<Z> {
        FrequencyVector::from_dense_prefix(self.dim, &self.digits)
    }

    /// Number of vectors per unit of the free coordinate, `prod a_j`.
    pub fn block_size(&self) -> Z {
        self.moduli.iter().fold(Z::one(), |acc, a| acc * a.clone())
    }

    /// Moves to the next vector and returns `kappa(next - current)`.
    pub fn advance(&mut self) -> Vec<Update<Z>> {
        let mut diff = Vec::new();
        self.position += 1;
        for k in 0..self.digits.len() {
            if k == self.moduli.len() {
                self.digits[k] = self.digits[k].clone() + Z::one();
                diff.push(Update::new(k, Z::one()));
                break;
            }
            let next = self.digits[k].clone() + Z::one();
            if next < self.moduli[k] {
                self.digits[k] = next;
                diff.push(Update::new(k, Z::one()));
                break;
            }
            let old = std::mem::replace(&mut self.digits[k], Z::zero());
            if !old.is_zero() {
                diff.push(Update::new(k, -old));
            }
        }
        diff
    }
}

impl<Z: Scalar> Iterator for LittleEndian<Z> {
    type Item = FrequencyVector<Z>;

    fn next(&mut self) -> Option<Self::Item> {
        let out = self.current();
        self.advance();
        Some(out)
    }
}

impl<Z: Scalar> FrequencyVector<Z> {
    fn from_dense_prefix(dim: usize, values: &[Z]) -> Self {
        let mut x = Self::zero(dim);
        for (i, v) in values.iter().enumerate() {
            x.set(i, v.clone());
        }
        x
    }
}

/// Little-endian comparison: the highest differing coordinate decides.
pub fn little_endian_cmp<Z: Scalar>(x: &FrequencyVector<Z>, y: &FrequencyVector<Z>) -> std::cmp::Ordering {
    let dim = x.dim().max(y.dim());
    for i in (0..dim).rev() {
        let o = x.get(i).cmp(&y.get(i));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}
