use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::Scalar;

use super::StreamError;

/// Sparse integer vector in `Z^n`. Only nonzero entries are stored, keyed by
/// coordinate in ascending order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FrequencyVector<Z> {
    dim: usize,
    entries: BTreeMap<usize, Z>,
}

impl<Z: Scalar> FrequencyVector<Z> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn unit(dim: usize, index: usize, value: Z) -> Self {
        let mut x = Self::zero(dim);
        x.set(index, value);
        x
    }

    pub fn from_entries<I, V>(dim: usize, entries: I) -> Result<Self, StreamError>
    where
        I: IntoIterator<Item = (usize, V)>,
        V: Into<i64>,
    {
        let mut x = Self::zero(dim);
        for (i, v) in entries {
            if i >= dim {
                return Err(StreamError::IndexOutOfRange { index: i, dim });
            }
            x.add_at(i, &Z::lift(v.into()));
        }
        Ok(x)
    }

    pub fn from_dense(values: &[Z]) -> Self {
        let mut x = Self::zero(values.len());
        for (i, v) in values.iter().enumerate() {
            x.set(i, v.clone());
        }
        x
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        let mut x = Self::zero(values.len());
        for (i, &v) in values.iter().enumerate() {
            x.set(i, Z::lift(v));
        }
        x
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, index: usize) -> Z {
        self.entries.get(&index).cloned().unwrap_or_else(Z::zero)
    }

    pub fn set(&mut self, index: usize, value: Z) {
        debug_assert!(index < self.dim, "index {index} >= dim {}", self.dim);
        if value.is_zero() {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
    }

    pub fn add_at(&mut self, index: usize, delta: &Z) {
        debug_assert!(index < self.dim, "index {index} >= dim {}", self.dim);
        if delta.is_zero() {
            return;
        }
        let v = self.get(index) + delta.clone();
        self.set(index, v);
    }

    /// Number of nonzero coordinates.
    pub fn l0(&self) -> usize {
        self.entries.len()
    }

    pub fn linf(&self) -> Z {
        self.entries
            .values()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Z::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nonzero entries in ascending coordinate order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Z)> + '_ {
        self.entries.iter().map(|(&i, v)| (i, v))
    }

    /// Highest coordinate with a nonzero value.
    pub fn top_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn to_dense(&self) -> Vec<Z> {
        (0..self.dim).map(|i| self.get(i)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (i, v) in other.iter() {
            out.add_at(i, v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Z::one())
    }

    pub fn scale(&self, k: &Z) -> Self {
        let mut out = Self::zero(self.dim);
        for (i, v) in self.iter() {
            out.set(i, v.clone() * k.clone());
        }
        out
    }

    /// Adds `k * other` in place.
    pub fn add_scaled(&mut self, other: &Self, k: &Z) {
        if k.is_zero() {
            return;
        }
        for (i, v) in other.iter() {
            self.add_at(i, &(v.clone() * k.clone()));
        }
    }

    /// Keeps only coordinates strictly below `bound`.
    pub fn truncated(&self, bound: usize) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .range(..bound)
                .map(|(&i, v)| (i, v.clone()))
                .collect(),
        }
    }
}

impl<Z: fmt::Debug> fmt::Debug for FrequencyVector<Z> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x[n={}]", self.dim)?;
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stored_entries_nonzero() {
        let mut x = FrequencyVector::<i64>::zero(4);
        x.add_at(1, &3);
        x.add_at(1, &-3);
        assert!(x.is_zero());
        assert_eq!(x.l0(), 0);
        x.add_at(2, &-7);
        assert_eq!(x.l0(), 1);
        assert_eq!(x.linf(), 7);
        assert_eq!(x.to_dense(), vec![0, 0, -7, 0]);
    }

    #[test]
    fn arithmetic() {
        let x = FrequencyVector::<i64>::from_i64s(&[1, -2, 0]);
        let y = FrequencyVector::<i64>::from_i64s(&[-1, 5, 4]);
        assert_eq!(x.add(&y).to_dense(), vec![0, 3, 4]);
        assert_eq!(x.sub(&y).to_dense(), vec![2, -7, -4]);
        assert_eq!(x.scale(&3).to_dense(), vec![3, -6, 0]);
        assert_eq!(y.truncated(2).to_dense(), vec![-1, 5, 0]);
        assert_eq!(y.top_index(), Some(2));
    }
}
