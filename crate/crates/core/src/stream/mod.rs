//! The turnstile stream model.
//!
//! A stream over dimension `n` is a sequence of updates `(i, delta)` with
//! `i < n`; its state after `t` updates is the frequency vector obtained by
//! summing the first `t` deltas into their coordinates. Coordinates are
//! zero-based throughout the crate.
//!
//! Streams are usually consumed as iterators of [`Update`]s so that very long
//! generated streams never need to be materialized. [`Stream`] is the owned
//! form used for replayable files and small experiments.

mod constraint;
mod freq;
pub mod io;
mod order;

pub use constraint::{check_constraint, StreamConstraint, Violation};
pub use freq::FrequencyVector;
pub use order::{little_endian_cmp, LittleEndian};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StreamError {
    #[error("time {t} is past the end of a stream of length {len}")]
    TimeOutOfRange { t: usize, len: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("update index {index} outside dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

/// A single turnstile update: add `delta` to coordinate `index`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Update<Z> {
    pub index: usize,
    pub delta: Z,
}

impl<Z: Scalar> Update<Z> {
    pub fn new(index: usize, delta: Z) -> Self {
        Self { index, delta }
    }

    /// Zero deltas are legal but usually a generator bug.
    pub fn is_noop(&self) -> bool {
        self.delta.is_zero()
    }

    pub fn negated(&self) -> Self {
        Self {
            index: self.index,
            delta: -self.delta.clone(),
        }
    }
}

/// An owned, finite turnstile stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stream<Z> {
    dim: usize,
    updates: Vec<Update<Z>>,
}

impl<Z: Scalar> Stream<Z> {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            updates: Vec::new(),
        }
    }

    pub fn new(dim: usize, updates: Vec<Update<Z>>) -> Result<Self, StreamError> {
        if let Some(bad) = updates.iter().find(|u| u.index >= dim) {
            return Err(StreamError::IndexOutOfRange {
                index: bad.index,
                dim,
            });
        }
        Ok(Self { dim, updates })
    }

    /// Builds a stream from `(index, delta)` pairs given as `i64`.
    pub fn from_pairs(dim: usize, pairs: &[(usize, i64)]) -> Result<Self, StreamError> {
        Self::new(
            dim,
            pairs
                .iter()
                .map(|&(i, d)| Update::new(i, Z::lift(d)))
                .collect(),
        )
    }

    pub fn collect_from<I>(dim: usize, updates: I) -> Result<Self, StreamError>
    where
        I: IntoIterator<Item = Update<Z>>,
    {
        Self::new(dim, updates.into_iter().collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn updates(&self) -> &[Update<Z>] {
        &self.updates
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Update<Z>> {
        self.updates.iter()
    }

    pub fn into_updates(self) -> Vec<Update<Z>> {
        self.updates
    }

    pub fn push(&mut self, update: Update<Z>) -> Result<(), StreamError> {
        if update.index >= self.dim {
            return Err(StreamError::IndexOutOfRange {
                index: update.index,
                dim: self.dim,
            });
        }
        self.updates.push(update);
        Ok(())
    }

    /// State after the first `t` updates (the whole stream when `t` is `None`).
    pub fn freq(&self, t: Option<usize>) -> Result<FrequencyVector<Z>, StreamError> {
        let t = t.unwrap_or(self.updates.len());
        if t > self.updates.len() {
            return Err(StreamError::TimeOutOfRange {
                t,
                len: self.updates.len(),
            });
        }
        Ok(freq_of(self.dim, &self.updates[..t]))
    }

    /// The stream with every delta negated, same order.
    pub fn negate(&self) -> Self {
        Self {
            dim: self.dim,
            updates: self.updates.iter().map(Update::negated).collect(),
        }
    }

    pub fn concat(&self, other: &Self) -> Result<Self, StreamError> {
        if self.dim != other.dim {
            return Err(StreamError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut updates = self.updates.clone();
        updates.extend(other.updates.iter().cloned());
        Ok(Self {
            dim: self.dim,
            updates,
        })
    }

    pub fn count_noops(&self) -> usize {
        self.updates.iter().filter(|u| u.is_noop()).count()
    }
}

impl<'a, Z> IntoIterator for &'a Stream<Z> {
    type Item = &'a Update<Z>;
    type IntoIter = std::slice::Iter<'a, Update<Z>>;

    fn into_iter(self) -> Self::IntoIter {
        self.updates.iter()
    }
}

impl<Z> IntoIterator for Stream<Z> {
    type Item = Update<Z>;
    type IntoIter = std::vec::IntoIter<Update<Z>>;

    fn into_iter(self) -> Self::IntoIter {
        self.updates.into_iter()
    }
}

/// Frequency vector of an arbitrary (possibly lazy) update sequence.
pub fn freq_of<'a, Z, I>(dim: usize, updates: I) -> FrequencyVector<Z>
where
    Z: Scalar,
    I: IntoIterator<Item = &'a Update<Z>>,
{
    let mut x = FrequencyVector::zero(dim);
    for u in updates {
        x.add_at(u.index, &u.delta);
    }
    x
}

/// Owned-iterator variant of [`freq_of`], for generated streams.
pub fn freq_of_iter<Z, I>(dim: usize, updates: I) -> FrequencyVector<Z>
where
    Z: Scalar,
    I: IntoIterator<Item = Update<Z>>,
{
    let mut x = FrequencyVector::zero(dim);
    for u in updates {
        x.add_at(u.index, &u.delta);
    }
    x
}

/// The canonical stream of `x`: one update per nonzero coordinate, ascending.
pub fn kappa<Z: Scalar>(x: &FrequencyVector<Z>) -> Stream<Z> {
    Stream {
        dim: x.dim(),
        updates: kappa_iter(x).collect(),
    }
}

/// Lazy form of [`kappa`].
pub fn kappa_iter<Z: Scalar>(x: &FrequencyVector<Z>) -> impl Iterator<Item = Update<Z>> + '_ {
    x.iter().map(|(i, v)| Update::new(i, v.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(dim: usize, entries: &[(usize, i64)]) -> FrequencyVector<i64> {
        FrequencyVector::from_entries(dim, entries.iter().copied()).unwrap()
    }

    #[test]
    fn freq_cancels() {
        let s = Stream::<i64>::from_pairs(3, &[(0, 1), (1, 1), (0, -1)]).unwrap();
        assert_eq!(s.freq(Some(3)).unwrap(), fv(3, &[(1, 1)]));
    }

    #[test]
    fn freq_prefix() {
        let s = Stream::<i64>::from_pairs(4, &[(2, 5), (2, -2)]).unwrap();
        assert_eq!(s.freq(Some(1)).unwrap(), fv(4, &[(2, 5)]));
        assert_eq!(s.freq(None).unwrap(), fv(4, &[(2, 3)]));
    }

    #[test]
    fn freq_range_error() {
        let s = Stream::<i64>::from_pairs(2, &[(0, 1)]).unwrap();
        assert_eq!(
            s.freq(Some(2)),
            Err(StreamError::TimeOutOfRange { t: 2, len: 1 })
        );
    }

    #[test]
    fn kappa_examples() {
        assert!(kappa(&FrequencyVector::<i64>::zero(5)).is_empty());
        let x = fv(5, &[(0, 2), (3, -3)]);
        assert_eq!(
            kappa(&x).updates(),
            &[Update::new(0, 2), Update::new(3, -3)]
        );
        assert_eq!(kappa(&x).freq(None).unwrap(), x);
    }

    #[test]
    fn negate_examples() {
        let s = Stream::<i64>::from_pairs(2, &[(0, 1)]).unwrap();
        assert_eq!(s.negate().updates(), &[Update::new(0, -1)]);
        assert!(Stream::<i64>::empty(2).negate().is_empty());
        let both = s.concat(&s.negate()).unwrap();
        assert!(both.freq(None).unwrap().is_zero());
    }

    #[test]
    fn concat_checks_dimension() {
        let a = Stream::<i64>::empty(2);
        let b = Stream::<i64>::empty(3);
        assert_eq!(
            a.concat(&b),
            Err(StreamError::DimensionMismatch { left: 2, right: 3 })
        );
        let s = Stream::<i64>::from_pairs(2, &[(1, 4)]).unwrap();
        assert_eq!(a.concat(&s).unwrap(), s);
    }

    #[test]
    fn index_bounds_checked() {
        assert!(Stream::<i64>::from_pairs(2, &[(2, 1)]).is_err());
    }

    #[test]
    fn noop_lint() {
        let s = Stream::<i64>::from_pairs(2, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(s.count_noops(), 1);
    }
}
