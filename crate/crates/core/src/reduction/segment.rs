use crate::scalar::Scalar;
use crate::stream::{FrequencyVector, LittleEndian, Update};

/// A replayable slice of a covering stream: the updates
/// `kappa(x_{k+1} - x_k)` for `k` in `start..end`, where `x_k` is the `k`-th
/// vector of the little-endian enumeration over `moduli x N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumSegment<Z> {
    pub dim: usize,
    pub moduli: Vec<Z>,
    pub start: u64,
    pub end: u64,
}

impl<Z: Scalar> EnumSegment<Z> {
    pub fn new(dim: usize, moduli: &[Z], start: u64, end: u64) -> Self {
        debug_assert!(start <= end);
        Self {
            dim,
            moduli: moduli.to_vec(),
            start,
            end,
        }
    }

    pub fn steps(&self) -> u64 {
        self.end - self.start
    }

    /// Lazily regenerates the segment's updates.
    pub fn updates(&self) -> impl Iterator<Item = Update<Z>> + '_ {
        let mut walker = LittleEndian::starting_at(self.dim, &self.moduli, self.start);
        (self.start..self.end).flat_map(move |_| walker.advance())
    }

    /// `x_end - x_start`.
    pub fn freq(&self) -> FrequencyVector<Z> {
        let a = LittleEndian::starting_at(self.dim, &self.moduli, self.start).current();
        let b = LittleEndian::starting_at(self.dim, &self.moduli, self.end).current();
        b.sub(&a)
    }

    pub fn len(&self) -> usize {
        self.updates().count()
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::freq_of_iter;

    #[test]
    fn segment_freq_matches_replay() {
        let seg = EnumSegment::new(3, &[3i64, 2], 4, 17);
        assert_eq!(freq_of_iter(3, seg.updates()), seg.freq());
        let empty = EnumSegment::new(3, &[3i64, 2], 5, 5);
        assert!(empty.is_empty());
        assert_eq!(empty.updates().count(), 0);
    }
}
