//! Turnstile triangle counting on graph streams.
//!
//! A graph on `n` vertices is a frequency vector over the `C(n, 2)` possible
//! edges, indexed by [`Edge::index`]. Two seed-sampling estimators:
//!
//! * [`MaxDeg`] for binary streams whose every prefix has max degree `d`;
//! * [`BoundedL`] for strict turnstile multigraph streams of bounded length.

mod boundedl;
mod generate;
mod hash;
mod maxdeg;

pub use boundedl::{boundedl_estimate, BoundedL, BoundedLParams};
pub use generate::{churn_to, gen_graph_stream, plant_graph, GraphMode, GraphSpec, GraphStream};
pub use hash::{KWiseHash, FIELD_PRIME};
pub use maxdeg::{maxdeg_estimate, MaxDeg, MaxDegParams};

use std::collections::{HashMap, HashSet};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::bits_for;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TriangleError {
    #[error("infeasible graph spec: {0}")]
    Infeasible(String),
    #[error("sampling probability must lie in (0, 1], got {0}")]
    BadProbability(String),
    #[error("median needs an odd positive number of repetitions, got {0}")]
    EvenRepetitions(usize),
}

/// An undirected edge with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "self-loop");
        Self {
            u: a.min(b),
            v: a.max(b),
        }
    }

    /// Colexicographic rank among edges of a complete graph.
    pub fn index(&self) -> usize {
        self.v * (self.v - 1) / 2 + self.u
    }

    pub fn from_index(index: usize) -> Self {
        // Largest v with v(v-1)/2 <= index.
        let mut v = ((((8 * index + 1) as f64).sqrt() + 1.0) / 2.0) as usize;
        while v * (v - 1) / 2 > index {
            v -= 1;
        }
        while (v + 1) * v / 2 <= index {
            v += 1;
        }
        Self {
            u: index - v * (v - 1) / 2,
            v,
        }
    }

    pub fn touches(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }

    /// Whether the edges share exactly one endpoint.
    pub fn incident(&self, other: &Edge) -> bool {
        self != other && (other.touches(self.u) || other.touches(self.v))
    }

    /// The endpoint other than `x`.
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Final state of one estimator run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleEstimate {
    pub value: Ratio<i64>,
    pub peak_bits: u64,
    /// Largest `|S|` seen at any prefix.
    pub peak_seeds: u64,
    /// Largest single `|S_f|` seen.
    pub peak_neighbors: u64,
}

/// Number of coordinates of a graph stream on `n` vertices.
pub fn edge_dim(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Bits to name one edge of `K_n`.
pub fn edge_bits(n: usize) -> u64 {
    bits_for(edge_dim(n).max(1) as u64) as u64
}

/// Exact triangle count of a simple graph by neighborhood intersection.
pub fn brute_force_triangles(edges: &[Edge]) -> u64 {
    let mut adj: HashMap<usize, HashSet<usize>> = HashMap::new();
    for e in edges {
        adj.entry(e.u).or_default().insert(e.v);
        adj.entry(e.v).or_default().insert(e.u);
    }
    let mut count = 0;
    for e in edges {
        let (a, b) = (&adj[&e.u], &adj[&e.v]);
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        count += small.iter().filter(|&&w| w > e.v && large.contains(&w)).count() as u64;
    }
    count
}

/// Counts `w` with `uw` and `vw` both among `neighbors` (edges touching `u` or `v`).
pub(crate) fn closed_wedges<'a, I>(e: Edge, neighbors: I) -> u64
where
    I: IntoIterator<Item = &'a Edge>,
{
    let mut at_u = HashSet::new();
    let mut at_v = HashSet::new();
    for f in neighbors {
        if f.touches(e.u) {
            at_u.insert(f.other(e.u));
        } else if f.touches(e.v) {
            at_v.insert(f.other(e.v));
        }
    }
    at_u.intersection(&at_v).count() as u64
}

/// Median of `repetitions` independent runs; `run` receives the repetition index.
pub fn median_amplify<F>(repetitions: usize, run: F) -> Result<Ratio<i64>, TriangleError>
where
    F: Fn(usize) -> Ratio<i64> + Sync + Send,
{
    if repetitions.is_multiple_of(2) {
        return Err(TriangleError::EvenRepetitions(repetitions));
    }
    let mut xs: Vec<Ratio<i64>> = (0..repetitions).into_par_iter().map(&run).collect();
    xs.sort();
    Ok(xs[repetitions / 2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_index_round_trip() {
        let mut k = 0;
        for v in 1..60 {
            for u in 0..v {
                let e = Edge::new(v, u);
                assert_eq!(e.index(), k);
                assert_eq!(Edge::from_index(k), e);
                k += 1;
            }
        }
        assert_eq!(edge_dim(60), k);
        let big = Edge::new(2999, 2998);
        assert_eq!(Edge::from_index(big.index()), big);
    }

    fn complete(k: usize) -> Vec<Edge> {
        (0..k).flat_map(|v| (0..v).map(move |u| Edge::new(u, v))).collect()
    }

    #[test]
    fn small_graphs() {
        assert_eq!(brute_force_triangles(&complete(3)), 1);
        assert_eq!(brute_force_triangles(&complete(4)), 4);
        assert_eq!(brute_force_triangles(&complete(6)), 20);
        assert_eq!(brute_force_triangles(&[]), 0);
        let path = [Edge::new(0, 1), Edge::new(1, 2), Edge::new(2, 3)];
        assert_eq!(brute_force_triangles(&path), 0);
    }

    #[test]
    fn wedges_closed_at_an_edge() {
        let e = Edge::new(0, 1);
        let n = [Edge::new(0, 2), Edge::new(1, 2), Edge::new(0, 3), Edge::new(1, 4)];
        assert_eq!(closed_wedges(e, &n), 1);
    }

    #[test]
    fn median_rules() {
        let xs = [1, 2, 100].map(Ratio::from_integer);
        assert_eq!(median_amplify(3, |i| xs[i]).unwrap(), Ratio::from_integer(2));
        assert_eq!(median_amplify(1, |_| Ratio::new(7, 3)).unwrap(), Ratio::new(7, 3));
        assert!(median_amplify(2, |_| Ratio::from_integer(0)).is_err());
    }
}
