use std::collections::HashMap;

use num_rational::Ratio;
use rand::Rng;

use crate::scalar::bits_for;
use crate::stream::Update;

use super::{edge_bits, Edge, KWiseHash, TriangleError, TriangleEstimate};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedLParams {
    pub p: Ratio<i64>,
    pub d: usize,
    /// Stream length bound.
    pub l: u64,
    pub eps: Ratio<i64>,
    pub t_floor: u64,
    /// Whether to stop growing `S_f` at `2 d^2 L / (eps t_floor)`.
    pub capped: bool,
}

impl BoundedLParams {
    /// `p = min(1, 16 d / (eps^2 t_floor))`.
    pub fn auto(d: usize, eps: Ratio<i64>, t_floor: u64, l: u64) -> Self {
        let p = Ratio::from_integer(16 * d as i64) / (eps * eps * Ratio::from_integer(t_floor.max(1) as i64));
        Self {
            p: p.min(Ratio::from_integer(1)),
            d,
            l,
            eps,
            t_floor,
            capped: true,
        }
    }

    /// `2 d^2 L / (eps t_floor)`.
    pub fn neighbor_cap(&self) -> Option<Ratio<i64>> {
        let d = self.d as i64;
        self.capped.then(|| {
            Ratio::from_integer(2 * d * d * self.l as i64)
                / (self.eps * Ratio::from_integer(self.t_floor.max(1) as i64))
        })
    }
}

/// Seed counters `chi_e` plus, for each seed with positive count, clamped
/// counters of incident edges updated since its last `0 -> positive` step.
#[derive(Clone, Debug)]
pub struct BoundedL {
    n: usize,
    hash: KWiseHash,
    cap: Option<Ratio<i64>>,
    counts: HashMap<Edge, i64>,
    live: HashMap<Edge, HashMap<Edge, i64>>,
    live_at: HashMap<usize, Vec<Edge>>,
    stored: u64,
    entry_bits: u64,
    peak_bits: u64,
    peak_seeds: u64,
    peak_neighbors: u64,
}

impl BoundedL {
    pub fn new(n: usize, params: &BoundedLParams, hash: KWiseHash) -> Self {
        Self {
            n,
            hash,
            cap: params.neighbor_cap(),
            counts: HashMap::new(),
            live: HashMap::new(),
            live_at: HashMap::new(),
            stored: 0,
            entry_bits: edge_bits(n) + bits_for(params.l + 1) as u64,
            peak_bits: 0,
            peak_seeds: 0,
            peak_neighbors: 0,
        }
    }

    fn drop_live(&mut self, e: Edge) {
        if let Some(tracked) = self.live.remove(&e) {
            self.stored -= tracked.len() as u64;
            for x in [e.u, e.v] {
                let list = self.live_at.get_mut(&x).expect("indexed seed");
                list.retain(|f| *f != e);
                if list.is_empty() {
                    self.live_at.remove(&x);
                }
            }
        }
    }

    pub fn feed(&mut self, update: &Update<i64>) {
        let e = Edge::from_index(update.index);
        let gamma = update.delta;
        if self.hash.hit(update.index as u64) {
            let before = self.counts.get(&e).copied().unwrap_or(0);
            let after = before + gamma;
            self.counts.insert(e, after);
            if after == 0 {
                self.drop_live(e);
            } else if before == 0 && after > 0 {
                self.drop_live(e);
                self.live.insert(e, HashMap::new());
                self.live_at.entry(e.u).or_default().push(e);
                self.live_at.entry(e.v).or_default().push(e);
            }
        }
        let seeds: Vec<Edge> = [e.u, e.v]
            .iter()
            .flat_map(|x| self.live_at.get(x).into_iter().flatten())
            .filter(|f| **f != e)
            .copied()
            .collect();
        for f in seeds {
            let tracked = self.live.get_mut(&f).expect("indexed seed");
            if let Some(c) = tracked.get_mut(&e) {
                *c = (*c + gamma).max(0);
            } else if self.cap.is_none_or(|cap| Ratio::from_integer(tracked.len() as i64) < cap) {
                tracked.insert(e, gamma.max(0));
                self.stored += 1;
                self.peak_neighbors = self.peak_neighbors.max(tracked.len() as u64);
            }
        }
        self.peak_seeds = self.peak_seeds.max(self.counts.len() as u64);
        self.peak_bits = self.peak_bits.max(self.bits());
    }

    /// Clamped counter of `f` in `S_e`, if both exist.
    pub fn neighbor_counter(&self, e: Edge, f: Edge) -> Option<i64> {
        self.live.get(&e)?.get(&f).copied()
    }

    pub fn seed_count(&self, e: Edge) -> Option<i64> {
        self.counts.get(&e).copied()
    }

    pub fn is_live(&self, e: Edge) -> bool {
        self.live.contains_key(&e)
    }

    pub fn bits(&self) -> u64 {
        (self.counts.len() as u64 + self.stored) * self.entry_bits
    }

    pub fn peak_bits(&self) -> u64 {
        self.peak_bits
    }

    /// Largest `|S_f|` seen.
    pub fn peak_neighbors(&self) -> u64 {
        self.peak_neighbors
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `sum over (e,1) in S of p^-1 |{w : (uw,1), (vw,1) in S_e}|`.
    pub fn estimate(&self) -> Ratio<i64> {
        let mut closed = 0u64;
        for (e, tracked) in &self.live {
            if self.counts.get(e) != Some(&1) {
                continue;
            }
            let ones: Vec<Edge> = tracked.iter().filter(|(_, &c)| c == 1).map(|(f, _)| *f).collect();
            closed += super::closed_wedges(*e, &ones);
        }
        Ratio::from_integer(closed as i64) / self.hash.p()
    }

    pub fn finish(&self) -> TriangleEstimate {
        TriangleEstimate {
            value: self.estimate(),
            peak_bits: self.peak_bits,
            peak_seeds: self.peak_seeds,
            peak_neighbors: self.peak_neighbors,
        }
    }
}

/// One pass of the bounded-length estimator with a fresh pairwise hash.
pub fn boundedl_estimate<'a, I, R>(
    n: usize,
    updates: I,
    params: &BoundedLParams,
    rng: &mut R,
) -> Result<TriangleEstimate, TriangleError>
where
    I: IntoIterator<Item = &'a Update<i64>>,
    R: Rng + ?Sized,
{
    let hash = KWiseHash::from_rng(2, params.p, rng)?;
    let mut alg = BoundedL::new(n, params, hash);
    for u in updates {
        alg.feed(u);
    }
    Ok(alg.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ups(list: &[(usize, usize, i64)]) -> Vec<Update<i64>> {
        list.iter().map(|&(a, b, d)| Update::new(Edge::new(a, b).index(), d)).collect()
    }

    fn full(l: u64) -> BoundedLParams {
        BoundedLParams {
            p: Ratio::from_integer(1),
            d: 2,
            l,
            eps: Ratio::new(1, 2),
            t_floor: 1,
            capped: false,
        }
    }

    fn run(n: usize, list: &[(usize, usize, i64)], params: &BoundedLParams) -> BoundedL {
        let mut alg = BoundedL::new(n, params, KWiseHash::new(2, params.p, 9).unwrap());
        ups(list).iter().for_each(|u| alg.feed(u));
        alg
    }

    #[test]
    fn single_triangle() {
        let alg = run(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)], &full(3));
        assert_eq!(alg.estimate(), Ratio::from_integer(1));
    }

    #[test]
    fn inserted_then_deleted_edge_contributes_nothing() {
        let alg = run(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (0, 1, -1)], &full(4));
        assert_eq!(alg.estimate(), Ratio::from_integer(0));
        assert!(!alg.is_live(Edge::new(0, 1)));
        assert_eq!(alg.seed_count(Edge::new(0, 1)), Some(0));
    }

    #[test]
    fn counters_clamp_at_zero() {
        // 12 goes 1 -> 2 -> 1 -> 0 -> 1 after seed 01 starts tracking at 1.
        let alg = run(
            3,
            &[(1, 2, 1), (0, 1, 1), (1, 2, 1), (1, 2, -1), (1, 2, -1), (1, 2, 1)],
            &full(6),
        );
        // min over r >= t_01 of x_12 is 0; current value 1.
        assert_eq!(alg.neighbor_counter(Edge::new(0, 1), Edge::new(1, 2)), Some(1));
        let alg = run(3, &[(1, 2, 1), (0, 1, 1), (1, 2, -1)], &full(3));
        assert_eq!(alg.neighbor_counter(Edge::new(0, 1), Edge::new(1, 2)), Some(0));
    }

    #[test]
    fn multiplicity_two_seed_is_not_counted() {
        let alg = run(3, &[(0, 1, 1), (0, 1, 1), (1, 2, 1), (0, 2, 1)], &full(4));
        // 01 has count 2; 12 and 02 each lack a later neighbor pair.
        assert_eq!(alg.estimate(), Ratio::from_integer(0));
    }

    #[test]
    fn neighbor_cap() {
        let params = BoundedLParams {
            p: Ratio::from_integer(1),
            d: 1,
            l: 3,
            eps: Ratio::from_integer(1),
            t_floor: 2,
            capped: true,
        };
        assert_eq!(params.neighbor_cap(), Some(Ratio::from_integer(3)));
        let list: Vec<_> = (1..9).map(|v| (0, v, 1)).collect();
        let alg = run(9, &list, &params);
        assert!(alg.peak_neighbors() <= 3);
        assert_eq!(alg.peak_neighbors(), 3);
    }
}
