use std::collections::{HashMap, HashSet};

use num_rational::Ratio;
use rand::Rng;

use crate::stream::Update;

use super::{closed_wedges, edge_bits, Edge, KWiseHash, TriangleError, TriangleEstimate};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxDegParams {
    pub p: Ratio<i64>,
    /// Bound on the number of edges, used for the seed cap.
    pub m: u64,
    pub d: usize,
    /// Whether to stop seeding once `|S|` reaches the cap.
    pub capped: bool,
}

impl MaxDegParams {
    /// `p = min(1, 32 d / (eps^2 t_floor))`.
    pub fn auto(d: usize, eps: Ratio<i64>, t_floor: u64, m: u64) -> Self {
        let p = Ratio::from_integer(32 * d as i64) / (eps * eps * Ratio::from_integer(t_floor.max(1) as i64));
        Self {
            p: p.min(Ratio::from_integer(1)),
            m,
            d,
            capped: true,
        }
    }

    /// `floor(2 p m)`: the largest `|S|` allowed.
    pub fn seed_cap(&self) -> Option<u64> {
        self.capped
            .then(|| (self.p * Ratio::from_integer(2 * self.m as i64)).to_integer() as u64)
    }
}

/// Sampled seed edges, each with the later incident edges still present.
#[derive(Clone, Debug)]
pub struct MaxDeg {
    n: usize,
    hash: KWiseHash,
    cap: Option<u64>,
    seeds: HashMap<Edge, HashSet<Edge>>,
    seeds_at: HashMap<usize, Vec<Edge>>,
    stored: u64,
    peak_seeds: u64,
    peak_neighbors: u64,
    peak_bits: u64,
}

impl MaxDeg {
    pub fn new(n: usize, params: &MaxDegParams, hash: KWiseHash) -> Self {
        Self {
            n,
            hash,
            cap: params.seed_cap(),
            seeds: HashMap::new(),
            seeds_at: HashMap::new(),
            stored: 0,
            peak_seeds: 0,
            peak_neighbors: 0,
            peak_bits: 0,
        }
    }

    fn incident_seeds(&self, e: Edge) -> Vec<Edge> {
        [e.u, e.v]
            .iter()
            .flat_map(|x| self.seeds_at.get(x).into_iter().flatten())
            .filter(|f| **f != e)
            .copied()
            .collect()
    }

    pub fn feed(&mut self, update: &Update<i64>) {
        let e = Edge::from_index(update.index);
        match update.delta {
            1 => {
                let room = self.cap.is_none_or(|c| (self.seeds.len() as u64) < c);
                if room && !self.seeds.contains_key(&e) && self.hash.hit(update.index as u64) {
                    self.seeds.insert(e, HashSet::new());
                    self.seeds_at.entry(e.u).or_default().push(e);
                    self.seeds_at.entry(e.v).or_default().push(e);
                }
                for f in self.incident_seeds(e) {
                    let tracked = self.seeds.get_mut(&f).expect("indexed seed");
                    if tracked.insert(e) {
                        self.stored += 1;
                        self.peak_neighbors = self.peak_neighbors.max(tracked.len() as u64);
                    }
                }
            }
            -1 => {
                if let Some(tracked) = self.seeds.remove(&e) {
                    self.stored -= tracked.len() as u64;
                    for x in [e.u, e.v] {
                        let list = self.seeds_at.get_mut(&x).expect("indexed seed");
                        list.retain(|f| *f != e);
                        if list.is_empty() {
                            self.seeds_at.remove(&x);
                        }
                    }
                }
                for f in self.incident_seeds(e) {
                    if self.seeds.get_mut(&f).expect("indexed seed").remove(&e) {
                        self.stored -= 1;
                    }
                }
            }
            other => panic!("binary stream expected, got delta {other}"),
        }
        self.peak_seeds = self.peak_seeds.max(self.seeds.len() as u64);
        self.peak_bits = self.peak_bits.max(self.bits());
    }

    pub fn seeds(&self) -> usize {
        self.seeds.len()
    }

    pub fn bits(&self) -> u64 {
        (self.seeds.len() as u64 + self.stored) * edge_bits(self.n)
    }

    pub fn peak_seeds(&self) -> u64 {
        self.peak_seeds
    }

    pub fn peak_bits(&self) -> u64 {
        self.peak_bits
    }

    /// `sum_e p^-1 |{w : uw, vw in S_e}|`.
    pub fn estimate(&self) -> Ratio<i64> {
        let closed: u64 = self.seeds.iter().map(|(e, s)| closed_wedges(*e, s)).sum();
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

/// One pass of the bounded-degree estimator with a fresh 3-wise hash.
pub fn maxdeg_estimate<'a, I, R>(
    n: usize,
    updates: I,
    params: &MaxDegParams,
    rng: &mut R,
) -> Result<TriangleEstimate, TriangleError>
where
    I: IntoIterator<Item = &'a Update<i64>>,
    R: Rng + ?Sized,
{
    let hash = KWiseHash::from_rng(3, params.p, rng)?;
    let mut alg = MaxDeg::new(n, params, hash);
    for u in updates {
        alg.feed(u);
    }
    Ok(alg.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::Stream;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ins(pairs: &[(usize, usize, i64)]) -> Vec<Update<i64>> {
        pairs.iter().map(|&(a, b, d)| Update::new(Edge::new(a, b).index(), d)).collect()
    }

    fn full(m: u64) -> MaxDegParams {
        MaxDegParams {
            p: Ratio::from_integer(1),
            m,
            d: 2,
            capped: false,
        }
    }

    fn run(n: usize, ups: &[Update<i64>], params: &MaxDegParams) -> MaxDeg {
        let hash = KWiseHash::new(3, params.p, 0).unwrap();
        let mut alg = MaxDeg::new(n, params, hash);
        ups.iter().for_each(|u| alg.feed(u));
        alg
    }

    #[test]
    fn single_triangle_counts_once() {
        let ups = ins(&[(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        let alg = run(3, &ups, &full(3));
        assert_eq!(alg.estimate(), Ratio::from_integer(1));
        assert_eq!(alg.seeds(), 3);
    }

    #[test]
    fn empty_and_deleted() {
        assert_eq!(run(4, &[], &full(0)).estimate(), Ratio::from_integer(0));
        let ups = ins(&[(0, 1, 1), (1, 2, 1), (0, 2, 1), (1, 2, -1)]);
        let alg = run(3, &ups, &full(3));
        assert_eq!(alg.estimate(), Ratio::from_integer(0));
        assert_eq!(alg.bits(), 3 * edge_bits(3));
    }

    #[test]
    fn reinserted_edge_counts_against_later_neighbors_only() {
        // After 01 is re-added last, it is the latest edge and closes nothing;
        // 12 (the earliest surviving) still sees 02 and 01.
        let ups = ins(&[(0, 1, 1), (1, 2, 1), (0, 2, 1), (0, 1, -1), (0, 1, 1)]);
        assert_eq!(run(3, &ups, &full(3)).estimate(), Ratio::from_integer(1));
    }

    #[test]
    fn cap_is_respected() {
        let params = MaxDegParams {
            p: Ratio::new(1, 2),
            m: 3,
            d: 2,
            capped: true,
        };
        assert_eq!(params.seed_cap(), Some(3));
        let tight = MaxDegParams {
            p: Ratio::new(1, 3),
            m: 4,
            ..params.clone()
        };
        assert_eq!(tight.seed_cap(), Some(2));
        let ups: Vec<_> = (1..12).map(|v| Update::new(Edge::new(0, v).index(), 1)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let est = maxdeg_estimate(12, &ups, &tight, &mut rng).unwrap();
            assert!(est.peak_seeds <= 2);
        }
    }

    #[test]
    fn auto_probability() {
        let p = MaxDegParams::auto(4, Ratio::new(1, 2), 1500, 100);
        assert_eq!(p.p, Ratio::new(128, 375));
        assert_eq!(MaxDegParams::auto(4, Ratio::new(1, 2), 10, 100).p, Ratio::from_integer(1));
    }

    #[test]
    fn stream_type_round_trip() {
        let ups = ins(&[(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        let s = Stream::new(3, ups).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let est = maxdeg_estimate(3, &s, &full(3), &mut rng).unwrap();
        assert_eq!(est.value, Ratio::from_integer(1));
        assert_eq!(est.peak_seeds, 3);
    }
}
