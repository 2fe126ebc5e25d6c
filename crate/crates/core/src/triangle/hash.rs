use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TriangleError;

/// `2^61 - 1`.
pub const FIELD_PRIME: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % FIELD_PRIME as u128) as u64
}

/// `h(x) = [poly(x) < threshold]` for a uniformly random polynomial of degree
/// `k - 1` over `Z_P`, `P = 2^61 - 1`; `threshold = round(P p)`, so
/// `Pr[h(x) = 1]` is within `1/(2P)` of `p` and any `k` distinct keys below
/// `P` hash independently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KWiseHash {
    coeffs: Vec<u64>,
    threshold: u64,
    p: Ratio<i64>,
}

impl KWiseHash {
    pub fn new(k: usize, p: Ratio<i64>, seed: u64) -> Result<Self, TriangleError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_rng(k, p, &mut rng)
    }

    pub fn from_rng<R: Rng + ?Sized>(k: usize, p: Ratio<i64>, rng: &mut R) -> Result<Self, TriangleError> {
        assert!(k >= 1);
        if p <= Ratio::from_integer(0) || p > Ratio::from_integer(1) {
            return Err(TriangleError::BadProbability(p.to_string()));
        }
        let (num, den) = (*p.numer() as u128, *p.denom() as u128);
        let threshold = ((FIELD_PRIME as u128 * num * 2 + den) / (2 * den)) as u64;
        Ok(Self {
            coeffs: (0..k).map(|_| rng.gen_range(0..FIELD_PRIME)).collect(),
            threshold,
            p,
        })
    }

    pub fn p(&self) -> Ratio<i64> {
        self.p
    }

    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn value(&self, key: u64) -> u64 {
        debug_assert!(key < FIELD_PRIME);
        self.coeffs.iter().rev().fold(0, |acc, &c| (mul_mod(acc, key) + c) % FIELD_PRIME)
    }

    pub fn hit(&self, key: u64) -> bool {
        self.value(key) < self.threshold
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn probability_one_always_hits() {
        let h = KWiseHash::new(3, Ratio::from_integer(1), 5).unwrap();
        assert!((0..10_000u64).all(|x| h.hit(x)));
        assert!(KWiseHash::new(3, Ratio::from_integer(0), 5).is_err());
        assert!(KWiseHash::new(3, Ratio::new(3, 2), 5).is_err());
    }

    #[test]
    fn polynomial_evaluation() {
        let h = KWiseHash {
            coeffs: vec![7, 3, 2],
            threshold: 0,
            p: Ratio::new(1, 2),
        };
        assert_eq!(h.value(10), 7 + 30 + 200);
        assert_eq!(h.value(FIELD_PRIME - 1), (7 + FIELD_PRIME - 3 + 2) % FIELD_PRIME);
    }

    fn chi2_pvalue(observed: &[f64], expected: &[f64]) -> f64 {
        let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum();
        let dist = ChiSquared::new((observed.len() - 1) as f64).unwrap();
        1.0 - dist.cdf(stat)
    }

    #[test]
    fn marginal_over_seeds() {
        let p = Ratio::new(2, 7);
        let trials = 100_000u64;
        let key = 123_456;
        let hits = (0..trials).filter(|&s| KWiseHash::new(3, p, s).unwrap().hit(key)).count() as f64;
        let pf = 2.0 / 7.0;
        let t = trials as f64;
        let pv = chi2_pvalue(&[hits, t - hits], &[t * pf, t * (1.0 - pf)]);
        assert!(pv > 1e-3, "p-value {pv}");
    }

    #[test]
    fn three_keys_jointly_independent() {
        let p = Ratio::new(1, 3);
        let keys = [5u64, 77, 1_000_003];
        let trials = 60_000u64;
        let mut cells = [0f64; 8];
        for s in 0..trials {
            let h = KWiseHash::new(3, p, s).unwrap();
            let c = keys.iter().enumerate().fold(0, |acc, (i, &k)| acc | ((h.hit(k) as usize) << i));
            cells[c] += 1.0;
        }
        let pf: f64 = 1.0 / 3.0;
        let expected: Vec<f64> = (0..8)
            .map(|c: usize| {
                let ones = c.count_ones() as i32;
                trials as f64 * pf.powi(ones) * (1.0 - pf).powi(3 - ones)
            })
            .collect();
        let pv = chi2_pvalue(&cells, &expected);
        assert!(pv > 1e-3, "p-value {pv}");
    }
}
