use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PromiseError, PAIRS};

/// An edge `(u, v)` with `u` on the player's lower side and `v` on the upper.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub u: usize,
    pub v: usize,
    pub z: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromiseInstance {
    pub n: usize,
    /// Player inputs, indexed like [`PAIRS`], each sorted by `u`.
    pub players: [Vec<Triple>; 3],
    pub tau: bool,
}

impl PromiseInstance {
    /// `N = 30n`, the size of each vertex set.
    pub fn big_n(&self) -> usize {
        30 * self.n
    }

    /// Triangles as vertex triples `(x_0, x_1, x_2)` with `x_a` in `V_a`.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let by_u = |e: usize| -> std::collections::HashMap<usize, usize> {
            self.players[e].iter().map(|t| (t.u, t.v)).collect()
        };
        let (p01, p02, p12) = (by_u(0), by_u(1), by_u(2));
        let mut out = Vec::new();
        for (&x0, &x1) in &p01 {
            if let (Some(&x2), Some(&y2)) = (p02.get(&x0), p12.get(&x1)) {
                if x2 == y2 {
                    out.push([x0, x1, x2]);
                }
            }
        }
        out.sort();
        out
    }
}

/// Samples a uniformly placed instance with `n` triangles and parity `tau`.
pub fn gen_instance<R: Rng + ?Sized>(n: usize, tau: bool, rng: &mut R) -> PromiseInstance {
    assert!(n >= 1);
    let big_n = 30 * n;
    let perms: Vec<Vec<usize>> = (0..3)
        .map(|_| {
            let mut p: Vec<usize> = (0..big_n).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    // V_a: [0, n) triangle vertices, then 9n isolated endpoints for each of
    // the two players touching side a, lower player index first.
    let iso = |side: usize, player: usize| -> &[usize] {
        let first = PAIRS.iter().position(|&(a, b)| a == side || b == side).unwrap();
        let off = if player == first { n } else { 10 * n };
        &perms[side][off..off + 9 * n]
    };
    let mut players: [Vec<Triple>; 3] = Default::default();
    for t in 0..n {
        let z01 = rng.gen::<bool>();
        let z02 = rng.gen::<bool>();
        let z12 = tau ^ z01 ^ z02;
        for (e, z) in [(0, z01), (1, z02), (2, z12)] {
            let (a, b) = PAIRS[e];
            players[e].push(Triple {
                u: perms[a][t],
                v: perms[b][t],
                z,
            });
        }
    }
    for (e, &(a, b)) in PAIRS.iter().enumerate() {
        for (&u, &v) in iso(a, e).iter().zip(iso(b, e)) {
            players[e].push(Triple { u, v, z: rng.gen() });
        }
        players[e].sort_by_key(|t| t.u);
    }
    PromiseInstance { n, players, tau }
}

/// Checks the promise: list sizes and ranges, no repeated endpoint within a
/// player, exactly `n` triangles, all other edges isolated, common parity `tau`.
pub fn validate_promise(inst: &PromiseInstance) -> Result<(), PromiseError> {
    let bad = |m: String| Err(PromiseError::InvalidInstance(m));
    if inst.n == 0 {
        return bad("n must be positive".into());
    }
    let big_n = inst.big_n();
    let mut degree = vec![vec![0usize; big_n]; 3];
    for (e, &(a, b)) in PAIRS.iter().enumerate() {
        let list = &inst.players[e];
        if list.len() != big_n / 3 {
            return bad(format!("player {e} has {} triples", list.len()));
        }
        let mut us = HashSet::new();
        let mut vs = HashSet::new();
        for t in list {
            if t.u >= big_n || t.v >= big_n {
                return bad(format!("player {e}: vertex out of range"));
            }
            if !us.insert(t.u) || !vs.insert(t.v) {
                return bad(format!("player {e}: repeated endpoint"));
            }
            degree[a][t.u] += 1;
            degree[b][t.v] += 1;
        }
    }
    let triangles = inst.triangles();
    if triangles.len() != inst.n {
        return bad(format!("{} triangles, expected {}", triangles.len(), inst.n));
    }
    let mut in_triangle = vec![HashSet::new(); 3];
    for tri in &triangles {
        for (a, &x) in tri.iter().enumerate() {
            in_triangle[a].insert(x);
        }
    }
    for (e, &(a, b)) in PAIRS.iter().enumerate() {
        for t in &inst.players[e] {
            let tri = in_triangle[a].contains(&t.u) && in_triangle[b].contains(&t.v);
            if !tri && (degree[a][t.u] != 1 || degree[b][t.v] != 1) {
                return bad(format!("player {e}: edge ({}, {}) neither isolated nor in a triangle", t.u, t.v));
            }
        }
    }
    let z = |e: usize, u: usize| inst.players[e].iter().find(|t| t.u == u).map(|t| t.z).unwrap();
    for tri in &triangles {
        if z(0, tri[0]) ^ z(1, tri[0]) ^ z(2, tri[1]) != inst.tau {
            return bad(format!("triangle {tri:?} has the wrong parity"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sizes_for_one_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = gen_instance(1, true, &mut rng);
        assert!(inst.players.iter().all(|p| p.len() == 10));
        assert_eq!(inst.triangles().len(), 1);
        validate_promise(&inst).unwrap();
    }

    #[test]
    fn parity_is_forced() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 0..1000 {
            let tau = k % 2 == 0;
            let inst = gen_instance(1 + k % 3, tau, &mut rng);
            validate_promise(&inst).unwrap();
        }
    }

    #[test]
    fn validator_rejects_broken_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let good = gen_instance(2, false, &mut rng);

        let mut flipped = good.clone();
        flipped.tau = true;
        assert!(validate_promise(&flipped).is_err());

        let mut repeated = good.clone();
        repeated.players[1][1].u = repeated.players[1][0].u;
        assert!(validate_promise(&repeated).is_err());

        let mut short = good.clone();
        short.players[2].pop();
        assert!(validate_promise(&short).is_err());

        // Point an isolated edge at a triangle vertex.
        let mut attached = good.clone();
        let tri = good.triangles()[0];
        let k = attached.players[0].iter().position(|t| t.u != tri[0] && t.u != good.triangles()[1][0]).unwrap();
        let spare_u = attached.players[0][k].u;
        let j = attached.players[1].iter().position(|t| t.u == tri[0]).unwrap();
        attached.players[1][j].u = spare_u;
        assert!(validate_promise(&attached).is_err());
    }
}
