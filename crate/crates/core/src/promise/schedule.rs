use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::stream::{Stream, Update};

use super::{EncodedInstance, PromiseError, Variant};

/// Order in which the encoded vector is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schedule {
    /// The canonical stream: one update per nonzero coordinate, ascending.
    InsertOnly,
    /// Each coordinate takes up to `k` extra excursions before settling;
    /// updates of different coordinates are randomly interleaved.
    RandomChurn(u32),
    /// As `RandomChurn(1)`, but every update of player `e` comes after all
    /// other updates.
    AdversarialLastPlayer(usize),
}

/// Update sequence taking one coordinate from 0 to `target`.
fn coordinate_path<R: Rng + ?Sized>(target: i64, variant: Variant, churn: u32, rng: &mut R) -> Vec<i64> {
    let extra = rng.gen_range(0..=churn);
    match variant {
        Variant::Binary => {
            let mut d: Vec<i64> = (0..extra).flat_map(|_| [1, -1]).collect();
            if target == 1 {
                d.push(1);
            }
            d
        }
        Variant::PlusMinus(m) => {
            let r = 2 * m - 1;
            let mut at = 0;
            let mut d = Vec::new();
            for _ in 0..extra {
                let next = rng.gen_range(-r..=r);
                if next != at {
                    d.push(next - at);
                    at = next;
                }
            }
            if target != at {
                d.push(target - at);
            }
            d
        }
    }
}

fn interleave<R: Rng + ?Sized>(paths: &[(usize, Vec<i64>)], rng: &mut R) -> Vec<Update<i64>> {
    let mut tokens: Vec<u32> = paths
        .iter()
        .enumerate()
        .flat_map(|(k, (_, p))| std::iter::repeat_n(k as u32, p.len()))
        .collect();
    tokens.shuffle(rng);
    let mut next = vec![0usize; paths.len()];
    tokens
        .into_iter()
        .map(|k| {
            let (coord, p) = &paths[k as usize];
            let d = p[next[k as usize]];
            next[k as usize] += 1;
            Update::new(*coord, d)
        })
        .collect()
}

/// A stream whose frequency vector is the encoded instance and whose every
/// prefix stays in `{0,1}^n` (binary) or `[-(2M-1), 2M-1]^n` (plus-minus).
pub fn gen_stream<R: Rng + ?Sized>(
    target: &EncodedInstance,
    schedule: Schedule,
    rng: &mut R,
) -> Result<Stream<i64>, PromiseError> {
    let dim = target.dim();
    for (i, &v) in target.values.iter().enumerate() {
        let ok = match target.variant {
            Variant::Binary => v == 0 || v == 1,
            Variant::PlusMinus(m) => m >= 1 && v.abs() < 2 * m,
        };
        if !ok {
            return Err(PromiseError::Infeasible(format!(
                "coordinate {i} target {v} outside the box"
            )));
        }
    }
    let paths_for = |coords: &mut dyn Iterator<Item = usize>, churn: u32, rng: &mut R| {
        coords
            .map(|i| (i, coordinate_path(target.values[i], target.variant, churn, rng)))
            .filter(|(_, p)| !p.is_empty())
            .collect::<Vec<_>>()
    };
    let updates = match schedule {
        Schedule::InsertOnly => target
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(i, v)| Update::new(i, *v))
            .collect(),
        Schedule::RandomChurn(k) => {
            let paths = paths_for(&mut (0..dim), k, rng);
            interleave(&paths, rng)
        }
        Schedule::AdversarialLastPlayer(e) => {
            if e >= 3 {
                return Err(PromiseError::Infeasible(format!("no player {e}")));
            }
            let last = target.layout.player_range(e);
            let early = paths_for(&mut (0..dim).filter(|i| !last.contains(i)), 1, rng);
            let late = paths_for(&mut last.clone(), 1, rng);
            let mut u = interleave(&early, rng);
            u.extend(interleave(&late, rng));
            u
        }
    };
    Ok(Stream::new(dim, updates).expect("coordinates in range"))
}
