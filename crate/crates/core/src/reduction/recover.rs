use std::collections::HashMap;

use crate::scalar::Scalar;
use crate::sketch::SketchVector;
use crate::stream::{kappa_iter, FrequencyVector, Update};

use super::{run_from, run_from_iter, CompilationTrace, CompileMode, DeterministicAlg};

impl<Z: Scalar> CompilationTrace<Z> {
    /// The recovery stream
    /// `pi_n . negate(pi_n) . prod_i kappa(o_i - a_i e_i)^(2^s) . kappa(sketch)`,
    /// generated lazily.
    pub fn recovery_updates<'a>(
        &'a self,
        sketch: &'a SketchVector<Z>,
    ) -> impl Iterator<Item = Update<Z>> + 'a {
        let reps = 1u64 << self.state_bits;
        let prefix = self.final_prefix_updates();
        let undo = self.final_prefix_updates().map(|u| u.negated());
        let loops = (0..self.dim()).flat_map(move |i| {
            let back = self.raw_relation(i).neg();
            let block: Vec<Update<Z>> = kappa_iter(&back).collect();
            (0..reps).flat_map(move |_| block.clone())
        });
        let tail: Vec<Update<Z>> = kappa_iter(&sketch.to_vector()).collect();
        prefix.chain(undo).chain(loops).chain(tail)
    }

    /// `phi(x) + 2^s sum_i (o_i - a_i e_i)`, the frequency vector of
    /// [`recovery_updates`](Self::recovery_updates), computed symbolically.
    pub fn recovery_freq(&self, sketch: &SketchVector<Z>) -> FrequencyVector<Z> {
        let reps = Z::from_u64(1u64 << self.state_bits).expect("fits scalar");
        let mut total = sketch.to_vector();
        for i in 0..self.dim() {
            total = total.sub(&self.raw_relation(i).scale(&reps));
        }
        total
    }
}

/// Answer of a total-mode compilation: run the algorithm on `kappa(sketch)`.
pub fn recover_total<Z, A>(trace: &CompilationTrace<Z>, alg: &A, sketch: &SketchVector<Z>) -> A::Answer
where
    Z: Scalar,
    A: DeterministicAlg<Z>,
{
    assert_eq!(trace.mode, CompileMode::Total, "trace is not from total mode");
    let x = sketch.to_vector();
    let state = run_from_iter(alg, alg.initial_state(), kappa_iter(&x));
    alg.output(&state)
}

/// Answer of a general-mode compilation: run the algorithm on the recovery stream.
pub fn recover_general<Z, A>(
    trace: &CompilationTrace<Z>,
    alg: &A,
    sketch: &SketchVector<Z>,
) -> A::Answer
where
    Z: Scalar,
    A: DeterministicAlg<Z>,
{
    assert_eq!(trace.mode, CompileMode::General, "trace is not from general mode");
    let state = run_from_iter(alg, alg.initial_state(), trace.recovery_updates(sketch));
    alg.output(&state)
}

/// Shape of the state sequence `A(alpha . beta^l)`, `l = 0, 1, ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopRevisit {
    /// First `l` at which the sequence enters its cycle.
    pub preperiod: u64,
    pub period: u64,
    /// Smallest `l > 2^s` with `A(alpha . beta^l) = A(alpha . beta^(2^s))`,
    /// found by simulation.
    pub revisit: u64,
}

/// Simulates `A(alpha . beta^l)` until the cycle is found, then continues
/// past `l = 2^s` until that state recurs. Gives up (returning `None`) after
/// `2^(s+1) + 2` repetitions of `beta`.
pub fn loop_revisit<Z, A, I>(
    alg: &A,
    alpha: I,
    beta: &[Update<Z>],
    state_bits: u32,
) -> Option<LoopRevisit>
where
    Z: Scalar,
    A: DeterministicAlg<Z>,
    I: IntoIterator<Item = Update<Z>>,
{
    let target_l = 1u64 << state_bits;
    let limit = 2 * target_l + 2;
    let mut state = run_from_iter(alg, alg.initial_state(), alpha);
    let mut seen: HashMap<A::State, u64> = HashMap::new();
    let mut cycle = None;
    let mut at_target = None;
    let mut l = 0u64;
    loop {
        if cycle.is_none() {
            if let Some(&first) = seen.get(&state) {
                cycle = Some((first, l - first));
            } else {
                seen.insert(state.clone(), l);
            }
        }
        if l == target_l {
            at_target = Some(state.clone());
        }
        if l > target_l && at_target.as_ref() == Some(&state) {
            let (preperiod, period) = cycle?;
            return Some(LoopRevisit {
                preperiod,
                period,
                revisit: l,
            });
        }
        if l >= limit {
            return None;
        }
        state = run_from(alg, state, beta);
        l += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::toys::SumModCounter;

    #[test]
    fn revisit_on_a_counter() {
        let alg = SumModCounter::<i64>::new(2, 5);
        let beta = vec![Update::new(0, 2i64)];
        let r = loop_revisit(&alg, vec![Update::new(1, 1)], &beta, 3).unwrap();
        assert_eq!(r.preperiod, 0);
        assert_eq!(r.period, 5);
        assert_eq!(r.revisit, 8 + 5);
    }
}
