//! From deterministic turnstile streaming algorithms to module sketches.
//!
//! The compilers treat an algorithm as a black-box transition system and only
//! compare its states for equality. Walking little-endian enumerations of
//! `prod Z_{a_j} x N`, they look for the first pair of inputs the algorithm
//! cannot tell apart; the difference of that pair becomes the relation
//! `a_i e_i - o_i`, and the resulting [`SketchParams`] define a sketch that
//! is at most as large as the algorithm's state.
//!
//! * [`compile_total`] runs the algorithm on each canonical stream
//!   `kappa(x_j)` separately; [`recover_total`] replays `kappa(phi(x))`.
//! * [`compile_general`] follows one long covering stream and records prefix
//!   segments and loop segments; [`recover_general`] replays a lazily
//!   generated recovery stream built from them.

mod compile;
mod recover;
mod segment;
pub mod toys;

pub use compile::{
    compile, compile_general, compile_total, CollisionWitness, CompilationTrace, CompileError,
    CompileMode, CompileStats, SearchMode,
};
pub use recover::{loop_revisit, recover_general, recover_total, LoopRevisit};
pub use segment::EnumSegment;

use std::fmt::Debug;
use std::hash::Hash;

use crate::scalar::Scalar;
use crate::stream::Update;

/// A deterministic streaming algorithm seen as a transition system.
pub trait DeterministicAlg<Z: Scalar> {
    type State: Clone + Eq + Hash + Debug;
    type Answer: Clone + PartialEq + Debug;

    /// Dimension of the input vector.
    fn dim(&self) -> usize;

    /// Declared space `s`: the algorithm promises at most `2^s` reachable states.
    fn state_bits(&self) -> u32;

    fn initial_state(&self) -> Self::State;

    fn transition(&self, state: &Self::State, update: &Update<Z>) -> Self::State;

    fn output(&self, state: &Self::State) -> Self::Answer;
}

/// Feeds `updates` to `alg` starting from `state`.
pub fn run_from<'a, Z, A, I>(alg: &A, state: A::State, updates: I) -> A::State
where
    Z: Scalar,
    A: DeterministicAlg<Z> + ?Sized,
    I: IntoIterator<Item = &'a Update<Z>>,
{
    updates
        .into_iter()
        .fold(state, |s, u| alg.transition(&s, u))
}

/// Owned-update variant of [`run_from`] for generated streams.
pub fn run_from_iter<Z, A, I>(alg: &A, state: A::State, updates: I) -> A::State
where
    Z: Scalar,
    A: DeterministicAlg<Z> + ?Sized,
    I: IntoIterator<Item = Update<Z>>,
{
    updates
        .into_iter()
        .fold(state, |s, u| alg.transition(&s, &u))
}

/// Runs `alg` from its initial state and reports the final state and answer.
pub fn run_on_stream<'a, Z, A, I>(alg: &A, updates: I) -> (A::State, A::Answer)
where
    Z: Scalar,
    A: DeterministicAlg<Z> + ?Sized,
    I: IntoIterator<Item = &'a Update<Z>>,
{
    let state = run_from(alg, alg.initial_state(), updates);
    let answer = alg.output(&state);
    (state, answer)
}
