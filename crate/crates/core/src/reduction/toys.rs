//! Small deterministic algorithms with known answers, for exercising the
//! compilers.

use std::marker::PhantomData;

use crate::scalar::Scalar;
use crate::sketch::phi;
use crate::stream::{FrequencyVector, Update};

use super::{recover_general, recover_total, CompilationTrace, CompileMode, DeterministicAlg};

/// A problem with a reference answer check: `accepts(x, a)` decides whether
/// `a` is a correct answer on input `x`. Inputs outside the promise accept
/// anything.
pub trait ReferenceProblem<Z: Scalar>: DeterministicAlg<Z> {
    fn in_promise(&self, _x: &FrequencyVector<Z>) -> bool {
        true
    }

    fn accepts(&self, x: &FrequencyVector<Z>, answer: &Self::Answer) -> bool;
}

fn reduce<Z: Scalar>(v: &Z, k: &Z) -> Z {
    v.mod_floor(k)
}

/// Stores `x mod k` coordinate-wise.
#[derive(Clone, Debug)]
pub struct ModMemory<Z> {
    n: usize,
    k: Z,
}

impl<Z: Scalar> ModMemory<Z> {
    pub fn new(n: usize, k: u64) -> Self {
        assert!(k >= 1);
        Self {
            n,
            k: Z::from_u64(k).unwrap(),
        }
    }
}

impl<Z: Scalar> DeterministicAlg<Z> for ModMemory<Z> {
    type State = Vec<Z>;
    type Answer = Vec<Z>;

    fn dim(&self) -> usize {
        self.n
    }

    fn state_bits(&self) -> u32 {
        self.n as u32 * self.k.ceil_log2()
    }

    fn initial_state(&self) -> Vec<Z> {
        vec![Z::zero(); self.n]
    }

    fn transition(&self, state: &Vec<Z>, u: &Update<Z>) -> Vec<Z> {
        let mut next = state.clone();
        next[u.index] = reduce(&(next[u.index].clone() + u.delta.clone()), &self.k);
        next
    }

    fn output(&self, state: &Vec<Z>) -> Vec<Z> {
        state.clone()
    }
}

impl<Z: Scalar> ReferenceProblem<Z> for ModMemory<Z> {
    fn accepts(&self, x: &FrequencyVector<Z>, answer: &Vec<Z>) -> bool {
        (0..self.n).all(|i| reduce(&x.get(i), &self.k) == answer[i])
    }
}

/// Keeps `sum_i x_i mod k`.
#[derive(Clone, Debug)]
pub struct SumModCounter<Z> {
    n: usize,
    k: Z,
}

impl<Z: Scalar> SumModCounter<Z> {
    pub fn new(n: usize, k: u64) -> Self {
        assert!(k >= 1);
        Self {
            n,
            k: Z::from_u64(k).unwrap(),
        }
    }
}

impl<Z: Scalar> DeterministicAlg<Z> for SumModCounter<Z> {
    type State = Z;
    type Answer = Z;

    fn dim(&self) -> usize {
        self.n
    }

    fn state_bits(&self) -> u32 {
        self.k.ceil_log2()
    }

    fn initial_state(&self) -> Z {
        Z::zero()
    }

    fn transition(&self, state: &Z, u: &Update<Z>) -> Z {
        reduce(&(state.clone() + u.delta.clone()), &self.k)
    }

    fn output(&self, state: &Z) -> Z {
        state.clone()
    }
}

impl<Z: Scalar> ReferenceProblem<Z> for SumModCounter<Z> {
    fn accepts(&self, x: &FrequencyVector<Z>, answer: &Z) -> bool {
        let sum = x.iter().fold(Z::zero(), |acc, (_, v)| acc + v.clone());
        reduce(&sum, &self.k) == *answer
    }
}

/// One state, answers `()`.
#[derive(Clone, Debug)]
pub struct Constant<Z> {
    n: usize,
    _z: PhantomData<Z>,
}

impl<Z> Constant<Z> {
    pub fn new(n: usize) -> Self {
        Self { n, _z: PhantomData }
    }
}

impl<Z: Scalar> DeterministicAlg<Z> for Constant<Z> {
    type State = ();
    type Answer = ();

    fn dim(&self) -> usize {
        self.n
    }

    fn state_bits(&self) -> u32 {
        0
    }

    fn initial_state(&self) {}

    fn transition(&self, _: &(), _: &Update<Z>) {}

    fn output(&self, _: &()) {}
}

impl<Z: Scalar> ReferenceProblem<Z> for Constant<Z> {
    fn accepts(&self, _: &FrequencyVector<Z>, _: &()) -> bool {
        true
    }
}

/// Parity of `sum_i x_i`, promised only on the box `[0, width)^n`.
///
/// The state also counts updates mod `churn`, so it is not a function of
/// the frequency vector; its answer is wrong for some inputs off the box.
#[derive(Clone, Debug)]
pub struct GridParity<Z> {
    n: usize,
    width: Z,
    churn: u64,
}

impl<Z: Scalar> GridParity<Z> {
    pub fn new(n: usize, width: u64, churn: u64) -> Self {
        assert!(width >= 1 && churn >= 1);
        Self {
            n,
            width: Z::from_u64(width).unwrap(),
            churn,
        }
    }
}

impl<Z: Scalar> DeterministicAlg<Z> for GridParity<Z> {
    type State = (Vec<Z>, u64);
    type Answer = bool;

    fn dim(&self) -> usize {
        self.n
    }

    fn state_bits(&self) -> u32 {
        self.n as u32 * self.width.ceil_log2() + Z::from_u64(self.churn).unwrap().ceil_log2()
    }

    fn initial_state(&self) -> Self::State {
        (vec![Z::zero(); self.n], 0)
    }

    fn transition(&self, state: &Self::State, u: &Update<Z>) -> Self::State {
        let mut next = state.clone();
        next.0[u.index] = reduce(&(next.0[u.index].clone() + u.delta.clone()), &self.width);
        next.1 = (next.1 + 1) % self.churn;
        next
    }

    fn output(&self, state: &Self::State) -> bool {
        let sum = state.0.iter().fold(Z::zero(), |acc, v| acc + v.clone());
        sum.is_odd()
    }
}

impl<Z: Scalar> ReferenceProblem<Z> for GridParity<Z> {
    fn in_promise(&self, x: &FrequencyVector<Z>) -> bool {
        (0..self.n).all(|i| {
            let v = x.get(i);
            !v.is_negative() && v < self.width
        })
    }

    fn accepts(&self, x: &FrequencyVector<Z>, answer: &bool) -> bool {
        if !self.in_promise(x) {
            return true;
        }
        let sum = x.iter().fold(Z::zero(), |acc, (_, v)| acc + v.clone());
        sum.is_odd() == *answer
    }
}

/// Reports a different declared space than the wrapped algorithm.
#[derive(Clone, Debug)]
pub struct Declared<A> {
    pub inner: A,
    pub state_bits: u32,
}

impl<Z: Scalar, A: DeterministicAlg<Z>> DeterministicAlg<Z> for Declared<A> {
    type State = A::State;
    type Answer = A::Answer;

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn state_bits(&self) -> u32 {
        self.state_bits
    }

    fn initial_state(&self) -> A::State {
        self.inner.initial_state()
    }

    fn transition(&self, state: &A::State, u: &Update<Z>) -> A::State {
        self.inner.transition(state, u)
    }

    fn output(&self, state: &A::State) -> A::Answer {
        self.inner.output(state)
    }
}

impl<Z: Scalar, A: ReferenceProblem<Z>> ReferenceProblem<Z> for Declared<A> {
    fn in_promise(&self, x: &FrequencyVector<Z>) -> bool {
        self.inner.in_promise(x)
    }

    fn accepts(&self, x: &FrequencyVector<Z>, answer: &A::Answer) -> bool {
        self.inner.accepts(x, answer)
    }
}

/// Outcome of checking recovered answers on every point of a box.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GridReport {
    pub points: u64,
    pub promise_points: u64,
    pub failures: Vec<Vec<i64>>,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Sketches every `x` in `[lo, hi]^n`, recovers an answer with the matching
/// procedure for the trace's mode, and checks it against the reference.
pub fn check_grid<A>(trace: &CompilationTrace<i64>, alg: &A, lo: i64, hi: i64) -> GridReport
where
    A: ReferenceProblem<i64>,
{
    let n = alg.dim();
    let mut report = GridReport::default();
    let mut point = vec![lo; n];
    loop {
        let x = FrequencyVector::from_i64s(&point);
        report.points += 1;
        if alg.in_promise(&x) {
            report.promise_points += 1;
            let sk = phi(&trace.params, &x);
            let answer = match trace.mode {
                CompileMode::Total => recover_total(trace, alg, &sk),
                CompileMode::General => recover_general(trace, alg, &sk),
            };
            if !alg.accepts(&x, &answer) {
                report.failures.push(point.clone());
            }
        }
        let mut k = 0;
        while k < n && point[k] == hi {
            point[k] = lo;
            k += 1;
        }
        if k == n {
            break;
        }
        point[k] += 1;
    }
    report
}
