use std::collections::HashMap;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::sketch::{SketchError, SketchParams};
use crate::stream::{kappa_iter, FrequencyVector, LittleEndian, Update};

use super::{run_from, run_from_iter, DeterministicAlg, EnumSegment};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompileMode {
    Total,
    General,
}

/// How the first repeated state is located.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Remember every state seen, `O(2^s)` states of memory.
    HashMap,
    /// Replay a second copy of the algorithm up to each new position,
    /// quadratic time but only two states of memory.
    TwoCursor,
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("coordinate {index}: {observed} distinct states observed, more than 2^{state_bits}")]
    StateBudgetExceeded {
        index: usize,
        state_bits: u32,
        observed: u64,
    },
    #[error("declared state bits {0} too large to enumerate")]
    StateBitsTooLarge(u32),
    #[error(transparent)]
    Sketch(#[from] SketchError),
}

/// A pair of enumeration positions on which the algorithm agreed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionWitness<Z> {
    /// Free coordinate of the enumeration that produced the collision.
    pub index: usize,
    /// Coordinate whose relation was set from it (below `index` on backtracks).
    pub assigned: usize,
    pub earlier: u64,
    pub later: u64,
    pub x_earlier: FrequencyVector<Z>,
    pub x_later: FrequencyVector<Z>,
}

impl<Z: Scalar> CollisionWitness<Z> {
    pub fn difference(&self) -> FrequencyVector<Z> {
        self.x_later.sub(&self.x_earlier)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CompileStats {
    /// Enumeration positions visited by the leading cursor.
    pub enumerated: u64,
    /// Transition calls, both cursors.
    pub transitions: u64,
    pub backtracks: u64,
    /// Longest stream the algorithm was run on.
    pub max_stream_len: u64,
    /// Largest state table held (hash mode only).
    pub peak_table: u64,
}

/// Everything a compilation produced.
#[derive(Clone, Debug)]
pub struct CompilationTrace<Z> {
    pub mode: CompileMode,
    pub state_bits: u32,
    /// Normalized parameters.
    pub params: SketchParams<Z>,
    /// Overflow vectors as read off the collisions, entries in `(-a_j, a_j)`.
    pub raw_overflow: Vec<FrequencyVector<Z>>,
    /// For each coordinate, the collision that last set its relation.
    pub witnesses: Vec<CollisionWitness<Z>>,
    /// Every collision in the order found.
    pub history: Vec<CollisionWitness<Z>>,
    pub stats: CompileStats,
    segments: Vec<EnumSegment<Z>>,
    prefix_lens: Vec<usize>,
    loops: Vec<Option<EnumSegment<Z>>>,
}

impl<Z: Scalar> CompilationTrace<Z> {
    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// `a_i e_i - o_i` with the raw overflow.
    pub fn raw_relation(&self, i: usize) -> FrequencyVector<Z> {
        let mut r = self.raw_overflow[i].neg();
        r.set(i, self.params.modulus(i).clone());
        r
    }

    /// Segments making up the prefix `pi_i` (general mode; empty in total mode).
    pub fn prefix_segments(&self, i: usize) -> &[EnumSegment<Z>] {
        &self.segments[..self.prefix_lens[i]]
    }

    /// Segments of the final prefix `pi_n`.
    pub fn final_prefix(&self) -> &[EnumSegment<Z>] {
        match self.prefix_lens.last() {
            Some(&k) => &self.segments[..k],
            None => &[],
        }
    }

    pub fn prefix_updates(&self, i: usize) -> impl Iterator<Item = Update<Z>> + '_ {
        self.prefix_segments(i).iter().flat_map(|s| s.updates())
    }

    pub fn final_prefix_updates(&self) -> impl Iterator<Item = Update<Z>> + '_ {
        self.final_prefix().iter().flat_map(|s| s.updates())
    }

    /// The loop `rho_i`: the covering-stream segment between the colliding positions.
    pub fn loop_segment(&self, i: usize) -> Option<&EnumSegment<Z>> {
        self.loops[i].as_ref()
    }
}

struct Cursor<Z, S> {
    walker: LittleEndian<Z>,
    state: S,
    len: u64,
}

struct Stage<'a, Z, A: DeterministicAlg<Z>>
where
    Z: Scalar,
{
    alg: &'a A,
    mode: CompileMode,
    dim: usize,
    moduli: &'a [Z],
    base: &'a A::State,
    base_len: u64,
}

impl<'a, Z: Scalar, A: DeterministicAlg<Z>> Stage<'a, Z, A> {
    fn cursor(&self) -> Cursor<Z, A::State> {
        Cursor {
            walker: LittleEndian::new(self.dim, self.moduli),
            state: self.base.clone(),
            len: self.base_len,
        }
    }

    fn step(&self, c: &mut Cursor<Z, A::State>, stats: &mut CompileStats) {
        match self.mode {
            CompileMode::General => {
                let diff = c.walker.advance();
                c.state = run_from(self.alg, c.state.clone(), &diff);
                c.len += diff.len() as u64;
                stats.transitions += diff.len() as u64;
            }
            CompileMode::Total => {
                c.walker.advance();
                let x = c.walker.current();
                c.state = run_from_iter(self.alg, self.alg.initial_state(), kappa_iter(&x));
                c.len = x.l0() as u64;
                stats.transitions += c.len;
            }
        }
        stats.max_stream_len = stats.max_stream_len.max(c.len);
    }

    /// Returns `(earlier, later, state, stream length at earlier)` or the
    /// number of distinct states seen when the budget ran out.
    fn find_collision(
        &self,
        search: SearchMode,
        budget: u64,
        stats: &mut CompileStats,
    ) -> Result<(u64, u64, A::State, u64), u64> {
        match search {
            SearchMode::HashMap => {
                let mut seen: HashMap<A::State, (u64, u64)> = HashMap::new();
                let mut c = self.cursor();
                loop {
                    let p = c.walker.position();
                    stats.enumerated += 1;
                    if let Some(&(e, len)) = seen.get(&c.state) {
                        return Ok((e, p, c.state, len));
                    }
                    if p == budget {
                        return Err(p + 1);
                    }
                    seen.insert(c.state.clone(), (p, c.len));
                    stats.peak_table = stats.peak_table.max(seen.len() as u64);
                    self.step(&mut c, stats);
                }
            }
            SearchMode::TwoCursor => {
                let mut late = self.cursor();
                stats.enumerated += 1;
                loop {
                    if late.walker.position() == budget {
                        return Err(budget + 1);
                    }
                    self.step(&mut late, stats);
                    stats.enumerated += 1;
                    let l = late.walker.position();
                    let mut early = self.cursor();
                    while early.walker.position() < l {
                        if early.state == late.state {
                            return Ok((early.walker.position(), l, late.state, early.len));
                        }
                        self.step(&mut early, stats);
                    }
                }
            }
        }
    }
}

/// Runs the parameter procedure in the given mode.
pub fn compile<Z, A>(
    alg: &A,
    mode: CompileMode,
    search: SearchMode,
) -> Result<CompilationTrace<Z>, CompileError>
where
    Z: Scalar,
    A: DeterministicAlg<Z>,
{
    let n = alg.dim();
    let s = alg.state_bits();
    if s > 62 {
        return Err(CompileError::StateBitsTooLarge(s));
    }
    let budget = 1u64 << s;
    let mut stats = CompileStats::default();

    let mut moduli = vec![Z::one(); n];
    let mut raw = vec![FrequencyVector::zero(n); n];
    let mut witnesses: Vec<Option<CollisionWitness<Z>>> = vec![None; n];
    let mut history = Vec::new();
    let mut loops = vec![None; n];
    let mut segments: Vec<EnumSegment<Z>> = Vec::new();
    let mut prefix_lens = vec![0usize; n];
    // State and length of pi_i, general mode.
    let mut prefix_state: Vec<Option<(A::State, u64)>> = vec![None; n];
    let initial = (alg.initial_state(), 0u64);

    let mut i = 0;
    while i < n {
        let (base, base_len) = match (mode, i) {
            (CompileMode::General, i) if i > 0 => prefix_state[i - 1].clone().expect("prefix state set"),
            _ => initial.clone(),
        };
        let stage = Stage {
            alg,
            mode,
            dim: n,
            moduli: &moduli[..i],
            base: &base,
            base_len,
        };
        let (earlier, later, state, len) = stage
            .find_collision(search, budget, &mut stats)
            .map_err(|observed| CompileError::StateBudgetExceeded {
                index: i,
                state_bits: s,
                observed,
            })?;

        let x_earlier = LittleEndian::starting_at(n, &moduli[..i], earlier).current();
        let x_later = LittleEndian::starting_at(n, &moduli[..i], later).current();
        let diff = x_later.sub(&x_earlier);
        let target = diff.top_index().expect("later vector differs from earlier");
        assert!(diff.get(target).is_positive(), "little-endian order violated");
        if target < i {
            assert!(
                diff.get(target) < moduli[target],
                "backtracking must strictly decrease a_{target}"
            );
            stats.backtracks += 1;
        }
        moduli[target] = diff.get(target);
        raw[target] = diff.truncated(target).neg();

        if mode == CompileMode::General {
            let keep = if i == 0 { 0 } else { prefix_lens[i - 1] };
            segments.truncate(keep);
            segments.push(EnumSegment::new(n, &moduli[..i], 0, earlier));
            prefix_lens[target] = segments.len();
            prefix_state[target] = Some((state, len));
            loops[target] = Some(EnumSegment::new(n, &moduli[..i], earlier, later));
        }

        let w = CollisionWitness {
            index: i,
            assigned: target,
            earlier,
            later,
            x_earlier,
            x_later,
        };
        history.push(w.clone());
        witnesses[target] = Some(w);
        i = target + 1;
    }

    let params = SketchParams::from_raw_overflow(moduli, raw.clone())?;
    if mode == CompileMode::Total {
        loops = vec![None; n];
    }
    Ok(CompilationTrace {
        mode,
        state_bits: s,
        params,
        raw_overflow: raw,
        witnesses: witnesses
            .into_iter()
            .map(|w| w.expect("every coordinate assigned"))
            .collect(),
        history,
        stats,
        segments,
        prefix_lens,
        loops,
    })
}

/// Parameters for an algorithm computing a total function, found by running
/// the algorithm on `kappa(x_j)` for each enumerated `x_j` separately.
pub fn compile_total<Z, A>(alg: &A, search: SearchMode) -> Result<CompilationTrace<Z>, CompileError>
where
    Z: Scalar,
    A: DeterministicAlg<Z>,
{
    compile(alg, CompileMode::Total, search)
}

/// Parameters for an algorithm solving a general stream problem, found along
/// a single covering stream per coordinate.
pub fn compile_general<Z, A>(
    alg: &A,
    search: SearchMode,
) -> Result<CompilationTrace<Z>, CompileError>
where
    Z: Scalar,
    A: DeterministicAlg<Z>,
{
    compile(alg, CompileMode::General, search)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::toys::{check_grid, Constant, Declared, GridParity, ModMemory, SumModCounter};
    use crate::reduction::{recover_total, run_on_stream};
    use crate::sketch::phi;
    use crate::stream::{freq_of_iter, Stream};

    fn moduli(t: &CompilationTrace<i64>) -> Vec<i64> {
        t.params.moduli().to_vec()
    }

    /// Forgets the low bit of coordinate 0 once coordinate 1 is touched,
    /// which forces a backtrack in total mode.
    struct Forgetful;

    impl DeterministicAlg<i64> for Forgetful {
        type State = (i64, bool);
        type Answer = (i64, bool);
        fn dim(&self) -> usize {
            2
        }
        fn state_bits(&self) -> u32 {
            3
        }
        fn initial_state(&self) -> (i64, bool) {
            (0, false)
        }
        fn transition(&self, s: &(i64, bool), u: &Update<i64>) -> (i64, bool) {
            let seen = s.1 || u.index == 1;
            let m = if seen { 2 } else { 4 };
            let r = if u.index == 0 { s.0 + u.delta } else { s.0 };
            (r.rem_euclid(m), seen)
        }
        fn output(&self, s: &(i64, bool)) -> (i64, bool) {
            *s
        }
    }

    #[test]
    fn sum_mod_total_trace() {
        let t = compile_total(&SumModCounter::<i64>::new(2, 3), SearchMode::HashMap).unwrap();
        assert_eq!(moduli(&t), vec![3, 1]);
        assert_eq!(t.params.overflow(1), &[(0, 1)]);
        assert_eq!(t.raw_overflow[1], FrequencyVector::from_i64s(&[1, 0]));
        assert_eq!((t.witnesses[0].earlier, t.witnesses[0].later), (0, 3));
        assert_eq!((t.witnesses[1].earlier, t.witnesses[1].later), (1, 3));
    }

    #[test]
    fn sum_mod_general_trace() {
        let t = compile_general(&SumModCounter::<i64>::new(2, 3), SearchMode::HashMap).unwrap();
        assert_eq!(moduli(&t), vec![3, 1]);
        let pi0: Vec<_> = t.prefix_updates(0).collect();
        assert!(pi0.is_empty());
        let rho0: Vec<_> = t.loop_segment(0).unwrap().updates().collect();
        assert_eq!(rho0, Stream::from_pairs(2, &[(0, 1), (0, 1), (0, 1)]).unwrap().into_updates());
        let pi1: Vec<_> = t.prefix_updates(1).collect();
        assert_eq!(pi1, vec![Update::new(0, 1)]);
        let rho1: Vec<_> = t.loop_segment(1).unwrap().updates().collect();
        assert_eq!(
            rho1,
            Stream::from_pairs(2, &[(0, 1), (0, -2), (1, 1)]).unwrap().into_updates()
        );
        assert_eq!(t.raw_overflow[1], FrequencyVector::from_i64s(&[1, 0]));
    }

    #[test]
    fn mod_three_memory() {
        let alg = ModMemory::<i64>::new(2, 3);
        assert_eq!(alg.state_bits(), 4);
        let t = compile_total(&alg, SearchMode::HashMap).unwrap();
        assert_eq!(moduli(&t), vec![3, 3]);
        assert!(t.params.overflow(1).is_empty());
        assert_eq!((t.witnesses[1].earlier, t.witnesses[1].later), (0, 9));
        let a = recover_total(&t, &alg, &phi(&t.params, &FrequencyVector::from_i64s(&[7, 5])));
        let b = recover_total(&t, &alg, &phi(&t.params, &FrequencyVector::from_i64s(&[1, 2])));
        assert_eq!(a, b);
        assert_eq!(a, vec![1, 2]);
    }

    #[test]
    fn single_state_is_trivial() {
        for mode in [CompileMode::Total, CompileMode::General] {
            let t = compile(&Constant::<i64>::new(4), mode, SearchMode::HashMap).unwrap();
            assert_eq!(moduli(&t), vec![1; 4]);
            assert!(t.witnesses.iter().all(|w| (w.earlier, w.later) == (0, 1)));
            assert_eq!(t.final_prefix_updates().count(), 0);
        }
    }

    #[test]
    fn backtrack_lowers_earlier_modulus() {
        let t = compile_total(&Forgetful, SearchMode::HashMap).unwrap();
        assert_eq!(t.stats.backtracks, 1);
        assert_eq!(moduli(&t), vec![2, 1]);
        assert_eq!(t.history.len(), 3);
        assert_eq!(t.history[1].assigned, 0);
        assert_eq!(t.history[1].difference(), FrequencyVector::from_i64s(&[2, 0]));
        let g = compile_general(&Forgetful, SearchMode::HashMap).unwrap();
        assert!(g.params.order() <= 8);
    }

    #[test]
    fn budget_violation_is_reported() {
        let alg = Declared {
            inner: ModMemory::<i64>::new(2, 3),
            state_bits: 2,
        };
        match compile_total(&alg, SearchMode::HashMap) {
            Err(CompileError::StateBudgetExceeded { index, observed, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(observed, 5);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(matches!(
            compile_general(&alg, SearchMode::TwoCursor),
            Err(CompileError::StateBudgetExceeded { .. })
        ));
    }

    fn same(a: &CompilationTrace<i64>, b: &CompilationTrace<i64>) {
        assert_eq!(a.params, b.params);
        assert_eq!(a.raw_overflow, b.raw_overflow);
        assert_eq!(a.history, b.history);
        assert_eq!(a.final_prefix(), b.final_prefix());
        for i in 0..a.dim() {
            assert_eq!(a.loop_segment(i), b.loop_segment(i));
        }
    }

    #[test]
    fn search_modes_agree() {
        for mode in [CompileMode::Total, CompileMode::General] {
            same(
                &compile(&SumModCounter::new(3, 5), mode, SearchMode::HashMap).unwrap(),
                &compile(&SumModCounter::new(3, 5), mode, SearchMode::TwoCursor).unwrap(),
            );
            same(
                &compile(&ModMemory::new(2, 3), mode, SearchMode::HashMap).unwrap(),
                &compile(&ModMemory::new(2, 3), mode, SearchMode::TwoCursor).unwrap(),
            );
            same(
                &compile(&Forgetful, mode, SearchMode::HashMap).unwrap(),
                &compile(&Forgetful, mode, SearchMode::TwoCursor).unwrap(),
            );
            same(
                &compile(&GridParity::new(2, 3, 2), mode, SearchMode::HashMap).unwrap(),
                &compile(&GridParity::new(2, 3, 2), mode, SearchMode::TwoCursor).unwrap(),
            );
        }
    }

    #[test]
    fn loops_return_to_prefix_state() {
        let alg = GridParity::<i64>::new(2, 7, 4);
        let t = compile_general(&alg, SearchMode::HashMap).unwrap();
        for i in 0..2 {
            let pi: Vec<_> = t.prefix_updates(i).collect();
            let rho: Vec<_> = t.loop_segment(i).unwrap().updates().collect();
            let (s1, _) = run_on_stream(&alg, &pi);
            let both: Vec<_> = pi.iter().chain(&rho).cloned().collect();
            let (s2, _) = run_on_stream(&alg, &both);
            assert_eq!(s1, s2);
            assert_eq!(freq_of_iter(2, rho.into_iter()), t.raw_relation(i));
        }
        assert!(t.params.order() <= 1 << t.state_bits);
    }

    #[test]
    fn recovery_stream_frequency() {
        let alg = SumModCounter::<i64>::new(2, 3);
        let t = compile_general(&alg, SearchMode::HashMap).unwrap();
        let sk = phi(&t.params, &FrequencyVector::from_i64s(&[5, -4]));
        let replay = freq_of_iter(2, t.recovery_updates(&sk));
        assert_eq!(replay, t.recovery_freq(&sk));
        // phi = (1, 0) under a = (3, 1), o = (1); loops add 4 * (-(3, 0)) and 4 * (1, -1).
        assert_eq!(replay, FrequencyVector::from_i64s(&[1 - 12 + 4, -4]));
    }

    #[test]
    fn grid_correctness() {
        let r = check_grid(
            &compile_total(&ModMemory::new(2, 3), SearchMode::HashMap).unwrap(),
            &ModMemory::new(2, 3),
            0,
            8,
        );
        assert_eq!((r.points, r.failures.len()), (81, 0));
        let alg = SumModCounter::new(3, 4);
        let r = check_grid(&compile_total(&alg, SearchMode::HashMap).unwrap(), &alg, -3, 3);
        assert!(r.passed());
        let alg = SumModCounter::new(2, 3);
        let r = check_grid(&compile_general(&alg, SearchMode::HashMap).unwrap(), &alg, -3, 5);
        assert!(r.passed());
        let alg = GridParity::new(2, 7, 4);
        let r = check_grid(&compile_general(&alg, SearchMode::HashMap).unwrap(), &alg, -2, 8);
        assert_eq!(r.promise_points, 49);
        assert!(r.passed(), "{:?}", r.failures);
    }
}
