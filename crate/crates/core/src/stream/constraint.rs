use std::collections::HashMap;

use crate::scalar::Scalar;

use super::Update;

/// Prefix-state restriction on a stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StreamConstraint<Z> {
    /// Every prefix state lies in `{0,1}^n`.
    Binary,
    /// Every prefix state has sup-norm at most the bound.
    Box(Z),
    /// At most this many updates.
    Length(usize),
    /// Every prefix state is componentwise nonnegative.
    StrictTurnstile,
}

/// First prefix that breaks a constraint. `time` counts updates, so the
/// violating state is the one after update number `time` (1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub time: usize,
    pub index: Option<usize>,
}

/// Scans every prefix of `updates`. Since only the updated coordinate changes
/// between consecutive prefixes, each step checks a single entry.
pub fn check_constraint<'a, Z, I>(updates: I, constraint: &StreamConstraint<Z>) -> Result<(), Violation>
where
    Z: Scalar,
    I: IntoIterator<Item = &'a Update<Z>>,
{
    let mut state: HashMap<usize, Z> = HashMap::new();
    for (k, u) in updates.into_iter().enumerate() {
        let time = k + 1;
        if let StreamConstraint::Length(limit) = constraint {
            if time > *limit {
                return Err(Violation { time, index: None });
            }
            continue;
        }
        let slot = state.entry(u.index).or_insert_with(Z::zero);
        *slot = slot.clone() + u.delta.clone();
        let v = &*slot;
        let ok = match constraint {
            StreamConstraint::Binary => v.is_zero() || v.is_one(),
            StreamConstraint::Box(bound) => v.abs() <= *bound,
            StreamConstraint::StrictTurnstile => !v.is_negative(),
            StreamConstraint::Length(_) => unreachable!(),
        };
        if !ok {
            return Err(Violation {
                time,
                index: Some(u.index),
            });
        }
    }
    Ok(())
}
