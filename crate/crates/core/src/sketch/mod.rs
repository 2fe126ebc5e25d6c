//! The module sketch: a Z-module homomorphism `phi: Z^n -> M`.
//!
//! `M` is `prod Z_{a_i}` as a set, but addition overflows: whenever
//! coordinate `i` leaves `[0, a_i)` it wraps and the overflow vector `o_i`
//! (supported on coordinates below `i`) is added once per wrap. `phi` is
//! defined recursively from the top coordinate down,
//!
//! ```text
//! phi(x + r e_i) = (r mod a_i) e_i + phi(x + floor(r / a_i) o_i)   (x_j = 0 for j >= i)
//! ```
//!
//! with floored division, so negative coordinates wrap the other way. The
//! sum of two elements is `u star v = phi(u + v)`.

mod params;

pub use params::{ParamsFile, SketchParams};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::stream::{FrequencyVector, Update};

#[derive(Debug, Error)]
pub enum SketchError {
    #[error("sketch vectors belong to different parameters")]
    ParamsMismatch,
    #[error("modulus a_{index} = {value} is not positive")]
    InvalidModulus { index: usize, value: String },
    #[error("overflow o_{index} has an invalid entry at coordinate {coord}")]
    InvalidOverflow { index: usize, coord: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("value {0} does not fit in i64")]
    Overflow(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// An element of `M`: every coordinate `i` holds a value in `[0, a_i)`.
///
/// Only nonzero coordinates are stored, which in particular drops every
/// coordinate with `a_i = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SketchVector<Z> {
    dim: usize,
    params_id: u64,
    entries: Vec<(usize, Z)>,
}

impl<Z: Scalar> SketchVector<Z> {
    pub fn zero(params: &SketchParams<Z>) -> Self {
        Self {
            dim: params.dim(),
            params_id: params.id(),
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, Z)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Z {
        match self.entries.binary_search_by_key(&i, |(j, _)| *j) {
            Ok(k) => self.entries[k].1.clone(),
            Err(_) => Z::zero(),
        }
    }

    /// The same element viewed as a vector of `Z^n`.
    pub fn to_vector(&self) -> FrequencyVector<Z> {
        let mut x = FrequencyVector::zero(self.dim);
        for (i, v) in &self.entries {
            x.set(*i, v.clone());
        }
        x
    }

    /// Stored bits: `ceil(log2 a_i)` for each nontrivial coordinate.
    pub fn space_bits(&self, params: &SketchParams<Z>) -> u64 {
        params.state_bits()
    }

    fn check(&self, params: &SketchParams<Z>) -> Result<(), SketchError> {
        if self.params_id != params.id() || self.dim != params.dim() {
            return Err(SketchError::ParamsMismatch);
        }
        Ok(())
    }
}

fn reduce_in_place<Z: Scalar>(params: &SketchParams<Z>, z: &mut BTreeMap<usize, Z>) {
    // Top-down: fixing coordinate i only touches coordinates below i, so each
    // coordinate is visited once.
    let mut cursor = params.dim();
    while let Some((&i, _)) = z.range(..cursor).next_back() {
        cursor = i;
        let a = params.modulus(i);
        let v = z.remove(&i).unwrap();
        let (q, r) = v.div_mod_floor(a);
        if !r.is_zero() {
            z.insert(i, r);
        }
        if q.is_zero() {
            continue;
        }
        for (j, o) in params.overflow(i) {
            let slot = z.entry(*j).or_insert_with(Z::zero);
            *slot = slot.clone() + q.clone() * o.clone();
            if slot.is_zero() {
                z.remove(j);
            }
        }
    }
}

fn into_vector<Z: Scalar>(params: &SketchParams<Z>, z: BTreeMap<usize, Z>) -> SketchVector<Z> {
    SketchVector {
        dim: params.dim(),
        params_id: params.id(),
        entries: z.into_iter().collect(),
    }
}

/// The homomorphism `phi`.
pub fn phi<Z: Scalar>(params: &SketchParams<Z>, x: &FrequencyVector<Z>) -> SketchVector<Z> {
    debug_assert_eq!(x.dim(), params.dim());
    let mut z: BTreeMap<usize, Z> = x.iter().map(|(i, v)| (i, v.clone())).collect();
    reduce_in_place(params, &mut z);
    into_vector(params, z)
}

/// `u star v = phi(u + v)`.
pub fn star<Z: Scalar>(
    params: &SketchParams<Z>,
    u: &SketchVector<Z>,
    v: &SketchVector<Z>,
) -> Result<SketchVector<Z>, SketchError> {
    u.check(params)?;
    v.check(params)?;
    let mut z: BTreeMap<usize, Z> = u.entries.iter().cloned().collect();
    for (i, val) in &v.entries {
        let slot = z.entry(*i).or_insert_with(Z::zero);
        *slot = slot.clone() + val.clone();
    }
    z.retain(|_, v| !v.is_zero());
    reduce_in_place(params, &mut z);
    Ok(into_vector(params, z))
}

/// `phi(-u)`, the star-inverse of `u`.
pub fn inverse<Z: Scalar>(
    params: &SketchParams<Z>,
    u: &SketchVector<Z>,
) -> Result<SketchVector<Z>, SketchError> {
    u.check(params)?;
    Ok(phi(params, &u.to_vector().neg()))
}

/// `k`-fold star-sum of `u` by binary doubling.
pub fn scalar_mul<Z: Scalar>(
    params: &SketchParams<Z>,
    k: &Z,
    u: &SketchVector<Z>,
) -> Result<SketchVector<Z>, SketchError> {
    u.check(params)?;
    let mut base = if k.is_negative() {
        inverse(params, u)?
    } else {
        u.clone()
    };
    let two = Z::one() + Z::one();
    let mut k = k.abs();
    let mut acc = SketchVector::zero(params);
    while !k.is_zero() {
        let (q, r) = k.div_mod_floor(&two);
        if r.is_one() {
            acc = star(params, &acc, &base)?;
        }
        k = q;
        if !k.is_zero() {
            base = star(params, &base, &base)?;
        }
    }
    Ok(acc)
}

/// `phi(state + delta e_i)`.
pub fn update_sketch<Z: Scalar>(
    params: &SketchParams<Z>,
    state: &SketchVector<Z>,
    update: &Update<Z>,
) -> Result<SketchVector<Z>, SketchError> {
    state.check(params)?;
    if update.index >= params.dim() {
        return Err(SketchError::DimensionMismatch {
            expected: params.dim(),
            got: update.index + 1,
        });
    }
    if update.delta.is_zero() {
        return Ok(state.clone());
    }
    let mut z: BTreeMap<usize, Z> = state.entries.iter().cloned().collect();
    let slot = z.entry(update.index).or_insert_with(Z::zero);
    *slot = slot.clone() + update.delta.clone();
    if slot.is_zero() {
        z.remove(&update.index);
    }
    reduce_in_place(params, &mut z);
    Ok(into_vector(params, z))
}

/// Folds a whole stream into a sketch, starting from zero.
pub fn sketch_stream<'a, Z, I>(
    params: &SketchParams<Z>,
    updates: I,
) -> Result<SketchVector<Z>, SketchError>
where
    Z: Scalar,
    I: IntoIterator<Item = &'a Update<Z>>,
{
    let mut s = SketchVector::zero(params);
    for u in updates {
        s = update_sketch(params, &s, u)?;
    }
    Ok(s)
}

/// One rewrite of the smallest-violating-index loop: `z <- z - times * (a_i e_i - o_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite<Z> {
    pub index: usize,
    pub times: Z,
}

/// The rewriting loop for `phi`: repeatedly pick the smallest index whose
/// value lies outside `[0, a_i)` and subtract (or, for negative values, add)
/// `a_i e_i - o_i`.
///
/// Iterating yields each rewrite; [`PhiLoop::state`] exposes the working
/// vector between steps. With `batched`, one step applies the whole floored
/// quotient at once instead of a single subtraction.
pub struct PhiLoop<'p, Z> {
    params: &'p SketchParams<Z>,
    z: FrequencyVector<Z>,
    batched: bool,
    iterations: u64,
}

impl<'p, Z: Scalar> PhiLoop<'p, Z> {
    pub fn new(params: &'p SketchParams<Z>, x: &FrequencyVector<Z>, batched: bool) -> Self {
        Self {
            params,
            z: x.clone(),
            batched,
            iterations: 0,
        }
    }

    pub fn state(&self) -> &FrequencyVector<Z> {
        &self.z
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// Smallest index whose value is out of range.
    pub fn violating_index(&self) -> Option<usize> {
        self.z.iter().find_map(|(i, v)| {
            (v.is_negative() || *v >= *self.params.modulus(i)).then_some(i)
        })
    }

    /// Runs to completion and returns `phi(x)`.
    pub fn finish(mut self) -> SketchVector<Z> {
        for _ in self.by_ref() {}
        let z = self.z.iter().map(|(i, v)| (i, v.clone())).collect();
        into_vector(self.params, z)
    }
}

impl<Z: Scalar> Iterator for PhiLoop<'_, Z> {
    type Item = Rewrite<Z>;

    fn next(&mut self) -> Option<Rewrite<Z>> {
        let i = self.violating_index()?;
        let v = self.z.get(i);
        let a = self.params.modulus(i);
        let times = if self.batched {
            v.div_floor(a)
        } else if v.is_negative() {
            -Z::one()
        } else {
            Z::one()
        };
        self.z.add_scaled(&self.params.relation(i), &-times.clone());
        self.iterations += 1;
        Some(Rewrite { index: i, times })
    }
}
