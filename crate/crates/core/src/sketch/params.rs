use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::{bits_for, Scalar};
use crate::stream::FrequencyVector;

use super::SketchError;

/// Moduli `a_i` and overflow vectors `o_i` defining the module
/// `M = (prod Z_{a_i}, star)`.
///
/// Each `o_i` is stored sparsely as `(j, value)` pairs with `j < i` and
/// `0 <= value < a_j`. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchParams<Z> {
    dim: usize,
    moduli: Vec<Z>,
    overflow: Vec<Vec<(usize, Z)>>,
    id: u64,
}

impl<Z: Scalar> SketchParams<Z> {
    pub fn new(moduli: Vec<Z>, overflow: Vec<Vec<(usize, Z)>>) -> Result<Self, SketchError> {
        let dim = moduli.len();
        if overflow.len() != dim {
            return Err(SketchError::DimensionMismatch {
                expected: dim,
                got: overflow.len(),
            });
        }
        for (i, a) in moduli.iter().enumerate() {
            if *a < Z::one() {
                return Err(SketchError::InvalidModulus {
                    index: i,
                    value: a.to_string(),
                });
            }
        }
        let mut cleaned = Vec::with_capacity(dim);
        for (i, o) in overflow.into_iter().enumerate() {
            let mut o: Vec<(usize, Z)> = o.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            o.sort_by_key(|(j, _)| *j);
            for w in o.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(SketchError::InvalidOverflow { index: i, coord: w[0].0 });
                }
            }
            for (j, v) in &o {
                if *j >= i || v.is_negative() || *v >= moduli[*j] {
                    return Err(SketchError::InvalidOverflow { index: i, coord: *j });
                }
            }
            cleaned.push(o);
        }
        Ok(Self::assemble(moduli, cleaned))
    }

    /// Builds params from overflow vectors with arbitrary integer entries
    /// supported below their index. Each `o_i` is replaced by its reduced
    /// representative `phi(o_i)` under the lower-index parameters, which
    /// leaves the quotient (and hence `phi`) unchanged.
    pub fn from_raw_overflow(
        moduli: Vec<Z>,
        raw: Vec<FrequencyVector<Z>>,
    ) -> Result<Self, SketchError> {
        let dim = moduli.len();
        if raw.len() != dim {
            return Err(SketchError::DimensionMismatch {
                expected: dim,
                got: raw.len(),
            });
        }
        let mut partial = Self::assemble(moduli.clone(), vec![Vec::new(); dim]);
        for (i, o) in raw.iter().enumerate() {
            if let Some(top) = o.top_index() {
                if top >= i {
                    return Err(SketchError::InvalidOverflow { index: i, coord: top });
                }
            }
            let reduced = super::phi(&partial, o);
            partial.overflow[i] = reduced.entries().to_vec();
            partial.id = 0;
        }
        Self::new(moduli, partial.overflow)
    }

    fn assemble(moduli: Vec<Z>, overflow: Vec<Vec<(usize, Z)>>) -> Self {
        let mut h = DefaultHasher::new();
        moduli.hash(&mut h);
        overflow.hash(&mut h);
        Self {
            dim: moduli.len(),
            moduli,
            overflow,
            id: h.finish(),
        }
    }

    /// All moduli one: the trivial module, `phi == 0`.
    pub fn trivial(dim: usize) -> Self {
        Self::assemble(vec![Z::one(); dim], vec![Vec::new(); dim])
    }

    /// Uniformly random moduli in `[1, max_modulus]` with uniformly random
    /// valid overflow vectors.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_modulus: u64) -> Self {
        let moduli: Vec<u64> = (0..dim).map(|_| rng.gen_range(1..=max_modulus)).collect();
        let overflow = (0..dim)
            .map(|i| {
                (0..i)
                    .filter_map(|j| {
                        let v = rng.gen_range(0..moduli[j]);
                        (v > 0).then(|| (j, Z::from_u64(v).unwrap()))
                    })
                    .collect()
            })
            .collect();
        let moduli = moduli.into_iter().map(|a| Z::from_u64(a).unwrap()).collect();
        Self::new(moduli, overflow).expect("generated params are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modulus(&self, i: usize) -> &Z {
        &self.moduli[i]
    }

    pub fn moduli(&self) -> &[Z] {
        &self.moduli
    }

    pub fn overflow(&self, i: usize) -> &[(usize, Z)] {
        &self.overflow[i]
    }

    pub fn overflow_vector(&self, i: usize) -> FrequencyVector<Z> {
        let mut o = FrequencyVector::zero(self.dim);
        for (j, v) in &self.overflow[i] {
            o.set(*j, v.clone());
        }
        o
    }

    /// `a_i e_i - o_i`, the i-th generator of the quotiented submodule.
    pub fn relation(&self, i: usize) -> FrequencyVector<Z> {
        let mut r = self.overflow_vector(i).neg();
        r.set(i, self.moduli[i].clone());
        r
    }

    pub(crate) fn id(&self) -> u64 {
        self.id
    }

    /// Number of nontrivial coordinates (`a_i > 1`).
    pub fn nontrivial(&self) -> usize {
        self.moduli.iter().filter(|a| **a > Z::one()).count()
    }

    /// `prod a_i`, the order of the module.
    pub fn order(&self) -> Z {
        self.moduli.iter().fold(Z::one(), |acc, a| acc * a.clone())
    }

    /// Bits to store one module element: `sum ceil(log2 a_i)`.
    pub fn state_bits(&self) -> u64 {
        self.moduli.iter().map(|a| a.ceil_log2() as u64).sum()
    }

    /// Stored size of the parameters themselves: moduli values plus one
    /// coordinate index per nontrivial modulus.
    pub fn space_bits(&self) -> u64 {
        self.state_bits() + self.nontrivial() as u64 * bits_for(self.dim as u64) as u64
    }

    pub fn to_file(&self) -> Result<ParamsFile, SketchError> {
        let to_i64 = |v: &Z| v.to_i64().ok_or_else(|| SketchError::Overflow(v.to_string()));
        Ok(ParamsFile {
            n: self.dim,
            a: self.moduli.iter().map(to_i64).collect::<Result<_, _>>()?,
            o: self
                .overflow
                .iter()
                .map(|o| {
                    o.iter()
                        .map(|(j, v)| Ok((*j, to_i64(v)?)))
                        .collect::<Result<_, SketchError>>()
                })
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn from_file(file: &ParamsFile) -> Result<Self, SketchError> {
        if file.a.len() != file.n {
            return Err(SketchError::DimensionMismatch {
                expected: file.n,
                got: file.a.len(),
            });
        }
        Self::new(
            file.a.iter().map(|&a| Z::lift(a)).collect(),
            file.o
                .iter()
                .map(|o| o.iter().map(|&(j, v)| (j, Z::lift(v))).collect())
                .collect(),
        )
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), SketchError> {
        serde_json::to_writer(out, &self.to_file()?)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self, SketchError> {
        let file: ParamsFile = serde_json::from_reader(input)?;
        Self::from_file(&file)
    }
}

/// On-disk form: `{"n": .., "a": [..], "o": [[[j, v], ..], ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub n: usize,
    pub a: Vec<i64>,
    pub o: Vec<Vec<(usize, i64)>>,
}
