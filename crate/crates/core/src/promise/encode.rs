use serde::{Deserialize, Serialize};

use crate::scalar::bits_for;
use crate::stream::FrequencyVector;

use super::{validate_promise, PromiseError, PromiseInstance, Triple, PAIRS};

/// Coordinate layout for a given `n`.
///
/// Word `(2e + side) * N + pos` holds player `e`'s symbol for vertex `pos`
/// on its lower (`side = 0`) or upper (`side = 1`) vertex set. Coordinate
/// `word * B + k` is bit `k` (little-endian) of that word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n: usize,
    pub big_n: usize,
    pub b: usize,
}

impl Layout {
    pub fn new(n: usize) -> Self {
        let big_n = 30 * n;
        Self {
            n,
            big_n,
            b: 2 + bits_for(big_n as u64) as usize,
        }
    }

    pub fn words(&self) -> usize {
        6 * self.big_n
    }

    pub fn dim(&self) -> usize {
        self.words() * self.b
    }

    /// Word of player `e` for vertex `pos` of vertex set `set` (one of the player's two).
    pub fn word(&self, e: usize, set: usize, pos: usize) -> usize {
        let (lo, hi) = PAIRS[e];
        let side = if set == lo {
            0
        } else {
            assert_eq!(set, hi, "set {set} not touched by player {e}");
            1
        };
        (2 * e + side) * self.big_n + pos
    }

    pub fn coord(&self, word: usize, bit: usize) -> usize {
        word * self.b + bit
    }

    /// `(word, bit)` of a coordinate.
    pub fn split(&self, coord: usize) -> (usize, usize) {
        (coord / self.b, coord % self.b)
    }

    /// Player owning a word.
    pub fn player(&self, word: usize) -> usize {
        word / (2 * self.big_n)
    }

    /// Coordinate range `[start, end)` of player `e`'s two blocks.
    pub fn player_range(&self, e: usize) -> std::ops::Range<usize> {
        let start = 2 * e * self.big_n * self.b;
        start..start + 2 * self.big_n * self.b
    }
}

/// Outer alphabet: bottom, or an opposite-endpoint label in `1..=N` with an edge bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    Bottom,
    Edge { label: usize, z: bool },
}

fn fill(z: bool, b: usize) -> u64 {
    if z {
        u64::MAX >> (64 - b)
    } else {
        0
    }
}

/// `B`-bit code: bottom is zero, `(l, z)` is `bin(l) XOR z^B`.
pub fn inner_encode(sym: Symbol, b: usize) -> u64 {
    match sym {
        Symbol::Bottom => 0,
        Symbol::Edge { label, z } => label as u64 ^ fill(z, b),
    }
}

/// Inverse of [`inner_encode`]; `None` if `word` is not a codeword.
pub fn inner_decode(word: u64, b: usize, big_n: usize) -> Option<Symbol> {
    if b < 64 && word >> b != 0 {
        return None;
    }
    if word == 0 {
        return Some(Symbol::Bottom);
    }
    let z = (word >> (b - 1)) & 1 == 1;
    let label = (word ^ fill(z, b)) as usize;
    (1..=big_n)
        .contains(&label)
        .then_some(Symbol::Edge { label, z })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Bits stored as 0/1.
    Binary,
    /// Bit 1 stored as `+M`, bit 0 as `-M`.
    PlusMinus(i64),
}

impl Variant {
    pub fn bit_value(&self, bit: bool) -> i64 {
        match (self, bit) {
            (Variant::Binary, b) => b as i64,
            (Variant::PlusMinus(m), true) => *m,
            (Variant::PlusMinus(m), false) => -*m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedInstance {
    pub layout: Layout,
    pub variant: Variant,
    pub tau: bool,
    /// One symbol per word.
    pub symbols: Vec<Symbol>,
    /// Dense target frequency vector.
    pub values: Vec<i64>,
}

impl EncodedInstance {
    pub fn freq(&self) -> FrequencyVector<i64> {
        FrequencyVector::from_i64s(&self.values)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

pub fn encode(inst: &PromiseInstance, variant: Variant) -> Result<EncodedInstance, PromiseError> {
    validate_promise(inst)?;
    if let Variant::PlusMinus(m) = variant {
        if m < 1 {
            return Err(PromiseError::InvalidEncoding(format!("M = {m} must be positive")));
        }
    }
    let layout = Layout::new(inst.n);
    let mut symbols = vec![Symbol::Bottom; layout.words()];
    for (e, &(a, b)) in PAIRS.iter().enumerate() {
        for t in &inst.players[e] {
            symbols[layout.word(e, a, t.u)] = Symbol::Edge { label: t.v + 1, z: t.z };
            symbols[layout.word(e, b, t.v)] = Symbol::Edge { label: t.u + 1, z: t.z };
        }
    }
    let mut values = Vec::with_capacity(layout.dim());
    for sym in &symbols {
        let w = inner_encode(*sym, layout.b);
        values.extend((0..layout.b).map(|k| variant.bit_value((w >> k) & 1 == 1)));
    }
    Ok(EncodedInstance {
        layout,
        variant,
        tau: inst.tau,
        symbols,
        values,
    })
}

/// Recovers the instance from an encoded vector, reading only the lower-side
/// blocks and checking the upper ones agree.
pub fn decode(enc: &EncodedInstance) -> Result<PromiseInstance, PromiseError> {
    let layout = enc.layout;
    let bad = |m: String| Err(PromiseError::InvalidEncoding(m));
    if enc.values.len() != layout.dim() {
        return bad(format!("dimension {} != {}", enc.values.len(), layout.dim()));
    }
    let mut words = Vec::with_capacity(layout.words());
    for w in 0..layout.words() {
        let mut bits = 0u64;
        for k in 0..layout.b {
            let v = enc.values[layout.coord(w, k)];
            let bit = match enc.variant {
                Variant::Binary if v == 0 || v == 1 => v == 1,
                Variant::PlusMinus(m) if v == m || v == -m => v == m,
                _ => return bad(format!("word {w} bit {k} has value {v}")),
            };
            bits |= (bit as u64) << k;
        }
        match inner_decode(bits, layout.b, layout.big_n) {
            Some(s) => words.push(s),
            None => return bad(format!("word {w} is not a codeword")),
        }
    }
    let mut players: [Vec<Triple>; 3] = Default::default();
    for (e, &(a, b)) in PAIRS.iter().enumerate() {
        for u in 0..layout.big_n {
            if let Symbol::Edge { label, z } = words[layout.word(e, a, u)] {
                let v = label - 1;
                if words[layout.word(e, b, v)] != (Symbol::Edge { label: u + 1, z }) {
                    return bad(format!("player {e}: sides disagree at u = {u}"));
                }
                players[e].push(Triple { u, v, z });
            }
        }
    }
    let mut inst = PromiseInstance {
        n: layout.n,
        players,
        tau: false,
    };
    let tri = *inst
        .triangles()
        .first()
        .ok_or_else(|| PromiseError::InvalidEncoding("no triangle".into()))?;
    let z = |e: usize, u: usize| inst.players[e].iter().find(|t| t.u == u).unwrap().z;
    inst.tau = z(0, tri[0]) ^ z(1, tri[0]) ^ z(2, tri[1]);
    validate_promise(&inst)?;
    Ok(inst)
}

/// Sign pattern scaled to `M`: positive to `M`, negative to `-M`, zero to zero.
pub fn zeta(word: &[i64], m: i64) -> Vec<i64> {
    word.iter().map(|&v| v.signum() * m).collect()
}

/// `M` to 1, `-M` to 0; anything else is outside the domain.
pub fn eta(word: &[i64], m: i64) -> Result<Vec<bool>, PromiseError> {
    word.iter()
        .enumerate()
        .map(|(index, &value)| match value {
            v if v == m => Ok(true),
            v if v == -m => Ok(false),
            _ => Err(PromiseError::EtaDomain { index, value }),
        })
        .collect()
}
