use rand::Rng;

use crate::harness::SpaceMeter;
use crate::scalar::bits_for;
use crate::stream::Update;

use super::{inner_decode, player_of, Layout, Symbol, Variant};

const LABELINGS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Running value of one coordinate relative to when tracking began, with the
/// extremes seen so far (the starting 0 included).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Window {
    pub cur: i64,
    pub min: i64,
    pub max: i64,
}

impl Window {
    pub fn push(&mut self, delta: i64) {
        self.cur += delta;
        self.min = self.min.min(self.cur);
        self.max = self.max.max(self.cur);
    }

    /// The final `±M` value implied by the window: `Some(true)` (`+M`) if it
    /// dipped `M` below the current value, `Some(false)` (`-M`) if it rose
    /// `M` above it, `None` if it stayed within `M - 1`.
    pub fn decided(&self, m: i64) -> Option<bool> {
        if self.min <= self.cur - m {
            Some(true)
        } else if self.max >= self.cur + m {
            Some(false)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug)]
enum Cells {
    /// Last seen sign per bit: an increase leaves 1, a decrease leaves 0.
    Binary(Vec<Option<bool>>),
    PlusMinus(Vec<Window>),
}

#[derive(Clone, Debug)]
struct ThirdWord {
    word: usize,
    cells: Cells,
}

/// One copy of the low-probability tracker.
///
/// It picks a labeling `(a, b, c)` of the three vertex sets and `u` in `V_a`,
/// follows the words of `u` in the `ab` and `ac` players' blocks exactly and,
/// while the `ab` word currently decodes to an edge `(v', z')`, follows
/// `v'`'s word in the `bc` block from that moment on.
#[derive(Clone, Debug)]
pub struct Tracker {
    layout: Layout,
    variant: Variant,
    labeling: [usize; 3],
    u: usize,
    ab_word: usize,
    ac_word: usize,
    ab: Vec<i64>,
    ac: Vec<i64>,
    candidate: Option<(usize, bool)>,
    third: Option<ThirdWord>,
    meter: SpaceMeter,
}

impl Tracker {
    pub fn new<R: Rng + ?Sized>(layout: Layout, variant: Variant, rng: &mut R) -> Self {
        let labeling = LABELINGS[rng.gen_range(0..6)];
        let u = rng.gen_range(0..layout.big_n);
        Self::with_choice(layout, variant, labeling, u)
    }

    /// Tracker with a fixed labeling `(a, b, c)` and vertex `u` in `V_a`.
    pub fn with_choice(layout: Layout, variant: Variant, labeling: [usize; 3], u: usize) -> Self {
        let [a, b, c] = labeling;
        let mut t = Self {
            layout,
            variant,
            labeling,
            u,
            ab_word: layout.word(player_of(a, b), a, u),
            ac_word: layout.word(player_of(a, c), a, u),
            ab: vec![0; layout.b],
            ac: vec![0; layout.b],
            candidate: None,
            third: None,
            meter: SpaceMeter::new(),
        };
        t.meter.set(t.bits());
        t
    }

    pub fn labeling(&self) -> [usize; 3] {
        self.labeling
    }

    pub fn u(&self) -> usize {
        self.u
    }

    /// The two words followed from the start.
    pub fn fixed_words(&self) -> [usize; 2] {
        [self.ab_word, self.ac_word]
    }

    pub fn third_word(&self) -> Option<usize> {
        self.third.as_ref().map(|t| t.word)
    }

    fn value_bits(&self) -> u64 {
        match self.variant {
            Variant::Binary => 1,
            Variant::PlusMinus(m) => bits_for(4 * m as u64 - 1) as u64,
        }
    }

    /// Bits of tracked state: the random choices, two exact words, the
    /// candidate, and the third word if one is followed.
    pub fn bits(&self) -> u64 {
        let b = self.layout.b as u64;
        let lg_n = bits_for(self.layout.big_n as u64) as u64;
        let choice = bits_for(6) as u64 + lg_n;
        let words = 2 * b * self.value_bits();
        let candidate = 2 + lg_n;
        let third = match (&self.third, self.variant) {
            (None, _) => 0,
            (Some(_), Variant::Binary) => 2 * b,
            (Some(_), Variant::PlusMinus(m)) => 3 * b * bits_for(8 * m as u64 - 3) as u64,
        };
        choice + words + candidate + third
    }

    pub fn peak_bits(&self) -> u64 {
        self.meter.peak()
    }

    fn decode_word(&self, values: &[i64]) -> Option<Symbol> {
        let mut w = 0u64;
        for (k, &v) in values.iter().enumerate() {
            let bit = match self.variant {
                Variant::Binary => match v {
                    0 => false,
                    1 => true,
                    _ => return None,
                },
                Variant::PlusMinus(_) => match v.signum() {
                    1 => true,
                    -1 => false,
                    _ => return None,
                },
            };
            w |= (bit as u64) << k;
        }
        inner_decode(w, self.layout.b, self.layout.big_n)
    }

    fn edge(&self, values: &[i64]) -> Option<(usize, bool)> {
        match self.decode_word(values) {
            Some(Symbol::Edge { label, z }) => Some((label - 1, z)),
            _ => None,
        }
    }

    /// Feeds one update already split into `(word, bit)`. Returns the previous
    /// third word if the followed third word changed.
    pub fn update(&mut self, word: usize, bit: usize, delta: i64) -> Option<Option<usize>> {
        if word == self.ab_word {
            self.ab[bit] += delta;
            let cand = self.edge(&self.ab);
            if cand != self.candidate {
                let old = self.third_word();
                self.candidate = cand;
                let [_, b, c] = self.labeling;
                self.third = cand.map(|(v, _)| ThirdWord {
                    word: self.layout.word(player_of(b, c), b, v),
                    cells: match self.variant {
                        Variant::Binary => Cells::Binary(vec![None; self.layout.b]),
                        Variant::PlusMinus(_) => Cells::PlusMinus(vec![Window::default(); self.layout.b]),
                    },
                });
                self.meter.set(self.bits());
                return Some(old);
            }
        } else if word == self.ac_word {
            self.ac[bit] += delta;
        } else if let Some(t) = self.third.as_mut().filter(|t| t.word == word) {
            match &mut t.cells {
                Cells::Binary(c) if delta != 0 => c[bit] = Some(delta > 0),
                Cells::Binary(_) => {}
                Cells::PlusMinus(c) => c[bit].push(delta),
            }
        }
        None
    }

    pub fn feed(&mut self, u: &Update<i64>) {
        let (word, bit) = self.layout.split(u.index);
        self.update(word, bit, u.delta);
    }

    /// The answer after the stream: `Some(tau)` or `None` for bottom.
    pub fn finish(&self) -> Option<bool> {
        let (v, z_uv) = self.edge(&self.ab)?;
        let (w, z_uw) = self.edge(&self.ac)?;
        let third = self.third.as_ref()?;
        let [_, b, c] = self.labeling;
        debug_assert_eq!(third.word, self.layout.word(player_of(b, c), b, v));
        let (i, bit) = match &third.cells {
            Cells::Binary(cells) => cells.iter().enumerate().find_map(|(i, x)| x.map(|x| (i, x)))?,
            Cells::PlusMinus(cells) => {
                let Variant::PlusMinus(m) = self.variant else { unreachable!() };
                cells.iter().enumerate().find_map(|(i, x)| x.decided(m).map(|x| (i, x)))?
            }
        };
        let z_vw = bit ^ (((w + 1) >> i) & 1 == 1);
        Some(z_uv ^ z_vw ^ z_uw)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrackerOutcome {
    pub answer: Option<bool>,
    pub peak_bits: u64,
}

fn run_single<'a, R, I>(layout: Layout, variant: Variant, updates: I, rng: &mut R) -> TrackerOutcome
where
    R: Rng + ?Sized,
    I: IntoIterator<Item = &'a Update<i64>>,
{
    let mut t = Tracker::new(layout, variant, rng);
    for u in updates {
        t.feed(u);
    }
    TrackerOutcome {
        answer: t.finish(),
        peak_bits: t.peak_bits(),
    }
}

/// One tracker over a stream with every prefix in `{0,1}^dim`.
pub fn weak01_run<'a, R, I>(n: usize, updates: I, rng: &mut R) -> TrackerOutcome
where
    R: Rng + ?Sized,
    I: IntoIterator<Item = &'a Update<i64>>,
{
    run_single(Layout::new(n), Variant::Binary, updates, rng)
}

/// One tracker over a stream with every prefix in `[-(2M-1), 2M-1]^dim`.
pub fn weak2m_run<'a, R, I>(n: usize, m: i64, updates: I, rng: &mut R) -> TrackerOutcome
where
    R: Rng + ?Sized,
    I: IntoIterator<Item = &'a Update<i64>>,
{
    assert!(m >= 1);
    run_single(Layout::new(n), Variant::PlusMinus(m), updates, rng)
}

/// Many trackers sharing one pass. Updates are routed by word, so the cost
/// per update does not grow with the number of copies.
#[derive(Clone, Debug)]
pub struct Amplified {
    layout: Layout,
    trackers: Vec<Tracker>,
    fixed: Vec<Vec<u32>>,
    following: Vec<Vec<u32>>,
    meter: SpaceMeter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AmplifiedOutcome {
    /// The first non-bottom answer, by copy index.
    pub answer: Option<bool>,
    pub answered: usize,
    /// Whether two copies gave different answers.
    pub conflicting: bool,
    pub peak_bits: u64,
}

impl Amplified {
    pub fn new<R: Rng + ?Sized>(layout: Layout, variant: Variant, copies: usize, rng: &mut R) -> Self {
        assert!(copies >= 1);
        let trackers: Vec<Tracker> = (0..copies).map(|_| Tracker::new(layout, variant, rng)).collect();
        let mut fixed = vec![Vec::new(); layout.words()];
        for (k, t) in trackers.iter().enumerate() {
            for w in t.fixed_words() {
                fixed[w].push(k as u32);
            }
        }
        let mut meter = SpaceMeter::new();
        meter.set(trackers.iter().map(|t| t.bits()).sum());
        Self {
            layout,
            trackers,
            fixed,
            following: vec![Vec::new(); layout.words()],
            meter,
        }
    }

    pub fn feed(&mut self, u: &Update<i64>) {
        let (word, bit) = self.layout.split(u.index);
        for &k in &self.fixed[word] {
            let t = &mut self.trackers[k as usize];
            let before = t.bits();
            if let Some(old) = t.update(word, bit, u.delta) {
                if let Some(w) = old {
                    self.following[w].retain(|&x| x != k);
                }
                if let Some(w) = t.third_word() {
                    self.following[w].push(k);
                }
                let now = self.meter.current() - before + t.bits();
                self.meter.set(now);
            }
        }
        for &k in &self.following[word] {
            self.trackers[k as usize].update(word, bit, u.delta);
        }
    }

    pub fn finish(&self) -> AmplifiedOutcome {
        let answers: Vec<bool> = self.trackers.iter().filter_map(|t| t.finish()).collect();
        AmplifiedOutcome {
            answer: answers.first().copied(),
            answered: answers.len(),
            conflicting: answers.iter().any(|&a| a != answers[0]),
            peak_bits: self.meter.peak(),
        }
    }
}

/// `copies` independent trackers over one pass; reports any non-bottom answer.
pub fn amplified_run<'a, R, I>(n: usize, variant: Variant, copies: usize, updates: I, rng: &mut R) -> AmplifiedOutcome
where
    R: Rng + ?Sized,
    I: IntoIterator<Item = &'a Update<i64>>,
{
    let mut amp = Amplified::new(Layout::new(n), variant, copies, rng);
    for u in updates {
        amp.feed(u);
    }
    amp.finish()
}
