//! The three-player triangle-parity gadget.
//!
//! Three vertex sets `V_0, V_1, V_2` of size `N = 30n`; player `e` owns the
//! side pair `PAIRS[e]` and holds `N/3` labelled edges between its two sets.
//! The union graph has `n` triangles, every other edge isolated, and all
//! triangles share the label parity `tau`. Each player's edges are written
//! into two blocks of `N` words (one per side), each word the `B`-bit inner
//! encoding of the opposite endpoint's label and the edge bit.
//!
//! [`Tracker`] is the single-pass, `O(log n)`-bit algorithm that answers
//! `tau` or gives up; [`amplified_run`] runs many copies over one pass.

mod encode;
mod instance;
mod schedule;
mod tracker;

pub use encode::{
    decode, encode, eta, inner_decode, inner_encode, zeta, EncodedInstance, Layout, Symbol, Variant,
};
pub use instance::{gen_instance, validate_promise, PromiseInstance, Triple};
pub use schedule::{gen_stream, Schedule};
pub use tracker::{
    amplified_run, weak01_run, weak2m_run, Amplified, AmplifiedOutcome, Tracker,
    TrackerOutcome, Window,
};

use thiserror::Error;

/// Side pairs of the three players, by player index.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Player owning the side pair `{a, b}`.
pub fn player_of(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        _ => panic!("not a side pair: ({a}, {b})"),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromiseError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid encoding: {0}")]
    InvalidEncoding(String),
    #[error("schedule infeasible: {0}")]
    Infeasible(String),
    #[error("eta undefined at coordinate {index}: value {value}")]
    EtaDomain { index: usize, value: i64 },
}
