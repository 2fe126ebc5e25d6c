//! A turnstile-streaming laboratory.
//!
//! * [`stream`]: updates, frequency vectors, canonical streams, prefix constraints.
//! * [`sketch`]: the module sketch `phi: Z^n -> M` and its group operation.
//! * [`reduction`]: compilers from deterministic streaming algorithms to sketch
//!   parameters, and the matching recovery procedures.
//! * [`promise`]: the three-player triangle-parity gadget, its encodings and the
//!   single-pass trackers that solve it on box-constrained streams.
//! * [`triangle`]: turnstile triangle-count estimators and graph-stream generators.
//! * [`harness`]: seeded trial loops, space metering and report statistics.
//!
//! Integer-valued code is generic over [`Scalar`]; the aliases below fix the
//! two instantiations used in practice.

pub mod harness;
pub mod promise;
pub mod reduction;
pub mod scalar;
pub mod sketch;
pub mod stream;
pub mod triangle;

pub use scalar::Scalar;

use num_bigint::BigInt;

pub type Update64 = stream::Update<i64>;
pub type Stream64 = stream::Stream<i64>;
pub type Freq64 = stream::FrequencyVector<i64>;
pub type Params64 = sketch::SketchParams<i64>;
pub type Sketch64 = sketch::SketchVector<i64>;

pub type BigUpdate = stream::Update<BigInt>;
pub type BigStream = stream::Stream<BigInt>;
pub type BigFreq = stream::FrequencyVector<BigInt>;
pub type BigParams = sketch::SketchParams<BigInt>;
pub type BigSketch = sketch::SketchVector<BigInt>;
