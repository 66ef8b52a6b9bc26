//! Sample-efficient testing of whether an unknown distribution over
//! `{0, …, n-1}` is a k-histogram, i.e. piecewise constant on at most `k`
//! contiguous intervals.
//!
//! The main entry point is [`tester::test_histogram`], which drives the full
//! pipeline: mix the unknown distribution with the uniform one to bound its
//! entries away from zero, repeatedly partition the domain into intervals of
//! small empirical mass, learn a flat approximation on each interval, sieve
//! out intervals where the flat fit is provably poor, and finally check the
//! stitched approximation both combinatorially (dynamic program against the
//! best k-piecewise-constant fit) and statistically (a tolerant chi-square
//! identity test).
//!
//! Supporting modules are usable on their own:
//!
//! * [`dist`] – probability vectors, distances, histogram constructors;
//! * [`sampler`] – draw access abstractions, alias sampling, uniform mixing;
//! * [`partition`] – empirical-mass interval partitioning;
//! * [`estimator`] – batched median-of-means interval mass estimates;
//! * [`sieve`] – learn-and-flag pass over a partition;
//! * [`hard`] – moment-matched instance pairs that are hard to distinguish
//!   at small sample sizes;
//! * [`select`] – doubling search for the smallest plausible `k`.
//!
//! Everything is deterministic given an [`rng::RngStream`] seed.

#![forbid(unsafe_code)]

mod error;
mod util;

pub mod dist;
pub mod estimator;
pub mod hard;
pub mod partition;
pub mod rng;
pub mod sampler;
pub mod select;
pub mod sieve;
pub mod tester;

pub use error::{Error, Result};
