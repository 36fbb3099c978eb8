//! Multi-component Bell functions for the (n,2,d) scenario.
//!
//! Functions are built by the prime-d iteration formula from two (n−1)-party
//! functions, scored classically by exhaustive deterministic-strategy
//! enumeration and quantumly against a noisy GHZ state measured through
//! phase-shifted Fourier beam splitters, and compared under the symmetry
//! group of party relabelings, setting swaps and cyclic outcome shifts.

pub mod algebra;
pub mod bell;
pub mod catalog;
pub mod error;
pub mod lhv;
pub mod quantum;
pub mod rational;
pub mod repro;
pub mod search;
pub mod symmetry;

pub use algebra::{compose, outcome_vector, Coefficient, OutcomeVector};
pub use bell::{
    evaluate_deterministic, iterate, restrict, to_probability_form, BellFunction, DeterministicStrategy,
    ProbabilityForm, ProbabilityTable,
};
pub use error::{Error, Result};
pub use rational::Rational;
