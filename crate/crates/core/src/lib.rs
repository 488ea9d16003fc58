//! Exact laboratory for one-dimensional stochastic cellular automata.
//!
//! One syntactic object, [`Sca`], yields deterministic, non-deterministic and
//! stochastic dynamics. Every probability is an exact [`Rational`].

pub mod alphabet;
pub mod budget;
pub mod corpus;
pub mod document;
pub mod error;
pub mod ppt_pfa;
pub mod rational;
pub mod sca;
pub mod semantics;
pub mod simulation;
pub mod symbolic;
pub mod weighted;

pub use alphabet::{Alphabet, Sym};
pub use budget::Budget;
pub use document::{parse_sca, ScaDocument};
pub use error::{Error, Result};
pub use rational::Rational;
pub use sca::Sca;
pub use semantics::{
    apply_window, conservation_check, cylinder_prob, iterate_sca, pushforward_distribution,
    sample_diagram, sample_window, step_periodic, Conservation, PeriodicConfig, SpaceTime, Word,
    WordDistribution,
};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/automata.md")]
pub mod book_automata {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/semantics.md")]
pub mod book_semantics {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/equality.md")]
pub mod book_equality {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/symbolic.md")]
pub mod book_symbolic {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/ppt.md")]
pub mod book_ppt {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod book_simulation {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub mod book_cli {}
