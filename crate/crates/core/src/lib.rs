//! Rate-cost and rate-distortion-cost functions for compressing a channel
//! output that an encoder shaped by cost-constrained actions on a state
//! sequence.
//!
//! * [`info`]: entropies and mutual informations on dense tables.
//! * [`model`]: problem instances, auxiliary choices, single-letter objectives.
//! * [`solver`]: global search for the rate-cost and rate-distortion-cost curves.
//! * [`binary`]: closed forms for the binary example.
//! * [`sim`]: finite-blocklength Monte Carlo of the coding schemes.
//!
//! ```
//! use action_rate::binary::{binary_example_spec, rate_causal_binary};
//! use action_rate::solver::{solve_causal, SolveConfig};
//!
//! let spec = binary_example_spec(0.1).unwrap();
//! let point = solve_causal(&spec, 0.25, &SolveConfig::for_spec(&spec)).unwrap();
//! let exact = rate_causal_binary(0.25, 0.1).unwrap();
//! assert!((point.rate - exact).abs() < 5e-3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binary;
pub mod error;
pub mod info;
pub mod model;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/information.md")]
    mod information {}
    #[doc = include_str!("../../../book/src/rate-cost.md")]
    mod rate_cost {}
    #[doc = include_str!("../../../book/src/binary.md")]
    mod binary {}
    #[doc = include_str!("../../../book/src/lossy.md")]
    mod lossy {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
