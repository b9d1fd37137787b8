//! Expected hitting times for the n-urn Ehrenfest model.
//!
//! `M` labeled balls sit in `n` urns. At every step one ball is picked
//! uniformly and moved to one of the other `n - 1` urns, uniformly. The walk
//! lives on `{1,…,n}^M` and this crate computes how long it takes, in
//! expectation, to go from one configuration to another:
//!
//! * [`formulas`] evaluates the closed forms and recursions in exact rational
//!   arithmetic;
//! * [`birth_death`] works with the urn-2 occupancy chain on `{0,…,M}`;
//! * [`oracle`] solves the absorbing-chain linear systems on the full
//!   `n^M`-state graph exactly, independent of any closed form;
//! * [`simulator`] runs seeded, worker-count-independent Monte Carlo;
//! * [`verify`] ties everything together into a checkable suite.
//!
//! ```
//! use ehrenfest::{formulas, scalar, ModelParams};
//!
//! let params = ModelParams::new(5, 3).unwrap();
//! assert_eq!(formulas::s_closed_form(params), scalar::from_int(142));
//! ```

pub mod birth_death;
pub mod error;
pub mod formulas;
pub mod matrix;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod simulator;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::TransitionMatrix;
pub use model::{Configuration, LumpClass, ModelParams, StateIndex, StateSpace};
pub use scalar::ExactScalar;
