//! Halting-time fluctuation experiments.
//!
//! Three iterative optimizers are run on random problem instances and the
//! number of iterations they need to satisfy an accuracy criterion (the
//! *halting time*) is recorded per trial:
//!
//! * conjugate gradient on Wishart-type linear systems ([`cg`]),
//! * projected gradient descent on the 3-spin spherical spin glass
//!   ([`spin_glass`]),
//! * minibatch SGD on a small fully connected network ([`deep_net`]).
//!
//! Halting-time samples are centred and scaled to unit variance
//! ([`stats::normalize_fluctuations`]) and compared across input ensembles
//! through their moments and the two-sample Kolmogorov-Smirnov distance.
//! [`harness`] wires everything into reproducible parallel experiments.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cg;
pub mod deep_net;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod spin_glass;
pub mod stats;
pub mod stream;

pub use error::{Error, Result};
