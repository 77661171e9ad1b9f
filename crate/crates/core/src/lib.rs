//! Makespan minimization on unrelated parallel machines.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! * [`model`]: instances, assignments and exact load arithmetic,
//! * [`simplex`]: the assignment LP with a processing-time budget row,
//! * [`rounding`]: sub-machine packing plus min-cost matching rounding,
//! * [`balance`]: bad/good machine classification and the one-round
//!   longest-job transfer that certifies `min{T + L/eps, 2T}`,
//! * [`restricted`]: the overloaded/underloaded balancer for restricted
//!   instances certifying `p_max + L/eps`,
//! * [`oracle`]: exact branch-and-bound reference for small instances.
//!
//! Indices (jobs and machines) are 0-based everywhere in this crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod balance;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod restricted;
pub mod rounding;
pub mod simplex;

pub use model::{Assignment, AssignmentError, Instance, InstanceError, Time, MAX_TIME};
pub use rational::Rational;
