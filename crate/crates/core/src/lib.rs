//! Exact solvers for Multiway Partitioning and Makespan Minimization on
//! Uniform Machines, built on a multi-choice integer programming solver.
//!
//! The pipeline for a partition instance tries each distinct size as a
//! pivot, solves a configuration program whose big machines only need the
//! right load modulo the pivot, and then repairs the big machines with a
//! greedy that moves whole bundles of jobs. Makespan instances are reduced
//! to partition instances by binary search over candidate values.

pub mod error;
pub mod greedy;
pub mod instance;
pub mod makespan;
pub mod mcilp;
pub mod modip;
pub mod oracle;
pub mod partition;
pub mod rational;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{Assignment, JobProfile, PartitionInstance, SchedulingInstance};
pub use rational::ExactRational;
