//! Differentially private global linear classifiers learned from an ensemble
//! of locally trained classifiers.
//!
//! Each party trains a classifier on its own private shard. The ensemble
//! labels a pool of auxiliary unlabeled samples, either by majority vote or
//! by the fraction of votes per class, and a single regularized linear model
//! is fit to the labeled pool. The minimizer is released with output
//! perturbation calibrated to the L2 sensitivity of the whole pipeline, where
//! neighboring inputs differ in *all* samples of one party.
//!
//! Module map:
//!
//! * [`dataset`]: samples, loading, normalization, partitioning, synthesis
//! * [`linear`]: losses, risks, gradients and the regularized ERM solver
//! * [`ensemble`]: black-box local classifiers, voting and transfer
//! * [`privacy`]: sensitivities, noise sampling and output perturbation
//! * [`pipelines`]: the end-to-end methods compared in experiments
//! * [`harness`]: experiment configuration, sweeps and CSV output

pub mod dataset;
pub mod ensemble;
mod error;
pub mod harness;
pub mod linear;
pub mod pipelines;
pub mod privacy;
pub mod seed;
pub mod stats;

pub use error::{Error, ErrorKind, Result};
