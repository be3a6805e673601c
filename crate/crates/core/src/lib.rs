//! Online Lagrangian Frank-Wolfe (OLFW) for online monotone DR-submodular
//! maximization under a stochastic cumulative linear budget.
//!
//! The crate is organised bottom-up:
//!
//! - [`functions`]: DR-submodular utility families (indefinite quadratic,
//!   log-determinant, multilinear extension), property checkers and
//!   Lipschitz/smoothness estimation.
//! - [`domain`]: feasible-set geometry (boxes, capped boxes, boxes cut by
//!   halfspaces) with projection and a linear-maximization oracle.
//! - [`olfw`]: the online algorithm itself and its run trace.
//! - [`baselines`]: comparison policies for the recommendation experiment.
//! - [`evaluation`]: benchmark solver, regret/violation metrics and the
//!   concentration and master-inequality validators.
//! - [`scenario`]: constraint samplers, experiment scenarios, dataset
//!   ingestion and configuration parsing.

pub mod baselines;
pub mod domain;
pub mod error;
pub mod evaluation;
pub mod functions;
pub mod numeric;
pub mod olfw;
pub mod rng;
pub mod scenario;
pub mod trace;

pub use domain::{Domain, DomainKind};
pub use error::{Error, Result};
pub use functions::{FunctionConstants, Utility};
pub use olfw::{OlfwConfig, ProblemConstants, UpdateRule};
pub use scenario::{ConstraintDistribution, Scenario};
pub use trace::{RoundRecord, RunTrace};
