//! Exact solvers for contract design when the agent takes actions one at a
//! time and observes each outcome before deciding whether to continue.

pub mod agent;
pub mod correlated;
pub mod error;
pub mod general;
pub mod generators;
pub mod linalg;
pub mod linear;
pub mod model;
pub mod oracle;
pub mod rational;

pub use agent::{
    best_response, principal_utility, reservation_value, weitzman_strategy, BestResponse,
    NonAdaptiveStrategy, OutcomeDistribution,
};
pub use correlated::{
    brute_force_best_linear, hardness_reduction, BernoulliJoint, CorrMaxJoint, CorrelatedInstance, CoverageDocument,
    CoverageFunction, JointDocument,
};
pub use error::{Error, Result};
pub use general::{solve_general, GeneralReport};
pub use linear::{solve_linear, LinearReport};
pub use model::{validate_instance, Contract, Instance, InstanceDocument, LinearContract, Normalized};
pub use rational::{rat, ExtendedRational, Rational};
