//! Placement and orchestration of AI/ML models across a tree-shaped O-RAN
//! deployment: a binary integer model of the problem, variable reduction,
//! an exact solver, a cluster-wise decomposition, scenario generation and an
//! experiment engine.

pub mod branching;
pub mod catalog;
pub mod engine;
pub mod fixtures;
pub mod formulation;
pub mod ids;
pub mod netmodel;
pub mod reduction;
pub mod requests;
pub mod solver;
pub mod scenario;
