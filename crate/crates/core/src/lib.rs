//! Numerical toolkit for threshold phenomena of Schrödinger operators: Jost
//! solutions and Wronskians in one dimension, resolvent kernels and their
//! weighted norms near the threshold, the regularized two-dimensional disk
//! problem, eigenvalue bifurcation from virtual levels, and two
//! finite-dimensional models.

pub mod bessel;
pub mod bifurcation;
pub mod discrete;
pub mod disk2d;
pub mod error;
pub mod jost;
pub mod lapnorm;
pub mod numerics;
pub mod potentials;
pub mod resolvent;

pub use error::Error;
