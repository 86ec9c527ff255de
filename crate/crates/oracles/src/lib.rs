//! Reference computations for the test suites.
//!
//! Nothing here is used by the library itself. Every routine takes a route
//! that is independent of the implementation it is compared against: plain
//! nested-loop matrix arithmetic instead of the engine's renormalised
//! iterations, Sturm bisection on a finite-difference operator instead of
//! Monte Carlo, method of images instead of simulation, adaptive quadrature
//! instead of closed forms.

pub mod dense;
pub mod dirichlet;
pub mod quad;
pub mod special;
