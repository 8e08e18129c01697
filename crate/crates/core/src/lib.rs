//! Checkers and solvers for substitutes correspondences on finite price
//! sublattices, equilibrium network flow, and the matching / hedonic
//! markets that reduce to it.
//!
//! All verdict-producing code works in exact rational arithmetic; the only
//! floating-point corners are the logit examples and the damped general
//! flow solver, both of which carry explicit tolerances.

pub mod corr;
pub mod flow;
pub mod gen;
pub mod lattice;
pub mod lp;
pub mod markets;
pub mod point;
pub mod producer;
pub mod pwl;
pub mod rat;

pub use corr::{
    check_monotonicity, check_substitutes, classify, CorrError, FiniteCorrespondence,
    MonotonicityProperty, SubstitutesNotion, Taxonomy, TaxonomyLabel, Verdict, Witness,
};
pub use point::{Point, PriceGrid};
pub use rat::{rat, Rat};
