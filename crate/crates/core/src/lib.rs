//! Numerical workbench for finitely generated groups of area-preserving
//! sphere diffeomorphisms: word balls and growth, derivative cocycles,
//! exponentially averaged metrics, and pigeonhole recurrence.
//!
//! Groups are built from rotations, axial twists and Möbius maps; see
//! [`words::GeneratorSet`]. Scenario files drive [`lab::run_scenario`].

// Positivity checks are written `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cocycle;
pub mod diffeo;
pub mod error;
pub mod jet;
pub mod lab;
pub mod pesin;
pub mod recurrence;
pub mod scenario;
pub mod sphere;
pub mod words;
