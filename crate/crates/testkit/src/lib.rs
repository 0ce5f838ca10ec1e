//! Slow, direct reference implementations used to check the fast paths in
//! `evsim`, plus seeded generators for random test instances.

pub mod gen;
pub mod graph;
pub mod lp;
pub mod nn;
pub mod parking;
