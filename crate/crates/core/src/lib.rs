//! Exact tropical linear algebra of rational functions on metric graphs.
//!
//! The crate decides tropical linear independence of piecewise-linear
//! functions with integer slopes by building a turn-based stochastic
//! mean-payoff game whose Shapley operator encodes the question, and
//! produces certificates that can be re-checked in exact arithmetic:
//! strict super-eigenvectors and witness points for independence,
//! coefficient vectors for dependence. It also computes tropical ranks of
//! finitely generated semimodules and builds the CSP and 0/1-matrix gadgets
//! that make rank computation hard.
//!
//! All arithmetic is on arbitrary-precision rationals.

pub mod divisor;
pub mod gadgets;
pub mod game;
pub mod gen;
pub mod graph;
pub mod independence;
pub mod io;
pub mod linalg;
pub mod par;
pub mod pl;
pub mod rational;
pub mod semimodule;

pub use divisor::{divisor_of, in_riemann_roch, Divisor};
pub use game::{GameCertificate, SignDecision, StochGame};
pub use graph::{EdgeId, End, MetricGraph, PointRef, VertexId};
pub use independence::{check_independence, IndependenceVerdict};
pub use pl::{min_attained_twice, EdgeProfile, TropFunction, TwiceVerdict};
pub use rational::{Rational, Trop};
pub use semimodule::Semimodule;
