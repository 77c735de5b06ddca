//! Exact-arithmetic engine for the cohomology of homogeneous spaces and
//! biquotients.
//!
//! The computational backbone is a small stack of algebra layers:
//!
//! * [`ring`]: coefficient rings (Q, F_p, Z, Z[1/m]) and exact linear algebra,
//! * [`gca`]: free graded-commutative algebras with Koszul signs,
//! * [`cdga`]: differentials, cohomology over fields and over Z,
//! * [`catalog`]: classical compact groups and their Borel-cohomology data,
//! * [`models`]: Koszul-type models for G/K, H\G/K and Borel constructions,
//! * [`tor`]: differential Tor tables via Koszul complexes and bar complexes,
//! * [`bar`]: bar/cobar constructions, twisting cochains, twisted tensors,
//! * [`simplicial`]: normalized cochains, interval-cut operations, cup-i,
//! * [`presentation`]: ring presentations, duality and Euler checks,
//! * [`pipeline`]: end-to-end runs shared by the CLI and the test suites.

pub mod catalog;
pub mod models;
pub mod cdga;
pub mod tor;
pub mod gca;
pub mod ring;

pub use ring::{Coeff, CoefficientRing, ExactMatrix, RankKernel, SmithForm};
