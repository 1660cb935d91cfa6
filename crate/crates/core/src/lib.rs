//! Nonnegative `C^2` interpolation of scattered data in the plane.
//!
//! Given a finite set `E` of points and nonnegative values `f` on `E`, this
//! crate estimates the order of magnitude of the trace norm
//! `inf { ||F||_{C^2} : F|_E = f, F >= 0 }`, answers two-jet queries of a
//! fixed near-optimal nonnegative interpolant, and produces bounded-size
//! representative subsets whose local trace norms control the global one.
//!
//! The pipeline: a compressed quadtree over `E` supports square queries and
//! nearest neighbors; per-point convex jet bodies are approximated by small
//! linear programs; a Calderon-Zygmund square family adapted to those bodies
//! partitions the plane; each square carries a local nonnegative extension
//! built from one-dimensional operators after straightening; a partition of
//! unity glues the local pieces.

pub mod error;
pub mod cz;
pub mod geom;
pub mod jet;
pub mod index;
pub mod lp;
pub mod one_dim;
pub mod qp;
pub mod sigma;
pub mod whitney;
pub mod wspd;

pub use error::Error;
pub use geom::{DyadicSquare, Point2, Rect};
pub use jet::{jet2_compose_1d, Jet1, Jet1D2, Jet2, SymMat2};
pub use whitney::{
    m_functional, q_functional, singleton_extension_jet, whitney_norm, wplus_excess, wplus_norm,
    WhitneyField,
};
