//! Exact lattice, Lie-algebra and dynamics kernels for parabolic classes
//! on hyperkähler lattices.
//!
//! All decisions are made in exact rational arithmetic, extended by a
//! declared basis of real symbols (square roots and opaque constants with
//! certified enclosures). Floating point appears only in diagnostics.

#![allow(clippy::needless_range_loop)]

pub mod arith;
pub mod dynamics;
pub mod enumerate;
pub mod error;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod poly;
pub mod presets;
pub mod rigidity;
pub mod scalar;
pub mod symbols;
pub mod vector;
pub mod walls;
pub mod wedge;

pub use arith::{fmt_q, parse_q, Q};
pub use error::{Error, Result};
pub use lattice::QuadLattice;
pub use scalar::{sign_of, Sign, SymbolicScalar};
pub use symbols::{Monomial, SymbolBasis};
pub use vector::{bbf_pair, rational_annihilator, rational_kernel, torus_leaf_dense, PairingForm, SymbolicVector};
