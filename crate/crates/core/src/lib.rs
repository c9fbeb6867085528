//! Soliton surfaces in sl(2,ℝ) built from the Lax pair of `u_xx = f'(u)/2`.
//!
//! The pipeline runs model → Lax pair → wave function → immersion → geometry:
//! a solution jet of the ODE feeds the potential matrices `L`, `M`; the linear
//! spectral problem `D_xΦ = LΦ`, `D_yΦ = MΦ` is integrated for the frame `Φ`;
//! tangent pairs `(A, B)` satisfying the deformed zero-curvature condition are
//! conjugated by `Φ` into surface tangents, and the immersion `F` is assembled
//! from its integrated forms.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod algebra;
pub mod closed_forms;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod immersion;
pub mod laxpair;
pub mod model;
pub mod ode;
pub mod special;
pub mod wavefunction;

pub use error::{Error, Result};
