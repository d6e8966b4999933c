//! Physics core for simulating Doppler cooling of trapped ⁴⁰Ca⁺ ions on the
//! S1/2 → D5/2 electric-quadrupole line with an 854 nm assisting laser.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It is split
//! into four layers:
//!
//! * [`atomic_model`]: level structure, transition constants, Zeeman lines,
//!   quadrupole coupling geometry and laser beams.
//! * [`internal_dynamics`]: rate matrices over levels or Zeeman sublevels,
//!   their steady state and transient evolution, and the reduction to an
//!   effective two-level system with linewidth Γ′.
//! * [`mechanics`]: mean radiative force, momentum diffusion, friction,
//!   Doppler limit and capture range.
//! * [`trap_md`]: stochastic molecular dynamics of ion strings in a linear
//!   Paul pseudopotential, reordering detection and thermometry.
#![no_std]
// `!(x > 0.0)` deliberately rejects NaN too; index loops mirror the matrix algebra.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod atomic_model;
pub mod constants;
mod error;
pub mod internal_dynamics;
pub mod mechanics;
pub mod trap_md;

pub use error::{Error, Result};
