//! Forward and inverse spectral problems for the Sturm–Liouville operator with
//! a frozen argument, `ly = −y″ + p(x) y + q(x) y(a)` on `[0, π]` with
//! `y^{(α)}(0) = y^{(β)}(π) = 0`.

pub mod error;
pub mod function_space;
pub mod jet;
pub mod ode_core;
pub mod contour;
pub mod tolerances;
pub mod unperturbed;
pub mod basis_system;
pub mod forward;
pub mod char_fn;
pub mod expr;
pub mod input;
pub mod inverse;
mod par;

pub use error::{Error, Result};
pub use num_complex::Complex64;
