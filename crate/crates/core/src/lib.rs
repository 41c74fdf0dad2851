//! Solvers for `axb* − bx*a* = c`, `axb* + bx*a* = c`, `xa* + ax* = b` and
//! `a*x + x*a = b` in rings with involution, built on Moore–Penrose
//! inverses.
//!
//! The formulas are written once against [`ring::StarOps`] and run on exact
//! Gaussian-rational matrices, on complex float matrices, and directly on
//! rectangular matrices. An independent real-linearization oracle checks
//! every verdict on the exact backend.

pub mod matrix;
pub mod ring;
pub mod solvers;
pub mod rect;
pub mod oracle;
pub mod cli;
