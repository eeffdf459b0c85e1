//! Scalar special functions and one-dimensional adaptive quadrature.

mod hypergeometric;
mod normal;
mod quadrature;

pub use hypergeometric::{hyp2f1, hyp2f1_coverage};
pub(crate) use normal::q_unchecked;
pub use normal::{normal_pdf, q_function, q_inverse};
pub use quadrature::{integrate, Integral, QuadratureSpec};
