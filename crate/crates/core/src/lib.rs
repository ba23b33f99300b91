#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod em3d;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod numerics;
pub mod oracle;
pub mod quadrature;
pub mod scalar1d;
pub mod scalar2d;
pub mod scalar3d;
pub mod specfun;
pub mod sum;
pub mod system;
pub mod thermo;
pub mod validation;

pub use error::{Error, Result};
pub use numerics::NumericsPolicy;
