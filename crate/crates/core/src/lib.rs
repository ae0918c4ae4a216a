//! Exact computation of formal Stieltjes transforms of matrix polynomials in
//! free random variables, with algebraicity certificates.

pub mod algcert;
pub mod error;
pub mod fock;
pub mod laws;
pub mod linalg;
pub mod ncpoly;
pub mod pipeline;
pub mod realize;
pub mod scalar;
pub mod sde;
pub mod series;

pub use error::{Error, Result};
pub use laws::Law;
pub use linalg::QMatrix;
pub use ncpoly::{MatNCPoly, Monomial, NCPoly};
pub use scalar::Scalar;
pub use series::{MatSeries, TruncLaurent, Valuation};
