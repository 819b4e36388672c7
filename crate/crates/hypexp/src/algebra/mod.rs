//! Minimal computer-algebra layer: univariate polynomials in the gain symbol
//! `psi`, linear forms over the state with polynomial coefficients, and small
//! polynomial matrices with an exact unit-triangular inverse.

pub mod form;
pub mod matrix;
pub mod poly;

pub use form::StateLinearForm;
pub use matrix::{DenseMatrix, PolyMatrix};
pub use poly::PsiPoly;
