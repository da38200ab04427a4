//! Polynomial algebra over F_{2^k}: dense univariate polynomials, sparse
//! polynomials in x0, x1, x2, z, and the bivariate gcd / resultant /
//! factorization routines used by the curve criteria.

use thiserror::Error;

mod bivar;
pub mod embed;
pub mod factor;
mod hensel;
pub mod text;
mod tri;
mod uni;

pub use bivar::{bi_gcd, bi_resultant, bi_squarefree, BiPoly};
pub use embed::Embedding;
pub use factor::{uni_factor, Factorization};
pub use hensel::{bi_factor, BI_FACTOR_DEGREE_CAP};
pub use tri::{Monomial, TriPoly, NVARS, X0, X1, X2, Z};
pub use uni::UniPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MvError {
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division is not exact; remainder {remainder}")]
    NotDivisible { remainder: Box<TriPoly> },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("cannot homogenize a degree-{degree} polynomial to degree {target}")]
    DegreeTooSmall { target: u32, degree: u32 },
    #[error("total degree {degree} exceeds the cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },
    #[error("no evaluation point in the base field keeps the specialization squarefree")]
    NoGoodEvaluationPoint,
    #[error("expected a polynomial in at most two variables, found {0:?}")]
    TooManyVariables(Vec<usize>),
    #[error("parse error: {0}")]
    Parse(String),
}
