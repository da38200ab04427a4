//! Analysis of almost perfect nonlinear (APN) polynomial functions over
//! binary fields F_{2^m}.

pub mod gf2m;
pub mod mvpoly;
pub mod funcrep;
pub mod diffanal;
pub mod sigma;
pub mod geomcrit;
pub mod bounds;
pub mod search;
