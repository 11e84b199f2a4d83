//! Flexible loads as convex polytopes, and a polynomial-time outer
//! approximation of their Minkowski sum.
//!
//! Geometry is generic over [`Scalar`]: `f64` for production runs, `f32` for
//! compact storage, and [`BigRational`] for exact checks.

pub mod aggregation;
pub mod dispatch;
pub mod error;
pub mod hull;
pub mod linalg;
pub mod loads;
pub mod lp;
pub mod polytope;
pub mod scalar;
pub mod volume;

pub use num_rational::BigRational;

pub use aggregation::{
    aggregate_general, aggregate_with, align, exact_minkowski_oracle, sum_same_shape,
};
pub use error::{Error, Result};
pub use polytope::{HPolytope, PolytopeFile, Space, VPolytope};
pub use scalar::Scalar;

pub type Polytope = HPolytope<f64>;
pub type Polytope32 = HPolytope<f32>;
pub type ExactPolytope = HPolytope<BigRational>;
pub type VertexSet = VPolytope<f64>;
pub type ExactVertexSet = VPolytope<BigRational>;
pub type AlignedFamily = aggregation::AlignedFamily<f64>;
pub type Matrix = linalg::Matrix<f64>;
