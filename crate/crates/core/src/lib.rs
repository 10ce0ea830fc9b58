//! Upper bounds for the bottom of the essential spectrum of proper minimal
//! submanifolds of Euclidean space, computed from extrinsic volume growth and
//! cross-checked against Rayleigh quotients and discrete Dirichlet eigenvalues.
//!
//! The pipeline: a catalog immersion gives a [`Chart`]; a [`BallIntegrator`]
//! measures extrinsic balls `Ω_r`; [`growth`] turns volumes into growth
//! exponents; [`bounds`] evaluates the bounds; [`spectrum`] supplies the
//! eigenvalue oracle; [`report::verify`] composes all of it.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod growth;
pub mod immersions;
pub mod model_manifold;
pub mod quadrature;
pub mod report;
pub mod spectrum;
pub mod test_functions;

pub use bounds::{Corollary1, Corollary2, Corollary3, GrowthBound};
pub use error::{Error, Result};
pub use growth::{GrowthExponents, GrowthProfile};
pub use immersions::{catalog, Chart, Immersion, ParamDomain, SurfaceId, TriangleMesh};
pub use model_manifold::{CurvatureProfile, WarpingFunction};
pub use quadrature::BallIntegrator;
pub use report::{BoundReport, VerifyConfig};
pub use spectrum::{DiscreteOperator, Lambda1};
pub use test_functions::{FluxCheck, TestFunctionProfile};
