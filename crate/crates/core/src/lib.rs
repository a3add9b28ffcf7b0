//! Exact geometry of dense and Mixture-of-Experts ReLU layers.
//!
//! The crate enumerates Top-k routing cells, counts linear regions exactly
//! through LP-certified hyperplane-arrangement enumeration, evaluates the
//! closed-form capacity bounds, and measures effective capacity on
//! low-dimensional manifolds. Geometry is generic over [`Scalar`] (`f32` or
//! `f64`); the aliases at the bottom of this file fix the common choices.

pub mod arrangement;
pub mod capacity;
pub mod combinatorics;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod manifold;
pub mod rng;
pub mod routing;
pub mod scalar;
pub mod tropical;

pub use error::{CoreError, Result};
pub use scalar::Scalar;

pub use combinatorics::BigCount;

pub type Arrangement = arrangement::Arrangement<f64>;
pub type Hyperplane = arrangement::Hyperplane<f64>;
pub type Polyhedron = arrangement::Polyhedron<f64>;
pub type RouterSpec = routing::RouterSpec<f64>;
pub type ExpertSpec = capacity::ExpertSpec<f64>;
pub type MoESpec = capacity::MoESpec<f64>;
pub type LayerSpec = capacity::LayerSpec<f64>;
pub type Zonotope = capacity::Zonotope<f64>;
pub type ManifoldSpec = manifold::ManifoldSpec<f64>;
pub type TropicalPolynomial = tropical::TropicalPolynomial<f64>;

pub type Arrangement32 = arrangement::Arrangement<f32>;
pub type RouterSpec32 = routing::RouterSpec<f32>;
pub type ExpertSpec32 = capacity::ExpertSpec<f32>;
pub type MoESpec32 = capacity::MoESpec<f32>;
pub type ManifoldSpec32 = manifold::ManifoldSpec<f32>;
pub type TropicalPolynomial32 = tropical::TropicalPolynomial<f32>;
