//! Parametric piano key weir geometry, surface export, discharge labelling,
//! dataset management and surrogate regression.

pub mod dataset;
pub mod exec;
pub mod hydraulics;
pub mod pkw;
pub mod pointcloud;
pub mod protocol;
pub mod records;
pub mod rng;
pub mod sampler;
pub mod solidmesh;
pub mod surrogates;

pub use exec::Exec;
pub use pkw::{derive, feature_vector, validate, GeometryError, PkwDerived, PkwDesign, PkwFixed, PkwSample};
