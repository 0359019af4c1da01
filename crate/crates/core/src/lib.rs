//! Geometry of spacelike surfaces in four-dimensional Lorentz-Minkowski
//! spacetime that lie on the future lightcone.
//!
//! Everything pointwise is computed from order-4 Taylor jets of a chart,
//! so derivatives are exact up to rounding. On top of that sit quadrature
//! over closed surfaces, a cotangent Laplacian for the first eigenvalue,
//! and a derivative-free search over perturbed round spheres.

pub mod catalog;
pub mod curvature;
pub mod error;
pub mod global;
pub mod harmonics;
pub mod jet;
pub mod laplacian;
pub mod minkowski;
pub mod quadrature;
pub mod search;
pub mod surface;
pub mod transform;
pub mod verify;

pub use error::{GeometryError, Result};
pub use jet::{Jet2, JetVec4};
pub use minkowski::MinkowskiVec;
pub use surface::{PointGeometry, SurfacePatch};
