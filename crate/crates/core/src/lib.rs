//! Topological degree computation for piecewise-affine deformations of
//! simplicial meshes, global invertibility condition checkers, and a
//! desk-scale invertibility-constrained elastic minimization.

pub mod conditions;
pub mod degree;
pub mod elasticity;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod plmap;
pub mod topology;

pub use error::{CoreError, Result};
pub use mesh::{ComplementDecomposition, InnerCovering, SimplicialMesh, Submesh};
pub use plmap::PLMap;
