//! Frequency-domain elastodynamics on scaled boundary meshes.
//!
//! The domain boundary is discretized with Gauss-Lobatto-Legendre line
//! elements scaled from a subdomain center; the radial direction is handled
//! by a finite-difference condensation that reduces each subdomain to a
//! dynamic stiffness acting on its boundary nodes. Bounded and unbounded
//! (absorbing, truncated) subdomains share one code path.

pub mod assembly;
pub mod basis;
pub mod config;
pub mod error;
pub mod field;
pub mod geometry;
pub mod global;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod oracle;
pub mod radial;
pub mod runner;

pub use error::{Result, SolverError};
