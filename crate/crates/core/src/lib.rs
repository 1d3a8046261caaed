//! Analysis of periodic difference operators on abelian covers of finite graphs.
//!
//! An operator acts on functions u(g, v) where g ranges over the deck lattice
//! Z^n and v over the vertices of a fundamental cell. Everything downstream is
//! organized around its Bloch matrix P(k): band structure, the real Fermi
//! surface at the zero energy level, local spectral data at Fermi points, and
//! the dimension count for solution spaces of polynomial growth.
//!
//! Module layout:
//! - [`model`]: operator representation, validation, JSON schema, windows
//! - [`linalg`]: small dense complex kernels (LU, Jacobi eigen/SVD, roots)
//! - [`bloch`]: Bloch matrices, band functions, lattice Fourier transform
//! - [`fermi`]: Fermi surface scan/refinement/certification, multiplicities
//! - [`localdata`]: spectral projectors, the matrix function lambda(k), Taylor data
//! - [`polyalg`]: polynomial spaces, Q(D)-harmonic bases, dimension formulas
//! - [`liouville`]: polynomial-growth solutions, twisted differences, order tests
//! - [`positive`]: twisted positive operators, principal eigenvalue profile
//! - [`catalog`]: the bundled example operators used across tests and the CLI

pub mod bloch;
pub mod catalog;
pub mod error;
pub mod fermi;
pub mod linalg;
pub mod liouville;
pub mod localdata;
pub mod model;
pub mod polyalg;
pub mod positive;

pub use error::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Numeric policy shared by the analysis modules. Values are part of the
/// documented behavior of this crate; changing them changes reported verdicts.
pub mod tol {
    /// Relative singular-value threshold accepting a refined Fermi point.
    pub const TOL_FERMI: f64 = 1e-9;
    /// Refinement drives sigma_min below this times the grid scale.
    pub const TOL_REFINE: f64 = 1e-10;
    /// Refined points closer than this (mod 2 pi) are merged.
    pub const MERGE_RADIUS: f64 = 1e-6;
    /// Relative radius for clustering characteristic-polynomial roots at zero.
    pub const CLUSTER_RADIUS_REL: f64 = 1e-6;
    /// Relative threshold below which a Taylor coefficient counts as zero.
    pub const TOL_TAYLOR_ZERO: f64 = 1e-7;
    /// Largest homogeneous degree extracted by Taylor expansion.
    pub const L_MAX: usize = 8;
    /// Base step for the finite-difference Taylor stencils.
    pub const FD_BASE_H: f64 = 1e-2;
    /// Nodes on the circular contour for spectral projectors.
    pub const CONTOUR_NODES: usize = 64;
    /// Relative pivot threshold for rank/kernel decisions.
    pub const TOL_RANK: f64 = 1e-10;
    /// Sample count for randomized nonvanishing checks.
    pub const RANDOM_SAMPLES: usize = 50;
    /// |det| threshold for the randomized det(Q) != 0 check.
    pub const DET_NONZERO: f64 = 1e-10;
    /// max |det lambda_l0| threshold for the nondegeneracy flag.
    pub const NONDEG_THRESHOLD: f64 = 1e-8;
    /// Residual tolerance for verified solutions and order tests.
    pub const TOL_RESIDUAL: f64 = 1e-9;
    /// Residual tolerance for the power iteration.
    pub const TOL_POWER: f64 = 1e-10;
    /// Gradient tolerance ending the profile ascent.
    pub const TOL_ASCENT: f64 = 1e-8;
    /// Classification tolerance on Lambda(0) and Lambda_0.
    pub const TOL_CLASSIFY: f64 = 1e-8;
    /// Coordinate bound beyond which the profile ascent reports no maximum.
    pub const ASCENT_BRACKET_LIMIT: f64 = 1e2;
}
