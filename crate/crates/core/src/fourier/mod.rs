//! Fourier lattice arithmetic, the truncated Galerkin 2D Euler system and
//! spectral calculus on periodic grids.

mod field;
mod galerkin;
mod grid;
mod grid3d;
mod spectral;
mod wavevector;

pub use field::{CoefficientField, RealCosineField};
pub use galerkin::{
    coef_a, energy, energy_rate, enstrophy, enstrophy_rate, galerkin_rhs, integrate_galerkin,
    GalerkinRun,
};
pub use grid::{grid_bracket, invert_laplacian, GridField2D, InverseLaplacian};
pub use grid3d::{ScalarField3D, VectorField3D};
pub use spectral::dealias_cutoff;
pub use wavevector::{class_members, zeta, ClassIndex, WaveVector};
