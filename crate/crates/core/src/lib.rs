//! Biquadratic energy of point configurations on the sphere, with the
//! equilibrium machinery needed to show that the triangular bipyramid is the
//! unique minimizer for five points on `S^2`.

pub mod cauchy;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod linalg;
pub mod potential;
pub mod search;
pub mod special_case;
pub mod spectral;
pub mod verify;

pub use config::{
    energy, fp, gram, octahedron, random_config, tbp, tetrahedron, Configuration, GramMatrix,
    InnerProductMultiset,
};
pub use equilibrium::{residual_biquadratic, residual_general, EquilibriumReport};
pub use error::{Error, Result};
pub use potential::Potential;
pub use spectral::{normalize, CaseLabel, SpectralData};
