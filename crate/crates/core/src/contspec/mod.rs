//! Strong time operators on absolutely continuous spectra.
//!
//! [`grid`] discretizes the free particle on a periodic box and checks the
//! weak Weyl relation for the Aharonov–Bohm operator. [`s0`] handles the
//! operator `Y` for multiplication by `λ` with a Gaussian spectral density.

pub mod grid;
pub mod quadrature;
pub mod s0;

pub use grid::{
    ab_apply, free_evolve, make_packet, strong_relation_residual, t_max, weak_weyl_residual, GridState,
};
pub use quadrature::{gauss_hermite, QuadratureRule};
pub use s0::{
    s0_apply, s0_strong_relation_check, s0_symmetry_residual, s0_symmetry_residual_with_order,
    AffineExpCombination, ExpCombination, Gaussian, SpectralDensity, StrongRelation,
};
