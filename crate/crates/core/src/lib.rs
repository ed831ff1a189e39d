//! Time operators for self-adjoint operators with known spectra.
//!
//! The crate builds finite truncations of three kinds of time operators and
//! checks, at truncation, every identity that survives truncation exactly:
//!
//! * [`timeop`]: Galapon-type matrices `i/(E_n - E_m)` on simple channels of a
//!   purely discrete spectrum, assembled into direct sums. The commutator
//!   `[H, T] = -i` holds exactly on differences of eigenvectors.
//! * [`uwform`]: ultra-weak time operators, i.e. sesquilinear forms built from
//!   the time operator of `H^{-1}`, for spectra accumulating at zero, and their
//!   `f(H)` variants.
//! * [`contspec`]: strong time operators on the continuous side, namely the
//!   Aharonov-Bohm operator of the free Hamiltonian on a periodic grid and the
//!   operator `Y = i d/dλ + (i/2) ρ'/ρ` for a Gaussian spectral density.
//!
//! Spectra come from [`spectra`]; degenerate spectra are split into simple,
//! summable channels by [`decompose`].

pub mod contspec;
pub mod decompose;
mod error;
pub mod linalg;
pub mod sampling;
pub mod spectra;
pub mod timeop;
pub mod uwform;

pub use error::{Error, Result};
