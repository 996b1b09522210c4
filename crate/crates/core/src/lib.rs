//! Spectral analysis of symmetric quadratic Hamiltonians through their
//! adjoint (regular) matrix representation.
//!
//! A Hamiltonian `H = Σ γ_ij O_i O_j` over the canonical basis
//! `(x_1..x_K, p_1..p_K)` is represented by the `2K x 2K` matrix `H` with
//! `[H, O_i] = Σ_j H_ji O_j`. That matrix is pseudo-Hermitian with respect to
//! the commutator table `U`, so its eigenvalues (the natural frequencies) are
//! real or come in conjugate pairs. The crate builds `H` two ways, checks the
//! structural identities, classifies the spectrum as real, broken or
//! exceptional, maps phase boundaries and cross-checks everything against the
//! classical equations of motion.
//!
//! ```
//! use quadham::{catalog::{self, ModelId}, spectra, hamparse::ParamBindings};
//!
//! let params = ParamBindings::new().with("alpha", 1.0).unwrap().with("beta", 1.0).unwrap();
//! let (_, h) = catalog::instantiate(ModelId::Toy1d, &params).unwrap();
//! let s = spectra::eigen(&h).unwrap();
//! assert!((s.values[1].re - 3f64.sqrt()).abs() < 1e-12);
//! ```

pub mod adjrep;
pub mod catalog;
pub mod dynamics;
pub mod eig;
pub mod hamparse;
pub mod opalg;
pub mod report;
pub mod spectra;
pub mod sweep;
pub mod tolerances;

pub use nalgebra::{DMatrix, DVector};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;

pub use adjrep::{AdjointMatrix, PseudoHermReport, UMatrix};
pub use catalog::{ModelId, ModelSpec};
pub use hamparse::{GammaMatrix, ParamBindings};
pub use opalg::{OpSymbol, OperatorPoly};
pub use spectra::{Phase, PhaseLabel, Spectrum};
pub use sweep::{BoundaryResult, SweepAxis, SweepGrid};
pub use tolerances::Tolerances;

/// Largest entry magnitude.
pub fn max_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
