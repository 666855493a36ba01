//! Simulation core for a cross-cavity optical Stern-Gerlach setup.
//!
//! A beam of two-level atoms crosses two orthogonal cavities near the
//! superimposed nodes of their standing-wave modes and interacts resonantly
//! with both quantized fields at once. Each total-excitation subspace kicks
//! the atom onto a momentum ring of radius `sqrt(n) * lambda` photon recoils,
//! so the far-field deposition pattern images the joint photon statistics of
//! the two modes.
//!
//! The crate provides:
//!
//! - [`states`]: truncated Fock-space construction of coherent and
//!   squeezed-coherent cavity modes, their two-mode products, and the atomic
//!   superposition entering the cavities.
//! - [`bogoliubov`]: the rotation coefficients that diagonalize the two-mode
//!   coupling on each degenerate excitation subspace, evaluated stably at
//!   large photon number through log-factorials.
//! - [`kernel`] / [`distribution`]: the analytic momentum-space amplitudes
//!   and the assembly of the full 2D momentum distribution `W(p, phi)` on a
//!   polar grid, factorized as a finite Fourier series in the azimuth.
//! - [`oracle`]: independent brute-force references (direct 2D quadrature,
//!   dense matrix exponentials, a position-space evolution + FFT pipeline)
//!   treated as ground truth by the equivalence suites in [`suite`].
//! - [`lithography`]: the closed-form targeting map between cavity-field
//!   amplitudes and the deposition spot, its inverse (field planning), and
//!   peak diagnostics on computed grids.

pub mod bogoliubov;
pub mod distribution;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod lithography;
mod numeric;
pub mod oracle;
pub mod params;
pub mod states;
pub mod suite;

pub use error::{Error, Result};
pub use grid::{GridSpec, MomentumGrid};
pub use lithography::{FieldPlan, LithTarget, ScreenGeometry};
pub use params::SimParams;
pub use states::{AtomPrep, ModeCoeffs, TwoModeFockState};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
