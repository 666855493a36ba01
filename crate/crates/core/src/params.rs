//! Run-level physical and bookkeeping parameters.

use crate::error::{Error, Result};

/// Default truncation tolerance for small states.
pub const DEFAULT_EPS_TRUNC: f64 = 1e-6;
/// Relaxed tolerance permitted for large states (mean photon number >~ 20)
/// to bound runtime; reports always state the captured weight.
pub const EPS_TRUNC_LARGE: f64 = 1e-4;
/// Default cap on predicted kernel term count.
pub const DEFAULT_TERM_BUDGET: u64 = 2_000_000_000_000;

/// Dimensionless parameters of a simulation run.
///
/// `lambda` is the atom-field interaction parameter (one unit of it deflects
/// the single-photon branch by one photon recoil); `k_delta_r` is the pinhole
/// radius in units of the inverse mode wavenumber. The linearized-node
/// treatment assumes the pinhole is small against the wavelength, so
/// `k_delta_r > 1` is flagged as out of regime but not rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Interaction parameter (dimensionless).
    pub lambda: f64,
    /// Pinhole scale k*dr (dimensionless).
    pub k_delta_r: f64,
    /// Truncation tolerance for captured probability.
    pub eps_trunc: f64,
    /// Optional override of the total-excitation cutoff taken from the field
    /// state; the effective cutoff is the minimum of the two.
    pub n_total_max: Option<usize>,
    /// Cap on the predicted kernel term count; `None` uses the default.
    pub term_budget: Option<u64>,
}

impl SimParams {
    pub fn new(lambda: f64, k_delta_r: f64, eps_trunc: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParam(format!("lambda must be > 0, got {lambda}")));
        }
        if !(k_delta_r > 0.0) || !k_delta_r.is_finite() {
            return Err(Error::InvalidParam(format!(
                "k_delta_r must be > 0, got {k_delta_r}"
            )));
        }
        if !(eps_trunc > 0.0 && eps_trunc < 1.0) {
            return Err(Error::InvalidParam(format!(
                "eps_trunc must be in (0, 1), got {eps_trunc}"
            )));
        }
        Ok(Self {
            lambda,
            k_delta_r,
            eps_trunc,
            n_total_max: None,
            term_budget: None,
        })
    }

    /// Radial decay constant of the pinhole amplitude, a = 1/(2 k dr).
    #[inline]
    pub fn radial_decay(&self) -> f64 {
        0.5 / self.k_delta_r
    }

    /// Warning text when the pinhole is not small against the wavelength.
    pub fn regime_warning(&self) -> Option<String> {
        (self.k_delta_r > 1.0).then(|| {
            format!(
                "k_delta_r = {:.4} > 1: the linearized-node (Stern-Gerlach) regime \
                 assumes the pinhole is small against the mode wavelength",
                self.k_delta_r
            )
        })
    }

    pub fn term_budget(&self) -> u64 {
        self.term_budget.unwrap_or(DEFAULT_TERM_BUDGET)
    }
}
