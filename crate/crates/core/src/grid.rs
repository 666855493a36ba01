//! Polar momentum grids and the measures defined on them.

use crate::error::{Error, Result};
use crate::numeric::Kahan;
use crate::params::SimParams;

/// Requested polar grid. `p_max = None` resolves to
/// max(1.2 sqrt(N_max) lambda, 25 / (2 k dr)) so both the outermost ring and
/// the central peak tail are covered.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_radial: usize,
    pub n_azimuthal: usize,
    pub p_max: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_radial: 256,
            n_azimuthal: 256,
            p_max: None,
        }
    }
}

impl GridSpec {
    pub fn with_p_max(n_radial: usize, n_azimuthal: usize, p_max: f64) -> Self {
        Self {
            n_radial,
            n_azimuthal,
            p_max: Some(p_max),
        }
    }

    pub fn resolve_p_max(&self, n_total_max: usize, params: &SimParams) -> f64 {
        self.p_max.unwrap_or_else(|| {
            let rings = 1.2 * (n_total_max as f64).sqrt() * params.lambda;
            let pinhole = 25.0 * params.radial_decay();
            rings.max(pinhole)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_radial < 2 || self.n_azimuthal < 4 {
            return Err(Error::InvalidParam(format!(
                "grid too small: {} x {}",
                self.n_radial, self.n_azimuthal
            )));
        }
        if let Some(p) = self.p_max {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::InvalidParam(format!("p_max must be > 0, got {p}")));
            }
        }
        Ok(())
    }

    /// Radial samples 0..=p_max and azimuthal samples on [0, 2 pi).
    pub fn axes(&self, p_max: f64) -> (Vec<f64>, Vec<f64>) {
        let p = (0..self.n_radial)
            .map(|i| p_max * i as f64 / (self.n_radial - 1) as f64)
            .collect();
        let phi = (0..self.n_azimuthal)
            .map(|j| std::f64::consts::TAU * j as f64 / self.n_azimuthal as f64)
            .collect();
        (p, phi)
    }
}

/// Provenance and normalization bookkeeping attached to a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeta {
    pub lambda: f64,
    pub k_delta_r: f64,
    pub eps_trunc: f64,
    pub n_total_max: usize,
    /// Probability mass the truncated field state carries.
    pub captured_weight: f64,
    /// Trapezoidal integral of W p dp dphi over the stored grid.
    pub integral: f64,
    pub field_desc: String,
    pub atom_desc: String,
}

/// Momentum distribution W on a polar grid, stored row-major with the radial
/// index outermost.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    pub p: Vec<f64>,
    pub phi: Vec<f64>,
    pub w: Vec<f64>,
    pub meta: GridMeta,
}

impl MomentumGrid {
    #[inline]
    pub fn value(&self, i_p: usize, j_phi: usize) -> f64 {
        self.w[i_p * self.phi.len() + j_phi]
    }

    pub fn n_radial(&self) -> usize {
        self.p.len()
    }

    pub fn n_azimuthal(&self) -> usize {
        self.phi.len()
    }

    pub fn p_max(&self) -> f64 {
        *self.p.last().unwrap()
    }

    /// Integral of f(p, phi) p dp dphi: trapezoid radially, exact periodic
    /// rectangle rule azimuthally.
    pub fn integrate(&self, f: impl Fn(usize, usize, f64) -> f64) -> f64 {
        let d_phi = std::f64::consts::TAU / self.phi.len() as f64;
        let mut acc = Kahan::new();
        for i in 0..self.p.len() {
            let mut ring = Kahan::new();
            for j in 0..self.phi.len() {
                ring.add(f(i, j, self.value(i, j)));
            }
            let radial_weight = if i == 0 || i + 1 == self.p.len() { 0.5 } else { 1.0 };
            let dp = self.p[1] - self.p[0];
            acc.add(ring.value() * d_phi * self.p[i] * radial_weight * dp);
        }
        acc.value()
    }

    /// Total probability on the grid.
    pub fn total(&self) -> f64 {
        self.integrate(|_, _, w| w)
    }

    /// Angular average of W at each radius (the radial profile whose local
    /// maxima sit on the deflection rings).
    pub fn radial_marginal(&self) -> Vec<f64> {
        let inv = 1.0 / self.phi.len() as f64;
        (0..self.p.len())
            .map(|i| {
                let mut acc = Kahan::new();
                for j in 0..self.phi.len() {
                    acc.add(self.value(i, j));
                }
                acc.value() * inv
            })
            .collect()
    }

    /// Probability per deflection ring: band n covers radii between the
    /// midpoints of sqrt(n-1)..sqrt(n) and sqrt(n)..sqrt(n+1) times lambda.
    pub fn ring_weights(&self, lambda: f64, n_rings: usize) -> Vec<f64> {
        let boundary =
            |n: usize| -> f64 { 0.5 * ((n as f64).sqrt() + ((n + 1) as f64).sqrt()) * lambda };
        let mut weights = vec![0.0; n_rings + 1];
        let d_phi = std::f64::consts::TAU / self.phi.len() as f64;
        let dp = self.p[1] - self.p[0];
        for i in 0..self.p.len() {
            let radius = self.p[i];
            let band = (0..=n_rings)
                .find(|&n| radius < boundary(n))
                .unwrap_or(n_rings);
            let radial_weight = if i == 0 || i + 1 == self.p.len() { 0.5 } else { 1.0 };
            let mut ring = Kahan::new();
            for j in 0..self.phi.len() {
                ring.add(self.value(i, j));
            }
            weights[band] += ring.value() * d_phi * radius * radial_weight * dp;
        }
        weights
    }

    /// L1 distance integral |W - other| p dp dphi; axes must match.
    pub fn l1_distance(&self, other: &MomentumGrid) -> Result<f64> {
        if self.p.len() != other.p.len()
            || self.phi.len() != other.phi.len()
            || self
                .p
                .iter()
                .zip(&other.p)
                .any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(Error::InvalidParam(
                "grids have mismatched axes; resample first".into(),
            ));
        }
        Ok(self.integrate(|i, j, w| (w - other.value(i, j)).abs()))
    }

    /// Index of the radial sample closest to `p`.
    pub fn radial_index(&self, p: f64) -> usize {
        let dp = self.p[1] - self.p[0];
        ((p / dp).round() as usize).min(self.p.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_grid(value: f64, p_max: f64, n_p: usize, n_phi: usize) -> MomentumGrid {
        let spec = GridSpec::with_p_max(n_p, n_phi, p_max);
        let (p, phi) = spec.axes(p_max);
        MomentumGrid {
            w: vec![value; n_p * n_phi],
            p,
            phi,
            meta: GridMeta {
                lambda: 1.0,
                k_delta_r: 0.6,
                eps_trunc: 1e-6,
                n_total_max: 0,
                captured_weight: 1.0,
                integral: 0.0,
                field_desc: String::new(),
                atom_desc: String::new(),
            },
        }
    }

    #[test]
    fn flat_disc_integrates_to_area() {
        // integral of 1 * p dp dphi over p <= R is pi R^2
        let g = flat_grid(1.0, 2.0, 401, 64);
        let expect = std::f64::consts::PI * 4.0;
        assert!((g.total() - expect).abs() < 1e-3 * expect);
    }

    #[test]
    fn ring_weights_partition_total() {
        let g = flat_grid(0.3, 3.0, 301, 32);
        let w = g.ring_weights(1.0, 8);
        let sum: f64 = w.iter().sum();
        assert!((sum - g.total()).abs() < 1e-9);
    }

    #[test]
    fn default_p_max_covers_rings_and_pinhole() {
        let params = SimParams::new(4.0, std::f64::consts::TAU / 10.0, 1e-6).unwrap();
        let spec = GridSpec::default();
        let p = spec.resolve_p_max(16, &params);
        assert!(p >= 1.2 * 4.0 * 4.0);
        let p0 = spec.resolve_p_max(0, &params);
        assert!(p0 >= 25.0 * params.radial_decay());
    }
}
